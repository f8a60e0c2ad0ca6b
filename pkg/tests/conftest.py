"""Shared random-instance builders for the test suite."""

import random

from lclsim.graph import PortedGraph, edge_key, gen_regular_tree


def random_tree(n, delta, seed):
    """Random attachment tree with maximum degree delta, sequential ports."""
    rng = random.Random(seed)
    deg = [0] * n
    edges = []
    open_nodes = [0]
    for v in range(1, n):
        u = rng.choice(open_nodes)
        edges.append((u, v, deg[u], 0))
        deg[u] += 1
        deg[v] = 1
        if deg[u] >= delta:
            open_nodes.remove(u)
        open_nodes.append(v)
    return PortedGraph.from_edges(n, edges, delta=delta, meta={"center": 0})


def random_graph(n, delta, seed, extra_edges=None):
    """Random connected graph with maximum degree delta: a random tree plus
    extra edges wherever degrees allow."""
    rng = random.Random(seed)
    deg = [0] * n
    pairs = set()
    edges = []
    open_nodes = [0]
    for v in range(1, n):
        u = rng.choice(open_nodes)
        edges.append([u, v, deg[u], 0])
        pairs.add(edge_key(u, v))
        deg[u] += 1
        deg[v] = 1
        if deg[u] >= delta:
            open_nodes.remove(u)
        open_nodes.append(v)
    if extra_edges is None:
        extra_edges = max(1, n // 8)
    tries = 0
    added = 0
    while added < extra_edges and tries < 50 * extra_edges:
        tries += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v or edge_key(u, v) in pairs:
            continue
        if deg[u] >= delta or deg[v] >= delta:
            continue
        edges.append([u, v, deg[u], deg[v]])
        pairs.add(edge_key(u, v))
        deg[u] += 1
        deg[v] += 1
        added += 1
    return PortedGraph.from_edges(n, [tuple(e) for e in edges], delta=delta,
                                  meta={"center": 0})


def pruned_oriented_tree(delta, radius, seed, keep_fraction=0.7):
    """Random subtree of the balanced oriented tree: repeatedly drop leaves;
    orientation labels survive on the remaining edges."""
    g = gen_regular_tree(delta, radius)
    rng = random.Random(seed)
    alive = set(range(g.n))
    target = max(delta + 2, int(g.n * keep_fraction))
    leaves = [v for v in range(g.n) if g.degree(v) == 1]
    while len(alive) > target and leaves:
        v = leaves.pop(rng.randrange(len(leaves)))
        if v == 0 or v not in alive:
            continue
        nbrs = [u for u in g.adjacent(v) if u in alive]
        if len(nbrs) != 1:
            continue
        alive.discard(v)
        u = nbrs[0]
        if sum(1 for w in g.adjacent(u) if w in alive) == 1:
            leaves.append(u)
    remap = {v: i for i, v in enumerate(sorted(alive))}
    edges = []
    for v in sorted(alive):
        for u, mp, up, d, s in g.half_edges(v):
            if u in alive and v < u:
                edges.append((remap[v], remap[u], mp, up, d, s))
    return PortedGraph.from_edges(len(alive), edges, delta=delta,
                                  meta={"center": 0, "oriented": True})


def relabeled(g, seed):
    """Same graph with permuted node ids (ports and orientation kept)."""
    rng = random.Random(seed)
    perm = list(range(g.n))
    rng.shuffle(perm)
    edges = []
    for v in range(g.n):
        for u, mp, up, d, s in g.half_edges(v):
            if v < u:
                edges.append((perm[v], perm[u], mp, up, d, s))
    return PortedGraph.from_edges(g.n, edges, delta=g.delta), perm
