"""Port-numbered graphs, instance generators and irregularity geometry.

A :class:`PortedGraph` is a simple, undirected, connected graph whose
half-edges carry port numbers (unique per node, in ``[0, delta)``) and,
optionally, a consistent orientation: each oriented edge belongs to a
dimension ``d in 1..k`` and is labeled ``(d, +)`` at one endpoint and
``(d, -)`` at the other.  For ``delta = 4`` the four direction slots
``(1,+), (1,-), (2,+), (2,-)`` play the roles right/left/up/down.

Graphs are immutable after construction; every mutating operation builds a
new graph.  Storage is flat ``array`` CSR so that trees with millions of
nodes stay cheap.
"""

from __future__ import annotations

import json
from array import array
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInstanceError, InvalidParameterError

MAX_GENERATED_NODES = 10**7
MAX_DELTA = 16

FORMAT_NAME = "ported-graph"
FORMAT_VERSION = 1


def edge_key(u, v):
    """Canonical dictionary key for the undirected edge {u, v}."""
    return (u, v) if u < v else (v, u)


class PortedGraph:
    """Immutable port-numbered graph, optionally edge-oriented."""

    __slots__ = ("n", "delta", "meta",
                 "_indptr", "_nbr", "_my_port", "_nbr_port", "_dim", "_sign")

    def __init__(self, n, delta, indptr, nbr, my_port, nbr_port, dim, sign, meta=None):
        self.n = n
        self.delta = delta
        self.meta = dict(meta or {})
        self._indptr = indptr
        self._nbr = nbr
        self._my_port = my_port
        self._nbr_port = nbr_port
        self._dim = dim
        self._sign = sign

    # -- construction ---------------------------------------------------

    @classmethod
    def from_edges(cls, n, edges, delta=None, meta=None, validate=True):
        """Build from ``(u, v, port_u, port_v[, dim, sign])`` tuples.

        ``dim`` is 1-based; ``dim = 0`` (or a 4-tuple) means unoriented.
        ``sign`` is the sign of the edge at ``u``; the edge carries the
        opposite sign at ``v``.
        """
        deg = [0] * n
        for e in edges:
            deg[e[0]] += 1
            deg[e[1]] += 1
        if delta is None:
            delta = max(deg, default=0)
        indptr = array("i", [0] * (n + 1))
        for v in range(n):
            indptr[v + 1] = indptr[v] + deg[v]
        m2 = indptr[n]
        nbr = array("i", [0] * m2)
        my_port = array("b", [0] * m2)
        nbr_port = array("b", [0] * m2)
        dim_a = array("b", [0] * m2)
        sign_a = array("b", [0] * m2)
        fill = [0] * n
        for e in edges:
            if len(e) == 4:
                u, v, pu, pv = e
                d, s = 0, 0
            else:
                u, v, pu, pv, d, s = e
            iu = indptr[u] + fill[u]
            iv = indptr[v] + fill[v]
            fill[u] += 1
            fill[v] += 1
            nbr[iu], my_port[iu], nbr_port[iu], dim_a[iu], sign_a[iu] = v, pu, pv, d, s
            nbr[iv], my_port[iv], nbr_port[iv], dim_a[iv], sign_a[iv] = u, pv, pu, d, -s
        g = cls(n, delta, indptr, nbr, my_port, nbr_port, dim_a, sign_a, meta)
        g._sort_by_port()
        if validate:
            g.validate()
        return g

    def _sort_by_port(self):
        # half-edge slot order = own-port order, so "smallest port" scans
        # are just slot order
        for v in range(self.n):
            lo, hi = self._indptr[v], self._indptr[v + 1]
            if hi - lo <= 1:
                continue
            if all(self._my_port[i] < self._my_port[i + 1] for i in range(lo, hi - 1)):
                continue
            rows = sorted(range(lo, hi), key=lambda i: self._my_port[i])
            for name in ("_nbr", "_my_port", "_nbr_port", "_dim", "_sign"):
                arr = getattr(self, name)
                vals = [arr[i] for i in rows]
                for j, i in enumerate(range(lo, hi)):
                    arr[i] = vals[j]

    # -- accessors ------------------------------------------------------

    def degree(self, v):
        return self._indptr[v + 1] - self._indptr[v]

    def adjacent(self, v):
        """Neighbor ids in own-port order (no port data; cheap)."""
        return self._nbr[self._indptr[v]:self._indptr[v + 1]].tolist()

    def neighbors(self, v):
        """List of ``(u, my_port, u_port)`` in increasing own-port order."""
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return [(self._nbr[i], self._my_port[i], self._nbr_port[i])
                for i in range(lo, hi)]

    def half_edges(self, v):
        """List of ``(u, my_port, u_port, dim, sign)``; sign as seen at v."""
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return [(self._nbr[i], self._my_port[i], self._nbr_port[i],
                 self._dim[i], self._sign[i]) for i in range(lo, hi)]

    def neighbor_by_port(self, v, port):
        for i in range(self._indptr[v], self._indptr[v + 1]):
            if self._my_port[i] == port:
                return self._nbr[i]
        raise InvalidParameterError(f"node {v} has no port {port}")

    def port_toward(self, v, u):
        for i in range(self._indptr[v], self._indptr[v + 1]):
            if self._nbr[i] == u:
                return self._my_port[i]
        raise InvalidParameterError(f"{u} is not adjacent to {v}")

    @property
    def oriented(self):
        return bool(self.meta.get("oriented")) or any(self._dim)

    def orientation_at(self, v, u):
        """``(dim, sign)`` of edge {v,u} as seen at v, or ``None``."""
        for i in range(self._indptr[v], self._indptr[v + 1]):
            if self._nbr[i] == u:
                if self._dim[i] == 0:
                    return None
                return (self._dim[i], self._sign[i])
        raise InvalidParameterError(f"{u} is not adjacent to {v}")

    def neighbor_by_direction(self, v, dim, sign):
        """Neighbor across the ``(dim, sign)`` edge of v, or ``None``."""
        for i in range(self._indptr[v], self._indptr[v + 1]):
            if self._dim[i] == dim and self._sign[i] == sign:
                return self._nbr[i]
        return None

    def edges(self):
        for v in range(self.n):
            for i in range(self._indptr[v], self._indptr[v + 1]):
                if v < self._nbr[i]:
                    yield (v, self._nbr[i])

    def edge_count(self):
        return self._indptr[self.n] // 2

    # -- invariants -----------------------------------------------------

    def validate(self):
        """Full edge scan of the structural invariants; raises on violation."""
        half_by_pair = {}
        for v in range(self.n):
            half = self.half_edges(v)
            ports = [h[1] for h in half]
            if len(set(ports)) != len(ports):
                raise InvalidInstanceError(f"duplicate port at node {v}")
            if any(p < 0 or p >= max(self.delta, 1) for p in ports):
                raise InvalidInstanceError(f"port out of [0,delta) at node {v}")
            if len(half) > self.delta:
                raise InvalidInstanceError(f"degree of {v} exceeds delta")
            nbrs = [h[0] for h in half]
            if v in nbrs:
                raise InvalidInstanceError(f"self-loop at {v}")
            if len(set(nbrs)) != len(nbrs):
                raise InvalidInstanceError(f"parallel edges at {v}")
            dirs = set()
            for u, mp, up, d, s in half:
                half_by_pair[(v, u)] = (mp, up, d, s)
                if d:
                    if (d, s) in dirs:
                        raise InvalidInstanceError(
                            f"node {v} has two ({d},{s:+d}) edges")
                    dirs.add((d, s))
        for (v, u), (mp, up, d, s) in half_by_pair.items():
            back = half_by_pair.get((u, v))
            if back is None:
                raise InvalidInstanceError(f"edge {v}-{u} missing at {u}")
            bmp, bup, bd, bs = back
            if bmp != up or bup != mp:
                raise InvalidInstanceError(f"port mismatch on edge {v}-{u}")
            if bd != d or (d and bs != -s):
                raise InvalidInstanceError(f"orientation mismatch on edge {v}-{u}")
        if self.n > 0 and len(bfs_distances(self, 0)) != self.n:
            raise InvalidInstanceError("graph is not connected")
        return True

    # -- serialization --------------------------------------------------

    def to_json_obj(self):
        edges = []
        for v in range(self.n):
            for u, mp, up, d, s in self.half_edges(v):
                if v < u:
                    edges.append([v, u, mp, up, d, s])
        edges.sort()
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "n": self.n,
            "delta": self.delta,
            "edges": edges,
            "meta": self.meta,
        }

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(dumps_canonical(self.to_json_obj()))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            obj = json.load(fh)
        if obj.get("format") != FORMAT_NAME or obj.get("version") != FORMAT_VERSION:
            raise InvalidParameterError(f"not a {FORMAT_NAME} v{FORMAT_VERSION} file")
        return cls.from_edges(obj["n"], [tuple(e) for e in obj["edges"]],
                              delta=obj["delta"], meta=obj.get("meta"))


def dumps_canonical(obj):
    """Canonical JSON used wherever a byte-stable re-save is promised."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# BFS helpers
# ---------------------------------------------------------------------------


def bfs_distances(g, src, radius=None):
    """``{node: dist}`` for the ball of the given radius (whole graph if None)."""
    dist = {src: 0}
    q = deque([src])
    while q:
        v = q.popleft()
        if radius is not None and dist[v] >= radius:
            continue
        dv = dist[v]
        for u in g.adjacent(v):
            if u not in dist:
                dist[u] = dv + 1
                q.append(u)
    return dist


def distance(g, u, v):
    d = bfs_distances(g, u)
    if v not in d:
        raise InvalidParameterError(f"{v} unreachable from {u}")
    return d[v]


def ball_is_leaf_free(g, v, radius):
    return all(g.degree(u) > 1 for u in bfs_distances(g, v, radius))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _check_size(n):
    if n > MAX_GENERATED_NODES:
        raise InvalidParameterError(f"generator bounded to {MAX_GENERATED_NODES} nodes")


def direction_index(dim, sign):
    """Direction slot of ``(dim, sign)``: (1,+)=0, (1,-)=1, (2,+)=2, ..."""
    return 2 * (dim - 1) + (0 if sign > 0 else 1)


def direction_of_index(idx):
    return (idx // 2 + 1, +1 if idx % 2 == 0 else -1)


def _balanced_size(delta, radius):
    n = 1
    shell = delta
    for _ in range(radius):
        n += shell
        shell *= delta - 1
    return n


def gen_regular_tree(delta, radius, meta=None):
    """Balanced delta-regular tree of the given depth with a consistent
    orientation over ``delta/2`` dimensions; ports equal direction slots.

    Node 0 is the designated center.  Interior nodes have one ``(d,+)``
    and one ``(d,-)`` edge per dimension; depth-``radius`` nodes are leaves.
    Node ids follow breadth-first order, so the construction vectorizes
    level by level (trees in the millions of nodes stay cheap).
    """
    if delta <= 0 or delta % 2 != 0:
        raise InvalidParameterError("delta must be a positive even integer")
    if delta > MAX_DELTA:
        raise InvalidParameterError(f"delta bounded to {MAX_DELTA}")
    if radius < 1:
        raise InvalidParameterError("radius must be >= 1")
    n = _balanced_size(delta, radius)
    _check_size(n)

    parent = np.zeros(n, dtype=np.int32)
    pdir = np.zeros(n, dtype=np.int8)  # direction slot at the parent
    level_start = [0, 1]
    parent[1:1 + delta] = 0
    pdir[1:1 + delta] = np.arange(delta, dtype=np.int8)
    size = delta
    start = 1
    for _ in range(1, radius):
        level = np.arange(start, start + size, dtype=np.int32)
        indir = pdir[level] ^ 1
        dirs = np.tile(np.arange(delta, dtype=np.int8), (size, 1))
        mask = dirs != indir[:, None]
        child_dirs = dirs[mask]
        parents_flat = np.repeat(level, delta - 1)
        nxt_start = start + size
        nxt_size = size * (delta - 1)
        ids = np.arange(nxt_start, nxt_start + nxt_size, dtype=np.int32)
        parent[ids] = parents_flat
        pdir[ids] = child_dirs
        start, size = nxt_start, nxt_size
        level_start.append(start)
    leaf_start = start

    deg = np.full(n, delta, dtype=np.int64)
    deg[leaf_start:] = 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    m2 = int(indptr[n])
    nbr = np.zeros(m2, dtype=np.int32)
    my_port = np.zeros(m2, dtype=np.int8)
    nbr_port = np.zeros(m2, dtype=np.int8)
    dim_a = np.zeros(m2, dtype=np.int8)
    sign_a = np.zeros(m2, dtype=np.int8)

    u = np.arange(1, n, dtype=np.int64)
    v = parent[u].astype(np.int64)
    d = pdir[u].astype(np.int64)
    slot_v = indptr[v] + d
    rank_u = np.where(u >= leaf_start, 0, d ^ 1)
    slot_u = indptr[u] + rank_u
    dim_val = (d // 2 + 1).astype(np.int8)
    sign_v = np.where(d % 2 == 0, 1, -1).astype(np.int8)
    nbr[slot_v] = u
    my_port[slot_v] = d
    nbr_port[slot_v] = d ^ 1
    dim_a[slot_v] = dim_val
    sign_a[slot_v] = sign_v
    nbr[slot_u] = v
    my_port[slot_u] = d ^ 1
    nbr_port[slot_u] = d
    dim_a[slot_u] = dim_val
    sign_a[slot_u] = -sign_v

    return PortedGraph(
        n, delta,
        array("i", indptr.astype(np.int32).tobytes()),
        array("i", nbr.tobytes()),
        array("b", my_port.tobytes()),
        array("b", nbr_port.tobytes()),
        array("b", dim_a.tobytes()),
        array("b", sign_a.tobytes()),
        meta=dict(meta or {}, center=0, oriented=True))


def gen_balanced_tree(delta, radius, meta=None):
    """Unoriented balanced delta-regular tree (any delta >= 2); parent at
    port 0 for non-root nodes, children in increasing port order."""
    if delta < 2:
        raise InvalidParameterError("delta must be >= 2")
    if delta > MAX_DELTA:
        raise InvalidParameterError(f"delta bounded to {MAX_DELTA}")
    if radius < 1:
        raise InvalidParameterError("radius must be >= 1")
    _check_size(_balanced_size(delta, radius))
    edges = []
    frontier = [(0, 0)]  # (node, first free port)
    next_id = 1
    for _ in range(radius):
        nxt = []
        for v, port0 in frontier:
            for p in range(port0, delta):
                u = next_id
                next_id += 1
                edges.append((v, u, p, 0))
                nxt.append((u, 1))
        frontier = nxt
    return PortedGraph.from_edges(next_id, edges, delta=delta,
                                  meta=dict(meta or {}, center=0), validate=False)


def gen_cycle(n, meta=None):
    """n-cycle with ports 0/1 per node (port 0 toward the successor)."""
    if n < 3:
        raise InvalidParameterError("cycle needs n >= 3")
    _check_size(n)
    edges = [(v, (v + 1) % n, 0, 1) for v in range(n)]
    return PortedGraph.from_edges(n, edges, delta=2, meta=meta, validate=False)


def gen_symlower_pair(delta, r):
    """Matched tree pair whose center views agree up to radius r - 2.

    ``T`` is the balanced delta-regular tree with the center at distance
    ``r`` from every leaf.  ``T'`` agrees with ``T`` except that every node
    at distance ``r - 1`` loses its largest-port leaf child, which is
    re-attached (at port 1) under that node's smallest-port remaining leaf.
    Node and edge counts match.
    """
    if delta < 3:
        raise InvalidParameterError("delta must be >= 3")
    if r < 2:
        raise InvalidParameterError("r must be >= 2")
    t_graph = gen_balanced_tree(delta, r)
    dist = bfs_distances(t_graph, 0)
    moved = {}  # detached leaf -> host leaf
    for u in range(t_graph.n):
        if dist[u] != r - 1:
            continue
        kids = sorted((mp, w) for w, mp, _ in t_graph.neighbors(u) if dist[w] == r)
        moved[kids[-1][1]] = kids[0][1]
    edges = []
    for v in range(t_graph.n):
        for u, mp, up in t_graph.neighbors(v):
            if v >= u:
                continue
            if u in moved and dist[u] == r:
                continue
            if v in moved and dist[v] == r:
                continue
            edges.append((v, u, mp, up))
    for leaf, host in moved.items():
        edges.append((host, leaf, 1, 0))
    t_prime = PortedGraph.from_edges(t_graph.n, edges, delta=delta,
                                     meta={"center": 0})
    return t_graph, t_prime, 0


def induced_subgraph(g, nodes):
    """Induced subgraph on ``nodes`` with compact ids; ports and orientation
    labels carry over.  Returns ``(subgraph, old-to-new id map)``."""
    order = sorted(nodes)
    remap = {v: i for i, v in enumerate(order)}
    edges = []
    for v in order:
        for u, mp, up, d, s in g.half_edges(v):
            if u in remap and v < u:
                edges.append((remap[v], remap[u], mp, up, d, s))
    return PortedGraph.from_edges(len(order), edges, delta=g.delta), remap


# ---------------------------------------------------------------------------
# Irregularities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Irregularity:
    """A low-degree node or an all-full-degree cycle, with its effective
    distance from the query node (cycle distance adds the detour term
    ell(C) = |C|/2 for even, floor(|C|/2)+1 for odd cycles)."""

    kind: str                 # "low-degree" | "cycle"
    location: object          # node id, or canonical tuple of cycle nodes
    effective_distance: int


def cycle_detour(length):
    if length % 2 == 0:
        return length // 2
    return length // 2 + 1


def canonical_cycle(nodes):
    """Rotation/reflection-canonical tuple for a cyclic node sequence."""
    k = len(nodes)
    best = None
    seq = list(nodes)
    for direction in (seq, seq[::-1]):
        for s in range(k):
            cand = tuple(direction[s:] + direction[:s])
            if best is None or cand < best:
                best = cand
    return best


def _full_degree_cycles(g, nodes, max_len):
    """All simple cycles of full-degree nodes within ``nodes``, as canonical
    tuples.  DFS anchored at each cycle's smallest node; traversal restricted
    to degree-delta nodes keeps this cheap on bounded-degree balls."""
    full = sorted(v for v in nodes if g.degree(v) == g.delta)
    full_set = set(full)
    cycles = set()
    for start in full:
        stack = [(start, [start])]
        while stack:
            v, path = stack.pop()
            for u in g.adjacent(v):
                if u not in full_set or u < start:
                    continue
                if u == start and len(path) >= 3 and len(path) <= max_len:
                    cycles.add(canonical_cycle(path))
                    continue
                if u in path or len(path) >= max_len:
                    continue
                stack.append((u, path + [u]))
    return cycles


def _cycles_in_ball(g, dist, max_len, cache=None):
    nodes = set(dist)
    m = sum(1 for v in nodes for u in g.adjacent(v) if u in nodes and u < v)
    if m < len(nodes):  # the ball is a tree
        return ()
    key = None
    if cache is not None:
        key = (frozenset(nodes), max_len)
        hit = cache.get(key)
        if hit is not None:
            return hit
    cycles = tuple(_full_degree_cycles(g, nodes, max_len))
    if cache is not None:
        cache[key] = cycles
    return cycles


def ball_irregularities(g, v, r, ids=None, _cycle_cache=None):
    """Best low-degree irregularity and best cycle irregularity within
    effective distance r of v, as ``(key, Irregularity)`` pairs (or None).

    Low-degree keys order by (distance, degree, identifier); cycle keys by
    (effective distance, maximum identifier, identifier sequence).
    """
    if ids is None:
        ids = range(g.n)
    dist = bfs_distances(g, v, r)
    low = None
    for u, d in dist.items():
        if g.degree(u) < g.delta:
            key = (d, g.degree(u), ids[u])
            if low is None or key < low[0]:
                low = (key, Irregularity("low-degree", u, d))
    best_cycle = None
    # a qualifying cycle lies entirely inside the ball: its farthest node is
    # at most min-dist + floor(|C|/2) <= r from v
    for cyc in _cycles_in_ball(g, dist, 2 * r, _cycle_cache):
        eff = min(dist[u] for u in cyc) + cycle_detour(len(cyc))
        if eff <= r:
            key = (eff, max(ids[u] for u in cyc),
                   tuple(sorted(ids[u] for u in cyc)))
            if best_cycle is None or key < best_cycle[0]:
                best_cycle = (key, Irregularity("cycle", cyc, eff))
    return low, best_cycle


def closest_irregularity(g, v, r, ids=None, _cycle_cache=None):
    """Irregularity of minimum effective distance <= r seen from v.

    Preference at equal effective distance: cycles before low-degree nodes;
    cycle ties by smallest maximum identifier, then lexicographically
    smallest id sequence; low-degree ties by smallest degree, then smallest
    identifier.  Returns None when nothing qualifies (in particular whenever
    the radius-r ball is a full delta-regular tree).
    """
    low, cyc = ball_irregularities(g, v, r, ids, _cycle_cache)
    if low is None:
        return cyc[1] if cyc else None
    if cyc is None:
        return low[1]
    # distance first; a cycle wins an exact tie
    if cyc[1].effective_distance <= low[1].effective_distance:
        return cyc[1]
    return low[1]


# ---------------------------------------------------------------------------
# Irregularity planting
# ---------------------------------------------------------------------------


def plant_irregularities(base, spec):
    """Rebuild ``base`` (a tree with designated center and uniform leaf
    depth) so that each requested irregularity exists at the stated
    effective distance from the center.

    Spec entries: ``("low-degree", D)`` removes one child subtree under a
    depth-D node; ``("cycle", D)`` or ``("cycle", D, length)`` splices a
    cycle of full-degree nodes whose effective distance from the center is
    D, padding ring nodes with fresh subtrees down to the base leaf depth.
    Unrealizable requests raise instead of truncating.
    """
    center = base.meta.get("center", 0)
    if not spec:
        return PortedGraph.from_edges(
            base.n,
            [(v, u, mp, up, d, s) for v in range(base.n)
             for u, mp, up, d, s in base.half_edges(v) if v < u],
            delta=base.delta, meta=base.meta)

    dist = bfs_distances(base, center)
    depth = max(dist.values())
    removed = set()
    ring_edges = []
    new_adj = {}
    next_new = [base.n]

    def remove_subtree(root, parent):
        stack = [(root, parent)]
        while stack:
            x, p = stack.pop()
            removed.add(x)
            for w in base.adjacent(x):
                if w != p and w not in removed:
                    stack.append((w, x))

    def pick_node_at(d_target):
        for u in sorted(dist, key=lambda x: (dist[x], x)):
            if dist[u] == d_target and u not in removed:
                kids = [w for w in base.adjacent(u)
                        if dist[w] == dist[u] + 1 and w not in removed]
                if kids:
                    return u, kids
        raise InvalidParameterError(
            f"no node at distance {d_target} with a removable child")

    def fresh_node():
        v = next_new[0]
        next_new[0] += 1
        new_adj[v] = []
        return v

    def ring_degree(p):
        return sum(1 for a, b in ring_edges if a == p or b == p)

    def grow_subtree(root, levels):
        frontier = [root]
        for _ in range(levels):
            nxt = []
            for p in frontier:
                want = base.delta - len(new_adj.get(p, ())) - ring_degree(p)
                for _ in range(want):
                    c = fresh_node()
                    new_adj[p].append(c)
                    new_adj[c].append(p)
                    nxt.append(c)
            frontier = nxt

    for entry in spec:
        kind = entry[0]
        if kind == "low-degree":
            d_target = entry[1]
            if d_target < 0 or d_target >= depth:
                raise InvalidParameterError(
                    f"low-degree distance {d_target} not realizable")
            u, kids = pick_node_at(d_target)
            remove_subtree(kids[-1], u)
        elif kind == "cycle":
            d_target = entry[1]
            length = entry[2] if len(entry) > 2 else 4
            if length < 3:
                raise InvalidParameterError("cycle length must be >= 3")
            anchor_dist = d_target - cycle_detour(length)
            if anchor_dist < 0:
                raise InvalidParameterError(
                    f"length-{length} cycle cannot sit at effective distance {d_target}")
            u, kids = pick_node_at(anchor_dist)
            if len(kids) < 2:
                raise InvalidParameterError(
                    f"anchor at distance {anchor_dist} lacks two spare children")
            remove_subtree(kids[-1], u)
            remove_subtree(kids[-2], u)
            ring = [u]
            for _ in range(length - 1):
                ring.append(fresh_node())
            for a, b in zip(ring, ring[1:] + ring[:1]):
                ring_edges.append((a, b))
            for idx in range(1, length):
                x = ring[idx]
                ring_dist = anchor_dist + min(idx, length - idx)
                levels = depth - ring_dist
                if levels < 0:
                    raise InvalidParameterError("cycle does not fit inside the tree")
                grow_subtree(x, levels)
        else:
            raise InvalidParameterError(f"unknown irregularity kind {kind!r}")

    keep = [v for v in range(base.n) if v not in removed]
    order = [center] + [v for v in keep if v != center] + sorted(new_adj)
    remap = {v: i for i, v in enumerate(order)}
    pair_set = set()
    for v in keep:
        for u in base.adjacent(v):
            if u not in removed:
                pair_set.add(edge_key(remap[v], remap[u]))
    for v, ws in new_adj.items():
        for w in ws:
            pair_set.add(edge_key(remap[v], remap[w]))
    for a, b in ring_edges:
        pair_set.add(edge_key(remap[a], remap[b]))
    edges = []
    port_fill = [0] * len(order)
    for a, b in sorted(pair_set):
        edges.append((a, b, port_fill[a], port_fill[b]))
        port_fill[a] += 1
        port_fill[b] += 1
    if any(p > base.delta for p in port_fill):
        raise InvalidParameterError("spec exceeds the degree bound")
    return PortedGraph.from_edges(len(order), edges, delta=base.delta,
                                  meta={"center": 0})


# ---------------------------------------------------------------------------
# Independent execution set
# ---------------------------------------------------------------------------


def independent_execution_set(g, v, t, k):
    """Nodes with pairwise distance >= 2t+1 whose t-balls lie in B_k(v).

    Seeds are the nodes at distance exactly 7 from v; each extension step
    walks 2t+1 edges straight along every non-returning direction, for
    ``max(0, floor((k-7)/(2t+1)) - 1)`` steps.  Returns the extension set
    (seeds excluded: sibling seeds sit at distance 2).
    """
    if k <= 7:
        raise InvalidParameterError("k must exceed the seed distance 7")
    if t < 1:
        raise InvalidParameterError("t must be >= 1")
    if not g.oriented:
        raise InvalidInstanceError("independent execution set needs an oriented tree")
    if not ball_is_leaf_free(g, v, k):
        raise InvalidInstanceError(f"radius-{k} ball of {v} contains a leaf")

    # BFS to distance 7, recording each node's direction back toward v
    parent_dir = {v: None}
    dist = {v: 0}
    q = deque([v])
    while q:
        x = q.popleft()
        if dist[x] >= 7:
            continue
        for u, mp, up, d, s in g.half_edges(x):
            if u not in dist:
                dist[u] = dist[x] + 1
                parent_dir[u] = direction_index(d, -s)  # as seen at u
                q.append(u)
    seeds = [u for u, d in dist.items() if d == 7]

    steps = max(0, (k - 7) // (2 * t + 1) - 1)
    stride = 2 * t + 1

    def walk(start, dir_idx):
        x = start
        dim, sign = direction_of_index(dir_idx)
        for _ in range(stride):
            x = g.neighbor_by_direction(x, dim, sign)
            if x is None:
                raise InvalidInstanceError("straight walk left the tree")
        return x

    result = set()
    frontier = [(u, parent_dir[u]) for u in seeds]
    for _ in range(steps):
        nxt = []
        for u, banned in frontier:
            for d in range(g.delta):
                if d == banned:
                    continue
                w = walk(u, d)
                nxt.append((w, d ^ 1))
                result.add(w)
        frontier = nxt
    return result


def independent_set_size_formula(delta, steps):
    """Closed-form size of the extension set after the given steps."""
    shell = delta * (delta - 1) ** 6
    return shell * sum((delta - 1) ** i for i in range(1, steps + 1))
