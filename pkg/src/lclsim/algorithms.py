"""Constructive algorithms: the weak-coloring reduction pipeline, the
pointer-problem solvers, and the homogeneous dispatcher.

Everything is expressed over immutable graphs and returns plain label
dicts; the stated round counts are the LOCAL-model accounting of each
stage (a stage needing information from distance d costs d rounds).
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .engine import run_node_algorithm
from .errors import InvalidInputError, PSolverViolation
from .graph import Irregularity, ball_irregularities
from .problems import HomogeneousLabel, PointerLabel, verify_weak_coloring


# ---------------------------------------------------------------------------
# Weak coloring family -> weak 2-coloring
# ---------------------------------------------------------------------------


@dataclass
class RecolorDetail:
    """Where a node found its closest differently-colored node."""

    target: int
    dist: int
    first_port: int           # port of the first step toward the target


def weak_to_weak2c(g, phi, k, c, validate=True):
    """Distance-k weak c-coloring -> distance-1 weak 2c-coloring in k rounds.

    Each node locates its closest differently-colored node (ties: smallest
    color, then lexicographically smallest port path) and appends the
    parity of that distance to its own color.  Returns the new coloring
    (colors in [2c]), the round count, and per-node detail for the parity
    argument check.
    """
    if validate:
        results = verify_weak_coloring(g, phi, c, k)
        bad = [v for v, ok in results.items() if not ok]
        if bad:
            raise InvalidInputError(
                f"not a valid distance-{k} weak {c}-coloring; offenders {bad[:5]}")
    out = {}
    detail = {}
    for v in range(g.n):
        target, dist, first_port = _closest_other_color(g, v, phi, k)
        out[v] = (phi[v] - 1) * 2 + (dist % 2) + 1
        detail[v] = RecolorDetail(target=target, dist=dist, first_port=first_port)
    return out, k, detail


def _closest_other_color(g, v, phi, k):
    """BFS in lexicographic port-path order; first level containing another
    color decides, winner has the smallest (color, path)."""
    mine = phi[v]
    seen = {v}
    # frontier entries: (path, node); level order is lexicographic order
    frontier = [((), v)]
    for _ in range(k):
        nxt = []
        hits = []
        for path, x in frontier:
            for u, mp, _up in g.neighbors(x):
                if u in seen:
                    continue
                seen.add(u)
                nxt.append((path + (mp,), u))
                if phi[u] != mine:
                    hits.append((phi[u], path + (mp,), u))
        if hits:
            col, path, u = min(hits)
            return u, len(path), path[0]
        frontier = nxt
    raise InvalidInputError(
        f"node {v} sees no other color within distance {k}")


@dataclass
class Pseudoforest:
    """One outgoing pointer per node, toward a differently-colored
    neighbor; the pointer graph may contain mutual (2-cycle) pairs."""

    out_port: dict
    parent: dict = field(default_factory=dict)
    children: dict = field(default_factory=dict)

    @classmethod
    def build(cls, g, out_port):
        parent = {v: g.neighbor_by_port(v, p) for v, p in out_port.items()}
        children = {v: [] for v in out_port}
        for v, w in parent.items():
            children[w].append(v)
        return cls(out_port=out_port, parent=parent, children=children)

    def pointer_neighbors(self, v):
        return [self.parent[v]] + self.children[v]


def build_pseudoforest(g, phi2):
    """Each node picks its smallest-port neighbor of a different color."""
    out_port = {}
    for v in range(g.n):
        for u, mp, _ in g.neighbors(v):
            if phi2[u] != phi2[v]:
                out_port[v] = mp
                break
        else:
            raise InvalidInputError(
                f"node {v} has no differently-colored neighbor")
    return Pseudoforest.build(g, out_port)


def cole_vishkin_step(own, parent):
    """One bit-index relabeling: 2i + own bit value, i the smallest bit
    index where own and the pointer target's color differ (0-based)."""
    diff = own ^ parent
    i = (diff & -diff).bit_length() - 1
    return 2 * i + ((own >> i) & 1)


def cole_vishkin_reduce(pf, colors, c_prime):
    """Reduce a coloring that is proper along the pointers to 3 colors.

    Iterated bit-index relabeling against the pointer target until at most
    6 colors remain, then three shift-down-and-recolor passes eliminate
    colors 6, 5, 4 (1-based).  Properness along pointers holds after every
    step.  Returns (coloring in {1,2,3}, rounds).
    """
    x = {v: colors[v] - 1 for v in colors}
    parent = pf.parent
    for v, w in parent.items():
        if x[v] == x[w]:
            raise InvalidInputError(f"colors of {v} and its pointer target agree")
    rounds = 0
    bound = c_prime
    while bound > 6:
        x = {v: cole_vishkin_step(x[v], x[parent[v]]) for v in x}
        bound = 2 * max(bound - 1, 1).bit_length()
        rounds += 1
    # the skip below depends only on the declared palette, never on the
    # realized colors: the round count must be the same at every node
    if c_prime > 3:
        for target in (5, 4, 3):
            shifted = {v: x[parent[v]] for v in x}
            new = dict(shifted)
            for v, col in shifted.items():
                if col == target:
                    avoid = {shifted[parent[v]], x[v]}
                    new[v] = min(set(range(3)) - avoid)
            x = new
            rounds += 2
    return {v: col + 1 for v, col in x.items()}, rounds


def mis_to_weak2(pf, psi):
    """Greedy maximal independent set on the pointer graph by color classes
    1, 2, 3; members get label 1, the rest label 2.  Three rounds."""
    joined = set()
    for cls in (1, 2, 3):
        for v, col in psi.items():
            if col == cls and not any(u in joined for u in pf.pointer_neighbors(v)):
                joined.add(v)
    return {v: 1 if v in joined else 2 for v in psi}, 3


@dataclass
class PipelineResult:
    labels: dict
    rounds: int
    stage_rounds: dict
    detail: dict = None


def weak_family_to_weak2(g, phi, k, c, validate=True):
    """Distance-k weak c-coloring -> weak 2-coloring, constant extra rounds."""
    phi2, r_recolor, detail = weak_to_weak2c(g, phi, k, c, validate=validate)
    pf = build_pseudoforest(g, phi2)
    psi, r_cv = cole_vishkin_reduce(pf, phi2, 2 * c)
    labels, r_mis = mis_to_weak2(pf, psi)
    stage_rounds = {"recolor": r_recolor, "pseudoforest": 1,
                    "color-reduction": r_cv, "mis": r_mis}
    return PipelineResult(labels=labels,
                          rounds=sum(stage_rounds.values()),
                          stage_rounds=stage_rounds,
                          detail=detail)


# ---------------------------------------------------------------------------
# Pointer-problem solvers
# ---------------------------------------------------------------------------


def _tree_irregularity_map(g, ids):
    """On trees the only irregularities are low-degree nodes: one
    multi-source lexicographic Dijkstra from all of them gives every node
    its preferred target (distance, then degree, then identifier), the
    distance, and the next hop.  Matches the per-node ball scan exactly."""
    INF = None
    target = [INF] * g.n
    dist = [0] * g.n
    pred = [INF] * g.n
    heap = []
    for u in range(g.n):
        if g.degree(u) < g.delta:
            heap.append((0, g.degree(u), ids[u], u, u, u))
    heapq.heapify(heap)
    done = [False] * g.n
    while heap:
        d, deg_u, id_u, u, v, via = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        target[v], dist[v], pred[v] = u, d, via
        for w in g.adjacent(v):
            if not done[w]:
                heapq.heappush(heap, (d + 1, deg_u, id_u, u, w, v))
    return target, dist, pred


def _solver_irregularity(g, v, r, ids, cycle_cache):
    """The target preference the constructive solver follows:
    a low-degree node is its own irregularity, and full-degree nodes prefer
    any cycle in range over any low-degree node.  (Chain consistency needs
    every cycle member to aim at a cycle: a member sitting closer to a leaf
    than its own cycle's detour term would otherwise break the shared
    degree guess.)
    """
    if g.degree(v) < g.delta:
        return Irregularity("low-degree", v, 0)
    low, cyc = ball_irregularities(g, v, r, ids=ids, _cycle_cache=cycle_cache)
    if cyc is not None:
        return cyc[1]
    return low[1] if low else None


def solve_pointer_labeling_local(g, r, assignment):
    """Label the 1-neighborhoods of all nodes that see an irregularity
    within effective distance r; other nodes stay unlabeled.

    Implements the constructive case analysis: low-degree nodes label
    themselves; cycle members follow the orientation fixed by the cycle's
    smallest-identifier node pointing toward its smaller cycle neighbor;
    everyone else points along the (smallest-port) shortest path to its
    preferred irregularity, guessing the target degree unless some node on
    that path prefers a cycle, in which case the guess is 0.  Needs
    identifiers; gathers radius r plus another r of look-ahead.
    """
    if assignment is None or assignment.ids is None:
        raise InvalidInputError("pointer solving needs identifiers")
    ids = [assignment.ids[v] for v in range(g.n)]

    if g.edge_count() == g.n - 1:
        return _solve_pointer_tree(g, r, ids)

    cycle_cache = {}
    irr = {v: _solver_irregularity(g, v, r, ids, cycle_cache)
           for v in range(g.n)}
    dist_maps = {}

    def dist_map(key, sources):
        if key not in dist_maps:
            d = {}
            q = deque()
            for s in sources:
                d[s] = 0
                q.append(s)
            while q:
                x = q.popleft()
                if d[x] > r:  # paths toward a preferred target stay within r
                    continue
                for w in g.adjacent(x):
                    if w not in d:
                        d[w] = d[x] + 1
                        q.append(w)
            dist_maps[key] = d
        return dist_maps[key]

    def next_hop(v, key, sources):
        dm = dist_map(key, sources)
        for w, mp, _ in g.neighbors(v):
            if dm.get(w, -1) == dm[v] - 1:
                return w
        raise InvalidInputError(f"no descent from {v} toward {key}")

    labels = {}
    for v in range(g.n):
        what = irr[v]
        if what is None:
            continue
        if g.degree(v) < g.delta:
            labels[v] = PointerLabel(d=g.degree(v), port=None)
            continue
        if what.kind == "cycle":
            cyc = what.location
            if v in cyc:
                succ = _cycle_successor(cyc, ids)[v]
                labels[v] = PointerLabel(d=0, port=g.port_toward(v, succ))
            else:
                w = next_hop(v, ("cycle", cyc), cyc)
                labels[v] = PointerLabel(d=0, port=g.port_toward(v, w))
            continue
        u = what.location
        path = [v]
        while path[-1] != u:
            path.append(next_hop(path[-1], ("node", u), (u,)))
        cycle_on_path = any(
            irr[w] is not None and irr[w].kind == "cycle" for w in path[1:])
        guess = 0 if cycle_on_path else g.degree(u)
        labels[v] = PointerLabel(d=guess, port=g.port_toward(v, path[1]))
    return labels


def _cycle_successor(cyc, ids):
    """Successor map of a cycle under its canonical orientation: the
    smallest-identifier node points toward its smaller-identifier cycle
    neighbor."""
    k = len(cyc)
    pos = min(range(k), key=lambda i: ids[cyc[i]])
    nxt, prv = cyc[(pos + 1) % k], cyc[(pos - 1) % k]
    forward = ids[nxt] < ids[prv]
    succ = {}
    for i, v in enumerate(cyc):
        succ[v] = cyc[(i + 1) % k] if forward else cyc[(i - 1) % k]
    return succ


def _solve_pointer_tree(g, r, ids):
    target, dist, pred = _tree_irregularity_map(g, ids)
    labels = {}
    for v in range(g.n):
        if dist[v] > r:
            continue
        if g.degree(v) < g.delta:
            labels[v] = PointerLabel(d=g.degree(v), port=None)
        else:
            labels[v] = PointerLabel(d=g.degree(target[v]),
                                     port=g.port_toward(v, pred[v]))
    return labels


def solve_pointer_labeling(g, assignment):
    """Total pointer labeling: find the smallest radius at which every node
    sees an irregularity (doubling, then binary refinement), label at that
    radius.  Returns (labels, rounds) with rounds = the final radius."""
    if assignment is None or assignment.ids is None:
        raise InvalidInputError("pointer solving needs identifiers")
    ids = [assignment.ids[v] for v in range(g.n)]

    if g.edge_count() == g.n - 1:
        target, dist, pred = _tree_irregularity_map(g, ids)
        r_star = max(dist)
        labels = {}
        for v in range(g.n):
            if g.degree(v) < g.delta:
                labels[v] = PointerLabel(d=g.degree(v), port=None)
            else:
                labels[v] = PointerLabel(d=g.degree(target[v]),
                                         port=g.port_toward(v, pred[v]))
        return labels, r_star

    # grow the radius until every node sees an irregularity; an irregularity
    # found at radius r has globally minimal effective distance, so the
    # final radius is exactly the largest of those distances
    cycle_cache = {}
    eff = {}
    pending = set(range(g.n))
    r = 1
    while pending:
        for v in list(pending):
            low, cyc = ball_irregularities(g, v, r, ids=ids,
                                           _cycle_cache=cycle_cache)
            dists = [x[1].effective_distance for x in (low, cyc) if x]
            if dists:
                eff[v] = min(dists)
                pending.discard(v)
        if pending:
            r *= 2
            if r > 4 * g.n:
                raise InvalidInputError("no irregularity in range; is the graph finite?")
    r_star = max(eff.values())
    labels = solve_pointer_labeling_local(g, r_star, assignment)
    missing = [v for v in range(g.n) if v not in labels]
    if missing:
        raise InvalidInputError(f"nodes {missing[:5]} still unlabeled at r={r_star}")
    return labels, r_star


def pointer_terminal_degrees(g, start):
    """Degrees of the irregular nodes a pointer chain from ``start`` can
    terminate at: the non-full-degree nodes reachable through full-degree
    interiors.  On a tree this is exactly the set of feasible degree
    guesses at ``start``."""
    if g.degree(start) < g.delta:
        return {g.degree(start)}
    seen = {start}
    out = set()
    stack = [start]
    while stack:
        v = stack.pop()
        for u in g.adjacent(v):
            if u in seen:
                continue
            seen.add(u)
            if g.degree(u) < g.delta:
                out.add(g.degree(u))
            else:
                stack.append(u)
    return out


# ---------------------------------------------------------------------------
# Homogeneous dispatcher
# ---------------------------------------------------------------------------


def homogeneous_dispatch(g, p_solver, p_verifier, r, assignment):
    """Solve a homogeneous problem: run the inner solver everywhere and, in
    parallel, pointer-label every node having an irregularity within
    k = T + r (T = the solver's round bound).  Nodes with an irregular
    ball present their pointer label; the rest rely on the inner label.

    Raises :class:`PSolverViolation` if the inner verifier rejects some
    node whose radius-k ball is a full regular tree.
    """
    k = p_solver.rounds + r
    pointer_labels = solve_pointer_labeling_local(g, k, assignment)
    inner = run_node_algorithm(g, p_solver, assignment)
    labels = {v: HomogeneousLabel(inner=inner.get(v), pointer=pointer_labels.get(v))
              for v in range(g.n)}
    bad = [v for v in range(g.n)
           if v not in pointer_labels and not p_verifier(g, v, inner)]
    if bad:
        raise PSolverViolation(
            f"inner solver rejected on regular balls at nodes {bad[:5]}")
    return labels
