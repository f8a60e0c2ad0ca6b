"""Node-to-edge and edge-to-node speedup constructions with exact
verification of their failure-probability inequalities.

All probabilities here are exact rationals: conditioning on the bits of a
center ball factorizes the failure events across branches of the tree, so
every probability is an integer count over packed bit assignments divided
by a power of two.  The inequalities being checked have right-hand sides
around 1e-8, far below float comfort.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .engine import DirectedPair, LocalAlgorithm, require_interior
from .errors import InvalidInputError, InvalidParameterError
from .oriented import (EdgeTable, NodeTable, ball_paths, edge_positions,
                       endpoint_completion_frame, incident_edge_frame,
                       key_tables, neighbor_frame, pack_edge_view,
                       pack_node_view)


@dataclass(frozen=True)
class SpeedupConfig:
    """Parameters of one speedup application: tree degree, source palette
    size, source round count, frequency threshold and bits per node."""

    delta: int
    c: int
    t: int
    f: Fraction
    b: int

    def __post_init__(self):
        if not (0 < self.f < 1):
            raise InvalidParameterError("threshold f must satisfy 0 < f < 1")
        if self.delta % 2 != 0 or self.delta < 2:
            raise InvalidParameterError("delta must be even and positive")


def default_f_grid(points=100):
    """Exact rationals j/(points+1), j = 1..points, all inside (0, 1)."""
    return [Fraction(j, points + 1) for j in range(1, points + 1)]


# ---------------------------------------------------------------------------
# Exact local failure probabilities on the homogeneous oriented tree
# ---------------------------------------------------------------------------


def node_local_failure(alg):
    """Pr[every neighbor outputs the center's color], exactly.

    Conditioned on the bits of the center's radius-t ball, the neighbors'
    outputs are independent (their unseen bit regions are disjoint subtrees),
    so the joint probability is a product of per-branch counts.
    """
    delta, t, b = alg.delta, alg.t, alg.b
    m = len(ball_paths(delta, t))
    out = alg.table
    prod = None
    free_bits = 0
    for direction in range(delta):
        fr = neighbor_frame(delta, t, direction)
        known, free = key_tables(fr, b, m)
        keys = known[:, None] | free[None, :]
        counts = (alg.table[keys] == out[:, None]).sum(axis=1, dtype=np.int64)
        prod = counts if prod is None else prod * counts
        free_bits = b * fr.free_count
    den = (1 << (b * m)) * (1 << (free_bits * delta))
    return Fraction(int(prod.sum()), den)


def _relative_code_maps(labels):
    """Label-index -> small code of the label as seen by the plus / minus
    observer.  DirectedPair labels reorient; opaque labels are symmetric."""
    codes = {}

    def code_of(obj):
        if obj not in codes:
            codes[obj] = len(codes)
        return codes[obj]

    plus = np.empty(len(labels), dtype=np.int64)
    minus = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        if isinstance(lab, DirectedPair):
            plus[i] = code_of(lab.seen_from(+1))
            minus[i] = code_of(lab.seen_from(-1))
        else:
            plus[i] = minus[i] = code_of(lab)
    return plus, minus, len(codes)


def _onehot_counts(codes, n_codes):
    rows = codes.shape[0]
    idx = codes + np.arange(rows, dtype=np.int64)[:, None] * n_codes
    return np.bincount(idx.ravel(), minlength=rows * n_codes).reshape(rows, n_codes)


def edge_local_failure(alg):
    """Pr[no dimension breaks symmetry at the center], exactly.

    Per dimension the two incident edge labels are compared after
    reorienting each to the center; conditioned on the center ball the two
    labels of a dimension are independent, and dimensions are independent
    of each other.
    """
    delta, t, b = alg.delta, alg.t, alg.b
    m = len(ball_paths(delta, t))
    rel_plus, rel_minus, n_codes = _relative_code_maps(alg.labels)
    prod = None
    free_bits = 0
    for dim in range(1, delta // 2 + 1):
        per_side = []
        for direction in (2 * (dim - 1), 2 * (dim - 1) + 1):
            fr = incident_edge_frame(delta, t, t, direction)
            known, free = key_tables(fr, b, m)
            keys = known[:, None] | free[None, :]
            lab = alg.tables[dim][keys]
            rel = rel_plus if direction % 2 == 0 else rel_minus
            per_side.append(_onehot_counts(rel[lab], n_codes))
            free_bits = b * fr.free_count
        match = (per_side[0] * per_side[1]).sum(axis=1)
        prod = match if prod is None else prod * match
    den = (1 << (b * m)) * (1 << (free_bits * delta))
    return Fraction(int(prod.sum()), den)


def exact_local_failure(alg):
    if isinstance(alg, NodeTable):
        return node_local_failure(alg)
    if isinstance(alg, EdgeTable):
        return edge_local_failure(alg)
    raise InvalidInputError("expected a NodeTable or EdgeTable")


# ---------------------------------------------------------------------------
# Direction 1: node algorithm -> edge algorithm (one round faster)
# ---------------------------------------------------------------------------


def _threshold_mask(dist, f, free_bits):
    """Bit i set iff count_i / 2**free_bits >= f; exact integer compare."""
    need_num = f.numerator << free_bits
    if f.denominator.bit_length() + 8 + free_bits >= 63:
        # post-hoc optimal thresholds can carry huge denominators
        masks = np.zeros(dist.shape[0], dtype=np.int64)
        for row in range(dist.shape[0]):
            mask = 0
            for i in range(dist.shape[1]):
                if int(dist[row, i]) * f.denominator >= need_num:
                    mask |= 1 << i
            masks[row] = mask
        return masks
    masks = np.zeros(dist.shape[0], dtype=np.int64)
    for i in range(dist.shape[1]):
        masks |= (dist[:, i] * f.denominator >= need_num).astype(np.int64) << i
    return masks


@dataclass
class EdgeSpeedupConstruction:
    """Edge algorithm derived from a node algorithm by frequency
    thresholding over all completions of the endpoints' balls.

    The per-endpoint conditional color distributions are exact integer
    counts and do not depend on the threshold, so one construction serves a
    whole grid of f values.
    """

    source: NodeTable
    cfg: SpeedupConfig
    rounds: int
    dists: dict = field(repr=False)        # dim -> {"P": counts, "M": counts}
    completion_bits: int

    def frequent_masks(self, f):
        out = {}
        for dim, sides in self.dists.items():
            out[dim] = {side: _threshold_mask(d, f, self.completion_bits)
                        for side, d in sides.items()}
        return out

    def edge_table(self, f):
        c = self.source.c
        labels = tuple(DirectedPair(p >> c, p & ((1 << c) - 1))
                       for p in range(1 << (2 * c)))
        masks = self.frequent_masks(f)
        tables = {dim: (masks[dim]["P"] << c) | masks[dim]["M"]
                  for dim in masks}
        return EdgeTable(delta=self.cfg.delta, t=self.rounds, b=self.cfg.b,
                         labels=labels, tables=tables,
                         name=f"{self.source.name or 'node-alg'}->edges")

    def local_failure(self, f):
        return edge_local_failure(self.edge_table(f))

    def goodness_violation(self, f):
        """Pr[some incident edge's frequent set omits the center's color].

        The radius-(t-1) edge balls sit inside the center's radius-t ball,
        so goodness is a deterministic event per center assignment.
        """
        delta, t, b = self.cfg.delta, self.source.t, self.cfg.b
        m = len(ball_paths(delta, t))
        masks = self.frequent_masks(f)
        out = self.source.table
        good = np.ones(out.size, dtype=bool)
        for direction in range(delta):
            fr = incident_edge_frame(delta, t, self.rounds, direction)
            if fr.free_count:
                raise InvalidInputError("incident edge ball leaks outside B_t")
            known, _ = key_tables(fr, b, m)
            side = "P" if direction % 2 == 0 else "M"
            mask = masks[direction // 2 + 1][side]
            good &= ((mask[known] >> out) & 1).astype(bool)
        return Fraction(int((~good).sum()), out.size)


def node_to_edge_speedup(alg, cfg):
    """Edge algorithm one round faster than the node algorithm ``alg``.

    For each edge view the rule enumerates every completion of both
    endpoints' radius-t balls; color i is frequent for an endpoint iff its
    conditional probability is at least f.  The label is the pair of
    frequent-color bit vectors, plus endpoint first (palette 2^(2c)).
    """
    if alg.t < 1:
        raise InvalidParameterError("node->edge speedup needs t >= 1")
    if cfg.delta != alg.delta or cfg.b != alg.b or cfg.t != alg.t or cfg.c != alg.c:
        raise InvalidParameterError("config does not match the source algorithm")
    delta, t, b, c = alg.delta, alg.t, alg.b, alg.c
    s = t - 1
    dists = {}
    completion_bits = 0
    for dim in range(1, delta // 2 + 1):
        m_e = len(edge_positions(delta, s, dim))
        sides = {}
        for side in ("P", "M"):
            fr = endpoint_completion_frame(delta, t, s, dim, side)
            known, free = key_tables(fr, b, m_e)
            keys = known[:, None] | free[None, :]
            colors = alg.table[keys]
            sides[side] = _onehot_counts(colors, c)
            completion_bits = b * fr.free_count
        dists[dim] = sides
    return EdgeSpeedupConstruction(source=alg, cfg=cfg, rounds=s,
                                   dists=dists, completion_bits=completion_bits)


# ---------------------------------------------------------------------------
# Direction 2: edge algorithm -> node algorithm (round-preserving)
# ---------------------------------------------------------------------------


@dataclass
class NodeSpeedupConstruction:
    """Node algorithm derived from an edge algorithm: each node simulates
    the edge rule on its incident edges over all completions and outputs
    the ordered tuple of frequent-color bit vectors, edge order
    (1,+), (1,-), (2,+), (2,-), ...  (palette 2^(delta*c))."""

    source: EdgeTable
    cfg: SpeedupConfig
    rounds: int
    dists: np.ndarray = field(repr=False)  # (keys, delta, c) counts
    completion_bits: int

    def node_table(self, f):
        c = self.source.c
        packed = np.zeros(self.dists.shape[0], dtype=np.int64)
        for direction in range(self.cfg.delta):
            mask = _threshold_mask(self.dists[:, direction, :], f,
                                   self.completion_bits)
            packed |= mask << (direction * c)
        return NodeTable(delta=self.cfg.delta, t=self.rounds, b=self.cfg.b,
                         c=1 << (self.cfg.delta * c), table=packed,
                         name=f"{self.source.name or 'edge-alg'}->nodes")

    def local_failure(self, f):
        return node_local_failure(self.node_table(f))


def edge_to_node_speedup(alg, cfg):
    """Round-preserving node algorithm built from the edge algorithm."""
    if cfg.delta != alg.delta or cfg.b != alg.b or cfg.t != alg.t or cfg.c != alg.c:
        raise InvalidParameterError("config does not match the source algorithm")
    delta, t, b, c = alg.delta, alg.t, alg.b, alg.c
    m = len(ball_paths(delta, t))
    dists = np.zeros((1 << (b * m), delta, c), dtype=np.int64)
    completion_bits = 0
    for direction in range(delta):
        fr = incident_edge_frame(delta, t, t, direction)
        known, free = key_tables(fr, b, m)
        keys = known[:, None] | free[None, :]
        labels = alg.tables[direction // 2 + 1][keys]
        dists[:, direction, :] = _onehot_counts(labels, c)
        completion_bits = b * fr.free_count
    return NodeSpeedupConstruction(source=alg, cfg=cfg, rounds=t,
                                   dists=dists, completion_bits=completion_bits)


# ---------------------------------------------------------------------------
# Inequality verification
# ---------------------------------------------------------------------------


@dataclass
class GridPoint:
    f: Fraction
    p_prime: Fraction
    rhs: Fraction
    holds: bool
    goodness_violation: Fraction = None
    goodness_holds: bool = None


@dataclass
class SpeedupReport:
    direction: int
    cfg: SpeedupConfig
    p: Fraction
    p_prime: Fraction
    optimal_f: Fraction
    p_prime_at_optimal: Fraction
    grid: list
    inequality_holds: bool
    goodness_holds: bool

    def to_json_obj(self):
        def frac(x):
            return None if x is None else {
                "value": float(x), "exact": f"{x.numerator}/{x.denominator}"}
        return {
            "construction": "node-to-edge" if self.direction == 1 else "edge-to-node",
            "cfg": {"delta": self.cfg.delta, "c": self.cfg.c, "t": self.cfg.t,
                    "f": frac(self.cfg.f), "b": self.cfg.b},
            "p": frac(self.p),
            "p_prime": frac(self.p_prime),
            "optimal_f": frac(self.optimal_f),
            "p_prime_at_optimal": frac(self.p_prime_at_optimal),
            "f_grid_results": [
                {"f": frac(pt.f), "p_prime": frac(pt.p_prime),
                 "rhs": frac(pt.rhs), "holds": pt.holds,
                 "goodness_violation": frac(pt.goodness_violation),
                 "goodness_holds": pt.goodness_holds}
                for pt in self.grid],
            "inequality_holds": self.inequality_holds,
        }


def inequality_rhs(direction, p_prime, c, f, delta):
    """Lower bound the derived failure imposes on the source failure:
    (p' - delta*c*f) * f^delta for direction 1,
    (p' - (delta-1)*c*f) * f^(delta-1) for direction 2."""
    if direction == 1:
        return (p_prime - delta * c * f) * f**delta
    return (p_prime - (delta - 1) * c * f) * f**(delta - 1)


def optimizing_f(direction, p_prime, c, delta):
    """The threshold the analysis would pick: p'/((delta+1)c) for direction
    1, p'/(delta*c) for direction 2."""
    if direction == 1:
        return p_prime / ((delta + 1) * c)
    return p_prime / (delta * c)


def verify_speedup_inequality(g, source, derived, cfg, direction,
                              center=None, f_grid=None):
    """Exactly compute source and derived local failure probabilities and
    evaluate the direction's inequality at the configured f, at the
    analysis-optimal f, and across a grid of thresholds (the construction
    is re-thresholded per grid point; the conditional distributions are
    shared).

    ``g`` anchors the claim: the center node must have full balls for both
    computations.  For direction 1 the goodness bound
    Pr[not good] <= delta*c*f is checked at every grid point.
    """
    if center is None:
        center = g.meta.get("center", 0)
    require_interior(g, center, cfg.t + 1)
    if g.delta != cfg.delta:
        raise InvalidParameterError("graph degree does not match the config")
    if direction not in (1, 2):
        raise InvalidParameterError("direction must be 1 or 2")
    if f_grid is None:
        f_grid = default_f_grid()

    if direction == 1:
        construction = derived or node_to_edge_speedup(source, cfg)
        p = node_local_failure(source)
    else:
        construction = derived or edge_to_node_speedup(source, cfg)
        p = edge_local_failure(source)

    def evaluate(f):
        p_prime = construction.local_failure(f)
        rhs = inequality_rhs(direction, p_prime, cfg.c, f, cfg.delta)
        pt = GridPoint(f=f, p_prime=p_prime, rhs=rhs, holds=p >= rhs)
        if direction == 1:
            gv = construction.goodness_violation(f)
            pt.goodness_violation = gv
            pt.goodness_holds = gv <= cfg.delta * cfg.c * f
        return pt

    at_f = evaluate(cfg.f)
    f_star = optimizing_f(direction, at_f.p_prime, cfg.c, cfg.delta)
    at_star = evaluate(f_star) if 0 < f_star < 1 else at_f
    points = [evaluate(f) for f in f_grid]
    all_points = [at_f, at_star] + points
    return SpeedupReport(
        direction=direction, cfg=cfg, p=p,
        p_prime=at_f.p_prime,
        optimal_f=f_star, p_prime_at_optimal=at_star.p_prime,
        grid=points,
        inequality_holds=all(pt.holds for pt in all_points),
        goodness_holds=all(pt.goodness_holds in (True, None) for pt in all_points),
    )


# ---------------------------------------------------------------------------
# Algorithm synthesis
# ---------------------------------------------------------------------------


def own_bit_node_algorithm(delta, t, b, c=2):
    """Output the first bit of the node's own string."""
    return NodeTable.from_rule(delta, t, b, c, lambda bits: bits[()] & 1,
                               name="own-first-bit")


def constant_node_algorithm(delta, t, b, c, value=0):
    return NodeTable.from_rule(delta, t, b, c, lambda bits: value,
                               name=f"constant-{value}")


def ball_parity_node_algorithm(delta, t, b, c=2):
    def rule(bits):
        ones = sum(bin(x).count("1") for x in bits.values())
        return ones % c
    return NodeTable.from_rule(delta, t, b, c, rule, name="ball-parity")


def center_mod_node_algorithm(delta, t, b, c):
    return NodeTable.from_rule(delta, t, b, c, lambda bits: bits[()] % c,
                               name="center-mod")


def random_node_algorithm(delta, t, b, c, seed):
    from .oriented import _check_table_bits
    rng = np.random.default_rng(seed)
    m = len(ball_paths(delta, t))
    _check_table_bits(b * m)
    table = rng.integers(0, c, size=1 << (b * m), dtype=np.int64)
    return NodeTable(delta=delta, t=t, b=b, c=c, table=table,
                     name=f"random-node-{seed}")


def xor_edge_algorithm(delta, t, b):
    """Label each edge with the XOR of its endpoints' first bits."""
    return EdgeTable.from_rule(
        delta, t, b, (0, 1),
        lambda dim, bits: (bits[("P", ())] ^ bits[("M", ())]) & 1,
        name="endpoint-xor")


def constant_edge_algorithm(delta, t, b, c, value=0):
    return EdgeTable.from_rule(delta, t, b, tuple(range(c)),
                               lambda dim, bits: value,
                               name=f"constant-edge-{value}")


def endpoint_sum_edge_algorithm(delta, t, b, c):
    return EdgeTable.from_rule(
        delta, t, b, tuple(range(c)),
        lambda dim, bits: (bits[("P", ())] + bits[("M", ())]) % c,
        name="endpoint-sum")


def random_edge_algorithm(delta, t, b, c, seed):
    from .oriented import _check_table_bits
    rng = np.random.default_rng(seed)
    tables = {}
    for dim in range(1, delta // 2 + 1):
        m = len(edge_positions(delta, t, dim))
        _check_table_bits(b * m)
        tables[dim] = rng.integers(0, c, size=1 << (b * m), dtype=np.int64)
    return EdgeTable(delta=delta, t=t, b=b, labels=tuple(range(c)),
                     tables=tables, name=f"random-edge-{seed}")


# ---------------------------------------------------------------------------
# Engine bridge
# ---------------------------------------------------------------------------


def as_local_algorithm(alg):
    """Wrap a table algorithm so the engine can run it on concrete oriented
    trees (only nodes/edges with full balls; others raise)."""
    if isinstance(alg, NodeTable):
        def rule(view):
            return int(alg.table[pack_node_view(
                view.graph, view.center_node, alg.t, alg.b, view.assignment)])
        return LocalAlgorithm(rounds=alg.t, kind="node", rule=rule,
                              name=alg.name or "node-table")
    if isinstance(alg, EdgeTable):
        def rule(view):
            u, v = view.endpoints
            dim, key = pack_edge_view(view.graph, u, v, alg.t, alg.b,
                                      view.assignment)
            return alg.labels[int(alg.tables[dim][key])]
        return LocalAlgorithm(rounds=alg.t, kind="edge", rule=rule,
                              name=alg.name or "edge-table")
    raise InvalidInputError("expected a NodeTable or EdgeTable")
