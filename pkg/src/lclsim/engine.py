"""LOCAL-model execution and failure-probability measurement.

A t-round algorithm is a total deterministic mapping from radius-t views to
output labels; running it is equivalent to t synchronous full-information
rounds.  Failure probabilities are over the per-node random bit strings
(b bits per node, finite so that exact enumeration is possible) and are
measured either exactly, by enumerating every bit assignment on the
relevant ball, or by seeded Monte Carlo with a two-sided Hoeffding bound.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import (BudgetExceededError, InvalidInputError,
                     InvalidInstanceError, TotalRuleViolation)
from .graph import bfs_distances, edge_key
from .views import extract_view

ENUM_BUDGET_BITS = 24
DEFAULT_BITS_PER_NODE = 2
MC_DEFAULT_SAMPLES = 10**6
MC_DEFAULT_CONFIDENCE = 0.99


@dataclass
class Assignment:
    """Per-node random bits (ints below ``2**b``) and optional unique ids."""

    b: int
    bits: dict
    ids: dict = None

    def __post_init__(self):
        if self.bits is not None:
            top = 1 << self.b
            for v, x in self.bits.items():
                if not 0 <= x < top:
                    raise InvalidInputError(f"bit string of node {v} is not {self.b} bits")
        if self.ids is not None:
            vals = list(self.ids.values())
            if len(set(vals)) != len(vals):
                raise InvalidInputError("identifiers are not injective")

    @classmethod
    def random(cls, g, b, seed, with_ids=False, id_exponent=1):
        """Uniform bits; ids drawn injectively from {1..n**id_exponent}."""
        rng = random.Random(seed)
        bits = {v: rng.randrange(1 << b) for v in range(g.n)}
        ids = None
        if with_ids:
            space = g.n ** id_exponent
            if id_exponent == 1:
                vals = list(range(1, g.n + 1))
                rng.shuffle(vals)
            else:
                vals = rng.sample(range(1, space + 1), g.n)
            ids = {v: vals[v] for v in range(g.n)}
        return cls(b=b, bits=bits, ids=ids)

    def with_bits(self, bits):
        return Assignment(b=self.b, bits=bits, ids=self.ids)


@dataclass
class LocalAlgorithm:
    """Deterministic mapping from views to labels.

    Either ``rule`` (a callable on :class:`~lclsim.views.View`) or ``table``
    (a dict over canonical view encodings) must be given.  ``kind`` is
    ``"node"`` or ``"edge"``.
    """

    rounds: int
    kind: str
    rule: object = None
    table: dict = None
    palette: object = None
    name: str = ""

    def evaluate(self, view):
        if self.table is not None:
            try:
                out = self.table[view.encoding]
            except KeyError:
                raise TotalRuleViolation(
                    f"{self.name or 'table algorithm'} has no entry for a realized view",
                    view=view) from None
        else:
            out = self.rule(view)
        if self.palette is not None and out not in self.palette:
            raise TotalRuleViolation(
                f"output {out!r} outside the declared palette", view=view)
        return out


@dataclass
class FailureEstimate:
    """A failure probability plus how it was obtained.

    ``error`` is 0 for exact enumeration and the two-sided Hoeffding radius
    at the declared confidence for Monte Carlo.
    """

    value: object             # Fraction (exact) or float (sampled)
    mode: str                 # "exact" | "monte-carlo"
    error: float = 0.0
    samples: int = None
    seed: int = None

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise InvalidInputError("probability outside [0,1]")
        if self.mode == "exact" and self.error != 0:
            raise InvalidInputError("exact estimates carry zero error")

    def to_json_obj(self):
        obj = {
            "value": float(self.value),
            "mode": self.mode,
            "error": self.error,
            "samples": self.samples,
            "seed": self.seed,
        }
        if isinstance(self.value, Fraction):
            obj["value_exact"] = f"{self.value.numerator}/{self.value.denominator}"
        return obj


# ---------------------------------------------------------------------------
# Running algorithms
# ---------------------------------------------------------------------------


def run_node_algorithm(g, alg, assignment, inputs=None):
    """Label every node with ``alg`` applied to its radius-t view."""
    if alg.kind != "node":
        raise InvalidInputError("node-centric algorithm required")
    out = {}
    for v in range(g.n):
        out[v] = alg.evaluate(extract_view(g, v, alg.rounds, assignment, inputs))
    return out


def run_edge_algorithm(g, alg, assignment, inputs=None):
    """Label every edge with ``alg`` applied to its radius-t edge view."""
    if alg.kind != "edge":
        raise InvalidInputError("edge-centric algorithm required")
    out = {}
    for u, v in g.edges():
        out[edge_key(u, v)] = alg.evaluate(
            extract_view(g, (u, v), alg.rounds, assignment, inputs))
    return out


# ---------------------------------------------------------------------------
# Oriented pair labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirectedPair:
    """Edge label carrying one component per endpoint, ordered by the
    orientation: ``plus`` belongs to the endpoint whose ``(d,+)`` edge this
    is.  The local symmetry-breaking check compares the two labels of a
    dimension after reorienting each to the observing node (observer's
    component first)."""

    plus: object
    minus: object

    def seen_from(self, sign):
        return (self.plus, self.minus) if sign > 0 else (self.minus, self.plus)


def _relative_label(label, sign):
    if isinstance(label, DirectedPair):
        return label.seen_from(sign)
    return label


# ---------------------------------------------------------------------------
# Failure predicates
# ---------------------------------------------------------------------------


def weak_coloring_failure(g, v, labels):
    """v fails iff every neighbor carries v's own label."""
    mine = labels[v]
    return all(labels[u] == mine for u in g.adjacent(v))


def weak_edge_coloring_failure(g, v, labels):
    """v fails iff no dimension has differing labels on its two edges.

    Labels are compared after reorienting :class:`DirectedPair` values to
    v; opaque labels compare as-is.  Dimensions with a missing edge at v
    cannot witness success.
    """
    pairs = {}
    for u, mp, up, d, s in g.half_edges(v):
        if d == 0:
            raise InvalidInstanceError("weak edge coloring needs an oriented graph")
        pairs.setdefault(d, {})[s] = _relative_label(labels[edge_key(v, u)], s)
    ok_dims = [d for d, two in pairs.items() if len(two) == 2]
    if not ok_dims:
        return True
    return all(pairs[d][1] == pairs[d][-1] for d in ok_dims)


# ---------------------------------------------------------------------------
# Assignment enumeration and failure probabilities
# ---------------------------------------------------------------------------


def enumerate_assignments(region, b, budget_bits=ENUM_BUDGET_BITS):
    """Yield every bit map on ``region`` exactly once, counter order."""
    nodes = sorted(region)
    total_bits = b * len(nodes)
    if total_bits > budget_bits:
        raise BudgetExceededError(
            f"{total_bits} bits exceed the exact-enumeration budget of {budget_bits}")
    mask = (1 << b) - 1
    for counter in range(1 << total_bits):
        yield {u: (counter >> (i * b)) & mask for i, u in enumerate(nodes)}


def _labels_for_predicate(g, alg, v, assignment, inputs):
    t = alg.rounds
    if alg.kind == "node":
        labels = {}
        for u in [v] + g.adjacent(v):
            labels[u] = alg.evaluate(extract_view(g, u, t, assignment, inputs))
        return labels
    labels = {}
    for u in g.adjacent(v):
        labels[edge_key(v, u)] = alg.evaluate(
            extract_view(g, (v, u), t, assignment, inputs))
    return labels


def require_interior(g, v, radius):
    """Reject nodes whose ball of the given radius contains a leaf; failure
    probabilities are defined on regular trees only."""
    for u in bfs_distances(g, v, radius):
        if g.degree(u) <= 1:
            raise InvalidInstanceError(
                f"radius-{radius} ball of node {v} contains a leaf")


def local_failure_probability(g, alg, v, fail_predicate, mode="exact",
                              b=DEFAULT_BITS_PER_NODE, ids=None,
                              samples=MC_DEFAULT_SAMPLES,
                              confidence=MC_DEFAULT_CONFIDENCE, seed=0,
                              budget_bits=ENUM_BUDGET_BITS, inputs=None):
    """Probability, over the random bits of ``B_{t+1}(v)``, that the node
    failure event holds at v.

    Exact mode enumerates all ``2**(b*m)`` assignments of the ball (m = its
    node count) and returns the precise frequency as a Fraction; it raises
    ``BudgetExceededError`` when ``b*m`` exceeds the budget, in which case
    the caller must switch modes.  Monte Carlo returns an unbiased estimate
    with the two-sided Hoeffding radius at the stated confidence.
    """
    t = alg.rounds
    require_interior(g, v, t + 1)
    region = sorted(bfs_distances(g, v, t + 1))
    base_ids = ids

    def outcome(bit_map):
        a = Assignment(b=b, bits=bit_map, ids=base_ids)
        labels = _labels_for_predicate(g, alg, v, a, inputs)
        return bool(fail_predicate(g, v, labels))

    if mode == "exact":
        hits = 0
        total = 0
        for bit_map in enumerate_assignments(region, b, budget_bits):
            hits += outcome(bit_map)
            total += 1
        return FailureEstimate(value=Fraction(hits, total), mode="exact")
    if mode != "monte-carlo":
        raise InvalidInputError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    top = 1 << b
    hits = 0
    for _ in range(samples):
        bit_map = {u: rng.randrange(top) for u in region}
        hits += outcome(bit_map)
    err = hoeffding_radius(samples, confidence)
    return FailureEstimate(value=hits / samples, mode="monte-carlo",
                           error=err, samples=samples, seed=seed)


def hoeffding_radius(samples, confidence):
    """Two-sided Hoeffding deviation bound at the given confidence."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))
