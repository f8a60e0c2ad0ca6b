"""Coordinates, table algorithms and exact counting kernels on the
homogeneous oriented tree.

Around an interior node of a consistently oriented delta-regular tree,
every radius-t ball has the same shape, so a position is just a
non-backtracking string of direction slots (slot ``2(d-1)`` is dimension
d's ``+`` edge, slot ``2(d-1)+1`` its ``-`` edge; the reverse of a slot is
``slot ^ 1``).  A bit assignment on a ball packs into one integer, b bits
per position in canonical (BFS, then lexicographic) order, which makes
table algorithms numpy arrays and conditional color distributions exact
integer counts.

Edge balls are anchored at the edge's ``+`` endpoint: positions on the
``+`` side come first, so both endpoints pack an edge view identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, InvalidParameterError, TotalRuleViolation

TABLE_BITS_CAP = 22   # 4M entries; everything in scope is far below
KERNEL_BUDGET_BITS = 24  # conditioning bits + completion bits per kernel


def reverse_slot(d):
    return d ^ 1


def ball_paths(delta, t):
    """Non-backtracking direction paths of length <= t, BFS then lex order."""
    paths = [()]
    frontier = [()]
    for _ in range(t):
        nxt = []
        for p in frontier:
            for d in range(delta):
                if p and d == p[-1] ^ 1:
                    continue
                nxt.append(p + (d,))
        nxt.sort()
        paths.extend(nxt)
        frontier = nxt
    return tuple(paths)


def side_paths(delta, t, avoid_first):
    """Ball paths whose first step is not ``avoid_first``."""
    return tuple(p for p in ball_paths(delta, t) if not (p and p[0] == avoid_first))


def edge_positions(delta, t, dim):
    """Positions of a radius-t edge ball for an edge of the given dimension:
    ``("P", path)`` for the + endpoint's side (listed first), ``("M", path)``
    for the - endpoint's side."""
    plus_dir = 2 * (dim - 1)
    near = [("P", p) for p in side_paths(delta, t, plus_dir)]
    far = [("M", p) for p in side_paths(delta, t, reverse_slot(plus_dir))]
    return tuple(near + far)


def compose(anchor, q):
    """Concatenate two non-backtracking paths, canceling at the seam."""
    a = list(anchor)
    i = 0
    while a and i < len(q) and q[i] == a[-1] ^ 1:
        a.pop()
        i += 1
    return tuple(a) + tuple(q[i:])


def translate_edge_coord(node_path, dim, side):
    """Edge-ball coordinate of a node-ball path taken from endpoint ``side``."""
    plus_dir = 2 * (dim - 1)
    if side == "P":
        if node_path and node_path[0] == plus_dir:
            return ("M", node_path[1:])
        return ("P", node_path)
    if node_path and node_path[0] == reverse_slot(plus_dir):
        return ("P", node_path[1:])
    return ("M", node_path)


# ---------------------------------------------------------------------------
# Frames: reindexing one coordinate system inside another
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    """How a target coordinate system overlaps the conditioning one: known
    positions are bit-rearrangements of the conditioned key, free positions
    are enumerated separately (in target-position order)."""

    size: int
    known: tuple              # (target_pos, source_pos) pairs
    free: tuple               # target positions outside the source ball

    @property
    def free_count(self):
        return len(self.free)


def _classify(source_index, target_abs):
    known = []
    free = []
    for j, coord in enumerate(target_abs):
        i = source_index.get(coord)
        if i is None:
            free.append(j)
        else:
            known.append((j, i))
    return Frame(size=len(target_abs), known=tuple(known), free=tuple(free))


def neighbor_frame(delta, t, direction):
    """A neighbor's radius-t node ball inside the center's radius-t ball."""
    center = ball_paths(delta, t)
    idx = {p: i for i, p in enumerate(center)}
    abs_list = []
    for q in center:
        p = compose((direction,), q)
        abs_list.append(p if len(p) <= t else ("free", p))
    return _classify(idx, abs_list)


def incident_edge_frame(delta, t_center, s_edge, direction):
    """The radius-s ball of the center's ``direction`` edge inside the
    center's radius-t node ball."""
    dim = direction // 2 + 1
    center = ball_paths(delta, t_center)
    idx = {p: i for i, p in enumerate(center)}
    anchor_p, anchor_m = ((), (direction,)) if direction % 2 == 0 else ((direction,), ())
    abs_list = []
    for side, q in edge_positions(delta, s_edge, dim):
        anchor = anchor_p if side == "P" else anchor_m
        p = compose(anchor, q)
        abs_list.append(p if len(p) <= t_center else ("free", side, q))
    return _classify(idx, abs_list)


def endpoint_completion_frame(delta, t, s_edge, dim, side):
    """An endpoint's radius-t node ball inside the radius-s edge ball: the
    free positions are exactly the completions an edge-based simulation
    enumerates."""
    edge_idx = {pos: i for i, pos in enumerate(edge_positions(delta, s_edge, dim))}
    abs_list = []
    for q in ball_paths(delta, t):
        coord = translate_edge_coord(q, dim, side)
        abs_list.append(coord if coord in edge_idx else ("free", side, q))
    return _classify(edge_idx, abs_list)


def key_tables(frame, b, source_positions):
    """Numpy lookup tables assembling target keys from (source key, free
    counter): ``target_key = known_tab[source_key] | free_tab[counter]``."""
    src_bits = b * source_positions
    free_bits = b * frame.free_count
    if src_bits > TABLE_BITS_CAP or free_bits > TABLE_BITS_CAP:
        raise BudgetExceededError("assembly table past the bit cap")
    if src_bits + free_bits > KERNEL_BUDGET_BITS:
        # exact counting for t >= 2 is out of budget; use Monte Carlo via
        # the engine instead
        raise BudgetExceededError(
            f"{src_bits + free_bits} conditioning+completion bits exceed "
            f"the exact budget of {KERNEL_BUDGET_BITS}")
    mask = (1 << b) - 1
    sigma = np.arange(1 << src_bits, dtype=np.int64)
    known_tab = np.zeros_like(sigma)
    for j, i in frame.known:
        known_tab |= ((sigma >> (b * i)) & mask) << (b * j)
    ctr = np.arange(1 << (b * frame.free_count), dtype=np.int64)
    free_tab = np.zeros_like(ctr)
    for slot, j in enumerate(frame.free):
        free_tab |= ((ctr >> (b * slot)) & mask) << (b * j)
    return known_tab, free_tab


# ---------------------------------------------------------------------------
# Table algorithms
# ---------------------------------------------------------------------------


def _check_table_bits(bits):
    if bits > TABLE_BITS_CAP:
        raise BudgetExceededError(
            f"table over {bits} bits exceeds the {TABLE_BITS_CAP}-bit cap")


@dataclass
class NodeTable:
    """t-round node algorithm on the oriented tree as an explicit table:
    entry ``key`` (packed ball bits) holds the output color in ``[0, c)``."""

    delta: int
    t: int
    b: int
    c: int
    table: np.ndarray
    name: str = ""

    @property
    def positions(self):
        return ball_paths(self.delta, self.t)

    @classmethod
    def from_rule(cls, delta, t, b, c, fn, name=""):
        """``fn(bits)`` sees ``{path: bits_int}`` and returns a color."""
        paths = ball_paths(delta, t)
        m = len(paths)
        _check_table_bits(b * m)
        mask = (1 << b) - 1
        table = np.empty(1 << (b * m), dtype=np.int64)
        for key in range(table.size):
            bits = {p: (key >> (i * b)) & mask for i, p in enumerate(paths)}
            out = fn(bits)
            if not 0 <= out < c:
                raise InvalidParameterError(f"rule output {out} outside [0,{c})")
            table[key] = out
        return cls(delta=delta, t=t, b=b, c=c, table=table, name=name)

    def pack(self, bits_by_path):
        key = 0
        for i, p in enumerate(self.positions):
            key |= bits_by_path[p] << (i * self.b)
        return key


@dataclass
class EdgeTable:
    """t-round edge algorithm: one table per dimension over packed edge-ball
    bits; entries index into ``labels``."""

    delta: int
    t: int
    b: int
    labels: tuple
    tables: dict
    name: str = ""

    @property
    def c(self):
        return len(self.labels)

    def positions(self, dim):
        return edge_positions(self.delta, self.t, dim)

    @classmethod
    def from_rule(cls, delta, t, b, labels, fn, name=""):
        """``fn(dim, bits)`` sees ``{(side, path): bits_int}`` and returns a
        label index."""
        labels = tuple(labels)
        tables = {}
        for dim in range(1, delta // 2 + 1):
            pos = edge_positions(delta, t, dim)
            m = len(pos)
            _check_table_bits(b * m)
            mask = (1 << b) - 1
            table = np.empty(1 << (b * m), dtype=np.int64)
            for key in range(table.size):
                bits = {p: (key >> (i * b)) & mask for i, p in enumerate(pos)}
                out = fn(dim, bits)
                if not 0 <= out < len(labels):
                    raise InvalidParameterError(f"rule output {out} outside the palette")
                table[key] = out
            tables[dim] = table
        return cls(delta=delta, t=t, b=b, labels=labels, tables=tables, name=name)

    def pack(self, dim, bits_by_pos):
        key = 0
        for i, p in enumerate(self.positions(dim)):
            key |= bits_by_pos[p] << (i * self.b)
        return key


# ---------------------------------------------------------------------------
# Reading packed keys off concrete graphs
# ---------------------------------------------------------------------------


def walk_direction_path(g, start, path):
    """Follow direction slots from ``start``; None when the tree ends."""
    x = start
    for d in path:
        dim, sign = d // 2 + 1, (+1 if d % 2 == 0 else -1)
        x = g.neighbor_by_direction(x, dim, sign)
        if x is None:
            return None
    return x


def pack_node_view(g, v, t, b, assignment):
    """Packed radius-t key around node v of a concrete oriented tree."""
    key = 0
    for i, p in enumerate(ball_paths(g.delta, t)):
        x = walk_direction_path(g, v, p)
        if x is None:
            raise TotalRuleViolation(f"node {v} lacks a full radius-{t} ball")
        key |= assignment.bits[x] << (i * b)
    return key


def pack_edge_view(g, u, v, t, b, assignment):
    """``(dim, packed key)`` for the edge {u, v} of a concrete oriented tree."""
    orient = g.orientation_at(u, v)
    if orient is None:
        raise TotalRuleViolation(f"edge {u}-{v} is not oriented")
    dim, sign = orient
    plus, minus = (u, v) if sign > 0 else (v, u)
    key = 0
    for i, (side, q) in enumerate(edge_positions(g.delta, t, dim)):
        x = walk_direction_path(g, plus if side == "P" else minus, q)
        if x is None:
            raise TotalRuleViolation(f"edge {u}-{v} lacks a full radius-{t} ball")
        key |= assignment.bits[x] << (i * b)
    return dim, key
