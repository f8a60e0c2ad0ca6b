"""Analytic failure-probability bound calculators.

Everything here is desk arithmetic: exact rationals where the quantity is
rational, mpmath at >= 256 bits otherwise.  Logarithms are base 2
throughout (including iterated towers), a fixed convention that makes
every reported number reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import DomainError, InvalidParameterError

PRECISION_BITS = 256


def log_star(x):
    """Iterated-logarithm count: applications of log2 until the value is <= 1."""
    count = 0
    x = mpmath.mpf(x)
    while x > 1:
        x = mpmath.log(x, 2)
        count += 1
    return count


def claim_ball_radius(n, delta=4):
    """Radius k at which a leaf-free ball of a delta-regular tree contains
    exactly n^(1/3) nodes: log_{delta-1}((n^(1/3)-1)(delta-2)/delta + 1).
    For delta = 4 this is log3((n^(1/3)+1)/2)."""
    if delta < 3:
        raise InvalidParameterError("delta must be >= 3")
    if n < 8:
        raise InvalidParameterError("n too small")
    with mpmath.workprec(PRECISION_BITS):
        x = (mpmath.mpf(n) ** (mpmath.mpf(1) / 3) - 1) * (delta - 2) / delta + 1
        return float(mpmath.log(x, delta - 1))


def iterated_log2(x, times):
    """log2 applied ``times`` times; raises if an intermediate value
    reaches <= 1 before the tower is finished."""
    val = mpmath.mpf(x)
    for i in range(times):
        if val <= 1:
            raise DomainError(
                f"iterated log undefined: value <= 1 after {i} applications")
        val = mpmath.log(val, 2)
    return val


# ---------------------------------------------------------------------------
# Zero-round optimum
# ---------------------------------------------------------------------------


@dataclass
class ZeroRoundOptimum:
    c: int
    delta: int
    closed_form: Fraction          # c**(-delta)
    uniform: tuple
    numeric_minimum: float
    numeric_argmin: tuple
    iterations: int


def _project_to_simplex(v):
    # Euclidean projection onto {x >= 0, sum x = 1}
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def zero_round_optimum(c, delta, iterations=3000):
    """Minimize the zero-round failure probability sum_i D(i)^(delta+1)
    over color distributions D.

    The symmetric convex objective is minimized by the uniform
    distribution, giving c**(-delta); projected gradient descent confirms
    this numerically from a deliberately lopsided start.  A first phase
    uses the globally safe step 1/L (L the Lipschitz constant of the
    gradient on the simplex); once near the optimum the Hessian is
    isotropic with eigenvalue (delta+1)*delta*c^(1-delta), so a
    curvature-matched step finishes at machine precision.
    """
    if c < 1:
        raise InvalidParameterError("palette size must be >= 1")
    if c == 1:
        return ZeroRoundOptimum(c=1, delta=delta, closed_form=Fraction(1),
                                uniform=(1.0,), numeric_minimum=1.0,
                                numeric_argmin=(1.0,), iterations=0)
    x = np.arange(1.0, c + 1.0)
    x /= x.sum()
    power = delta + 1
    safe_step = 1.0 / (power * delta)
    local_step = c ** (delta - 1) / (power * delta)
    for it in range(iterations):
        grad = power * x ** (power - 1)
        step = safe_step if it < iterations // 3 else local_step
        x = _project_to_simplex(x - step * grad)
    value = float((x ** power).sum())
    return ZeroRoundOptimum(
        c=c, delta=delta,
        closed_form=Fraction(1, c**delta),
        uniform=tuple([1.0 / c] * c),
        numeric_minimum=value,
        numeric_argmin=tuple(float(t) for t in x),
        iterations=iterations)


def zero_round_optimum_grid(c, delta, steps=10**4):
    """Independent 1-d confirmation for c = 2: grid search over D(1)."""
    if c != 2:
        raise InvalidParameterError("grid oracle is for two colors")
    best = None
    for i in range(steps + 1):
        p = i / steps
        val = p ** (delta + 1) + (1 - p) ** (delta + 1)
        if best is None or val < best[0]:
            best = (val, p)
    return best


# ---------------------------------------------------------------------------
# Palette/failure recurrence
# ---------------------------------------------------------------------------


@dataclass
class RecurrenceBound:
    c0: int
    p0: Fraction
    t: int
    delta: int
    closed_form: Fraction
    iterated: Fraction
    steps: int

    @property
    def agree(self):
        return self.closed_form == self.iterated


def recurrence_bound(c0, p0, t, delta=4):
    """Lower bound (p0/((delta+1) c0))^((delta+1)^(2t+1)) on the local
    failure of a t-round weak 2-coloring algorithm, given that every
    0-round weak c0-coloring fails with probability at least p0.

    Computed twice in exact rational arithmetic: directly, and by raising
    to the (delta+1)-th power 2t+1 times; both must agree bit for bit.
    """
    if c0 < 1 or t < 0:
        raise InvalidParameterError("need c0 >= 1 and t >= 0")
    p0 = Fraction(p0)
    if not 0 <= p0 <= 1:
        raise InvalidParameterError("p0 must be a probability")
    base = p0 / ((delta + 1) * c0)
    steps = 2 * t + 1
    closed = base ** ((delta + 1) ** steps)
    iterated = base
    for _ in range(steps):
        iterated = iterated ** (delta + 1)
    return RecurrenceBound(c0=c0, p0=p0, t=t, delta=delta,
                           closed_form=closed, iterated=iterated, steps=steps)


def audit_chain(c0, p0, t, delta=4, precision_bits=PRECISION_BITS):
    """The analysis' auxiliary sequence, exposed for audit: going up from
    (p_1~ = p0, c_1~ = c0) with c_i~ = 2^(2 c_{i+1}~) read downward and
    p_{i+1}~ = (p_i~/(delta+1))^(delta+1) / c_{i+1}~^delta, for 2t+1 steps.

    Palette entries shrink through real-valued half-logs; every element
    stays at or above the closed form.  High-precision floats (the values
    underflow any fixed-exponent format long before t = 3).
    """
    with mpmath.workprec(precision_bits):
        c_seq = [mpmath.mpf(c0)]
        p_seq = [mpmath.mpf(p0.numerator) / mpmath.mpf(p0.denominator)
                 if isinstance(p0, Fraction) else mpmath.mpf(p0)]
        for _ in range(2 * t + 1):
            c_next = mpmath.log(c_seq[-1], 2) / 2 if c_seq[-1] > 0 else c_seq[-1]
            c_seq.append(c_next)
            p_seq.append((p_seq[-1] / (delta + 1)) ** (delta + 1)
                         / abs(c_next) ** delta if c_next != 0 else p_seq[-1])
        return c_seq, p_seq


# ---------------------------------------------------------------------------
# Global success bound
# ---------------------------------------------------------------------------


@dataclass
class GlobalBound:
    n: int
    t: int
    b: int
    tower: float                   # log^(2b) n
    independent_executions: float  # n^(1/(3(2t+1)))
    bound: float
    relaxed: float                 # e^(-exponent/loglog n) + 1/(2 n^(1/3))
    id_term: float                 # 1/(2 n^(1/3))
    condition_holds: bool          # exponent / loglog n > 2
    precision_bits: int

    def to_json_obj(self):
        return {"inputs": {"n": self.n, "t": self.t, "b": self.b},
                "value": self.bound, "relaxed": self.relaxed,
                "tower": self.tower, "id_term": self.id_term,
                "independent_executions": self.independent_executions,
                "condition_holds": self.condition_holds,
                "precision_bits": self.precision_bits}


def global_success_upper_bound(n, t, b, precision_bits=PRECISION_BITS):
    """Upper bound (1 - 1/log^(2b) n)^(n^(1/(3(2t+1)))) + 1/(2 n^(1/3)) on
    the probability that a sub-(log*)-round algorithm produces a legal weak
    2-coloring, together with its exponential relaxation."""
    if n < 2 or t < 0 or b < 1:
        raise InvalidParameterError("need n >= 2, t >= 0, b >= 1")
    with mpmath.workprec(precision_bits):
        nn = mpmath.mpf(n)
        tower = iterated_log2(nn, 2 * b)
        if tower <= 1:
            raise DomainError("log^(2b) n must exceed 1")
        expo = nn ** (mpmath.mpf(1) / (3 * (2 * t + 1)))
        id_term = 1 / (2 * nn ** (mpmath.mpf(1) / 3))
        bound = (1 - 1 / tower) ** expo + id_term
        loglog = iterated_log2(nn, 2)
        relaxed = mpmath.e ** (-expo / loglog) + id_term
        return GlobalBound(
            n=n, t=t, b=b,
            tower=float(tower),
            independent_executions=float(expo),
            bound=float(bound),
            relaxed=float(relaxed),
            id_term=float(id_term),
            condition_holds=bool(expo / loglog > 2),
            precision_bits=precision_bits)


# ---------------------------------------------------------------------------
# Identifier collisions
# ---------------------------------------------------------------------------


@dataclass
class IdCollisionBound:
    n: int
    value: object                  # Fraction when n is a perfect cube
    bound: object
    holds: bool


def id_collision_bound(n):
    """Probability bound C(n^(1/3), 2)/n on a random {1..n} id assignment
    colliding inside a ball of n^(1/3) nodes, with the strict comparison
    against 1/(2 n^(1/3))."""
    if n < 8:
        raise InvalidParameterError("need n >= 8")
    root = round(n ** (1 / 3))
    if root**3 == n:
        x = Fraction(root)
        value = x * (x - 1) / (2 * n)
        bound = Fraction(1, 2 * root)
        return IdCollisionBound(n=n, value=value, bound=bound,
                                holds=value < bound)
    with mpmath.workprec(PRECISION_BITS):
        x = mpmath.mpf(n) ** (mpmath.mpf(1) / 3)
        value = x * (x - 1) / (2 * n)
        bound = 1 / (2 * x)
        return IdCollisionBound(n=n, value=float(value), bound=float(bound),
                                holds=bool(value < bound))
