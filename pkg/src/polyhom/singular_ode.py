"""The singular ODE u'' + p u'/t + q u/t^2 = F with integer indicial roots.

Everything here is written for the Euler form E u = t^2 u'' + p t u' + q u,
which equals t^2 times the operator above and maps t^m (log t)^j to

    t^m [P(m) (log t)^j + P'(m) j (log t)^(j-1) + j (j-1) (log t)^(j-2)]

with P(m) = (m - m_low)(m - m_high).  The reduction chain
u_l = u_{l-1}' - 2 u_{l-1}/t lowers both roots by one per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import MathDomainError
from .series import LogCaps, LogSeries
from .tangential import TangentialPoly

DEFAULT_RADIUS = Fraction(1, 2)
T_MIN = 1e-8


def indicial_roots(p: int, q: int) -> tuple[int, int]:
    """Integer roots (m_low, m_high) of m^2 + (p - 1) m + q, with m_low <= 0 and m_high >= 3."""
    disc = (p - 1) ** 2 - 4 * q
    if disc < 0:
        raise MathDomainError(f"indicial roots of (p, q) = ({p}, {q}) are complex")
    root = math.isqrt(disc)
    if root * root != disc or (1 - p + root) % 2:
        raise MathDomainError(f"indicial roots of (p, q) = ({p}, {q}) are not integers")
    lo, hi = (1 - p - root) // 2, (1 - p + root) // 2
    if lo > 0 or hi < 3:
        raise MathDomainError(f"indicial roots ({lo}, {hi}) need m_low <= 0 and m_high >= 3")
    return lo, hi


def normal_form(m_low: int, m_high: int) -> tuple[int, int]:
    """(p, q) whose indicial roots are the given pair."""
    return 1 - (m_low + m_high), m_low * m_high


@dataclass(frozen=True)
class SingularProblem:
    """Normal-form data of E v = G(v) where G(v) = t^2 F(x', t, V(v)).

    ``rhs`` maps a truncated series v to G(v); None stands for F = 0.  The
    expansion of v has no t^0 term, so G must not produce one either.
    ``offset`` is added back to v to recover the physical unknown.
    """

    p: int
    q: int
    m_low: int
    m_high: int
    rhs: Callable[[LogSeries], LogSeries] | None = None
    dim: int = 0
    name: str = "problem"
    offset: Fraction = Fraction(0)
    log_divisor: int | None = None
    bound_M: float = 1.0
    bound_R: float = 1.0
    info: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if (self.p, self.q) != normal_form(self.m_low, self.m_high):
            raise MathDomainError(
                f"(p, q) = ({self.p}, {self.q}) does not match roots ({self.m_low}, {self.m_high})"
            )
        indicial_roots(self.p, self.q)

    @classmethod
    def from_roots(cls, m_low: int, m_high: int, **kw) -> "SingularProblem":
        p, q = normal_form(m_low, m_high)
        return cls(p, q, m_low, m_high, **kw)

    @classmethod
    def from_pq(cls, p: int, q: int, **kw) -> "SingularProblem":
        lo, hi = indicial_roots(p, q)
        return cls(p, q, lo, hi, **kw)

    @property
    def gap(self) -> int:
        return self.m_high - self.m_low

    @property
    def log_caps(self) -> LogCaps | None:
        return None if self.log_divisor is None else LogCaps(self.log_divisor)

    def indicial(self, m: int) -> int:
        return (m - self.m_low) * (m - self.m_high)

    def indicial_slope(self, m: int) -> int:
        return 2 * m + self.p - 1

    def G(self, v: LogSeries) -> LogSeries:
        if self.rhs is None:
            return LogSeries.zero(v.dim, v.K, v.W, v.exact)
        return self.rhs(v)


# ---------------------------------------------------------------------------
# Euler operator on series


def euler_apply(v: LogSeries, p: int, q: int) -> LogSeries:
    """t^2 v'' + p t v' + q v, computed termwise (keeps the truncation of v)."""
    out: dict[tuple[int, int], TangentialPoly] = {}

    def put(key, c):
        out[key] = c if key not in out else out[key] + c

    for (m, j), c in v.coeffs.items():
        P = m * m + (p - 1) * m + q
        dP = 2 * m + p - 1
        if P:
            put((m, j), c.scale(P))
        if j >= 1 and dP:
            put((m, j - 1), c.scale(dP * j))
        if j >= 2:
            put((m, j - 2), c.scale(j * (j - 1)))
    return LogSeries(v.dim, v.K, out, v.W, v.exact)


def residual(prob: SingularProblem, v: LogSeries) -> LogSeries:
    """E v - G(v); its vanishing through t^K means L0 v = F through order K - 2."""
    return euler_apply(v, prob.p, prob.q) - prob.G(v)


def solve_block(
    g: Mapping[int, TangentialPoly], i: int, p: int, q: int, datum: TangentialPoly | None = None
) -> dict[int, TangentialPoly]:
    """Coefficients c_j of t^i (log t)^j with E(sum c_j t^i log^j) = sum g_j t^i log^j.

    Away from the roots the block is P(i) times the identity plus a nilpotent
    shift, inverted from the top log power down.  At a root the log power
    rises by one and the t^i (log t)^0 coefficient is the free ``datum``.
    """
    P = i * i + (p - 1) * i + q
    dP = 2 * i + p - 1
    top = max(g, default=-1)
    zero = next(iter(g.values())).scale(0) if g else None
    c: dict[int, TangentialPoly] = {}
    if P != 0:
        for j in range(top, -1, -1):
            rhs = g.get(j, zero)
            if (j + 1) in c:
                rhs = rhs - c[j + 1].scale(dP * (j + 1))
            if (j + 2) in c:
                rhs = rhs - c[j + 2].scale((j + 2) * (j + 1))
            val = rhs.scale(Fraction(1, P))
            if val:
                c[j] = val
        return c
    if dP == 0:
        raise MathDomainError(f"double indicial root at t^{i}; the block is not invertible")
    # at a root: dP (j+1) c_{j+1} + (j+2)(j+1) c_{j+2} = g_j
    for j in range(top, -1, -1):
        rhs = g.get(j, zero)
        if (j + 2) in c:
            rhs = rhs - c[j + 2].scale((j + 2) * (j + 1))
        val = rhs.scale(Fraction(1, dP * (j + 1)))
        if val:
            c[j + 1] = val
    if datum is not None and datum:
        c[0] = datum
    return c


# ---------------------------------------------------------------------------
# reduction chain


@dataclass(frozen=True)
class ReductionChain:
    """Level l of the chain: u_l solves u'' + p_l u'/t + q_l u/t^2 = d^l F/dt^l."""

    level: int
    p_l: int
    q_l: int
    m_low_l: int
    m_high_l: int
    r: Fraction = DEFAULT_RADIUS


def reduce_order(prob: SingularProblem, l: int, r=DEFAULT_RADIUS) -> ReductionChain:
    if not 0 <= l <= prob.m_high - 2:
        raise MathDomainError(f"reduction level {l} outside 0..{prob.m_high - 2}")
    p_l = 2 * l + prob.p
    q_l = l * l + (prob.p - 1) * l + prob.q
    # the same pair written through the roots
    assert p_l == 1 + 2 * l - (prob.m_low + prob.m_high)
    assert q_l == (prob.m_low - l) * (prob.m_high - l)
    return ReductionChain(l, p_l, q_l, prob.m_low - l, prob.m_high - l, Fraction(r))


LaurentTerms = dict[tuple[int, int], object]


def chain_step(terms: LaurentTerms) -> LaurentTerms:
    """u -> u' - 2u/t on a finite sum of c t^m (log t)^j (m may be negative)."""
    out: LaurentTerms = {}

    def put(key, c):
        if key in out:
            out[key] = out[key] + c
        else:
            out[key] = c

    for (m, j), c in terms.items():
        if m - 2:
            put((m - 1, j), c * (m - 2))
        if j:
            put((m - 1, j - 1), c * j)
    return {k: v for k, v in out.items() if v != 0}


def push_through_chain(terms: LaurentTerms, levels: int) -> LaurentTerms:
    for _ in range(levels):
        terms = chain_step(terms)
    return terms


def _series_terms(u: LogSeries) -> LaurentTerms:
    if u.dim == 0:
        return {k: c.constant_term() for k, c in u.coeffs.items()}
    return dict(u.coeffs)


def extract_first_nonlocal(prob: SingularProblem, u: LogSeries):
    """(c21, c20): coefficients of t^2 log t and t^2 in u_{m_high - 2}, exactly."""
    terms = push_through_chain(_series_terms(u), prob.m_high - 2)
    zero = Fraction(0) if u.dim == 0 else TangentialPoly.zero(u.dim, None, u.exact)
    return terms.get((2, 1), zero), terms.get((2, 0), zero)


def lift_to_top(prob: SingularProblem, c21, c20):
    """Invert the chain on span{t^m_high, t^m_high log t}: returns (c_{m_high,1}, c_{m_high,0}).

    The images of the two basis elements are computed by pushing them
    through the chain, so no normalization is assumed.
    """
    l = prob.m_high - 2
    img0 = push_through_chain({(prob.m_high, 0): Fraction(1)}, l)
    img1 = push_through_chain({(prob.m_high, 1): Fraction(1)}, l)
    a = img0.get((2, 0), Fraction(0))  # t^m -> a t^2
    b = img1.get((2, 1), Fraction(0))  # t^m log t -> b t^2 log t + beta t^2
    beta = img1.get((2, 0), Fraction(0))
    if a == 0 or b == 0:
        raise MathDomainError("reduction chain degenerates on the resonant basis")
    c_log = c21 * (1 / b)
    c_top = (c20 - c_log * beta) * (1 / a)
    return c_log, c_top


def forced_log_coefficient(prob: SingularProblem, resonant_residual):
    """c_{m_high,1} forced by a residual f t^(m_high - 2) in F: f / (m_high - m_low)."""
    return resonant_residual * Fraction(1, prob.gap)


# ---------------------------------------------------------------------------
# numeric paths


def _geometric_pieces(a: float, b: float, ratio: float = 0.5) -> list[tuple[float, float]]:
    pieces = []
    hi = b
    while hi > a:
        lo = max(hi * ratio, a)
        pieces.append((lo, hi))
        hi = lo
    return pieces


class ClosedFormSolution:
    """u(t) on (0, r] from the three-term integral representation."""

    def __init__(self, prob: SingularProblem, F: Callable[[float], float], u_at_r: float, r: float, t_min: float):
        self.prob = prob
        self.F = F
        self.r = float(r)
        self.t_min = t_min
        lo = prob.m_low
        self.low_total = self._low_integral(self.r)
        self.c_top = (u_at_r + self.r**lo * self.low_total / prob.gap) / self.r**prob.m_high

    def _quad(self, f, a, b):
        from scipy.integrate import quad

        total = 0.0
        last = 0.0
        for lo, hi in _geometric_pieces(a, b):
            val, err = quad(f, lo, hi, limit=200)
            if not math.isfinite(val) or err > 1e-8 * (1 + abs(val)):
                raise MathDomainError(f"quadrature did not converge on [{lo:.3g}, {hi:.3g}]")
            total += val
            last = val
        return total, last

    def _low_integral(self, t: float) -> float:
        lo = self.prob.m_low
        total, last = self._quad(lambda s: s ** (1 - lo) * self.F(s), self.t_min, t)
        if abs(last) > 1e-6 * (1 + abs(total)):
            raise MathDomainError("F is not integrable against s^(1 - m_low) near 0")
        return total

    def __call__(self, t: float) -> float:
        prob = self.prob
        low = self._low_integral(t)
        high, _ = self._quad(lambda s: s ** (1 - prob.m_high) * self.F(s), t, self.r) if t < self.r else (0.0, 0.0)
        return self.c_top * t**prob.m_high - (t**prob.m_low * low + t**prob.m_high * high) / prob.gap


def ode_closed_form(
    prob: SingularProblem, F: Callable[[float], float], u_at_r: float, r: float = 0.5, t_min: float = T_MIN
) -> ClosedFormSolution:
    return ClosedFormSolution(prob, F, float(u_at_r), r, t_min)


def richardson_derivatives(f, t, order: int, levels: int = 4):
    """[f(t), f'(t), ..., f^(order)(t)] by central differences with h = t/8 and Richardson extrapolation.

    ``f`` and ``t`` may be mpmath numbers; the arithmetic follows them.
    """
    out = [f(t)]
    for k in range(1, order + 1):
        table = []
        h = t / 8
        for _ in range(levels):
            table.append(_central(f, t, k, h))
            h = h / 2
        # eliminate h^2, h^4, ...
        for level in range(1, levels):
            fac = 4**level
            table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
        out.append(table[0])
    return out


def _central(f, t, k: int, h):
    # k-th difference on the symmetric stencil t + (i - k/2) h
    total = 0
    for i in range(k + 1):
        total = total + (-1) ** (k - i) * math.comb(k, i) * f(t + (2 * i - k) * h / 2)
    return total / h**k


def _gauss_nodes(count: int = 10):
    import numpy as np

    x, w = np.polynomial.legendre.leggauss(count)
    return list(zip(x.tolist(), w.tolist()))


def extract_first_nonlocal_numeric(
    prob: SingularProblem, u: Callable, r=DEFAULT_RADIUS, t_min: float = T_MIN, dps: int = 60
) -> tuple[float, float]:
    """(c21, c20) from samples of u alone.

    v_l = d^l(u/t^2)/dt^l is obtained by Richardson differences; F_l is the
    level-l residual of t^2 v_l; c21 and c20 follow from the integral
    representation at level m_high - 2.  ``u`` is evaluated in mpmath
    precision ``dps`` because high derivatives are taken near t = 0.
    """
    import mpmath

    l = prob.m_high - 2
    chain = reduce_order(prob, l, r)
    gap = prob.gap
    with mpmath.workdps(dps):
        v0 = lambda t: u(t) / t**2
        r_mp = mpmath.mpf(Fraction(r).numerator) / Fraction(r).denominator

        def F_l(t):
            d = richardson_derivatives(v0, t, l + 2)
            v, v1, v2 = d[l], d[l + 1], d[l + 2]
            return 2 * v + 4 * t * v1 + t**2 * v2 + chain.p_l * (2 * v + t * v1) + chain.q_l * v

        # F_l(0) from F_l = F0 + t (b_0 + b_1 log t + ... + b_3 log^3 t) fitted near t_min
        pts = [mpmath.mpf(t_min) * 2**k for k in range(5)]
        rows = mpmath.matrix([[1] + [s * mpmath.log(s) ** j for j in range(4)] for s in pts])
        fit = mpmath.lu_solve(rows, mpmath.matrix([F_l(s) for s in pts]))
        F0 = fit[0]
        nodes = _gauss_nodes()
        I_low = mpmath.mpf(0)
        # the model also integrates (F_l - F0)/s over (0, t_min)
        eps = pts[0]
        le = mpmath.log(eps)
        I_tilde = sum(
            fit[1 + j] * eps * sum((-1) ** k * mpmath.ff(j, k) * le ** (j - k) for k in range(j + 1))
            for j in range(4)
        )
        for a, b in _geometric_pieces(t_min, float(Fraction(r))):
            a, b = mpmath.mpf(a), mpmath.mpf(b)
            half, mid = (b - a) / 2, (a + b) / 2
            for x, w in nodes:
                s = mid + half * x
                Fs = F_l(s)
                I_low += w * half * s ** (gap - 1) * Fs
                I_tilde += w * half * (Fs - F0) / s
        u_l_r = r_mp**2 * richardson_derivatives(v0, r_mp, l)[l]
        c21 = F0 / gap
        c20 = (
            u_l_r / r_mp**2
            + r_mp ** (-gap) / gap * I_low
            - F0 / gap**2
            - mpmath.log(r_mp) / gap * F0
            - I_tilde / gap
        )
        return float(c21), float(c20)


# ---------------------------------------------------------------------------
# reconstruction from the chain


def reconstruct(v_at_zero, v_l: LogSeries, l: int) -> LogSeries:
    """u = sum_{j<l} v_j(0) t^(j+2)/j! + t^2 * (l-fold iterated integral of v_l from 0).

    Exact when v_l is a log-free series; ``v_at_zero`` lists v_0(0), ..., v_{l-1}(0).
    """
    if len(v_at_zero) != l:
        raise ValueError(f"need {l} values v_j(0), got {len(v_at_zero)}")
    if not v_l.is_log_free():
        raise MathDomainError("exact reconstruction needs a log-free v_l")
    coeffs: dict[tuple[int, int], object] = {}
    for j, val in enumerate(v_at_zero):
        coeffs[(j + 2, 0)] = Fraction(val) / math.factorial(j) if not isinstance(val, TangentialPoly) else val.scale(
            Fraction(1, math.factorial(j))
        )
    for (m, _), c in v_l.coeffs.items():
        # l-fold integral of t^m from 0 is t^(m+l) m!/(m+l)!
        factor = Fraction(math.factorial(m), math.factorial(m + l))
        key = (m + l + 2, 0)
        term = c.scale(factor)
        coeffs[key] = term if key not in coeffs else coeffs[key] + term
    return LogSeries(v_l.dim, v_l.K + l + 2, coeffs, v_l.W + l + 2, v_l.exact)
