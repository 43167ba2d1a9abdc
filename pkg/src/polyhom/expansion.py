"""Two independent constructions of the expansion and the majorant monitor.

``match_coefficients`` solves E v = G(v) order by order.  ``run_iteration``
builds a seed from the local coefficients and then runs the Picard scheme
w_k = (A_high F_k - A_low F_k)/(m_high - m_low),  A_mu f = t^mu int_0^t rho^(1-mu) f,
with F_k the increment of the right-hand side.  In exact mode the two
results must agree term by term.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MathDomainError, PolyhomError
from .series import LogSeries, antideriv_monomial, lambda_apply, two_var_lift, weighted_antideriv
from .singular_ode import SingularProblem, euler_apply, solve_block
from .tangential import TangentialPoly


class StabilizationError(PolyhomError):
    """The iteration failed to become stationary in the guaranteed number of steps."""

    exit_code = 4


def _datum_poly(prob: SingularProblem, datum, W: int) -> TangentialPoly:
    if isinstance(datum, TangentialPoly):
        if datum.dim != prob.dim:
            raise MathDomainError(f"datum has {datum.dim} tangential variables, problem has {prob.dim}")
        return datum.truncate(W - prob.m_high)
    return TangentialPoly.constant(0 if datum is None else datum, prob.dim)


def _check_order(prob: SingularProblem, K: int) -> None:
    if K < prob.m_high + 1:
        raise MathDomainError(f"target order K={K} must be at least m_high + 1 = {prob.m_high + 1}")


# ---------------------------------------------------------------------------
# route 1: order-by-order matching


def match_coefficients(prob: SingularProblem, datum, K: int, W: int | None = None) -> LogSeries:
    """Triangular solve of E v = G(v) through t^K with c_{m_high,0} = datum.

    Relies on G's t^i coefficient depending only on coefficients of v of
    order below i, which holds for every right-hand side built from the
    argument vector.
    """
    W = K if W is None or prob.dim == 0 else W
    dpoly = _datum_poly(prob, datum, W)
    coeffs: dict[tuple[int, int], TangentialPoly] = {}
    for i in range(1, K + 1):
        known = LogSeries._raw(prob.dim, i, W, dict(coeffs), True)
        g = prob.G(known)
        if g.K < i:
            raise PolyhomError(f"right-hand side lost precision below t^{i}")
        block = g.block(i)
        if i == prob.m_high:
            sol = solve_block(block, i, prob.p, prob.q, dpoly)
        else:
            if prob.indicial(i) == 0:
                raise MathDomainError(f"singular block at t^{i}")
            sol = solve_block(block, i, prob.p, prob.q)
        for j, c in sol.items():
            c = c.truncate(W - i)
            if c:
                coeffs[(i, j)] = TangentialPoly._raw(prob.dim, c.terms, W - i, True)
    out = LogSeries(prob.dim, K, coeffs, W)
    return out.with_log_caps(prob.log_caps) if prob.log_caps else out


# ---------------------------------------------------------------------------
# route 2: seed plus Picard iteration


def euler_inverse(prob: SingularProblem, r: LogSeries, regularized: bool = False) -> LogSeries:
    """w = (A_high - A_low)(r/t^2)/(m_high - m_low), so that E w = r.

    With ``regularized`` the divergent integrals take their finite part,
    which is what the local stage needs for terms below the resonance.
    """
    out: dict[tuple[int, int], TangentialPoly] = {}
    scale = Fraction(1, prob.gap)
    for (m, j), c in r.coeffs.items():
        for mu, sign in ((prob.m_high, scale), (prob.m_low, -scale)):
            for p, lj, coef in antideriv_monomial(m - 2, j, mu, regularized):
                term = c.scale(sign * coef)
                out[(p, lj)] = term if (p, lj) not in out else out[(p, lj)] + term
    return LogSeries(r.dim, r.K, out, r.W, r.exact)


def picard_step(prob: SingularProblem, F_k: LogSeries) -> LogSeries:
    """w_k from the increment F_k = (G(v_{k-1}) - G(v_{k-2}))/t^2 via the two weighted antiderivatives."""
    hi = weighted_antideriv(F_k, prob.m_high)
    lo = weighted_antideriv(F_k, prob.m_low)
    w = (hi - lo).scale(Fraction(1, prob.gap))
    return w


def local_expansion(prob: SingularProblem, datum, W: int) -> LogSeries:
    """Local coefficients through t^(m_high+1) by fixed-point iteration of v = E^{-1} G(v) + datum t^m_high."""
    top = prob.m_high + 1
    dpoly = _datum_poly(prob, datum, W)
    kernel = LogSeries(prob.dim, top, {(prob.m_high, 0): dpoly}, W)
    v = kernel
    for _ in range(top + 2):
        sol = euler_inverse(prob, prob.G(v).truncate(top, W), regularized=True)
        sol.coeffs.pop((prob.m_high, 0), None)
        nxt = sol + kernel
        if nxt == v:
            return v
        v = nxt
    raise StabilizationError("local coefficients did not stabilize")


def seed_expansion(
    prob: SingularProblem, local_coeffs: LogSeries, datum, K: int | None = None, W: int | None = None
) -> LogSeries:
    """v_{m_high}: c_2..c_{m_high-1}, c_{m_high,1}, the datum, and c_{m_high+1,j} for j >= 1."""
    top = prob.m_high
    if local_coeffs.K < top + 1:
        raise MathDomainError(f"local coefficients are known only through t^{local_coeffs.K}, need t^{top + 1}")
    K = local_coeffs.K if K is None else K
    W = local_coeffs.W if W is None else W
    if prob.dim == 0:
        W = K
    keep = {}
    for (i, j), c in local_coeffs.coeffs.items():
        if i < top or (i == top and j >= 1) or (i == top + 1 and j >= 1):
            keep[(i, j)] = c
    keep[(top, 0)] = _datum_poly(prob, datum, W)
    return LogSeries(prob.dim, K, keep, W)


@dataclass
class IterationStep:
    k: int
    w: LogSeries
    v: LogSeries

    @property
    def order(self) -> int:
        return self.w.valuation()


@dataclass
class IterationTrace:
    problem: SingularProblem
    seed: LogSeries
    steps: list[IterationStep] = field(default_factory=list)

    @property
    def result(self) -> LogSeries:
        return self.steps[-1].v if self.steps else self.seed


def run_iteration(prob: SingularProblem, datum, K: int, W: int | None = None) -> tuple[LogSeries, IterationTrace]:
    """Seed plus Picard increments until the order-<=K part is stationary."""
    _check_order(prob, K)
    W = K if W is None or prob.dim == 0 else W
    local = local_expansion(prob, datum, W)
    seed = seed_expansion(prob, local, datum, K, W)
    trace = IterationTrace(prob, seed)
    # the first increment is the residual of the seed
    g_prev = prob.G(seed).truncate(K, W)
    F = (g_prev - euler_apply(seed, prob.p, prob.q)).shift(-2)
    v = seed
    k = prob.m_high + 1
    limit = K - prob.m_high + 2
    while True:
        w = picard_step(prob, F).truncate(K, W)
        if w.is_zero():
            break
        v = v + w
        trace.steps.append(IterationStep(k, w, v))
        if len(trace.steps) > limit:
            raise StabilizationError(f"no stabilization after {limit} steps")
        g = prob.G(v).truncate(K, W)
        F = (g - g_prev).shift(-2)
        g_prev = g
        k += 1
    out = v.truncate(K, W)
    return (out.with_log_caps(prob.log_caps) if prob.log_caps else out), trace


def physical(prob: SingularProblem, v: LogSeries) -> LogSeries:
    """offset + v: the expansion of the original unknown."""
    return v + prob.offset if prob.offset else v


# ---------------------------------------------------------------------------
# majorant monitor


@dataclass(frozen=True)
class MajorantConfig:
    s0: float = 0.25
    a0: float = 0.25
    theta: float = 0.5
    lattice: int = 32
    burn_in: int = 2
    threshold: float = 0.6

    def __post_init__(self):
        if not (self.s0 > 0 and self.a0 > 0 and 0 < self.theta < 1 and self.lattice >= 2):
            raise ValueError("majorant configuration needs s0, a0 > 0, 0 < theta < 1 and lattice >= 2")

    def a(self, k: int) -> float:
        """a_k with a_{k+1} = a_k (1 - (k+2)^-2); decreases to a0/2."""
        return self.a0 * (k + 2) / (2 * (k + 1))

    @property
    def a_limit(self) -> float:
        return self.a0 / 2


def _delta(t: float, theta: float) -> float:
    return t + theta * abs(t * math.log(t))


def _t_max(bound: float, theta: float) -> float:
    from scipy.optimize import brentq

    if bound <= 0:
        return 0.0
    hi = min(bound, 1.0 - 1e-15)
    return brentq(lambda t: _delta(t, theta) - bound, 1e-300, hi, xtol=1e-300, rtol=1e-14)


def sample_region(cfg: MajorantConfig, k: int) -> list[tuple[float, float, float]]:
    """Lattice points (s, t, weight) with delta(t) < a_k (s0 - s); weight = a_k(s0 - s)/delta - 1."""
    ak = cfg.a(k)
    pts = []
    for i in range(cfg.lattice):
        s = cfg.s0 * i / cfg.lattice
        bound = ak * (cfg.s0 - s)
        tm = _t_max(bound, cfg.theta)
        for j in range(cfg.lattice):
            t = tm * (j + 1) / (cfg.lattice + 1)
            pts.append((s, t, bound / _delta(t, cfg.theta) - 1))
    if not pts or all(t <= 0 for _, t, _ in pts):
        raise MathDomainError("empty majorant sample region")
    return pts


def series_norm(w: LogSeries, s: float, t: float) -> float:
    """sum |c_alpha| s^|alpha| t^i |log t|^j."""
    lt = abs(math.log(t))
    return sum(c.abs_norm(s) * t**i * lt**j for (i, j), c in w.coeffs.items())


def _twovar_norm(b, s: float, t: float) -> float:
    S = abs(t * math.log(t))
    return sum(c.abs_norm(s) * t**p * S**q for (p, q), c in b.coeffs.items())


def majorant_norm(w: LogSeries, k: int, cfg: MajorantConfig, m_high: int, scale_power: int = 0) -> float:
    """M_k of w / t^scale_power, sampled on the lattice."""
    best = 0.0
    for s, t, weight in sample_region(cfg, k):
        val = series_norm(w, s, t) / t ** (m_high - 1 + scale_power) * weight
        best = max(best, val)
    return best


@dataclass
class MajorantRow:
    k: int
    order: int
    m_w: float
    m_lambda: float
    m_dx: float

    @property
    def m_max(self) -> float:
        return max(self.m_w, self.m_lambda, self.m_dx)


@dataclass
class MajorantReport:
    rows: list[MajorantRow]
    ratio: float
    A: float
    passed: bool
    a_values: list[float]
    fit_points: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["k", "ord", "a_k", "M_w_over_t", "M_lambda_w_over_t", "M_dx_w", "M_max", "ratio"])
        prev = None
        for row, ak in zip(self.rows, self.a_values):
            ratio = "" if prev in (None, 0.0) else f"{row.m_max / prev:.6e}"
            out.writerow(
                [row.k, row.order, f"{ak:.6e}", f"{row.m_w:.6e}", f"{row.m_lambda:.6e}", f"{row.m_dx:.6e}", f"{row.m_max:.6e}", ratio]
            )
            prev = row.m_max
        out.writerow([])
        out.writerow(["fitted_ratio", f"{self.ratio:.6e}"])
        out.writerow(["fit_points", self.fit_points])
        out.writerow(["A", f"{self.A:.6e}"])
        out.writerow(["verdict", "PASS" if self.passed else "FAIL"])
        return buf.getvalue()


def majorant_report(trace: IterationTrace, cfg: MajorantConfig | None = None) -> MajorantReport:
    """Sampled M_k of w_k/T, Lambda w_k/T and D_x' w_k with a geometric fit after the burn-in."""
    cfg = cfg or MajorantConfig()
    m_high = trace.problem.m_high
    rows = []
    a_values = []
    for step in trace.steps:
        k, w = step.k, step.w
        region = sample_region(cfg, k)
        lam = lambda_apply(two_var_lift(w))
        parts = [w.partial(a) for a in range(w.dim)]
        m_w = m_l = m_d = 0.0
        for s, t, weight in region:
            base = weight / t ** (m_high - 1)
            m_w = max(m_w, series_norm(w, s, t) / t * base)
            m_l = max(m_l, _twovar_norm(lam, s, t) / t * base)
            if parts:
                m_d = max(m_d, sum(series_norm(p, s, t) for p in parts) * base)
        rows.append(MajorantRow(k, step.order, m_w, m_l, m_d))
        a_values.append(cfg.a(k))
    ratio = fit_ratio([r.m_max for r in rows], cfg.burn_in)
    A = max((r.m_max * 2**r.k for r in rows), default=0.0)
    fit_points = sum(1 for i, r in enumerate(rows) if i >= cfg.burn_in and r.m_max > 0)
    return MajorantReport(rows, ratio, A, ratio <= cfg.threshold, a_values, fit_points)


def fit_ratio(values: list[float], burn_in: int = 2) -> float:
    """exp of the least-squares slope of log(values) after dropping the burn-in; 0 when fewer than two remain."""
    pts = [(i, math.log(v)) for i, v in enumerate(values) if i >= burn_in and v > 0]
    if len(pts) < 2:
        return 0.0
    n = len(pts)
    mx = sum(x for x, _ in pts) / n
    my = sum(y for _, y in pts) / n
    sxx = sum((x - mx) ** 2 for x, _ in pts)
    sxy = sum((x - mx) * (y - my) for x, y in pts)
    return math.exp(sxy / sxx)
