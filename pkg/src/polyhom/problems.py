"""Built-in problems: minimal graphs in hyperbolic space, Loewner-Nirenberg, and a linear test family.

Each constructor returns a SingularProblem whose ``rhs`` computes
G(v) = t^2 F for the unknown v, where

* minimal graph: u = phi(x') + v(x', t) solves
  t^2 Delta u - t^2 u_i u_j u_ij / (1 + |Du|^2) - n t u_t = 0;
* Loewner-Nirenberg: u = d^{-(n-2)/2} (1 + v) solves
  Delta u = n(n-2)/4 u^{(n+2)/(n-2)} in a half-space or the unit ball;
* linear: E v = sum_k g_k t^k + lambda v^2 with prescribed roots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .errors import ConfigError, MathDomainError
from .series import LogSeries, TaylorData, compose_analytic, series_mul
from .singular_ode import SingularProblem
from .tangential import TangentialPoly, as_exact


def gen_binomial(alpha: Fraction, k: int) -> Fraction:
    """binom(alpha, k) for rational alpha."""
    out = Fraction(1)
    for i in range(k):
        out = out * (alpha - i) / (i + 1)
    return out


# ---------------------------------------------------------------------------
# minimal graphs


def _check_normalized(phi: TangentialPoly) -> None:
    if phi.constant_term() != 0:
        raise MathDomainError("boundary graph must vanish at the origin")
    for k in range(phi.dim):
        e = [0] * phi.dim
        e[k] = 1
        if phi.coefficient(e) != 0:
            raise MathDomainError("boundary graph must be tangent to x_n = 0 at the origin")


def minimal_graph_problem(n: int, phi: TangentialPoly) -> SingularProblem:
    """Vertical minimal graph over the hyperplane with boundary values phi (tangential dim n - 1)."""
    if n < 2:
        raise MathDomainError("minimal graphs need n >= 2")
    if phi.dim != n - 1:
        raise MathDomainError(f"boundary graph has {phi.dim} variables, expected {n - 1}")
    _check_normalized(phi)
    dim = n - 1

    def rhs(v: LogSeries) -> LogSeries:
        K, W = v.K, v.W
        u = LogSeries(dim, K, {(0, 0): phi}, W, v.exact) + v
        vt = v.ddt()
        ua = [u.partial(a) for a in range(dim)]
        lap = None
        S1 = None
        X = None
        for a in range(dim):
            for b in range(a, dim):
                uab = ua[a].partial(b)
                w = series_mul(ua[a], ua[b])
                term = series_mul(w, uab)
                if a == b:
                    lap = uab if lap is None else lap + uab
                    X = w if X is None else X + w
                else:
                    term = term.scale(2)
                S1 = term if S1 is None else S1 + term
        vt2 = series_mul(vt, vt)
        S2 = None
        for a in range(dim):
            term = series_mul(ua[a], vt.partial(a))
            S2 = term if S2 is None else S2 + term
        S2 = series_mul(S2, vt).scale(2)
        inv_b = compose_analytic(TaylorData.geometric(max(W, 1), sign=-1), [X])
        inner = (S1 + S2 - series_mul(vt2, lap)).shift(2) + series_mul(vt2, vt).shift(1).scale(n)
        G = (-lap).shift(2) + series_mul(inv_b, inner)
        return G.truncate(K, W)

    return SingularProblem.from_roots(
        0,
        n + 1,
        rhs=rhs,
        dim=dim,
        name=f"minimal_graph(n={n})",
        log_divisor=n,
        info={"kind": "minimal_graph", "n": n, "phi": phi},
    )


def hemisphere_phi(n: int, R, degree: int) -> TangentialPoly:
    """Taylor polynomial of sqrt(R^2 - |y'|^2) - R to the given degree."""
    R = as_exact(R)
    dim = n - 1
    terms: dict[tuple[int, ...], Fraction] = {}
    for k in range(1, degree // 2 + 1):
        c = gen_binomial(Fraction(1, 2), k) * (-1) ** k * R ** (1 - 2 * k)
        for e, mult in _square_norm_power(dim, k).items():
            terms[e] = terms.get(e, 0) + c * mult
    return TangentialPoly(dim, terms, degree)


def _square_norm_power(dim: int, k: int) -> dict[tuple[int, ...], int]:
    """Expansion of |y'|^{2k} as {exponent: multinomial coefficient}."""
    out: dict[tuple[int, ...], int] = {}

    def rec(prefix: list[int], left: int, slots: int):
        if slots == 1:
            e = prefix + [left]
            mult = 1
            rest = k
            for part in e:
                mult *= comb(rest, part)
                rest -= part
            out[tuple(2 * x for x in e)] = mult
            return
        for part in range(left + 1):
            rec(prefix + [part], left - part, slots - 1)

    if dim == 0:
        return {(): 1} if k == 0 else {}
    rec([], k, dim)
    return out


def hemisphere_solution(n: int, R, K: int, W: int) -> LogSeries:
    """v = sqrt(R^2 - |y'|^2 - t^2) - sqrt(R^2 - |y'|^2) as a truncated series."""
    R = as_exact(R)
    dim = n - 1
    coeffs = {}
    for k in range(1, K // 2 + 1):
        lead = gen_binomial(Fraction(1, 2), k) * (-1) ** k * R ** (1 - 2 * k)
        alpha = Fraction(1, 2) - k
        terms: dict[tuple[int, ...], Fraction] = {}
        cap = W - 2 * k
        for m in range(cap // 2 + 1):
            c = lead * gen_binomial(alpha, m) * (-1) ** m * R ** (-2 * m)
            for e, mult in _square_norm_power(dim, m).items():
                terms[e] = terms.get(e, 0) + c * mult
        coeffs[(2 * k, 0)] = TangentialPoly(dim, terms, cap)
    return LogSeries(dim, K, coeffs, W)


def hemisphere_datum(n: int, R, K: int, W: int) -> TangentialPoly:
    """c_{n+1}(y') of the hemisphere (zero when n + 1 is odd)."""
    return hemisphere_solution(n, R, max(K, n + 1), max(W, n + 1)).coefficient(n + 1, 0)


# ---------------------------------------------------------------------------
# Loewner-Nirenberg


def _ln_exponent(n: int) -> Fraction:
    return Fraction(n + 2, n - 2)


def loewner_nirenberg_problem(n: int, shape: str = "halfspace") -> SingularProblem:
    """Radial Loewner-Nirenberg problem for v with u = d^{-(n-2)/2}(1 + v)."""
    if n < 3:
        raise MathDomainError("the Loewner-Nirenberg problem needs n >= 3")
    if shape not in ("halfspace", "ball"):
        raise MathDomainError(f"unknown domain shape {shape!r}")
    gamma = _ln_exponent(n)
    bracket = Fraction(n * (n - 2), 4)
    half = Fraction(n - 2, 2)

    def rhs(v: LogSeries) -> LogSeries:
        K, W = v.K, v.W
        power = TaylorData.binomial(gamma, K, skip_below=2)
        G = compose_analytic(power, [v]).scale(bracket)
        if shape == "ball":
            lap_d = LogSeries(0, K, {(k, 0): -(n - 1) for k in range(K + 1)}, W)
            G = G - series_mul(lap_d, v.ddt()).shift(2) + series_mul(lap_d, v + 1).shift(1).scale(half)
        return G.truncate(K, W)

    return SingularProblem.from_roots(
        -1,
        n,
        rhs=rhs,
        dim=0,
        name=f"loewner_nirenberg(n={n}, {shape})",
        offset=Fraction(1),
        info={"kind": "ln_" + shape, "n": n, "shape": shape},
    )


def ln_ball_solution(n: int, K: int) -> LogSeries:
    """v = (1 - t/2)^{-(n-2)/2} - 1, the exact ball solution in the distance variable."""
    alpha = Fraction(-(n - 2), 2)
    coeffs = {(k, 0): gen_binomial(alpha, k) * Fraction(-1, 2) ** k for k in range(1, K + 1)}
    return LogSeries(0, K, coeffs)


@dataclass(frozen=True)
class LNLocalCoefficients:
    c1: Fraction
    c31: Fraction | None


def ln_local_coeffs(n: int, H, K=0, lap_H=0) -> LNLocalCoefficients:
    """c_1 = (n-2) H / (4(n-1)) and, for n = 3, c_{3,1} = -(lap_H + 2H(H^2 - K))/16, taken verbatim."""
    if n < 3:
        raise MathDomainError("local coefficients need n >= 3")
    H, K, lap_H = as_exact(H), as_exact(K), as_exact(lap_H)
    c1 = Fraction(n - 2, 4 * (n - 1)) * H
    c31 = -(lap_H + 2 * H * (H * H - K)) / 16 if n == 3 else None
    return LNLocalCoefficients(c1, c31)


@dataclass(frozen=True)
class ConventionAudit:
    """Local coefficients of the unit ball under both readings of H, against the computed expansion."""

    n: int
    sum_convention: LNLocalCoefficients
    average_convention: LNLocalCoefficients
    computed_c1: Fraction
    computed_log: Fraction

    @property
    def c1_matches(self) -> dict[str, bool]:
        return {
            "sum": self.sum_convention.c1 == self.computed_c1,
            "average": self.average_convention.c1 == self.computed_c1,
        }

    @property
    def log_matches(self) -> dict[str, bool]:
        out = {}
        for name, c in (("sum", self.sum_convention), ("average", self.average_convention)):
            out[name] = c.c31 is not None and c.c31 == self.computed_log
        return out


def ln_convention_audit(n: int) -> ConventionAudit:
    """Compare the displayed formulas on the unit sphere with the ball expansion."""
    from .expansion import match_coefficients

    k_sphere = Fraction(1)  # Gauss curvature of the unit 2-sphere
    by_sum = ln_local_coeffs(n, n - 1, k_sphere, 0)
    by_avg = ln_local_coeffs(n, 1, k_sphere, 0)
    prob = loewner_nirenberg_problem(n, "ball")
    datum = ln_ball_solution(n, n).coefficient(n, 0).constant_term()
    series = match_coefficients(prob, datum, n + 1)
    return ConventionAudit(
        n,
        by_sum,
        by_avg,
        series.coefficient(1, 0).constant_term(),
        series.coefficient(n, 1).constant_term(),
    )


# ---------------------------------------------------------------------------
# linear family with planted forcing


def linear_problem(
    m_low: int,
    m_high: int,
    forcing: dict[int, object] | None = None,
    quadratic=0,
    dim: int = 0,
) -> SingularProblem:
    """E v = sum_k g_k t^k + lambda v^2; a g at k = m_high plants a resonant residual."""
    forcing = {int(k): c for k, c in (forcing or {}).items()}
    if any(k < 1 for k in forcing):
        raise MathDomainError("forcing terms must carry a positive power of t")
    lam = as_exact(quadratic)
    zero_rhs = not forcing and lam == 0

    def rhs(v: LogSeries) -> LogSeries:
        G = LogSeries(v.dim, v.K, {(k, 0): c for k, c in forcing.items()}, v.W, v.exact)
        if lam:
            G = G + series_mul(v, v).scale(lam)
        return G.truncate(v.K, v.W)

    return SingularProblem.from_roots(
        m_low,
        m_high,
        rhs=None if zero_rhs else rhs,
        dim=dim,
        name=f"linear(m_low={m_low}, m_high={m_high})",
        info={"kind": "linear", "forcing": forcing, "quadratic": lam},
    )


# ---------------------------------------------------------------------------
# log obstruction


def log_obstruction(prob: SingularProblem, datum, W: int | None = None):
    """c_{m_high,1}: the first log coefficient, which vanishes iff the expansion is log-free to that order."""
    from .expansion import match_coefficients

    K = prob.m_high
    series = match_coefficients(prob, datum, K, W=W)
    c = series.coefficient(K, 1)
    return c.constant_term() if prob.dim == 0 else c


# ---------------------------------------------------------------------------
# problem description used by configs and the CLI


@dataclass
class ProblemSpec:
    """A complete problem instance: equation, truncation and datum."""

    kind: str
    n: int
    K: int
    tangential_degree: int = 0
    R: Fraction = Fraction(1)
    phi: object = None
    datum: object = None
    m_low: int | None = None
    m_high: int | None = None
    forcing: dict = field(default_factory=dict)
    quadratic: Fraction = Fraction(0)

    @property
    def W(self) -> int:
        return self.K + self.tangential_degree

    def build(self) -> tuple[SingularProblem, object]:
        """Returns (problem, datum) with the datum as a coefficient of the right dimension."""
        kind = self.kind
        if kind in ("hemisphere", "minimal_graph"):
            dim = self.n - 1
            if kind == "hemisphere":
                phi = hemisphere_phi(self.n, self.R, self.W)
                datum = hemisphere_datum(self.n, self.R, self.K, self.W)
                if self.datum is not None:
                    datum = _as_poly(self.datum, dim)
            else:
                phi = _as_poly(self.phi if self.phi is not None else 0, dim)
                datum = _as_poly(self.datum if self.datum is not None else 0, dim)
            return minimal_graph_problem(self.n, phi), datum
        if kind in ("ln_halfspace", "ln_ball"):
            prob = loewner_nirenberg_problem(self.n, kind[3:])
            if self.datum is None:
                datum = ln_ball_solution(self.n, self.n).coefficient(self.n, 0).constant_term() if kind == "ln_ball" else Fraction(0)
            else:
                datum = as_exact(self.datum)
            return prob, datum
        if kind == "linear":
            if self.m_low is None or self.m_high is None:
                raise ConfigError("a linear problem needs m_low and m_high")
            prob = linear_problem(self.m_low, self.m_high, self.forcing, self.quadratic)
            return prob, as_exact(self.datum if self.datum is not None else 0)
        raise ConfigError(f"unknown problem kind {kind!r}")

    def exact_solution(self) -> LogSeries | None:
        """Closed-form v when one is known for this instance."""
        if self.kind == "hemisphere" and self.datum is None:
            return hemisphere_solution(self.n, self.R, self.K, self.W)
        if self.kind == "ln_ball" and self.datum is None:
            return ln_ball_solution(self.n, self.K)
        return None


def _as_poly(value, dim: int) -> TangentialPoly:
    if isinstance(value, TangentialPoly):
        if value.dim != dim:
            raise MathDomainError(f"coefficient has {value.dim} variables, expected {dim}")
        return value
    return TangentialPoly.constant(value, dim)
