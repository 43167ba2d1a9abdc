"""Numerical cross-checks: a Newton finite-difference solver for the radial
problems, remainder-decay fits against partial sums, and a fit of the
tangential growth of coefficients.

The radial equations are carried in the quasilinear form

    A t^2 u_tt + P t u_t + Q u + t^2 N = 0,

with A, P, Q, N functions of (t, u, u_t).  On the uniform grid in s = log t
this reads A (u_ss - u_s) + P u_s + Q u + t^2 N = 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import MathDomainError, ValidationFailure
from .series import LogSeries
from .tangential import TangentialPoly

Coefficient = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

T_MIN = 1e-4
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class QuasilinearForm:
    """Radial quasilinear operator; every callback takes (t, u, u_t) arrays and must accept complex input."""

    name: str
    A: Coefficient
    P: Coefficient
    Q: Coefficient
    N: Coefficient
    ellipticity: float = 4.0

    def margin(self, t, u, ut) -> np.ndarray:
        """2A + 2P + Q, which must stay below -c0 < 0."""
        return 2 * self.A(t, u, ut) + 2 * self.P(t, u, ut) + self.Q(t, u, ut)


def hemisphere_slice_form(n: int, R: float = 1.0) -> QuasilinearForm:
    """The axis y' = 0 of the hemisphere graph, where the tangential Laplacian closes as -(n-1)/(u+R)."""
    return QuasilinearForm(
        f"hemisphere_slice(n={n}, R={R})",
        A=lambda t, u, ut: 1 / (1 + ut**2),
        P=lambda t, u, ut: -n + 0 * t,
        Q=lambda t, u, ut: 0 * t,
        N=lambda t, u, ut: -(n - 1) / (u + R),
    )


def ln_form(n: int, shape: str) -> QuasilinearForm:
    """Radial Loewner-Nirenberg equation for v in u = d^{-(n-2)/2}(1 + v)."""
    gamma = (n + 2) / (n - 2)
    lin = gamma

    def lap_d(t):
        return -(n - 1) / (1 - t) if shape == "ball" else 0 * t

    def bracket(v):
        return n * (n - 2) / 4 * ((1 + v) ** gamma - 1 - lin * v)

    return QuasilinearForm(
        f"loewner_nirenberg(n={n}, {shape})",
        A=lambda t, u, ut: 1 + 0 * t,
        P=lambda t, u, ut: t * lap_d(t) - (n - 2),
        Q=lambda t, u, ut: -n + 0 * t,
        N=lambda t, u, ut: -(n - 2) / 2 * lap_d(t) * (1 + u) / t - bracket(u) / t**2,
    )


@dataclass
class GridSolution:
    t: np.ndarray
    u: np.ndarray
    residual: float
    newton_log: list[tuple[int, float, int]] = field(default_factory=list)

    def __call__(self, t):
        return np.interp(np.log(t), np.log(self.t), self.u)


def _residual(form: QuasilinearForm, t, u, h):
    D1 = (u[2:] - u[:-2]) / (2 * h)
    D2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    ti = t[1:-1]
    ui = u[1:-1]
    ut = D1 / ti
    return form.A(ti, ui, ut) * (D2 - D1) + form.P(ti, ui, ut) * D1 + form.Q(ti, ui, ut) * ui + ti**2 * form.N(ti, ui, ut)


def _rounding_floor(form: QuasilinearForm, t, u, h) -> float:
    """Size of the residual that rounding alone produces on this grid (grows like eps/h^2)."""
    ut = np.gradient(u, t)
    scale = (
        np.max(np.abs(form.A(t, u, ut))) * 4 / h**2
        + np.max(np.abs(form.P(t, u, ut))) / h
        + np.max(np.abs(form.Q(t, u, ut)))
    )
    return float(16 * np.finfo(float).eps * (1 + np.max(np.abs(u))) * scale)


def fd_solve_radial(
    form: QuasilinearForm,
    inner: float,
    outer: float,
    r: float = 0.5,
    points: int = 2000,
    t_min: float = T_MIN,
    guess: Callable | None = None,
    tol: float = RESIDUAL_TOL,
    max_iter: int = 60,
) -> GridSolution:
    """Damped Newton on a uniform grid in log t with Dirichlet data at t_min and r.

    The Jacobian is tridiagonal and is assembled from three complex-step
    residual evaluations, one per colour of unknowns.
    """
    from scipy.linalg import solve_banded

    if points < 5:
        raise ValueError("need at least 5 grid points")
    s = np.linspace(math.log(t_min), math.log(r), points)
    h = s[1] - s[0]
    t = np.exp(s)
    if guess is None:
        u = inner + (outer - inner) * (s - s[0]) / (s[-1] - s[0])
    else:
        u = np.array([float(guess(x)) for x in t])
    u[0], u[-1] = inner, outer
    log = []
    res = _residual(form, t, u, h)
    norm = float(np.max(np.abs(res)))
    it = 0
    eps = 1e-30
    while norm >= tol:
        if it >= max_iter:
            raise ValidationFailure(f"Newton did not converge: residual {norm:.3e} after {it} iterations")
        m = points - 2
        ab = np.zeros((3, m))
        for colour in range(3):
            pert = np.zeros(points, dtype=complex)
            pert[1 + colour : -1 : 3] = 1j * eps
            jac = np.imag(_residual(form, t, u + pert, h)) / eps
            for k in range(colour, m, 3):
                for row in (k - 1, k, k + 1):
                    if 0 <= row < m:
                        ab[1 + row - k, k] = jac[row]
        if not np.all(np.isfinite(ab)):
            raise ValidationFailure("non-finite Jacobian")
        if np.any(ab[1] * np.sign(ab[1][0]) <= 0):
            raise ValidationFailure("ellipticity lost on the grid: Jacobian diagonal changes sign")
        step = solve_banded((1, 1), ab, -res)
        lam = 1.0
        for halvings in range(31):
            trial = u.copy()
            trial[1:-1] += lam * step
            tres = _residual(form, t, trial, h)
            tnorm = float(np.max(np.abs(tres)))
            if np.isfinite(tnorm) and tnorm < norm:
                break
            lam /= 2
        else:
            if norm < _rounding_floor(form, t, u, h):
                # no further decrease is possible in floating point on this grid
                log.append((it + 1, norm, -1))
                break
            raise ValidationFailure(f"Newton damping failed at residual {norm:.3e}; log {log}")
        u, res, norm = trial, tres, tnorm
        it += 1
        log.append((it, norm, halvings))
    return GridSolution(t, u, norm, log)


def grid_error(sol: GridSolution, exact: Callable[[np.ndarray], np.ndarray]) -> float:
    return float(np.max(np.abs(sol.u - exact(sol.t))))


def calibrated_solve(
    form: QuasilinearForm,
    inner: float,
    outer: float,
    exact: Callable | None = None,
    target: float = 1e-8,
    r: float = 0.5,
    start: int = 2001,
    limit: int = 2_000_001,
    guess: Callable | None = None,
) -> tuple[GridSolution, float]:
    """Double the number of intervals until the error (exact or Richardson-estimated) drops below target."""
    points = start
    prev = None
    while True:
        sol = fd_solve_radial(form, inner, outer, r, points, guess=guess)
        if exact is not None:
            err = grid_error(sol, exact)
        elif prev is not None:
            err = float(np.max(np.abs(sol.u[::2] - prev.u))) * 4 / 3
        else:
            err = math.inf
        if err < target:
            return sol, err
        if points >= limit:
            raise ValidationFailure(f"grid error {err:.3e} above {target:.1e} at {points} points")
        prev = sol
        points = 2 * (points - 1) + 1


def refinement_ratio(form: QuasilinearForm, inner: float, outer: float, exact: Callable, points: int, r: float = 0.5) -> float:
    """Error ratio between a grid and its doubling (about 4 for a second-order scheme)."""
    a = grid_error(fd_solve_radial(form, inner, outer, r, points), exact)
    b = grid_error(fd_solve_radial(form, inner, outer, r, 2 * (points - 1) + 1), exact)
    return a / b


def negativity_margin(form: QuasilinearForm, sol: GridSolution, upto: float = 0.1) -> float:
    """max of 2A + 2P + Q over grid points with t <= upto (negative when the hypothesis holds)."""
    mask = sol.t <= upto
    t, u = sol.t, sol.u
    ut = np.gradient(u, t)
    return float(np.max(form.margin(t[mask], u[mask], ut[mask])))


# ---------------------------------------------------------------------------
# remainder slopes


@dataclass(frozen=True)
class SlopeFit:
    k: int
    slope: float
    expected: int | None

    @property
    def deviation(self) -> float | None:
        return None if self.expected is None else abs(self.slope - self.expected)


def tail_exponent(series: LogSeries, k: int) -> int | None:
    """Smallest t-power above k carrying a nonzero coefficient."""
    return min((i for (i, _), c in series.coeffs.items() if i > k and c), default=None)


def remainder_slopes(
    u,
    series: LogSeries,
    ks,
    window: tuple[float, float] = (1e-3, 1e-1),
    samples: int = 25,
    oracle_series: LogSeries | None = None,
    noise_floor: float | None = None,
    dps: int = 60,
) -> list[SlopeFit]:
    """Least-squares slope of log|u - S_k| against log t on the window, for each k.

    ``u`` is a GridSolution or a callable evaluated in mpmath precision;
    ``series`` supplies the partial sums S_k.
    """
    import mpmath

    lo, hi = window
    if lo <= 0 or hi <= lo:
        raise ValueError("bad fit window")
    grid = isinstance(u, GridSolution)
    if grid:
        if lo < u.t[0] * 10:
            raise ValidationFailure("fit window reaches into the inner cutoff layer")
        ts = [float(x) for x in u.t if lo <= x <= hi]
        if len(ts) > samples:
            idx = np.linspace(0, len(ts) - 1, samples).round().astype(int)
            ts = [ts[i] for i in idx]
        floor = noise_floor if noise_floor is not None else 1e-9
    else:
        ts = [lo * (hi / lo) ** (i / (samples - 1)) for i in range(samples)]
        floor = noise_floor if noise_floor is not None else 0.0
    if len(ts) < 3:
        raise ValidationFailure("fit window holds fewer than three samples")
    out = []
    with mpmath.workdps(dps):
        values = [mpmath.mpf(float(u(t))) if grid else u(mpmath.mpf(t)) for t in ts]
        for k in ks:
            partial = series.partial_sum(k)
            rem = [abs(val - partial.evaluate_mp(mpmath.mpf(t))) for t, val in zip(ts, values)]
            if max(rem) <= floor:
                raise ValidationFailure(f"remainder after k={k} sits at the noise floor")
            if grid and any(b <= a for a, b in zip(rem, rem[1:])):
                raise ValidationFailure(f"remainder after k={k} is not monotone on the grid")
            xs = [math.log(t) for t in ts]
            ys = [float(mpmath.log(r)) for r in rem]
            slope = float(np.polyfit(xs, ys, 1)[0])
            ref = oracle_series if oracle_series is not None else series
            out.append(SlopeFit(k, slope, tail_exponent(ref, k)))
    return out


# ---------------------------------------------------------------------------
# tangential growth


@dataclass(frozen=True)
class GrowthFit:
    B0: float
    B: float
    norms: dict[int, float]

    @property
    def radius(self) -> float:
        return math.inf if self.B == 0 else 1 / self.B


def _directions(dim: int, count: int = 16) -> list[tuple[float, ...]]:
    if dim == 1:
        return [(1.0,), (-1.0,)]
    dirs = []
    rng = np.random.default_rng(12345)
    for k in range(dim):
        e = [0.0] * dim
        e[k] = 1.0
        dirs.append(tuple(e))
    dirs.append(tuple([1 / math.sqrt(dim)] * dim))
    for vec in rng.normal(size=(count, dim)):
        dirs.append(tuple(vec / np.linalg.norm(vec)))
    return dirs


def tangential_growth_fit(data, min_degree: int = 6) -> GrowthFit:
    """Fit N_l ~ B0 B^l to the sup over unit directions of the degree-l part of c_2.

    Accepts a LogSeries (its t^2 coefficient is used) or a TangentialPoly.
    The implied tangential radius is 1/B.
    """
    poly = data.coefficient(2, 0) if isinstance(data, LogSeries) else data
    if poly.dim == 0:
        return GrowthFit(float(abs(poly.constant_term())), 0.0, {})
    if poly.max_degree is not None and poly.max_degree < min_degree:
        raise ValidationFailure(f"tangential degree {poly.max_degree} is below {min_degree}; the fit has no support")
    dirs = _directions(poly.dim)
    norms = {}
    for l in range(1, poly.degree() + 1):
        part = poly.homogeneous_part(l)
        if not part:
            continue
        val = max(abs(float(part.evaluate(d))) for d in dirs)
        if val > 0:
            norms[l] = val
    if len(norms) < 2:
        return GrowthFit(float(abs(poly.constant_term())), 0.0, norms)
    ls = sorted(norms)
    slope, intercept = np.polyfit(ls, [math.log(norms[l]) for l in ls], 1)
    return GrowthFit(math.exp(intercept), math.exp(slope), norms)


# ---------------------------------------------------------------------------
# CSV helpers


def grid_csv(sol: GridSolution, series: LogSeries, ks, exact: Callable | None = None, every: int = 1) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    head = ["t", "u"] + (["exact"] if exact else []) + [f"u_minus_S{k}" for k in ks]
    out.writerow(head)
    partials = [series.partial_sum(k) for k in ks]
    for i in range(0, len(sol.t), every):
        t, u = float(sol.t[i]), float(sol.u[i])
        row = [f"{t:.10e}", f"{u:.15e}"]
        if exact:
            row.append(f"{float(exact(np.array([t]))[0]):.15e}")
        row += [f"{u - p.evaluate(t):.6e}" for p in partials]
        out.writerow(row)
    return buf.getvalue()


def slopes_csv(fits: list[SlopeFit], tol: float) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["k", "slope", "expected", "deviation", "within_tol"])
    for f in fits:
        dev = f.deviation
        out.writerow([f.k, f"{f.slope:.6f}", "" if f.expected is None else f.expected, "" if dev is None else f"{dev:.6f}", "" if dev is None else dev <= tol])
    return buf.getvalue()


def resolvable_orders(sol: GridSolution, series: LogSeries, ks, window, error: float, ratio: float = 1e2) -> list[int]:
    """Orders whose remainder stays at least ratio * error above the grid error across the window."""
    lo, hi = window
    ts = sol.t[(sol.t >= lo) & (sol.t <= hi)]
    out = []
    for k in ks:
        partial = series.partial_sum(k)
        rem = np.abs(sol(ts) - np.array([partial.evaluate(float(t)) for t in ts]))
        if rem.size and rem.min() >= ratio * error:
            out.append(k)
    return out


@dataclass(frozen=True)
class RadialCase:
    """A radial problem with a closed-form solution v(t) on the axis."""

    form: QuasilinearForm
    exact: Callable[[np.ndarray], np.ndarray]
    exact_mp: Callable
    expected_margin: float


def radial_case(kind: str, n: int, R: float = 1.0) -> RadialCase:
    import mpmath

    if kind == "hemisphere":
        return RadialCase(
            hemisphere_slice_form(n, R),
            lambda t: np.sqrt(R * R - t**2) - R,
            lambda t: mpmath.sqrt(mpmath.mpf(R) ** 2 - t**2) - R,
            2.0 - 2 * n,
        )
    if kind == "ln_ball":
        a = (n - 2) / 2
        a_mp = mpmath.mpf(n - 2) / 2
        return RadialCase(
            ln_form(n, "ball"),
            lambda t: (1 - t / 2) ** (-a) - 1,
            lambda t: (1 - t / 2) ** (-a_mp) - 1,
            6.0 - 3 * n,
        )
    raise MathDomainError(f"no closed-form radial solution for {kind!r}")
