"""Independent reference computations in sympy.

None of these reuse the library's series arithmetic: closed forms are
expanded by sympy, and the expansions for problems without a closed form
are recovered from the original (un-normalized) equations.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import sympy as sp

t, L, eps = sp.symbols("t L epsilon", positive=True)


def _frac(x) -> Fraction:
    x = sp.nsimplify(x)
    return Fraction(int(sp.numer(x)), int(sp.denom(x)))


def _ys(dim: int):
    return sp.symbols(f"y1:{dim + 1}") if dim else ()


def series_terms(series) -> dict[tuple[int, int, tuple[int, ...]], Fraction]:
    """Flatten a LogSeries into {(i, j, alpha): c}."""
    out = {}
    for (i, j), poly in series.items():
        for alpha, c in poly.items():
            out[(i, j, tuple(alpha))] = Fraction(c)
    return out


def _collect(expr, ys, W: int, K: int) -> dict[tuple[int, int, tuple[int, ...]], Fraction]:
    poly = sp.Poly(sp.expand(expr), t, *ys)
    out = {}
    for monom, c in poly.terms():
        i, alpha = monom[0], tuple(monom[1:])
        if i <= K and i + sum(alpha) <= W and c != 0:
            out[(i, 0, alpha)] = _frac(c)
    return out


@lru_cache(maxsize=None)
def hemisphere_terms(n: int, R: Fraction, K: int, W: int):
    """Taylor coefficients of sqrt(R^2 - |y|^2 - t^2) - sqrt(R^2 - |y|^2) with i <= K, i + |alpha| <= W."""
    ys = _ys(n - 1)
    Rs = sp.Rational(R.numerator, R.denominator)
    r2 = sum(y**2 for y in ys)
    scaled = {y: eps * y for y in ys}
    scaled[t] = eps * t
    f = sp.sqrt(Rs**2 - r2 - t**2) - sp.sqrt(Rs**2 - r2)
    ser = sp.series(f.subs(scaled, simultaneous=True), eps, 0, W + 1).removeO()
    return _collect(ser.subs(eps, 1), ys, W, K)


@lru_cache(maxsize=None)
def ln_ball_terms(n: int, K: int) -> dict[int, Fraction]:
    """Coefficients of (1 - t/2)^{-(n-2)/2} - 1."""
    f = (1 - t / 2) ** sp.Rational(-(n - 2), 2) - 1
    ser = sp.series(f, t, 0, K + 1).removeO()
    return {k: _frac(ser.coeff(t, k)) for k in range(1, K + 1) if ser.coeff(t, k) != 0}


@lru_cache(maxsize=None)
def ln_radial_expansion(n: int, K: int, datum: Fraction, shape: str) -> dict[int, Fraction]:
    """Log-free coefficients c_k of v with u = t^{-(n-2)/2}(1 + v) solving the radial equation.

    The equation is u'' - (n-1)/(1-t) u' = n(n-2)/4 u^{(n+2)/(n-2)} for the
    ball (t = 1 - r) and u'' = n(n-2)/4 u^{(n+2)/(n-2)} for the half-space.
    Unknowns are solved order by order; the order-n equation must hold
    identically (no log term needed), which is asserted.
    """
    a = sp.Rational(n - 2, 2)
    gamma = sp.Rational(n + 2, n - 2)
    cs = sp.symbols(f"c1:{K + 1}")
    V = sum(c * t**k for k, c in enumerate(cs, start=1))
    u = t ** (-a) * (1 + V)
    lhs = sp.diff(u, t, 2)
    if shape == "ball":
        lhs -= (n - 1) / (1 - t) * sp.diff(u, t)
    # t^{a+2}(lhs - rhs) is a power series in t
    ex = sp.expand(sp.simplify(t ** (a + 2) * lhs))
    power = sp.series((1 + V) ** gamma, t, 0, K + 1).removeO()
    ex = ex - sp.Rational(n * (n - 2), 4) * power
    ex = sp.series(ex, t, 0, K + 1).removeO()
    sol: dict = {cs[n - 1]: sp.Rational(datum.numerator, datum.denominator)}
    for k in range(1, K + 1):
        eq = sp.expand(ex.coeff(t, k).subs(sol))
        if k == n:
            assert eq == 0, f"order {n} needs a log term: {eq}"
            continue
        (val,) = sp.solve(eq, cs[k - 1])
        sol[cs[k - 1]] = val
    return {k: _frac(sol[cs[k - 1]]) for k in range(1, K + 1) if sol[cs[k - 1]] != 0}


def minimal_graph_residual(n: int, phi_terms, series, K: int, W: int) -> dict:
    """Coefficients of (1 + |Du|^2)(t^2 Delta u - n t u_t) - t^2 u_i u_j u_ij for u = phi + v.

    Derivatives run over (y', t) with log t carried as a symbol L and
    d/dt L = 1/t.  Returns the nonzero coefficients with i <= K and
    i + |alpha| <= W, which must be empty for a correct expansion.
    """
    dim = n - 1
    ys = _ys(dim)

    def mono(alpha):
        out = sp.Integer(1)
        for y, e in zip(ys, alpha):
            out *= y**e
        return out

    u = sum(sp.Rational(c.numerator, c.denominator) * mono(a) for a, c in phi_terms.items())
    for (i, j, alpha), c in series_terms(series).items():
        u += sp.Rational(c.numerator, c.denominator) * mono(alpha) * t**i * L**j

    def dt(f):
        return sp.diff(f, t) + sp.diff(f, L) / t

    grads = [sp.diff(u, y) for y in ys] + [dt(u)]
    variables = list(ys) + ["t"]

    def d(f, var):
        return dt(f) if var == "t" else sp.diff(f, var)

    hess = [[d(grads[a], variables[b]) for b in range(dim + 1)] for a in range(dim + 1)]
    lap = sum(hess[a][a] for a in range(dim + 1))
    norm2 = sum(g**2 for g in grads)
    quad = sum(grads[a] * grads[b] * hess[a][b] for a in range(dim + 1) for b in range(dim + 1))
    expr = sp.expand((1 + norm2) * (t**2 * lap - n * t * grads[-1]) - t**2 * quad)
    poly = sp.Poly(expr, t, L, *ys)
    bad = {}
    for monom, c in poly.terms():
        i, j, alpha = monom[0], monom[1], monom[2:]
        if i <= K and i + sum(alpha) <= W and c != 0:
            bad[(i, j, alpha)] = c
    return bad


def z_power_terms(i: int, p: int, B0, B1) -> dict[int, Fraction]:
    """Coefficients of [z(t)]^i through t^p with z = B0 [t + sum B1^{k-2} t^k/(k(k-1))]."""
    B0 = sp.Rational(B0)
    B1 = sp.Rational(B1)
    z = B0 * (t + sum(B1 ** (k - 2) * t**k / (k * (k - 1)) for k in range(2, p + 1)))
    ser = sp.expand(z**i)
    return {k: _frac(ser.coeff(t, k)) for k in range(p + 1) if ser.coeff(t, k) != 0}


def composition_derivative(phi, y, x0, p: int) -> Fraction:
    """d^p/dx^p phi(x, y(x)) at x0 by sympy differentiation."""
    x = sp.Symbol("x")
    f = phi(x, y(x))
    return _frac(sp.diff(f, x, p).subs(x, sp.Rational(x0.numerator, x0.denominator)))


def euler_solution_check(m_low: int, m_high: int, expr) -> sp.Expr:
    """t^2 u'' + p t u' + q u for the normal form with the given roots."""
    p = 1 - (m_low + m_high)
    q = m_low * m_high
    return sp.simplify(t**2 * sp.diff(expr, t, 2) + p * t * sp.diff(expr, t) + q * expr)
