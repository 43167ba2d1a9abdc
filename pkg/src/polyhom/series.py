"""Polyhomogeneous series sum c_{i,j}(x') t^i (log t)^j and their arithmetic.

Truncation is graded by two numbers.  ``K`` bounds the t-power i and ``W``
bounds the joint weight i + |alpha| of a term c x'^alpha t^i (log t)^j, so the
tangential coefficient of t^i is kept to degree W - i.  Log powers are not
truncated.  The joint weight makes differentiation in t and in x' lose
exactly one order, which keeps every product below the caps exact.

Products use the valuations of their factors: if a is exact through order
K_a and b vanishes below t^{v_b}, then ab is exact through K_a + v_b.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DimensionMismatch, MathDomainError, ModeMismatch
from .tangential import TangentialPoly, as_exact, as_float, mul_terms

Key = tuple[int, int]


@dataclass(frozen=True)
class LogCaps:
    """Maximal log power allowed at each t-power.

    ``divisor=n`` gives the rule j <= floor((i - 1)/n); ``table`` overrides
    individual orders.
    """

    divisor: int | None = None
    table: tuple[tuple[int, int], ...] = ()

    def __call__(self, i: int) -> int | None:
        for k, cap in self.table:
            if k == i:
                return cap
        if self.divisor is None:
            return None
        return (i - 1) // self.divisor


class LogSeries:
    """Finite map (i, j) -> TangentialPoly standing for sum c_{i,j} t^i (log t)^j."""

    __slots__ = ("dim", "K", "W", "coeffs", "exact", "log_caps")

    def __init__(
        self,
        dim: int,
        K: int,
        coeffs: Mapping[Key, object] | None = None,
        W: int | None = None,
        exact: bool = True,
        log_caps: LogCaps | None = None,
    ):
        if W is None:
            W = K
        if W < K:
            raise ValueError(f"weight cap W={W} below t-order K={K}")
        clean: dict[Key, TangentialPoly] = {}
        for (i, j), c in (coeffs or {}).items():
            i, j = int(i), int(j)
            if i < 0 or j < 0:
                raise MathDomainError(f"negative exponent in term t^{i} (log t)^{j}")
            if i == 0 and j > 0:
                raise MathDomainError("bare (log t)^j terms are not polyhomogeneous")
            if i > K:
                continue
            if not isinstance(c, TangentialPoly):
                c = TangentialPoly.constant(c, dim, None, exact)
            if c.dim != dim:
                raise DimensionMismatch(f"coefficient of dimension {c.dim} in a series of dimension {dim}")
            if c.exact != exact:
                raise ModeMismatch("coefficient mode differs from series mode")
            c = c.truncate(W - i)
            c = TangentialPoly._raw(dim, c.terms, W - i, exact)
            if c:
                if (i, j) in clean:
                    c = clean[(i, j)] + c
                clean[(i, j)] = c
        self.dim = dim
        self.K = K
        self.W = W
        self.coeffs = {k: v for k, v in clean.items() if v}
        self.exact = exact
        self.log_caps = None
        if log_caps is not None:
            self._check_caps(log_caps)
            self.log_caps = log_caps

    @classmethod
    def _raw(cls, dim: int, K: int, W: int, coeffs: dict, exact: bool) -> "LogSeries":
        obj = object.__new__(cls)
        obj.dim = dim
        obj.K = K
        obj.W = W
        obj.coeffs = coeffs
        obj.exact = exact
        obj.log_caps = None
        return obj

    def _check_caps(self, caps: LogCaps) -> None:
        for i, j in self.coeffs:
            cap = caps(i)
            if cap is not None and j > cap:
                raise MathDomainError(f"term t^{i} (log t)^{j} exceeds the log cap {cap}")

    def with_log_caps(self, caps: LogCaps) -> "LogSeries":
        self._check_caps(caps)
        out = LogSeries._raw(self.dim, self.K, self.W, self.coeffs, self.exact)
        out.log_caps = caps
        return out

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, K: int, W: int | None = None, exact: bool = True) -> "LogSeries":
        return cls._raw(dim, K, K if W is None else W, {}, exact)

    @classmethod
    def monomial(
        cls, i: int, j: int, c=1, dim: int = 0, K: int | None = None, W: int | None = None, exact: bool = True
    ) -> "LogSeries":
        K = i if K is None else K
        return cls(dim, K, {(i, j): c}, W, exact)

    @classmethod
    def from_poly(cls, poly: TangentialPoly, K: int, W: int | None = None) -> "LogSeries":
        """The t-independent series whose only coefficient is ``poly``."""
        return cls(poly.dim, K, {(0, 0): poly}, W, poly.exact)

    # -- inspection -----------------------------------------------------------
    @property
    def tangential_degree(self) -> int:
        return self.W - self.K

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def keys(self) -> list[Key]:
        return sorted(self.coeffs)

    def items(self) -> list[tuple[Key, TangentialPoly]]:
        return [(k, self.coeffs[k]) for k in sorted(self.coeffs)]

    def coefficient(self, i: int, j: int = 0) -> TangentialPoly:
        c = self.coeffs.get((i, j))
        if c is None:
            return TangentialPoly._raw(self.dim, {}, self.W - i, self.exact)
        return c

    def valuation(self) -> int:
        """Lowest t-power present; K + 1 for a series known to vanish."""
        return min((i for i, _ in self.coeffs), default=self.K + 1)

    def weight_valuation(self) -> int:
        """Lowest joint weight i + |alpha| present; W + 1 when empty."""
        best = self.W + 1
        for (i, _), c in self.coeffs.items():
            v = c.valuation()
            if v is not None and i + v < best:
                best = i + v
        return best

    def max_log(self, i: int | None = None) -> int:
        js = [j for (k, j) in self.coeffs if i is None or k == i]
        return max(js, default=0)

    def is_log_free(self) -> bool:
        return all(j == 0 for _, j in self.coeffs)

    def block(self, i: int) -> dict[int, TangentialPoly]:
        return {j: c for (k, j), c in self.coeffs.items() if k == i}

    # -- truncation -----------------------------------------------------------
    def truncate(self, K: int | None = None, W: int | None = None) -> "LogSeries":
        K = self.K if K is None else min(K, self.K)
        W = self.W if W is None else min(W, self.W)
        K = min(K, W)
        coeffs = {}
        for (i, j), c in self.coeffs.items():
            if i > K:
                continue
            if c.max_degree is None or c.max_degree > W - i:
                c = c.truncate(W - i)
                c = TangentialPoly._raw(self.dim, c.terms, W - i, self.exact)
            if c:
                coeffs[(i, j)] = c
        return LogSeries._raw(self.dim, K, W, coeffs, self.exact)

    def padded(self, K: int, W: int | None = None) -> "LogSeries":
        """Reinterpret as known through (K, W), treating the missing top terms as zero.

        Only valid when the caller knows those terms cannot reach the orders
        that will be read off later.
        """
        W = max(self.W, K) if W is None else W
        coeffs = {}
        for (i, j), c in self.coeffs.items():
            if i <= K:
                coeffs[(i, j)] = TangentialPoly._raw(self.dim, c.terms, W - i, self.exact).truncate(W - i)
        return LogSeries._raw(self.dim, K, W, {k: v for k, v in coeffs.items() if v}, self.exact)

    # -- linear structure -------------------------------------------------------
    def _check(self, other: "LogSeries") -> None:
        if other.dim != self.dim:
            raise DimensionMismatch(f"tangential dimension {self.dim} vs {other.dim}")
        if other.exact != self.exact:
            raise ModeMismatch("exact and floating series cannot be combined")

    def _coerce(self, other) -> "LogSeries":
        if isinstance(other, LogSeries):
            self._check(other)
            return other
        if isinstance(other, TangentialPoly):
            return LogSeries.from_poly(other, self.K, self.W)
        return LogSeries(self.dim, self.K, {(0, 0): other}, self.W, self.exact)

    def __add__(self, other) -> "LogSeries":
        other = self._coerce(other)
        K = min(self.K, other.K)
        W = min(self.W, other.W)
        out: dict[Key, TangentialPoly] = {}
        for src in (self, other):
            for (i, j), c in src.coeffs.items():
                if i > K:
                    continue
                prev = out.get((i, j))
                out[(i, j)] = c if prev is None else prev + c
        return LogSeries._raw(self.dim, K, W, {}, self.exact)._fill(out)

    def _fill(self, out: Mapping[Key, TangentialPoly]) -> "LogSeries":
        coeffs = {}
        for (i, j), c in out.items():
            cap = self.W - i
            if cap < 0 or i > self.K:
                continue
            terms = c.terms if c.max_degree is not None and c.max_degree <= cap else c.truncate(cap).terms
            if terms:
                coeffs[(i, j)] = TangentialPoly._raw(self.dim, terms, cap, self.exact)
        self.coeffs = coeffs
        return self

    __radd__ = __add__

    def __neg__(self) -> "LogSeries":
        return LogSeries._raw(self.dim, self.K, self.W, {k: -c for k, c in self.coeffs.items()}, self.exact)

    def __sub__(self, other) -> "LogSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LogSeries":
        return (-self) + other

    def scale(self, c) -> "LogSeries":
        c = as_exact(c) if self.exact else as_float(c)
        if c == 0:
            return LogSeries._raw(self.dim, self.K, self.W, {}, self.exact)
        return LogSeries._raw(self.dim, self.K, self.W, {k: p.scale(c) for k, p in self.coeffs.items()}, self.exact)

    def __mul__(self, other) -> "LogSeries":
        if isinstance(other, LogSeries):
            return series_mul(self, other)
        if isinstance(other, TangentialPoly):
            return series_mul(self, LogSeries.from_poly(other, self.K, self.W))
        return self.scale(other)

    def __rmul__(self, other) -> "LogSeries":
        return self.__mul__(other)

    def shift(self, m: int) -> "LogSeries":
        """Multiply by t^m (m may be negative when the series vanishes to that order)."""
        if m < 0 and self.coeffs and self.valuation() + m < 0:
            raise MathDomainError(f"dividing by t^{-m} leaves a negative power")
        coeffs = {}
        for (i, j), c in self.coeffs.items():
            if i + m == 0 and j > 0:
                raise MathDomainError("dividing by t leaves a bare log term")
            coeffs[(i + m, j)] = c
        return LogSeries._raw(self.dim, self.K + m, self.W + m, coeffs, self.exact)

    # -- differentiation ----------------------------------------------------------
    def ddt(self) -> "LogSeries":
        return series_ddt(self)

    def partial(self, k: int) -> "LogSeries":
        """Tangential derivative d/dx_k (one unit of joint weight is lost)."""
        if not 0 <= k < self.dim:
            raise DimensionMismatch(f"no tangential variable {k} in dimension {self.dim}")
        W = self.W - 1
        K = min(self.K, W)
        out = {}
        for (i, j), c in self.coeffs.items():
            if i > K:
                continue
            d = c.partial(k)
            if d:
                out[(i, j)] = d
        return LogSeries._raw(self.dim, K, W, {}, self.exact)._fill(out)

    def laplacian(self) -> "LogSeries":
        if self.dim == 0:
            return LogSeries.zero(0, self.K - 2, self.W - 2, self.exact)
        acc = None
        for k in range(self.dim):
            term = self.partial(k).partial(k)
            acc = term if acc is None else acc + term
        return acc

    # -- evaluation -------------------------------------------------------------
    def evaluate(self, t: float, x=None) -> float:
        lt = math.log(t)
        total = 0.0
        for (i, j), c in self.coeffs.items():
            total += float(c.evaluate(x)) * t**i * lt**j
        return total

    def evaluate_mp(self, t, x=None):
        import mpmath

        t = mpmath.mpf(t)
        lt = mpmath.log(t)
        total = mpmath.mpf(0)
        for (i, j), c in self.coeffs.items():
            v = c.evaluate(x)
            if isinstance(v, Fraction):
                v = mpmath.mpf(v.numerator) / v.denominator
            total += v * t**i * lt**j
        return total

    def partial_sum(self, k: int) -> "LogSeries":
        """Terms with t-power <= k."""
        return LogSeries._raw(
            self.dim, self.K, self.W, {key: c for key, c in self.coeffs.items() if key[0] <= k}, self.exact
        )

    def at_origin(self) -> "LogSeries":
        """Restrict the tangential coefficients to x' = 0 (a radial series)."""
        coeffs = {}
        for (i, j), c in self.coeffs.items():
            v = c.constant_term()
            if v != 0:
                coeffs[(i, j)] = TangentialPoly._raw(0, {(): v}, None, self.exact)
        return LogSeries(0, self.K, coeffs, self.K, self.exact)

    def to_float(self) -> "LogSeries":
        return LogSeries._raw(self.dim, self.K, self.W, {k: c.to_float() for k, c in self.coeffs.items()}, False)

    # -- comparison ---------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, LogSeries):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.exact == other.exact
            and self.K == other.K
            and self.W == other.W
            and self.coeffs.keys() == other.coeffs.keys()
            and all(self.coeffs[k] == other.coeffs[k] for k in self.coeffs)
        )

    __hash__ = None

    def same_terms(self, other: "LogSeries") -> bool:
        """Coefficientwise equality ignoring the truncation bookkeeping."""
        return self.coeffs.keys() == other.coeffs.keys() and all(
            self.coeffs[k] == other.coeffs[k] for k in self.coeffs
        )

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"LogSeries(0; K={self.K}, W={self.W})"
        parts = []
        for (i, j), c in self.items():
            body = repr(c)[len("TangentialPoly("):-1] if self.dim else str(c.constant_term())
            mono = f"t^{i}" + (f"*log^{j}" if j else "")
            parts.append(f"({body})*{mono}")
        return f"LogSeries({' + '.join(parts)}; K={self.K}, W={self.W})"


# ---------------------------------------------------------------------------
# products and derivatives


def series_mul(a: LogSeries, b: LogSeries, K: int | None = None, W: int | None = None) -> LogSeries:
    """Truncated product; exact through min(K_a + val b, K_b + val a) in t and likewise in weight."""
    a._check(b)
    Kr = min(a.K + b.valuation(), b.K + a.valuation())
    Wr = min(a.W + b.weight_valuation(), b.W + a.weight_valuation())
    if K is not None:
        Kr = min(Kr, K)
    if W is not None:
        Wr = min(Wr, W)
    Kr = min(Kr, Wr)
    if not a.coeffs or not b.coeffs:
        return LogSeries._raw(a.dim, Kr, Wr, {}, a.exact)
    lb = sorted(b.coeffs.items())
    acc: dict[Key, dict] = {}
    for (i1, j1), p1 in a.coeffs.items():
        for (i2, j2), p2 in lb:
            i = i1 + i2
            if i > Kr:
                break
            cap = Wr - i
            if cap < 0:
                break
            prod = mul_terms(p1.terms, p2.terms, cap if a.dim else None)
            if not prod:
                continue
            key = (i, j1 + j2)
            slot = acc.get(key)
            if slot is None:
                acc[key] = prod
            else:
                for e, c in prod.items():
                    slot[e] = slot.get(e, 0) + c
    coeffs = {}
    for (i, j), terms in acc.items():
        terms = {e: c for e, c in terms.items() if c != 0}
        if terms:
            coeffs[(i, j)] = TangentialPoly._raw(a.dim, terms, Wr - i, a.exact)
    return LogSeries._raw(a.dim, Kr, Wr, coeffs, a.exact)


def series_ddt(a: LogSeries) -> LogSeries:
    """d/dt of a log-series; the truncation order drops by one."""
    out: dict[Key, TangentialPoly] = {}
    for (i, j), c in a.coeffs.items():
        if i == 0:
            if j > 0:
                raise MathDomainError("bare log term cannot be differentiated into the ring")
            continue
        for key, factor in (((i - 1, j), i), ((i - 1, j - 1), j)):
            if factor == 0 or key[1] < 0:
                continue
            if key[0] == 0 and key[1] > 0:
                raise MathDomainError("derivative produces a bare log term")
            term = c.scale(factor)
            out[key] = term if key not in out else out[key] + term
    return LogSeries._raw(a.dim, a.K - 1, a.W - 1, {}, a.exact)._fill(out)


def series_sum(items: Iterable[LogSeries]) -> LogSeries:
    acc = None
    for s in items:
        acc = s if acc is None else acc + s
    if acc is None:
        raise ValueError("empty sum")
    return acc


# ---------------------------------------------------------------------------
# weighted antiderivative t^mu int_0^t rho^{1-mu} a(rho) d rho


def antideriv_monomial(m: int, j: int, mu: int, regularized: bool = False) -> list[tuple[int, int, Fraction]]:
    """t^mu int_0^t rho^{1-mu} rho^m (log rho)^j d rho as a list of (power, log power, coefficient).

    With ``regularized`` a non-integrable power is given its finite part,
    which is the same integration-by-parts formula.
    """
    e = m + 1 - mu
    if e == -1:
        return [(mu, j + 1, Fraction(1, j + 1))]
    if e < -1 and not regularized:
        raise MathDomainError(
            f"t^{m} (log t)^{j} is not integrable against rho^(1-{mu}) at 0"
        )
    s = Fraction(e + 1)
    out = []
    falling = 1
    for k in range(j + 1):
        out.append((m + 2, j - k, Fraction((-1) ** k * falling) / s ** (k + 1)))
        falling *= j - k
    return out


def weighted_antideriv(a: LogSeries, mu: int, regularized: bool = False) -> LogSeries:
    """t^mu int_0^t rho^(1-mu) a(rho) d rho in closed form (raises the t-power by 2)."""
    out: dict[Key, TangentialPoly] = {}
    for (m, j), c in a.coeffs.items():
        for p, lj, coef in antideriv_monomial(m, j, mu, regularized):
            term = c.scale(coef if a.exact else float(coef))
            out[(p, lj)] = term if (p, lj) not in out else out[(p, lj)] + term
    return LogSeries._raw(a.dim, a.K + 2, a.W + 2, {}, a.exact)._fill(out)


# ---------------------------------------------------------------------------
# analytic composition


@dataclass(frozen=True)
class TaylorData:
    """Taylor coefficients of an analytic function of ``nvars`` variables at 0.

    ``order`` is the highest total degree supplied; ``complete`` says the
    function is this polynomial exactly; ``radius`` is a declared radius of
    convergence (None when unknown or infinite).
    """

    nvars: int
    coeffs: Mapping[tuple[int, ...], Fraction]
    order: int
    complete: bool = False
    radius: float | None = None

    @classmethod
    def polynomial(cls, coeffs: Mapping[tuple[int, ...], object]) -> "TaylorData":
        clean = {tuple(e): as_exact(c) for e, c in coeffs.items() if as_exact(c) != 0}
        nvars = len(next(iter(clean))) if clean else 1
        order = max((sum(e) for e in clean), default=0)
        return cls(nvars, clean, order, complete=True)

    @classmethod
    def geometric(cls, order: int, sign: int = 1) -> "TaylorData":
        """1/(1 - sign*y)."""
        return cls(1, {(k,): Fraction(sign) ** k for k in range(order + 1)}, order, False, 1.0)

    @classmethod
    def binomial(cls, gamma, order: int, skip_below: int = 0) -> "TaylorData":
        """(1 + y)^gamma, optionally without the terms of degree < skip_below."""
        gamma = as_exact(gamma)
        coeffs = {}
        c = Fraction(1)
        complete = gamma.denominator == 1 and gamma >= 0
        top = order if not complete else min(order, int(gamma))
        for k in range(top + 1):
            if k >= skip_below and c != 0:
                coeffs[(k,)] = c
            c = c * (gamma - k) / (k + 1)
        if complete and top < int(gamma):
            complete = False
        return cls(1, coeffs, order, complete, None if complete else 1.0)


def compose_analytic(
    F: TaylorData, args: Sequence[LogSeries], K: int | None = None, W: int | None = None
) -> LogSeries:
    """F(args) as a truncated series (exact in rational mode)."""
    if len(args) != F.nvars:
        raise ValueError(f"F takes {F.nvars} arguments, got {len(args)}")
    first = args[0]
    for s in args[1:]:
        first._check(s)
    Kt = min(s.K for s in args) if K is None else K
    Wt = min(s.W for s in args) if W is None else W
    used = [any(e[k] for e in F.coeffs) for k in range(F.nvars)]
    vals = []
    for k, s in enumerate(args):
        c0 = s.coefficient(0, 0).constant_term()
        if used[k] and c0 != 0 and not F.complete:
            if F.radius is not None and abs(float(c0)) >= F.radius:
                raise MathDomainError(f"argument {k} has constant term {c0} outside the radius {F.radius}")
            raise MathDomainError(
                f"argument {k} has constant term {c0}; a truncated Taylor series cannot be composed exactly"
            )
        vals.append(s.weight_valuation())
    if not F.complete and any(used):
        # a power e of the arguments matters only while it stays below both caps
        vmin = min(v for v, u in zip(vals, used) if u)
        tmin = min(s.valuation() for s, u in zip(args, used) if u)
        bounds = [cap // low for cap, low in ((Wt, vmin), (Kt, tmin)) if low > 0]
        need = min(bounds) if bounds else None
        if need is None or need > F.order:
            raise MathDomainError(f"composition needs Taylor order {need}, only {F.order} supplied")
    powers: list[dict[int, LogSeries]] = [dict() for _ in args]

    def power(k: int, e: int) -> LogSeries:
        cache = powers[k]
        if e not in cache:
            if e == 1:
                cache[e] = args[k].truncate(Kt, Wt)
            else:
                half = e // 2
                cache[e] = series_mul(power(k, half), power(k, e - half), Kt, Wt)
        return cache[e]

    one = LogSeries(first.dim, Kt, {(0, 0): 1}, Wt, first.exact)
    total = LogSeries._raw(first.dim, Kt, Wt, {}, first.exact)
    for e in sorted(F.coeffs, key=lambda e: (sum(e), e)):
        c = F.coeffs[e]
        weight = sum(ek * vk for ek, vk in zip(e, vals))
        if weight > Wt:
            continue
        term = one
        for k, ek in enumerate(e):
            if ek:
                term = series_mul(term, power(k, ek), Kt, Wt)
        total = total + term.scale(c if first.exact else float(c))
    return total.truncate(Kt, Wt)


# ---------------------------------------------------------------------------
# two-variable lift T = t, S = t log t


class TwoVarSeries:
    """Map (a, b) -> TangentialPoly standing for sum c_{a,b}(x') T^a S^b, truncated at a + b <= K."""

    __slots__ = ("dim", "K", "W", "coeffs", "exact")

    def __init__(self, dim: int, K: int, coeffs: Mapping[Key, TangentialPoly], W: int | None = None, exact: bool = True):
        self.dim = dim
        self.K = K
        self.W = K if W is None else W
        self.coeffs = {k: v for k, v in coeffs.items() if v and k[0] + k[1] <= K}
        self.exact = exact

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwoVarSeries):
            return NotImplemented
        return self.K == other.K and self.coeffs.keys() == other.coeffs.keys() and all(
            self.coeffs[k] == other.coeffs[k] for k in self.coeffs
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"TwoVarSeries({sorted(self.coeffs)}; K={self.K})"


def two_var_lift(a: LogSeries) -> TwoVarSeries:
    """t^i (log t)^j -> T^(i-j) S^j."""
    coeffs = {}
    for (i, j), c in a.coeffs.items():
        if j > i:
            raise MathDomainError(f"t^{i} (log t)^{j} has more logs than powers and cannot be lifted")
        coeffs[(i - j, j)] = c
    return TwoVarSeries(a.dim, a.K, coeffs, a.W, a.exact)


def collapse(b: TwoVarSeries) -> LogSeries:
    """Substitute T = t, S = t log t."""
    return LogSeries(b.dim, b.K, {(p + q, q): c for (p, q), c in b.coeffs.items()}, b.W, b.exact)


def lambda_apply(b: TwoVarSeries) -> TwoVarSeries:
    """Lambda = T d/dT + (T + S) d/dS, the lift of t d/dt."""
    out: dict[Key, TangentialPoly] = {}

    def put(key, c):
        out[key] = c if key not in out else out[key] + c

    for (p, q), c in b.coeffs.items():
        if p + q:
            put((p, q), c.scale(p + q))
        if q:
            put((p + 1, q - 1), c.scale(q))
    return TwoVarSeries(b.dim, b.K, out, b.W, b.exact)


# ---------------------------------------------------------------------------
# JSON


def series_to_json(a: LogSeries) -> str:
    terms = []
    for (i, j), c in a.items():
        poly = []
        for e, v in c.items():
            if a.exact:
                poly.append({"exps": list(e), "num": v.numerator, "den": v.denominator})
            else:
                poly.append({"exps": list(e), "value": v})
        terms.append({"i": i, "j": j, "poly": poly})
    doc = {
        "format": "polyhom.logseries",
        "version": 1,
        "dim": a.dim,
        "K": a.K,
        "W": a.W,
        "exact": a.exact,
        "terms": terms,
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def series_from_json(text: str) -> LogSeries:
    doc = json.loads(text)
    if isinstance(doc, list):
        doc = {"terms": doc}
    terms = doc["terms"]
    exact = doc.get("exact", True)
    dim = doc.get("dim")
    if dim is None:
        dim = len(terms[0]["poly"][0]["exps"]) if terms and terms[0]["poly"] else 0
    K = doc.get("K", max((t["i"] for t in terms), default=0))
    W = doc.get("W", K)
    coeffs = {}
    for t in terms:
        if exact:
            poly = {tuple(m["exps"]): Fraction(m["num"], m["den"]) for m in t["poly"]}
        else:
            poly = {tuple(m["exps"]): float(m["value"]) for m in t["poly"]}
        coeffs[(t["i"], t["j"])] = TangentialPoly(dim, poly, None, exact)
    return LogSeries(dim, K, coeffs, W, exact)
