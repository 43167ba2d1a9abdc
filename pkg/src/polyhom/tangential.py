"""Truncated polynomials in the tangential variables x' = (x_1, ..., x_d).

Coefficients are exact rationals (``fractions.Fraction``) by default; a
floating mode is available but the two are never mixed silently.  A
polynomial carries a truncation degree ``max_degree``; ``None`` means the
polynomial is known exactly (no truncation).
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

from .errors import DimensionMismatch, ModeMismatch

Exps = tuple[int, ...]


def as_exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ModeMismatch("boolean is not a coefficient")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise ModeMismatch(f"cannot use {type(x).__name__} {x!r} as an exact coefficient")


def as_float(x) -> float:
    if isinstance(x, (float, int)) and not isinstance(x, bool):
        return float(x)
    raise ModeMismatch(f"cannot use {type(x).__name__} {x!r} as a floating coefficient")


def _min_cap(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def mul_terms(ta: Mapping[Exps, object], tb: Mapping[Exps, object], cap: int | None) -> dict:
    """Product of two term maps keeping total degree <= cap."""
    if not ta or not tb:
        return {}
    if len(ta) == 1 and () in ta:
        ca = ta[()]
        return {(): ca * tb[()]} if () in tb else {}
    la = sorted(((sum(e), e, c) for e, c in ta.items()), key=lambda r: r[0])
    lb = sorted(((sum(e), e, c) for e, c in tb.items()), key=lambda r: r[0])
    out: dict = {}
    get = out.get
    for da, ea, ca in la:
        if cap is not None and da + lb[0][0] > cap:
            break
        rem = None if cap is None else cap - da
        for db, eb, cb in lb:
            if rem is not None and db > rem:
                break
            e = tuple([x + y for x, y in zip(ea, eb)])
            out[e] = get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


class TangentialPoly:
    """Sparse truncated polynomial sum c_alpha x'^alpha."""

    __slots__ = ("dim", "terms", "max_degree", "exact")

    def __init__(
        self,
        dim: int,
        terms: Mapping[Exps, object] | None = None,
        max_degree: int | None = None,
        exact: bool = True,
    ):
        if dim < 0:
            raise ValueError("dimension must be nonnegative")
        conv = as_exact if exact else as_float
        clean: dict[Exps, object] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != dim or any(k < 0 for k in e):
                raise DimensionMismatch(f"exponent {e} does not fit dimension {dim}")
            if max_degree is not None and sum(e) > max_degree:
                continue
            c = conv(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        self.dim = dim
        self.terms = {e: c for e, c in clean.items() if c != 0}
        self.max_degree = max_degree
        self.exact = exact

    @classmethod
    def _raw(cls, dim: int, terms: dict, max_degree: int | None, exact: bool) -> "TangentialPoly":
        obj = object.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        obj.max_degree = max_degree
        obj.exact = exact
        return obj

    @classmethod
    def constant(cls, c, dim: int = 0, max_degree: int | None = None, exact: bool = True) -> "TangentialPoly":
        return cls(dim, {(0,) * dim: c}, max_degree, exact)

    @classmethod
    def zero(cls, dim: int = 0, max_degree: int | None = None, exact: bool = True) -> "TangentialPoly":
        return cls._raw(dim, {}, max_degree, exact)

    @classmethod
    def variable(cls, k: int, dim: int, max_degree: int | None = None, exact: bool = True) -> "TangentialPoly":
        e = [0] * dim
        e[k] = 1
        return cls(dim, {tuple(e): 1}, max_degree, exact)

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def valuation(self) -> int | None:
        """Lowest total degree present, ``None`` for the zero polynomial."""
        return min((sum(e) for e in self.terms), default=None)

    def coefficient(self, exps: Iterable[int]):
        e = tuple(exps)
        return self.terms.get(e, Fraction(0) if self.exact else 0.0)

    def constant_term(self):
        return self.coefficient((0,) * self.dim)

    def items(self) -> Iterator[tuple[Exps, object]]:
        """Terms sorted by (degree, exponent tuple)."""
        return iter(sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])))

    def homogeneous_part(self, degree: int) -> "TangentialPoly":
        terms = {e: c for e, c in self.terms.items() if sum(e) == degree}
        return TangentialPoly._raw(self.dim, terms, self.max_degree, self.exact)

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "TangentialPoly") -> None:
        if other.dim != self.dim:
            raise DimensionMismatch(f"dimension {self.dim} vs {other.dim}")
        if other.exact != self.exact:
            raise ModeMismatch("exact and floating polynomials cannot be combined")

    def _coerce(self, other) -> "TangentialPoly":
        if isinstance(other, TangentialPoly):
            self._check(other)
            return other
        return TangentialPoly.constant(other, self.dim, None, self.exact)

    def truncate(self, max_degree: int | None) -> "TangentialPoly":
        cap = _min_cap(self.max_degree, max_degree)
        if cap is None:
            return self
        terms = {e: c for e, c in self.terms.items() if sum(e) <= cap}
        return TangentialPoly._raw(self.dim, terms, cap, self.exact)

    def __add__(self, other) -> "TangentialPoly":
        other = self._coerce(other)
        cap = _min_cap(self.max_degree, other.max_degree)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        if cap is not None:
            out = {e: c for e, c in out.items() if sum(e) <= cap}
        return TangentialPoly._raw(self.dim, {e: c for e, c in out.items() if c != 0}, cap, self.exact)

    __radd__ = __add__

    def __neg__(self) -> "TangentialPoly":
        return TangentialPoly._raw(self.dim, {e: -c for e, c in self.terms.items()}, self.max_degree, self.exact)

    def __sub__(self, other) -> "TangentialPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TangentialPoly":
        return (-self) + other

    def scale(self, c) -> "TangentialPoly":
        c = as_exact(c) if self.exact else as_float(c)
        if c == 0:
            return TangentialPoly._raw(self.dim, {}, self.max_degree, self.exact)
        return TangentialPoly._raw(self.dim, {e: c * v for e, v in self.terms.items()}, self.max_degree, self.exact)

    def mul(self, other: "TangentialPoly", max_degree: int | None = None) -> "TangentialPoly":
        """Product truncated to ``max_degree`` (the caller vouches for exactness)."""
        self._check(other)
        terms = mul_terms(self.terms, other.terms, max_degree)
        return TangentialPoly._raw(self.dim, terms, max_degree, self.exact)

    def __mul__(self, other) -> "TangentialPoly":
        if not isinstance(other, TangentialPoly):
            return self.scale(other)
        self._check(other)
        # a product is known up to degree D_a + val_b (and symmetrically)
        va = self.valuation()
        vb = other.valuation()
        caps = []
        if self.max_degree is not None:
            caps.append(self.max_degree + (vb if vb is not None else self.max_degree + 1))
        if other.max_degree is not None:
            caps.append(other.max_degree + (va if va is not None else other.max_degree + 1))
        cap = min(caps) if caps else None
        return self.mul(other, cap)

    def __rmul__(self, other) -> "TangentialPoly":
        return self.scale(other)

    def partial(self, k: int) -> "TangentialPoly":
        """Derivative in x_k; the truncation degree drops by one."""
        if not 0 <= k < self.dim:
            raise DimensionMismatch(f"no tangential variable {k} in dimension {self.dim}")
        out = {}
        for e, c in self.terms.items():
            if e[k]:
                f = list(e)
                f[k] -= 1
                out[tuple(f)] = c * e[k]
        cap = None if self.max_degree is None else self.max_degree - 1
        return TangentialPoly._raw(self.dim, out, cap, self.exact)

    def laplacian(self) -> "TangentialPoly":
        out = TangentialPoly.zero(self.dim, None, self.exact)
        for k in range(self.dim):
            out = out + self.partial(k).partial(k)
        if self.max_degree is not None:
            out = out.truncate(self.max_degree - 2)
        return out

    def evaluate(self, x=None):
        """Value at the point x (a sequence of length dim); exact in, exact out."""
        if self.dim == 0:
            return self.constant_term()
        if x is None:
            x = (0,) * self.dim
        total = 0
        for e, c in self.terms.items():
            v = c
            for xk, ek in zip(x, e):
                if ek:
                    v = v * xk**ek
            total = total + v
        return total

    def to_float(self) -> "TangentialPoly":
        return TangentialPoly._raw(
            self.dim, {e: float(c) for e, c in self.terms.items()}, self.max_degree, False
        )

    def abs_norm(self, s: float) -> float:
        """Majorant norm sum |c_alpha| s^|alpha| (dominates the sup over |x'| < s)."""
        return float(sum(abs(float(c)) * s ** sum(e) for e, c in self.terms.items()))

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, TangentialPoly):
            return (
                self.dim == other.dim
                and self.exact == other.exact
                and self.terms == other.terms
            )
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            return self.terms == ({(0,) * self.dim: other} if other != 0 else {})
        return NotImplemented

    __hash__ = None

    def __repr__(self) -> str:
        if not self.terms:
            return "TangentialPoly(0)"
        parts = []
        for e, c in self.items():
            mono = "*".join(f"x{k}^{p}" if p > 1 else f"x{k}" for k, p in enumerate(e) if p)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "TangentialPoly(" + " + ".join(parts) + ")"
