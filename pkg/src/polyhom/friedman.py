"""Factorial-growth bounds for compositions Phi(x, y(x)).

If the mixed derivatives of Phi grow like A0 A1^j A2^k (j-2)! (k-2)! and the
derivatives of y like B0 B1^{(k-2)+} (k-2)!, then the p-th derivative of the
composition is at most B0_tilde B1^{(p-2)+} (p-2)!.  This module computes the
constants, the scalar majorants z, Psi1, Psi2, the coefficients a_{i,k} of the
powers of z, and checks the final bound on explicit families with exact
rational Taylor arithmetic.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import MathDomainError

Rational = Fraction | int


def fact(m: int) -> int:
    """m! extended by 1 to every m <= 0."""
    return math.factorial(m) if m > 0 else 1


def _positive(**values: Rational) -> dict[str, Fraction]:
    out = {}
    for name, value in values.items():
        value = Fraction(value)
        if value <= 0:
            raise MathDomainError(f"{name} must be positive, got {value}")
        out[name] = value
    return out


def friedman_constants(A0: Rational, A1: Rational, A2: Rational, B0: Rational) -> tuple[Fraction, Fraction]:
    """Smallest admissible B1 and the resulting B0_tilde."""
    c = _positive(A0=A0, A1=A1, A2=A2, B0=B0)
    A0, A1, A2, B0 = c["A0"], c["A1"], c["A2"], c["B0"]
    B1 = max(Fraction(16), 6 * A2 * B0, 2 * A1)
    B0_tilde = A0 * B0 * (9 * A2 + A2 * A2 * B0) * (A1 * A1 + 3 * A1 + 16)
    return B1, B0_tilde


def hat_constant(A0: Rational, A2: Rational, B0: Rational) -> Fraction:
    """Bound constant for the derivatives of Psi2(z(t)) at t = 0."""
    A0, A2, B0 = Fraction(A0), Fraction(A2), Fraction(B0)
    return A0 * B0 * (9 * A2 + A2 * A2 * B0)


# --- univariate truncated polynomials: lists of Fractions, index = power ----

def _pmul(a: list[Fraction], b: list[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a):
        if not x or i > order:
            continue
        for j, y in enumerate(b[: order + 1 - i]):
            if y:
                out[i + j] += x * y
    return out


def _ppow(a: list[Fraction], e: int, order: int) -> list[Fraction]:
    out = [Fraction(1)] + [Fraction(0)] * order
    base = list(a[: order + 1]) + [Fraction(0)] * max(0, order + 1 - len(a))
    while e:
        if e & 1:
            out = _pmul(out, base, order)
        e >>= 1
        if e:
            base = _pmul(base, base, order)
    return out


def z_coeffs(p: int, B0: Rational = 1, B1: Rational = 16) -> list[Fraction]:
    """Taylor coefficients of z(t) = B0 [t + sum_{k=2}^p B1^{k-2} t^k / (k(k-1))]."""
    B0, B1 = Fraction(B0), Fraction(B1)
    out = [Fraction(0)] * (p + 1)
    if p >= 1:
        out[1] = B0
    for k in range(2, p + 1):
        out[k] = B0 * B1 ** (k - 2) / (k * (k - 1))
    return out


def psi1_coeffs(A1: Rational, p: int) -> list[Fraction]:
    A1 = Fraction(A1)
    return [A1**i * fact(i - 2) / math.factorial(i) for i in range(p + 1)]


def psi2_coeffs(A0: Rational, A2: Rational, p: int) -> list[Fraction]:
    A0, A2 = Fraction(A0), Fraction(A2)
    return [A0 * A2**i * fact(i - 2) / math.factorial(i) for i in range(p + 1)]


def derivatives_at_zero(coeffs: list[Fraction]) -> list[Fraction]:
    return [c * math.factorial(i) for i, c in enumerate(coeffs)]


def z_power_coeffs(i: int, p: int, B0: Rational = 1, B1: Rational = 16) -> dict[int, Fraction]:
    """a_{i,k} for i < k <= p, read off the exact power [z(t)]^i.

    The coefficient of t^k in z^i is B0^i a_{i,k} B1^{k-i-1}; the leading
    coefficient at t^i is B0^i.
    """
    if not 1 <= i <= p:
        raise MathDomainError(f"need 1 <= i <= p, got i={i}, p={p}")
    B0, B1 = _positive(B0=B0, B1=B1).values()
    zi = _ppow(z_coeffs(p, B0, B1), i, p)
    if zi[i] != B0**i:
        raise AssertionError("leading coefficient of z^i is not B0^i")
    return {k: zi[k] / (B0**i * B1 ** (k - i - 1)) for k in range(i + 1, p + 1)}


def z_power_recursion(p: int, B1: Rational = 16) -> dict[tuple[int, int], Fraction]:
    """a_{i,k} for all 1 <= i < k <= p from the convolution recursion in i."""
    B1 = Fraction(B1)
    a = {(1, k): Fraction(1, k * (k - 1)) for k in range(2, p + 1)}
    for i in range(1, p):
        for m in range(i + 2, p + 1):
            conv = sum(
                (a[1, k] * a[i, m - k] for k in range(2, m - i) if (i, m - k) in a),
                Fraction(0),
            )
            a[i + 1, m] = a[1, m - i] + a[i, m - 1] + conv / B1
    return a


def a_bound(i: int, k: int) -> Fraction:
    return Fraction(3 ** (i - 1), (k - i + 1) * (k - i))


@dataclass
class FriedmanData:
    """Constants and majorant tables for one choice of (A0, A1, A2, B0) and order p."""

    A0: Fraction
    A1: Fraction
    A2: Fraction
    B0: Fraction
    p: int
    B1: Fraction = field(init=False)
    B0_tilde: Fraction = field(init=False)
    psi1: list[Fraction] = field(init=False, repr=False)
    psi2: list[Fraction] = field(init=False, repr=False)
    z: list[Fraction] = field(init=False, repr=False)
    a: dict[tuple[int, int], Fraction] = field(init=False, repr=False)

    def __post_init__(self):
        if self.p < 1:
            raise MathDomainError("derivative order p must be positive")
        self.B1, self.B0_tilde = friedman_constants(self.A0, self.A1, self.A2, self.B0)
        self.A0, self.A1, self.A2, self.B0 = map(Fraction, (self.A0, self.A1, self.A2, self.B0))
        self.psi1 = psi1_coeffs(self.A1, self.p)
        self.psi2 = psi2_coeffs(self.A0, self.A2, self.p)
        self.z = z_coeffs(self.p, self.B0, self.B1)
        self.a = {}
        for i in range(1, self.p + 1):
            for k, v in z_power_coeffs(i, self.p, self.B0, self.B1).items():
                self.a[i, k] = v

    def bound(self, p: int | None = None) -> Fraction:
        p = self.p if p is None else p
        return self.B0_tilde * self.B1 ** max(p - 2, 0) * fact(p - 2)

    def a_bound_violations(self) -> list[tuple[int, int, Fraction, Fraction]]:
        return [(i, k, v, a_bound(i, k)) for (i, k), v in sorted(self.a.items()) if v > a_bound(i, k)]

    def psi2_of_z_derivatives(self) -> list[Fraction]:
        """d^k/dt^k Psi2(z(t)) at 0 for k = 0..p."""
        return derivatives_at_zero(_compose(self.psi2, self.z, self.p))

    def majorant_derivative(self) -> Fraction:
        """d^p/dt^p [Psi1(t) Psi2(z(t))] at t = 0."""
        full = _pmul(self.psi1, _compose(self.psi2, self.z, self.p), self.p)
        return full[self.p] * math.factorial(self.p)


def _compose(outer: list[Fraction], inner: list[Fraction], order: int) -> list[Fraction]:
    """outer(inner(t)) truncated, for inner(0) = 0 (Horner)."""
    if inner and inner[0]:
        raise MathDomainError("inner series must vanish at 0")
    out = [Fraction(0)] * (order + 1)
    for c in reversed(outer[: order + 1]):
        out = _pmul(out, inner, order)
        out[0] += c
    return out


# --- composition-bound check on explicit families ---------------------------

Jet2 = dict[tuple[int, int], Fraction]


def _jet2_mul(a: Jet2, b: Jet2, order: int) -> Jet2:
    out: Jet2 = {}
    for (i, j), x in a.items():
        for (k, l), y in b.items():
            if i + j + k + l <= order:
                key = (i + k, j + l)
                out[key] = out.get(key, Fraction(0)) + x * y
    return {k: v for k, v in out.items() if v}


def _jet2_geometric(u: Jet2, order: int) -> Jet2:
    """1/(1 - u) for u without constant term."""
    out: Jet2 = {(0, 0): Fraction(1)}
    power: Jet2 = {(0, 0): Fraction(1)}
    for _ in range(order):
        power = _jet2_mul(power, u, order)
        for k, v in power.items():
            out[k] = out.get(k, Fraction(0)) + v
    return out


@dataclass(frozen=True)
class CompositionFamily:
    """Phi and y with exact Taylor jets and constants for which the hypotheses are claimed.

    phi_jet(x0, y0, p) returns the Taylor coefficients of Phi(x0 + a, y0 + b)
    in (a, b) up to total degree p; y_jet(x0, p) those of y(x0 + h).
    """

    name: str
    phi_jet: Callable[[Fraction, Fraction, int], Jet2]
    y_jet: Callable[[Fraction, int], list[Fraction]]
    A0: Fraction
    A1: Fraction
    A2: Fraction
    B0: Fraction
    samples: tuple[Fraction, ...]


def _linear_y(slope: Fraction) -> Callable[[Fraction, int], list[Fraction]]:
    def jet(x0: Fraction, p: int) -> list[Fraction]:
        return ([slope * x0, slope] + [Fraction(0)] * p)[: p + 1]

    return jet


def _geometric_phi(x0, y0, p):
    # 1/(1 - y0 - b) = (1/(1-y0)) * 1/(1 - b/(1-y0))
    s = 1 / (1 - y0)
    return {k: s * v for k, v in _jet2_geometric({(0, 1): s}, p).items()}


def _quotient_phi(x0, y0, p):
    # (y0 + b)/(1 - x0 - a)
    s = 1 / (1 - x0)
    g = {k: s * v for k, v in _jet2_geometric({(1, 0): s}, p).items()}
    return _jet2_mul({(0, 0): y0, (0, 1): Fraction(1)} if y0 else {(0, 1): Fraction(1)}, g, p)


def _saturating_y(B0: Fraction, B1: Fraction):
    def jet(x0: Fraction, p: int) -> list[Fraction]:
        if x0 != 0:
            raise MathDomainError("the saturating map is only sampled at x = 0")
        return z_coeffs(p, B0, B1)

    return jet


def shipped_families() -> list[CompositionFamily]:
    """Test families, each saturating at least one hypothesis with equality."""
    F = Fraction
    return [
        CompositionFamily(
            "constant", lambda x0, y0, p: {(0, 0): F(3)}, _linear_y(F(1, 2)),
            F(3), F(1), F(1), F(1, 2), (F(0), F(1, 10), F(1, 5)),
        ),
        CompositionFamily(
            "identity_saturating", lambda x0, y0, p: {k: v for k, v in {(0, 0): y0, (0, 1): F(1)}.items() if v},
            _saturating_y(F(1), F(16)), F(1), F(1), F(1), F(1), (F(0),),
        ),
        CompositionFamily(
            "geometric", _geometric_phi, _linear_y(F(1, 2)),
            F(10, 9), F(1), F(20, 9), F(1, 2), (F(0), F(1, 10), F(1, 5)),
        ),
        CompositionFamily(
            "quotient", _quotient_phi, _linear_y(F(1, 2)),
            F(5, 4), F(5, 2), F(1), F(1, 2), (F(0), F(1, 10), F(1, 5)),
        ),
    ]


@dataclass(frozen=True)
class BoundCheck:
    family: str
    x0: Fraction
    p: int
    lhs: Fraction
    bound: Fraction
    phi_hypothesis: bool
    y_hypothesis: bool

    @property
    def hypotheses_hold(self) -> bool:
        return self.phi_hypothesis and self.y_hypothesis

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound

    @property
    def margin(self) -> float:
        return math.inf if self.lhs == 0 else float(self.bound / self.lhs)


def _phi_hypothesis(jet: Jet2, fam: CompositionFamily, p: int) -> bool:
    for (j, k), c in jet.items():
        if j + k <= p:
            deriv = abs(c) * math.factorial(j) * math.factorial(k)
            if deriv > fam.A0 * fam.A1**j * fam.A2**k * fact(j - 2) * fact(k - 2):
                return False
    return True


def _y_hypothesis(y: list[Fraction], B0: Fraction, B1: Fraction) -> bool:
    return all(
        abs(c) * math.factorial(k) <= B0 * B1 ** max(k - 2, 0) * fact(k - 2) for k, c in enumerate(y)
    )


def composition_derivative(fam: CompositionFamily, x0: Fraction, p: int) -> Fraction:
    """d^p/dx^p Phi(x, y(x)) at x0, by substituting the jet of y into the jet of Phi."""
    y = fam.y_jet(x0, p)
    jet = fam.phi_jet(x0, y[0], p)
    dy = [Fraction(0)] + list(y[1:])
    total = Fraction(0)
    for (j, k), c in jet.items():
        if j > p:
            continue
        term = _ppow(dy, k, p - j)
        total += c * (term[p - j] if p - j < len(term) else 0)
    return total * math.factorial(p)


def verify_composition_bound(fam: CompositionFamily, p: int) -> list[BoundCheck]:
    B1, B0_tilde = friedman_constants(fam.A0, fam.A1, fam.A2, fam.B0)
    bound = B0_tilde * B1 ** max(p - 2, 0) * fact(p - 2)
    rows = []
    for x0 in fam.samples:
        y = fam.y_jet(x0, p)
        jet = fam.phi_jet(x0, y[0], p)
        rows.append(BoundCheck(
            fam.name, x0, p, abs(composition_derivative(fam, x0, p)), bound,
            _phi_hypothesis(jet, fam, p), _y_hypothesis(y, fam.B0, B1),
        ))
    return rows


@dataclass
class FriedmanReport:
    data: FriedmanData
    a_max_index: int
    a_violations: list[tuple[int, int, Fraction, Fraction]]
    checks: list[BoundCheck]

    @property
    def passed(self) -> bool:
        return not self.a_violations and all(c.holds for c in self.checks if c.hypotheses_hold)

    def to_text(self) -> str:
        d = self.data
        lines = [
            f"A0={d.A0} A1={d.A1} A2={d.A2} B0={d.B0}",
            f"B1={d.B1}",
            f"B0_tilde={d.B0_tilde}",
            f"a_bound_checked=1<=i<k<={self.a_max_index} violations={len(self.a_violations)}",
        ]
        for i, k, v, b in self.a_violations:
            lines.append(f"  a[{i},{k}]={v} > {b}")
        lines.append(f"composition_checks={len(self.checks)}")
        lines.append(f"verdict={'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def checks_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "x0", "p", "lhs", "bound", "margin", "hypotheses", "holds"])
        for c in self.checks:
            w.writerow([c.family, str(c.x0), c.p, f"{float(c.lhs):.12e}", f"{float(c.bound):.12e}",
                        f"{c.margin:.6e}", int(c.hypotheses_hold), int(c.holds)])
        return buf.getvalue()


def friedman_report(A0=1, A1=1, A2=1, B0=1, p=12, a_max_index=20,
                    families: list[CompositionFamily] | None = None) -> FriedmanReport:
    data = FriedmanData(A0, A1, A2, B0, p)
    table = z_power_recursion(a_max_index, 16)
    violations = [(i, k, v, a_bound(i, k)) for (i, k), v in sorted(table.items()) if v > a_bound(i, k)]
    checks = []
    for fam in families if families is not None else shipped_families():
        for q in range(1, p + 1):
            checks.extend(verify_composition_bound(fam, q))
    return FriedmanReport(data, a_max_index, violations, checks)
