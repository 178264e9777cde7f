"""Exact commutative target rings for ring morphisms out of ZG.

Three targets are used:

  integers           Python ``Fraction`` values (augmentation)
  cyclotomic         ``CyclotomicNumber``: Q[z] / Phi_n(z), via sympy ``Poly``
  rational function  elements of sympy's ``field("t", QQ)``

Each target knows its "trivial set", the images of the trivial units +-g,
and how to pick a canonical representative of a value modulo that set.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import product

import mpmath
from sympy import QQ, Poly, Rational, cyclotomic_poly, symbols
from sympy.polys.fields import field

logger = logging.getLogger(__name__)

INTEGERS = "integers"
CYCLOTOMIC = "cyclotomic"
RATIONAL_FUNCTION = "rational_function"

_z = symbols("z")

LAURENT_FIELD, LAURENT_T = field("t", QQ)


def _rat(c) -> Rational:
    c = Fraction(c)
    return Rational(c.numerator, c.denominator)


@lru_cache(maxsize=64)
def _phi(n: int) -> Poly:
    return Poly(cyclotomic_poly(n, _z), _z, domain=QQ)


class CyclotomicNumber:
    """An element of Q(zeta_n), stored reduced modulo Phi_n."""

    __slots__ = ("n", "poly")

    def __init__(self, n: int, poly: Poly):
        self.n = n
        self.poly = poly.rem(_phi(n))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_int(cls, n: int, c) -> CyclotomicNumber:
        return cls(n, Poly(_rat(c), _z, domain=QQ))

    @classmethod
    def zeta_power(cls, n: int, k: int) -> CyclotomicNumber:
        return cls(n, Poly(_z ** (k % n), _z, domain=QQ))

    @classmethod
    def from_coeffs(cls, n: int, coeffs) -> CyclotomicNumber:
        """sum coeffs[i] * zeta^i."""
        expr = sum(_rat(c) * _z**i for i, c in enumerate(coeffs))
        return cls(n, Poly(expr, _z, domain=QQ))

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> CyclotomicNumber:
        if isinstance(other, CyclotomicNumber):
            if other.n != self.n:
                raise ValueError(f"Q(zeta_{self.n}) and Q(zeta_{other.n}) do not mix")
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.from_int(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(self.n, self.poly + other.poly)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.n, -self.poly)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(self.n, self.poly - other.poly)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(self.n, self.poly * other.poly)

    __rmul__ = __mul__

    def inverse(self) -> CyclotomicNumber:
        if self == 0:
            raise ZeroDivisionError("zero has no inverse in Q(zeta_n)")
        return CyclotomicNumber(self.n, self.poly.invert(_phi(self.n)))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, k: int):
        base = self if k >= 0 else self.inverse()
        result = CyclotomicNumber.from_int(self.n, 1)
        for _ in range(abs(k)):
            result = result * base
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs() == other.coeffs()

    def __hash__(self) -> int:
        return hash((self.n, self.coeffs()))

    # -- inspection -----------------------------------------------------------

    def coeffs(self) -> tuple[Fraction, ...]:
        """Coefficients of 1, zeta, ..., zeta^(d-1)."""
        d = _phi(self.n).degree()
        raw = self.poly.all_coeffs()[::-1] if not self.poly.is_zero else []
        out = [Fraction(int(c.p), int(c.q)) for c in raw]
        return tuple(out + [Fraction(0)] * (d - len(out)))

    def galois(self, j: int) -> CyclotomicNumber:
        """The conjugate under zeta -> zeta^j."""
        result = CyclotomicNumber.from_int(self.n, 0)
        for i, c in enumerate(self.coeffs()):
            if c:
                result = result + CyclotomicNumber.zeta_power(self.n, i * j) * c
        return result

    def embed(self, k: int = 1):
        """Numeric value at exp(2 pi i k / n) (mpmath, current precision)."""
        root = mpmath.expjpi(mpmath.mpf(2 * k) / self.n)
        return sum((mpmath.mpf(c.numerator) / c.denominator) * root**i
                   for i, c in enumerate(self.coeffs()))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs())

    def sort_key(self) -> tuple[Fraction, ...]:
        return self.coeffs()

    def __str__(self) -> str:
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs()))):
            if not c:
                continue
            mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            mag = abs(c)
            body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
            terms.append(("-" if c < 0 else "+", body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Target-ring helpers
# ---------------------------------------------------------------------------


def target_one(kind: str, n: int = 0):
    if kind == INTEGERS:
        return Fraction(1)
    if kind == CYCLOTOMIC:
        return CyclotomicNumber.from_int(n, 1)
    return LAURENT_FIELD.one


def target_zero(kind: str, n: int = 0):
    if kind == INTEGERS:
        return Fraction(0)
    if kind == CYCLOTOMIC:
        return CyclotomicNumber.from_int(n, 0)
    return LAURENT_FIELD.zero


def field_det(rows: list[list], one):
    """Determinant over a commutative field by Gaussian elimination."""
    n = len(rows)
    if n == 0:
        return one
    m = [list(r) for r in rows]
    det = one
    for col in range(n):
        pivot = next((r for r in range(col, n) if not m[r][col] == 0), None)
        if pivot is None:
            return one - one
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        for r in range(col + 1, n):
            if m[r][col] == 0:
                continue
            factor = m[r][col] / p
            m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return det


def _laurent_order(poly) -> int:
    return min(monom[0] for monom in poly.monoms())


def _laurent_lc_sign(poly) -> int:
    return 1 if poly.LC > 0 else -1


def canonical_value(kind: str, value, n: int = 0):
    """(canonical representative modulo the trivial set, value is trivial)."""
    if kind == INTEGERS:
        v = Fraction(value)
        return abs(v), abs(v) == 1
    if kind == CYCLOTOMIC:
        one = CyclotomicNumber.from_int(n, 1)
        candidates = []
        for j in range(n):
            root = CyclotomicNumber.zeta_power(n, j)
            candidates.append(value * root)
            candidates.append(-(value * root))
        trivial = any(c == one for c in candidates)
        return min(candidates, key=lambda c: c.sort_key()), trivial
    if value == 0:
        return value, False
    numer, denom = value.numer, value.denom
    shift = _laurent_order(denom) - _laurent_order(numer)
    canon = value * LAURENT_T**shift
    canon = canon * (_laurent_lc_sign(canon.numer) * _laurent_lc_sign(canon.denom))
    return canon, canon == 1


# ---------------------------------------------------------------------------
# Square roots in Q(zeta_p)
# ---------------------------------------------------------------------------


def square_roots(c: CyclotomicNumber, dps: int = 60, first: bool = False
                 ) -> list[CyclotomicNumber]:
    """All r in Z[zeta_p] with r^2 = c, for p prime; only +-r once one is found with ``first``.

    Candidates come from the numeric embeddings (every sign pattern over
    zeta -> zeta^k, k = 1..p-1) and a Vandermonde solve; each is rounded to
    integer coefficients and kept only if r * r == c holds exactly.
    """
    p = c.n
    d = p - 1
    if d < 1:
        return []
    roots: list[CyclotomicNumber] = []
    with mpmath.workdps(dps):
        omegas = [mpmath.expjpi(mpmath.mpf(2 * k) / p) for k in range(1, p)]
        values = [c.embed(k) for k in range(1, p)]
        sqrt_values = [mpmath.sqrt(v) for v in values]
        vandermonde = mpmath.matrix([[w**j for j in range(d)] for w in omegas])
        # fixing the sign at zeta -> zeta only drops the overall -1
        for signs in product((1, -1), repeat=d - 1):
            rhs = mpmath.matrix([sqrt_values[0]] + [s * v for s, v in zip(signs, sqrt_values[1:])])
            try:
                coeffs = mpmath.lu_solve(vandermonde, rhs)
            except ZeroDivisionError:
                continue
            rounded = []
            for x in coeffs:
                if abs(mpmath.im(x)) > mpmath.mpf(10) ** (-dps // 3):
                    break
                rounded.append(int(mpmath.nint(mpmath.re(x))))
            else:
                r = CyclotomicNumber.from_coeffs(p, rounded)
                if r * r == c:
                    for cand in (r, -r):
                        if cand not in roots:
                            roots.append(cand)
                    if first:
                        break
    logger.debug("square roots of %s in Q(zeta_%d): %d found", c, p, len(roots))
    return roots


def residue_at_one(r: CyclotomicNumber, p: int) -> int:
    """r(1) mod p for integral r: the image under Z[zeta_p] -> F_p."""
    total = sum(r.coeffs())
    if total.denominator != 1:
        raise ValueError("residue_at_one needs integral coefficients")
    return int(total) % p
