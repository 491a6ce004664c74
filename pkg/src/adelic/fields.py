"""Exact scalar arithmetic: the rationals, prime fields, and small extensions.

Scalars are `FieldScalar` values tagged with their field (characteristic 0
for the rationals, a prime p for F_p).  Finite extensions are residue rings
k[x]/(m) with a monic modulus that is checked for irreducibility up to
degree 4; higher degrees are accepted on trust.  Everything is exact: the
rationals use `fractions.Fraction`, prime fields use reduced integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParseError, PreconditionError

MAX_PRIME = 1 << 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Field:
    """A base field tag: characteristic 0 means the rationals."""

    char: int = 0

    def __post_init__(self) -> None:
        if self.char != 0:
            if not _is_prime(self.char):
                raise PreconditionError(f"field characteristic {self.char} is not prime")
            if self.char >= MAX_PRIME:
                raise PreconditionError(f"prime {self.char} exceeds the supported bound {MAX_PRIME}")

    def zero(self) -> "FieldScalar":
        return self.scalar(0)

    def one(self) -> "FieldScalar":
        return self.scalar(1)

    def scalar(self, value: int | Fraction) -> "FieldScalar":
        """Coerce an integer or Fraction into this field."""
        if self.char == 0:
            return FieldScalar(self, Fraction(value))
        if isinstance(value, Fraction):
            num = value.numerator % self.char
            den = value.denominator % self.char
            if den == 0:
                raise PreconditionError(f"denominator divisible by {self.char}")
            return FieldScalar(self, (num * pow(den, -1, self.char)) % self.char)
        return FieldScalar(self, value % self.char)

    def __str__(self) -> str:
        return "Q" if self.char == 0 else f"F{self.char}"


QQ = Field(0)


def parse_field(text: str) -> Field:
    """Parse a field tag: 'Q' or 'F<p>' (also accepts 'F_<p>')."""
    t = text.strip()
    if t in ("Q", "QQ"):
        return QQ
    if t.startswith("F"):
        digits = t[1:].lstrip("_")
        if digits.isdigit():
            return Field(int(digits))
    raise ParseError(f"unknown field tag {text!r}")


@dataclass(frozen=True)
class FieldScalar:
    """An exact element of a tagged base field."""

    field: Field
    value: Fraction | int

    def _check(self, other: "FieldScalar") -> None:
        if self.field != other.field:
            raise PreconditionError(f"mixed fields {self.field} and {other.field}")

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def __add__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return self.field.scalar(self.value + other.value)

    def __sub__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return self.field.scalar(self.value - other.value)

    def __mul__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return self.field.scalar(self.value * other.value)

    def __neg__(self) -> "FieldScalar":
        return self.field.scalar(-self.value)

    def inv(self) -> "FieldScalar":
        if self.is_zero:
            raise PreconditionError("inverse of zero")
        if self.field.char == 0:
            return FieldScalar(self.field, 1 / self.value)
        return FieldScalar(self.field, pow(self.value, -1, self.field.char))

    def __truediv__(self, other: "FieldScalar") -> "FieldScalar":
        return self * other.inv()

    def __pow__(self, n: int) -> "FieldScalar":
        if n < 0:
            return self.inv() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __str__(self) -> str:
        return str(self.value)


# Dense univariate polynomials over FieldScalar, coefficients lowest first,
# normalized to have no trailing zeros.  Internal helpers for extensions.

Coeffs = tuple[FieldScalar, ...]


def _ptrim(cs: Sequence[FieldScalar]) -> Coeffs:
    n = len(cs)
    while n > 0 and cs[n - 1].is_zero:
        n -= 1
    return tuple(cs[:n])


def _padd(a: Coeffs, b: Coeffs, field: Field) -> Coeffs:
    out = []
    for i in range(max(len(a), len(b))):
        x = a[i] if i < len(a) else field.zero()
        y = b[i] if i < len(b) else field.zero()
        out.append(x + y)
    return _ptrim(out)


def _pscale(a: Coeffs, c: FieldScalar) -> Coeffs:
    return _ptrim([x * c for x in a])


def _pmul(a: Coeffs, b: Coeffs, field: Field) -> Coeffs:
    if not a or not b:
        return ()
    out = [field.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _ptrim(out)


def _pdivmod(a: Coeffs, b: Coeffs, field: Field) -> tuple[Coeffs, Coeffs]:
    if not b:
        raise PreconditionError("polynomial division by zero")
    rem = list(a)
    quo = [field.zero()] * max(0, len(a) - len(b) + 1)
    inv_lead = b[-1].inv()
    for i in range(len(rem) - len(b), -1, -1):
        c = rem[i + len(b) - 1] * inv_lead
        if c.is_zero:
            continue
        quo[i] = c
        for j, y in enumerate(b):
            rem[i + j] = rem[i + j] - c * y
    return _ptrim(quo), _ptrim(rem)


def _pmod_pow_x(exp: int, modulus: Coeffs, field: Field) -> Coeffs:
    """x^exp reduced mod the given polynomial, by repeated squaring."""
    result: Coeffs = (field.one(),)
    base = _pdivmod((field.zero(), field.one()), modulus, field)[1]
    while exp:
        if exp & 1:
            result = _pdivmod(_pmul(result, base, field), modulus, field)[1]
        base = _pdivmod(_pmul(base, base, field), modulus, field)[1]
        exp >>= 1
    return result


def _pgcd(a: Coeffs, b: Coeffs, field: Field) -> Coeffs:
    while b:
        a, b = b, _pdivmod(a, b, field)[1]
    if a:
        a = _pscale(a, a[-1].inv())
    return a


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _rational_roots_exist(int_coeffs: list[int]) -> bool:
    """Whether a monic integer polynomial has a rational (hence integer) root."""
    const = int_coeffs[0]
    if const == 0:
        return True
    for r in _divisors(const):
        for root in (r, -r):
            acc = 0
            for c in reversed(int_coeffs):
                acc = acc * root + c
            if acc == 0:
                return True
    return False


def _monic_integer_form(coeffs: Coeffs) -> list[int]:
    """Rescale a monic rational polynomial to a monic integer one.

    Substituting x -> y/c and clearing denominators preserves
    (ir)reducibility; c is the lcm of the coefficient denominators.
    """
    from math import lcm

    fracs = [c.value for c in coeffs]
    c = lcm(*[f.denominator for f in fracs]) if fracs else 1
    d = len(coeffs) - 1
    out = []
    for i, f in enumerate(fracs):
        scaled = f * c ** (d - i)
        assert scaled.denominator == 1
        out.append(int(scaled))
    return out


def _quartic_splits_in_quadratics(e: list[int]) -> bool:
    """Whether monic integer y^4+e3*y^3+e2*y^2+e1*y+e0 = (y^2+ay+b)(y^2+cy+d)."""
    e0, e1, e2, e3 = e[0], e[1], e[2], e[3]
    if e0 == 0:
        return True
    for b in _divisors(e0):
        for bb in (b, -b):
            if e0 % bb != 0:
                continue
            dd = e0 // bb
            if dd != bb:
                num = e1 - e3 * bb
                den = dd - bb
                if num % den != 0:
                    continue
                a = num // den
                c = e3 - a
                if bb + dd + a * c == e2:
                    return True
            else:
                if e1 != e3 * bb:
                    continue
                # a + c = e3, a*c = e2 - 2b: integer roots of z^2 - e3 z + (e2-2b)
                from math import isqrt

                disc = e3 * e3 - 4 * (e2 - 2 * bb)
                if disc >= 0 and isqrt(disc) ** 2 == disc and (e3 + isqrt(disc)) % 2 == 0:
                    return True
    return False


def is_irreducible(coeffs: Coeffs, field: Field) -> bool:
    """Irreducibility of a monic polynomial of degree <= 4 over the base field."""
    deg = len(coeffs) - 1
    if deg < 1:
        raise PreconditionError("modulus must have degree >= 1")
    if deg == 1:
        return True
    if field.char > 0:
        p = field.char
        g = _pgcd(
            _padd(_pmod_pow_x(p ** (deg // 2), coeffs, field), _pscale((field.zero(), field.one()), -field.one()), field),
            coeffs,
            field,
        )
        return len(g) <= 1
    ints = _monic_integer_form(coeffs)
    if _rational_roots_exist(ints):
        return False
    if deg == 4:
        return not _quartic_splits_in_quadratics(ints)
    return True


@dataclass(frozen=True)
class ExtField:
    """A finite extension base[x]/(modulus) with monic modulus."""

    base: Field
    var: str
    modulus: Coeffs
    trusted: bool = False

    def __post_init__(self) -> None:
        if not self.modulus or self.modulus[-1] != self.base.one():
            raise PreconditionError("extension modulus must be monic and nonzero")
        deg = len(self.modulus) - 1
        if deg <= 4:
            if not is_irreducible(self.modulus, self.base):
                raise PreconditionError("extension modulus is reducible")
        elif not self.trusted:
            raise PreconditionError("degree > 4 modulus requires trusted=True")

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    def element(self, coeffs: Iterable[int | Fraction | FieldScalar]) -> "ExtElem":
        out = []
        for c in coeffs:
            out.append(c if isinstance(c, FieldScalar) else self.base.scalar(c))
        reduced = _pdivmod(_ptrim(out), self.modulus, self.base)[1]
        return ExtElem(self, reduced)

    def zero(self) -> "ExtElem":
        return ExtElem(self, ())

    def one(self) -> "ExtElem":
        return self.element([1])

    def generator(self) -> "ExtElem":
        return self.element([0, 1])

    def from_scalar(self, c: FieldScalar) -> "ExtElem":
        return self.element([c])

    def __str__(self) -> str:
        return f"{self.base}[{self.var}]/(deg {self.degree})"


@dataclass(frozen=True)
class ExtElem:
    """An element of an ExtField, stored as a reduced polynomial in the root."""

    ext: ExtField
    coeffs: Coeffs

    def _check(self, other: "ExtElem") -> None:
        if self.ext != other.ext:
            raise PreconditionError("mixed extension fields")

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "ExtElem") -> "ExtElem":
        self._check(other)
        return ExtElem(self.ext, _padd(self.coeffs, other.coeffs, self.ext.base))

    def __sub__(self, other: "ExtElem") -> "ExtElem":
        return self + (-other)

    def __neg__(self) -> "ExtElem":
        return ExtElem(self.ext, _pscale(self.coeffs, -self.ext.base.one()))

    def __mul__(self, other: "ExtElem") -> "ExtElem":
        self._check(other)
        prod = _pmul(self.coeffs, other.coeffs, self.ext.base)
        return ExtElem(self.ext, _pdivmod(prod, self.ext.modulus, self.ext.base)[1])

    def inv(self) -> "ExtElem":
        """Inverse by the extended Euclidean algorithm in base[x]/(modulus)."""
        if self.is_zero:
            raise PreconditionError("inverse of zero in extension field")
        field = self.ext.base
        r0, r1 = self.ext.modulus, self.coeffs
        s0: Coeffs = ()
        s1: Coeffs = (field.one(),)
        while len(r1) > 1:
            q, r = _pdivmod(r0, r1, field)
            r0, r1 = r1, r
            s0, s1 = s1, _padd(s0, _pscale(_pmul(q, s1, field), -field.one()), field)
        scale = r1[0].inv()
        return ExtElem(self.ext, _pdivmod(_pscale(s1, scale), self.ext.modulus, field)[1])

    def __truediv__(self, other: "ExtElem") -> "ExtElem":
        return self * other.inv()

    def __pow__(self, n: int) -> "ExtElem":
        if n < 0:
            return self.inv() ** (-n)
        result = self.ext.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*{self.ext.var}")
            else:
                parts.append(f"{c}*{self.ext.var}^{i}")
        return " + ".join(parts)


def determinant(rows: list[list[FieldScalar]], field: Field) -> FieldScalar:
    """Exact determinant by Gaussian elimination with division."""
    n = len(rows)
    mat = [row[:] for row in rows]
    det = field.one()
    for col in range(n):
        pivot = next((r for r in range(col, n) if not mat[r][col].is_zero), None)
        if pivot is None:
            return field.zero()
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            det = -det
        det = det * mat[col][col]
        inv = mat[col][col].inv()
        for r in range(col + 1, n):
            factor = mat[r][col] * inv
            if factor.is_zero:
                continue
            for c in range(col, n):
                mat[r][c] = mat[r][c] - factor * mat[col][c]
    return det


def field_norm(elem: ExtElem) -> FieldScalar:
    """Norm to the base field: determinant of multiplication by the element."""
    ext = elem.ext
    d = ext.degree
    cols = []
    power = ext.one()
    for _ in range(d):
        image = elem * power
        col = list(image.coeffs) + [ext.base.zero()] * (d - len(image.coeffs))
        cols.append(col)
        power = power * ext.generator()
    rows = [[cols[j][i] for j in range(d)] for i in range(d)]
    return determinant(rows, ext.base)
