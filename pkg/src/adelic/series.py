"""Truncated iterated Laurent expansions with exact coefficients.

A `CoordTower` names the layers of an iterated Laurent field, innermost
first, so the tower (s, t) realizes k((s))((t)) and an expansion is a
Laurent series in the outermost variable whose coefficients are series one
layer down.  A `NestedSeries` carries an absolute window [val, prec) in its
outermost variable.  Expansions of rational functions remember their source,
and every valuation used downstream is recomputed from that source rather
than read off a truncated window, so valuations are exact even when the
window shows nothing.

The innermost layer may instead complete along an irreducible polynomial
modulus (a closed point of a curve with a residue extension); that case is
restricted to depth one.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Union

from .errors import ParseError, PrecisionError, PreconditionError, InvariantError
from .fields import ExtElem, ExtField, Field, FieldScalar
from .ratfun import MultiPoly, RatFun

Scalar = Union[FieldScalar, ExtElem]


@dataclass(frozen=True)
class Residue:
    """Depth-zero coefficient field: the base field or a finite extension."""

    field: Field
    ext: ExtField | None = None

    def zero(self) -> Scalar:
        return self.ext.zero() if self.ext else self.field.zero()

    def one(self) -> Scalar:
        return self.ext.one() if self.ext else self.field.one()

    def coerce(self, c: Scalar | int | Fraction) -> Scalar:
        if isinstance(c, ExtElem):
            if self.ext != c.ext:
                raise PreconditionError("scalar from a different extension field")
            return c
        if isinstance(c, FieldScalar):
            return self.ext.from_scalar(c) if self.ext else c
        base = self.field.scalar(c)
        return self.ext.from_scalar(base) if self.ext else base

    @property
    def degree(self) -> int:
        return self.ext.degree if self.ext else 1


@dataclass(frozen=True)
class CoordTower:
    """Layer names innermost to outermost, with the depth-zero residue.

    `moduli` runs parallel to `layers`; a non-None entry means that layer
    completes along the given irreducible polynomial in `modulus_var`
    (allowed only for depth-one towers).
    """

    layers: tuple[str, ...]
    residue: Residue
    moduli: tuple[MultiPoly | None, ...] = ()
    modulus_var: str | None = None

    def __post_init__(self) -> None:
        if not self.layers:
            raise PreconditionError("tower needs at least one layer")
        if len(set(self.layers)) != len(self.layers):
            raise PreconditionError("tower layers must be distinct")
        if self.moduli and len(self.moduli) != len(self.layers):
            raise PreconditionError("moduli must align with layers")
        if any(m is not None for m in self.moduli):
            if len(self.layers) != 1:
                raise PreconditionError("modulus layers are restricted to depth-one towers")
            if self.residue.ext is None or self.modulus_var is None:
                raise PreconditionError("modulus layer needs an extension residue and a variable")

    @staticmethod
    def of(*layers: str, residue: Field | Residue = None) -> "CoordTower":
        if residue is None:
            from .fields import QQ

            residue = QQ
        res = residue if isinstance(residue, Residue) else Residue(residue)
        return CoordTower(tuple(layers), res, (None,) * len(layers))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def outer(self) -> str:
        return self.layers[-1]

    def inner_tower(self) -> "CoordTower":
        if self.depth == 1:
            raise PreconditionError("depth-one tower has no inner tower")
        return CoordTower(self.layers[:-1], self.residue, self.moduli[:-1] if self.moduli else ())

    def __str__(self) -> str:
        return f"{self.residue.field}(({'))(('.join(self.layers)}))"


Coefficient = Union["NestedSeries", Scalar]


def _is_zero_coeff(c: Coefficient) -> bool:
    if isinstance(c, NestedSeries):
        return c.is_zero_within_window
    return c.is_zero


@dataclass
class NestedSeries:
    """One truncated Laurent layer; coefficients live one layer down.

    The window [val, prec) is absolute in the outermost variable.  A key
    missing from `coeffs` is an exact zero within the window.  `source`
    remembers the rational function this series expands, when known.
    """

    tower: CoordTower
    val: int
    prec: int
    coeffs: dict[int, Coefficient]
    source: RatFun | None = None

    def __post_init__(self) -> None:
        if self.val > self.prec:
            raise PrecisionError("empty series window")
        for k, c in list(self.coeffs.items()):
            if k < self.val or k >= self.prec:
                raise InvariantError(f"coefficient exponent {k} outside window [{self.val},{self.prec})")
            if _is_zero_coeff(c):
                del self.coeffs[k]

    @property
    def depth(self) -> int:
        return self.tower.depth

    @property
    def outer_var(self) -> str:
        return self.tower.outer

    @property
    def is_zero_within_window(self) -> bool:
        return not self.coeffs

    @staticmethod
    def zero(tower: CoordTower, prec: int, val: int = 0) -> "NestedSeries":
        return NestedSeries(tower, val, prec, {}, RatFun.zero(tower.residue.field))

    @staticmethod
    def const(tower: CoordTower, value: Scalar | int | Fraction, prec: int) -> "NestedSeries":
        """The constant series with window [0, prec) at every layer."""
        scal = tower.residue.coerce(value)
        inner: Coefficient = scal
        field = tower.residue.field
        src = RatFun.const(field, value) if not isinstance(value, ExtElem) else None
        for d in range(1, tower.depth + 1):
            sub = CoordTower(tower.layers[:d], tower.residue, tower.moduli[:d] if tower.moduli else (), tower.modulus_var)
            coeffs = {0: inner} if not _is_zero_coeff(inner) else {}
            inner = NestedSeries(sub, 0, prec, coeffs, src)
        return inner  # type: ignore[return-value]

    def _check_tower(self, other: "NestedSeries") -> None:
        if self.tower != other.tower:
            raise PreconditionError("series live on different towers")

    def coeff_at(self, k: int) -> Coefficient:
        if k < self.val or k >= self.prec:
            raise PrecisionError(f"exponent {k} outside window [{self.val},{self.prec})")
        c = self.coeffs.get(k)
        if c is not None:
            return c
        if self.depth == 1:
            return self.tower.residue.zero()
        return NestedSeries.zero(self.tower.inner_tower(), self.prec - self.val)

    def __add__(self, other: "NestedSeries") -> "NestedSeries":
        self._check_tower(other)
        val = min(self.val, other.val)
        prec = min(self.prec, other.prec)
        if val > prec:
            raise PrecisionError("windows do not overlap in addition")
        out: dict[int, Coefficient] = {}
        for k in range(val, prec):
            ca = self.coeffs.get(k)
            cb = other.coeffs.get(k)
            if ca is None and cb is None:
                continue
            if ca is None:
                out[k] = cb
            elif cb is None:
                out[k] = ca
            else:
                out[k] = _coeff_add(ca, cb)
        src = self.source + other.source if self.source is not None and other.source is not None else None
        return NestedSeries(self.tower, val, prec, out, src)

    def __neg__(self) -> "NestedSeries":
        out = {k: _coeff_neg(c) for k, c in self.coeffs.items()}
        return NestedSeries(self.tower, self.val, self.prec, out, -self.source if self.source else self.source)

    def __sub__(self, other: "NestedSeries") -> "NestedSeries":
        return self + (-other)

    def __mul__(self, other: "NestedSeries") -> "NestedSeries":
        self._check_tower(other)
        val = self.val + other.val
        prec = min(self.prec + other.val, other.prec + self.val)
        out: dict[int, Coefficient] = {}
        for i, ca in self.coeffs.items():
            for j, cb in other.coeffs.items():
                k = i + j
                if k >= prec:
                    continue
                prod = _coeff_mul(ca, cb)
                out[k] = _coeff_add(out[k], prod) if k in out else prod
        src = self.source * other.source if self.source is not None and other.source is not None else None
        return NestedSeries(self.tower, val, prec, out, src)

    def scale(self, c: Scalar) -> "NestedSeries":
        if c.is_zero:
            return NestedSeries.zero(self.tower, self.prec, self.val)
        out = {k: _coeff_scale(x, c) for k, x in self.coeffs.items()}
        src = None
        if self.source is not None and isinstance(c, FieldScalar):
            src = self.source * RatFun.const(self.source.field, c)
        return NestedSeries(self.tower, self.val, self.prec, out, src)

    def _uniformizer_ratfun(self) -> RatFun | None:
        if self.source is None:
            return None
        if self.tower.moduli and self.tower.moduli[-1] is not None:
            return RatFun.from_poly(self.tower.moduli[-1])
        return RatFun.var(self.source.field, self.outer_var)

    def shift(self, k: int) -> "NestedSeries":
        """Multiply by the outer uniformizer to the power k (shifts the window)."""
        out = {e + k: c for e, c in self.coeffs.items()}
        pi = self._uniformizer_ratfun()
        src = self.source * pi**k if pi is not None else None
        return NestedSeries(self.tower, self.val + k, self.prec + k, out, src)

    def truncate(self, prec: int) -> "NestedSeries":
        if prec > self.prec:
            raise PrecisionError("cannot extend a window by truncation")
        out = {k: c for k, c in self.coeffs.items() if k < prec}
        return NestedSeries(self.tower, min(self.val, prec), prec, out, self.source)

    def trimmed_valuation(self) -> int | None:
        """Least window exponent with a nonzero coefficient, None if all vanish."""
        live = [k for k in self.coeffs]
        return min(live) if live else None

    def valuation_and_unit(self) -> tuple[int, "NestedSeries"]:
        """Split off the exact outer valuation: self = outer^v * unit.

        The valuation is certified by the rational source when one is
        attached; a window that shows no nonzero coefficient and has no
        source cannot be certified and raises.
        """
        v = self.trimmed_valuation()
        if self.source is not None:
            if self.source.is_zero:
                raise PreconditionError("valuation of the zero series")
            exact = _source_valuation(self.source, self.tower)
            if v is not None and v != exact:
                raise InvariantError(f"window valuation {v} disagrees with source valuation {exact}")
            if v is None and exact < self.prec:
                raise InvariantError("source promises a visible leading term but the window is empty")
            v = exact
        if v is None:
            raise PrecisionError("all window coefficients vanish; valuation cannot be certified")
        unit = NestedSeries(self.tower, self.val - v, self.prec - v, {k - v: c for k, c in self.coeffs.items()})
        pi = self._uniformizer_ratfun()
        if pi is not None:
            unit.source = self.source * pi ** (-v)
        return v, unit

    def residue_coeff(self) -> Coefficient:
        """Coefficient at exponent zero (the residue of a unit series)."""
        return self.coeff_at(0)

    def inv(self) -> "NestedSeries":
        v, unit = self.valuation_and_unit()
        length = unit.prec
        if length <= 0:
            raise PrecisionError("window too short to invert")
        c0 = unit.coeff_at(0)
        if _is_zero_coeff(c0):
            raise PrecisionError("leading coefficient vanishes in window; cannot invert")
        b0 = _coeff_inv(c0)
        out: dict[int, Coefficient] = {0: b0}
        for k in range(1, length):
            acc: Coefficient | None = None
            for j in range(1, k + 1):
                cj = unit.coeffs.get(j)
                if cj is None:
                    continue
                term = _coeff_mul(cj, out[k - j]) if k - j in out else None
                if term is None:
                    continue
                acc = term if acc is None else _coeff_add(acc, term)
            if acc is not None:
                out[k] = _coeff_neg(_coeff_mul(b0, acc))
        shifted = {k - v: c for k, c in out.items() if not _is_zero_coeff(c)}
        src = self.source.inv() if self.source is not None and not self.source.is_zero else None
        return NestedSeries(self.tower, -v, -v + length, shifted, src)

    def __pow__(self, n: int) -> "NestedSeries":
        if n < 0:
            return self.inv() ** (-n)
        result = NestedSeries.const(self.tower, 1, self.prec - self.val)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def agrees_with(self, other: "NestedSeries") -> bool:
        """Exact agreement of coefficients on the overlap of the windows."""
        self._check_tower(other)
        lo = max(self.val, other.val)
        hi = min(self.prec, other.prec)
        for k in range(lo, hi):
            ca = self.coeffs.get(k)
            cb = other.coeffs.get(k)
            if ca is None and cb is None:
                continue
            if ca is None or cb is None:
                if not _is_zero_coeff(cb if ca is None else ca):
                    return False
                continue
            if not _coeff_agree(ca, cb):
                return False
        return True

    def __str__(self) -> str:
        return render_series(self)


def _coeff_add(a: Coefficient, b: Coefficient) -> Coefficient:
    if isinstance(a, NestedSeries):
        return a + b  # type: ignore[operator]
    return a + b


def _coeff_neg(a: Coefficient) -> Coefficient:
    return -a


def _coeff_mul(a: Coefficient, b: Coefficient) -> Coefficient:
    if isinstance(a, NestedSeries):
        return a * b  # type: ignore[operator]
    return a * b


def _coeff_scale(a: Coefficient, c: Scalar) -> Coefficient:
    if isinstance(a, NestedSeries):
        return a.scale(c)
    return a * c


def _coeff_inv(a: Coefficient) -> Coefficient:
    if isinstance(a, NestedSeries):
        return a.inv()
    return a.inv()


def _coeff_agree(a: Coefficient, b: Coefficient) -> bool:
    if isinstance(a, NestedSeries) and isinstance(b, NestedSeries):
        return a.agrees_with(b)
    if isinstance(a, NestedSeries) or isinstance(b, NestedSeries):
        return False
    return a == b


def _source_valuation(f: RatFun, tower: CoordTower) -> int:
    """Exact outer valuation of a rational function in this tower."""
    if tower.moduli and tower.moduli[-1] is not None:
        m = tower.moduli[-1]
        var = tower.modulus_var
        assert var is not None
        return _modulus_ord(f.num, m, var) - _modulus_ord(f.den, m, var)
    return f.ord_in(tower.outer)


def _modulus_ord(p: MultiPoly, modulus: MultiPoly, var: str) -> int:
    if p.is_zero:
        raise PreconditionError("order of the zero polynomial")
    k = 0
    while True:
        q, r = p.divmod_univariate(modulus, var)
        if not r.is_zero:
            return k
        p = q
        k += 1


def expand(f: RatFun, tower: CoordTower, prec: int) -> NestedSeries:
    """Expand a rational function in the tower with `prec` terms per layer.

    Each layer's window starts at the exact valuation there and has length
    `prec`.  Raises when variables survive to depth zero (the function is
    not expandable in this tower order) or when the input is zero.
    """
    if prec < 1:
        raise PreconditionError("expansion needs prec >= 1")
    if f.is_zero:
        return NestedSeries.zero(tower, prec)
    if tower.moduli and tower.moduli[-1] is not None:
        return _expand_modulus(f, tower, prec)
    allowed = set(tower.layers)
    stray = set(f.vars) - allowed
    if stray:
        raise PreconditionError(
            f"not expandable in this tower order: variables {sorted(stray)} are not tower layers"
        )
    result = _expand_rec(f, tower, tower.depth - 1, prec)
    result.source = f
    return result


def _expand_rec(f: RatFun, tower: CoordTower, layer_index: int, prec: int) -> NestedSeries:
    u = tower.layers[layer_index]
    num_parts = f.num.decompose(u)
    den_parts = f.den.decompose(u)
    a = min(num_parts)
    b = min(den_parts)
    v = a - b
    d0 = den_parts[b]
    field = f.field
    quotients: list[RatFun] = []
    for i in range(prec):
        acc = RatFun.from_poly(num_parts.get(a + i, MultiPoly.const(field, 0)))
        for j in range(1, i + 1):
            dj = den_parts.get(b + j)
            if dj is None:
                continue
            acc = acc - RatFun.from_poly(dj) * quotients[i - j]
        quotients.append(acc / RatFun.from_poly(d0))
    sub = CoordTower(tower.layers[: layer_index + 1], tower.residue, tower.moduli[: layer_index + 1] if tower.moduli else ())
    coeffs: dict[int, Coefficient] = {}
    for i, q in enumerate(quotients):
        if q.is_zero:
            continue
        if layer_index == 0:
            coeffs[v + i] = _depth_zero_value(q, tower)
        else:
            inner = _expand_rec(q, tower, layer_index - 1, prec)
            inner.source = q
            coeffs[v + i] = inner
    return NestedSeries(sub, v, v + prec, coeffs)


def _depth_zero_value(q: RatFun, tower: CoordTower) -> Scalar:
    if q.vars:
        raise PreconditionError(
            f"not expandable in this tower order: variables {list(q.vars)} remain at depth zero"
        )
    value = q.constant_value()
    return tower.residue.coerce(value)


def _expand_modulus(f: RatFun, tower: CoordTower, prec: int) -> NestedSeries:
    """Depth-one expansion along an irreducible modulus m(x) of a curve point."""
    m = tower.moduli[-1]
    var = tower.modulus_var
    assert m is not None and var is not None
    ext = tower.residue.ext
    assert ext is not None
    stray = set(f.vars) - {var}
    if stray:
        raise PreconditionError(f"modulus expansion allows only the variable {var}, got {sorted(stray)}")
    theta = ext.generator()

    def digits(p: MultiPoly) -> dict[int, ExtElem]:
        out: dict[int, ExtElem] = {}
        k = 0
        while not p.is_zero:
            p, r = p.divmod_univariate(m, var)
            if not r.is_zero:
                out[k] = r.eval_ext(ext, {var: theta})
            k += 1
        return out

    num_d = digits(f.num)
    den_d = digits(f.den)
    a = min(num_d)
    b = min(den_d)
    v = a - b
    d0 = den_d[b]
    coeffs: dict[int, Coefficient] = {}
    qs: list[ExtElem] = []
    for i in range(prec):
        acc = num_d.get(a + i, ext.zero())
        for j in range(1, i + 1):
            dj = den_d.get(b + j)
            if dj is None:
                continue
            acc = acc - dj * qs[i - j]
        q = acc / d0
        qs.append(q)
        if not q.is_zero:
            coeffs[v + i] = q
    return NestedSeries(tower, v, v + prec, coeffs, f)


def render_series(s: NestedSeries) -> str:
    """Deterministic text form: terms in increasing exponent plus an O(...) tail."""
    var = s.outer_var
    parts = []
    for k in sorted(s.coeffs):
        c = s.coeffs[k]
        if isinstance(c, NestedSeries):
            cs = f"({render_series(c)})"
        else:
            cs = str(c)
            if "/" in cs or " " in cs or (cs.startswith("-") and parts):
                cs = f"({cs})"
        parts.append(f"{cs}*{var}^{k}")
    parts.append(f"O({var}^{s.prec})")
    return " + ".join(parts)


def parse_series(text: str, tower: CoordTower) -> NestedSeries:
    """Parse the output of `render_series` back into a series.

    Supports base-field scalar coefficients (rationals or prime-field
    integers); extension-field coefficients do not round-trip.
    """
    text = text.strip()
    var = tower.outer
    terms, prec = _split_terms(text, var)
    coeffs: dict[int, Coefficient] = {}
    vals = []
    for coeff_text, k in terms:
        if tower.depth == 1:
            coeffs[k] = _parse_scalar(coeff_text, tower.residue)
        else:
            coeffs[k] = parse_series(coeff_text, tower.inner_tower())
        vals.append(k)
    val = min(vals) if vals else 0
    return NestedSeries(tower, min(val, prec), prec, coeffs)


def _split_terms(text: str, var: str) -> tuple[list[tuple[str, int]], int]:
    chunks = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0:
            chunks.append(text[start:i].strip())
            start = i + 1
    chunks.append(text[start:].strip())
    terms = []
    prec = None
    for chunk in chunks:
        if not chunk:
            continue
        if chunk.startswith("O(") and chunk.endswith(")"):
            inner = chunk[2:-1]
            if not inner.startswith(f"{var}^"):
                raise ParseError(f"tail {chunk!r} does not match variable {var}")
            prec = int(inner[len(var) + 1 :])
            continue
        marker = f"*{var}^"
        idx = chunk.rfind(marker)
        if idx < 0:
            raise ParseError(f"term {chunk!r} lacks a power of {var}")
        coeff_text = chunk[:idx].strip()
        if coeff_text.startswith("(") and coeff_text.endswith(")"):
            coeff_text = coeff_text[1:-1]
        terms.append((coeff_text, int(chunk[idx + len(marker) :])))
    if prec is None:
        raise ParseError("series text lacks an O(...) precision tail")
    return terms, prec


def _parse_scalar(text: str, residue: Residue) -> Scalar:
    if residue.ext is not None:
        raise ParseError("extension-field coefficients cannot be parsed")
    try:
        return residue.field.scalar(Fraction(text.replace(" ", "")))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad scalar {text!r}") from exc
