"""Symbol calculus: formal Milnor-style sums, tame symbols, boundary maps.

A symbol sum is a formal integer combination of terms {f1, ..., fn}; the
entries are invertible elements presented either as rational functions (with
valuations read along a named variable) or as certified series (with
valuations read along the outermost layer).  The boundary map lowers the
length by one; iterating it down a tower of valuations lands in integer
multiples of the empty symbol, which is how higher valuations are computed.

Two conventions are load bearing and fixed here.  The tame symbol of f and g
along v is the residue of (-1)^{v(f)v(g)} f^{v(g)} g^{-v(f)}.  The boundary
expands each slot multilinearly through f = pi^m u, sends {pi, pi} to
{pi, -1}, drops terms with no pi slot, moves the surviving pi to the first
slot with the sign of the transposition count, and takes residues of the
remaining units.  Consequently the length-two boundary of {f, g} is the
class of the tame symbol of (g, f).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Sequence, Union

from .errors import ParseError, PreconditionError
from .fields import ExtElem, Field, FieldScalar, field_norm
from .ratfun import RatFun, parse_ratfun
from .series import NestedSeries, expand

Entry = Union[RatFun, NestedSeries, FieldScalar, ExtElem]


@dataclass(frozen=True)
class ValuationRef:
    """Names the divisorial valuation along one coordinate."""

    var: str

    def __str__(self) -> str:
        return self.var


def _varname(at: "str | ValuationRef | None") -> str | None:
    return at.var if isinstance(at, ValuationRef) else at


def _entry_is_one(e: Entry) -> bool:
    if isinstance(e, RatFun):
        return e == RatFun.const(e.field, 1)
    if isinstance(e, FieldScalar):
        return e == e.field.one()
    if isinstance(e, ExtElem):
        return e == e.ext.one()
    if e.source is not None:
        return e.source == RatFun.const(e.source.field, 1)
    return False


def _entry_eq(a: Entry, b: Entry) -> bool:
    if isinstance(a, NestedSeries) or isinstance(b, NestedSeries):
        if isinstance(a, NestedSeries) and isinstance(b, NestedSeries):
            if a.source is not None and b.source is not None:
                return a.tower == b.tower and a.source == b.source
            return a is b
        return False
    if type(a) is not type(b):
        return False
    return a == b


def _entry_mul(a: Entry, b: Entry) -> Entry:
    return a * b


def _entry_pow(e: Entry, k: int) -> Entry:
    return e ** k


def _entry_neg(e: Entry) -> Entry:
    if isinstance(e, NestedSeries):
        return e.scale(-1)
    return -e


@dataclass(frozen=True)
class SymbolTerm:
    coeff: int
    entries: tuple[Entry, ...]

    @property
    def length(self) -> int:
        return len(self.entries)


class SymbolSum:
    """Formal integer combination of symbols, normalized on construction."""

    def __init__(self, terms: Sequence[tuple[int, tuple[Entry, ...]]] = ()):
        merged: list[tuple[int, tuple[Entry, ...]]] = []
        for coeff, entries in terms:
            if coeff == 0:
                continue
            if any(_entry_is_one(e) for e in entries):
                continue
            for i, (c0, e0) in enumerate(merged):
                if len(e0) == len(entries) and all(_entry_eq(x, y) for x, y in zip(e0, entries)):
                    merged[i] = (c0 + coeff, e0)
                    break
            else:
                merged.append((coeff, tuple(entries)))
        self.terms: tuple[SymbolTerm, ...] = tuple(
            SymbolTerm(c, e) for c, e in merged if c != 0
        )

    @staticmethod
    def of(*entries: Entry, coeff: int = 1) -> "SymbolSum":
        for e in entries:
            if isinstance(e, RatFun) and e.is_zero:
                raise PreconditionError("symbol entries must be invertible")
        return SymbolSum([(coeff, tuple(entries))])

    @staticmethod
    def zero() -> "SymbolSum":
        return SymbolSum()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "SymbolSum") -> "SymbolSum":
        return SymbolSum([(t.coeff, t.entries) for t in self.terms + other.terms])

    def __neg__(self) -> "SymbolSum":
        return SymbolSum([(-t.coeff, t.entries) for t in self.terms])

    def __sub__(self, other: "SymbolSum") -> "SymbolSum":
        return self + (-other)

    def scale(self, k: int) -> "SymbolSum":
        return SymbolSum([(k * t.coeff, t.entries) for t in self.terms])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymbolSum):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # type: ignore[assignment]

    def int_value(self) -> int:
        """Total coefficient of a sum of empty symbols (the K0 reading)."""
        for t in self.terms:
            if t.length != 0:
                raise PreconditionError("symbol sum has entries left; not a plain integer class")
        return sum(t.coeff for t in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for i, t in enumerate(self.terms):
            body = "{" + ", ".join(str(e) for e in t.entries) + "}"
            mag = abs(t.coeff)
            chunk = body if mag == 1 else f"{mag}*{body}"
            if i == 0:
                pieces.append(chunk if t.coeff > 0 else f"-{chunk}")
            else:
                pieces.append(("+ " if t.coeff > 0 else "- ") + chunk)
        return " ".join(pieces)

    __repr__ = __str__


def parse_symbol_sum(text: str, field: Field | None = None) -> SymbolSum:
    """Parse sums like '3*{t, (s+t)/s} - {u, v}' with rational entries."""
    from .fields import QQ

    field = field if field is not None else QQ
    terms: list[tuple[int, tuple[Entry, ...]]] = []
    rest = text.strip()
    if not rest:
        raise ParseError("empty symbol sum")
    sign = 1
    while rest:
        if rest[0] in "+-":
            sign = 1 if rest[0] == "+" else -1
            rest = rest[1:].lstrip()
            continue
        head, brace, tail = rest.partition("{")
        if not brace:
            raise ParseError(f"expected '{{' in symbol term near {rest!r}")
        head = head.strip()
        if head.endswith("*"):
            head = head[:-1].strip()
        coeff = 1
        if head:
            try:
                coeff = int(head)
            except ValueError as exc:
                raise ParseError(f"bad symbol coefficient {head!r}") from exc
        body, close, rest = tail.partition("}")
        if not close:
            raise ParseError("unterminated '{' in symbol sum")
        entries = tuple(
            parse_ratfun(chunk, field) for chunk in body.split(",") if chunk.strip()
        )
        for e in entries:
            if e.is_zero:
                raise PreconditionError("symbol entries must be invertible")
        terms.append((sign * coeff, entries))
        rest = rest.lstrip()
        sign = 1
    return SymbolSum(terms)


def _split_entry(e: Entry, var: str | None) -> tuple[int, Entry]:
    """Valuation and unit part along the requested valuation."""
    if isinstance(e, RatFun):
        if var is None:
            raise PreconditionError("rational entries need a named valuation variable")
        if e.is_zero:
            raise PreconditionError("symbol entries must be invertible")
        return e.shift_out(var)
    if isinstance(e, NestedSeries):
        return e.valuation_and_unit()
    raise PreconditionError("residue-field scalars carry no further valuation")


def _unit_residue(unit: Entry, var: str | None) -> Entry:
    if isinstance(unit, RatFun):
        return unit.subs_zero(var)  # type: ignore[arg-type]
    return unit.residue_coeff()  # type: ignore[union-attr]


def _minus_one_residue(sample: Entry) -> Entry:
    """The element -1 of the residue field, matched to the engine in use."""
    if isinstance(sample, RatFun):
        return RatFun.const(sample.field, -1)
    assert isinstance(sample, NestedSeries)
    if sample.tower.depth >= 2:
        inner = sample.tower.inner_tower()
        length = max(1, sample.prec - sample.val)
        return expand(RatFun.const(sample.tower.residue.field, -1), inner, length)
    return _entry_neg(sample.tower.residue.one())


def tame_symbol(f: Entry, g: Entry, at: str | ValuationRef | None = None) -> Entry:
    """Residue of (-1)^{v(f)v(g)} f^{v(g)} g^{-v(f)} along the valuation."""
    var = _varname(at)
    a, u = _split_entry(f, var)
    b, w = _split_entry(g, var)
    r = _entry_mul(_entry_pow(u, b), _entry_pow(w, -a))
    res = _unit_residue(r, var)
    if (a * b) % 2:
        res = _entry_neg(res)
    return res


def boundary(sym: SymbolSum, at: str | ValuationRef | None = None) -> SymbolSum:
    """One boundary step along a valuation, lowering symbol length by one."""
    var = _varname(at)
    out: list[tuple[int, tuple[Entry, ...]]] = []
    for term in sym.terms:
        if term.length == 0:
            raise PreconditionError("boundary of the empty symbol is undefined")
        splits = [_split_entry(e, var) for e in term.entries]
        for choice in product((False, True), repeat=term.length):
            if not any(choice):
                continue
            weight = term.coeff * prod(splits[i][0] for i, c in enumerate(choice) if c)
            if weight == 0:
                continue
            first_pi = choice.index(True)
            sign = -1 if first_pi % 2 else 1
            entries: list[Entry] = []
            for i, picked in enumerate(choice):
                if i == first_pi:
                    continue
                if picked:
                    entries.append(_minus_one_residue(term.entries[i]))
                else:
                    entries.append(_unit_residue(splits[i][1], var))
            out.append((sign * weight, tuple(entries)))
    return SymbolSum(out)


def higher_valuation(
    sym: SymbolSum, order: Sequence[str | ValuationRef | None], base_degree: int = 1
) -> int:
    """Iterate the boundary along the given valuations (outermost first),
    then weight the resulting integer class by the residue degree."""
    cur = sym
    for at in order:
        cur = boundary(cur, at)
    return cur.int_value() * base_degree


def k1_value(sym: SymbolSum, identity: Entry | None = None) -> Entry:
    """Evaluate a sum of length-one symbols as an actual field element.

    An empty sum evaluates to `identity` (the residue field's 1), which must
    be supplied because the sum itself no longer names the field.
    """
    acc: Entry | None = None
    for term in sym.terms:
        if term.length != 1:
            raise PreconditionError("k1_value needs length-one symbols")
        piece = _entry_pow(term.entries[0], term.coeff)
        acc = piece if acc is None else _entry_mul(acc, piece)
    if acc is None:
        if identity is None:
            raise PreconditionError("k1_value of an empty sum needs an explicit identity element")
        return identity
    return acc


def k1_norm(sym: SymbolSum) -> SymbolSum:
    """Push length-one symbols with extension-field entries down by the norm."""
    out: list[tuple[int, tuple[Entry, ...]]] = []
    for term in sym.terms:
        if term.length != 1 or not isinstance(term.entries[0], ExtElem):
            raise PreconditionError("k1_norm needs length-one extension-field symbols")
        out.append((term.coeff, (field_norm(term.entries[0]),)))
    return SymbolSum(out)
