"""Sparse multivariate polynomials and rational functions over a tagged field.

A `MultiPoly` maps exponent tuples to nonzero scalars; its variable tuple is
sorted and contains only variables that actually occur, so arithmetic between
polynomials written over different variable sets aligns automatically.
`RatFun` is a quotient of two polynomials with a nonzero denominator.
Equality is decided by cross-multiplication; reduction is limited to scalar
normalization, cancelling shared monomial factors, and a univariate gcd when
both sides live in one variable.  No general multivariate gcd is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .errors import ParseError, PreconditionError
from .fields import QQ, ExtElem, ExtField, Field, FieldScalar, _pgcd, _ptrim

Exponents = tuple[int, ...]


def _sorted_union(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(sorted(set(a) | set(b)))


@dataclass(frozen=True)
class MultiPoly:
    """A sparse polynomial; `terms` maps exponent tuples to nonzero scalars."""

    field: Field
    vars: tuple[str, ...]
    terms: Mapping[Exponents, FieldScalar]

    @staticmethod
    def make(field: Field, vars: tuple[str, ...], terms: Mapping[Exponents, FieldScalar]) -> "MultiPoly":
        """Normalize: drop zero coefficients and unused variables, sort variables."""
        clean = {e: c for e, c in terms.items() if not c.is_zero}
        if not clean:
            return MultiPoly(field, (), {})
        used = [i for i in range(len(vars)) if any(e[i] for e in clean)]
        order = sorted(used, key=lambda i: vars[i])
        new_vars = tuple(vars[i] for i in order)
        new_terms = {}
        for e, c in clean.items():
            key = tuple(e[i] for i in order)
            if key in new_terms:
                acc = new_terms[key] + c
                if acc.is_zero:
                    del new_terms[key]
                else:
                    new_terms[key] = acc
            else:
                new_terms[key] = c
        if not new_terms:
            return MultiPoly(field, (), {})
        return MultiPoly(field, new_vars, new_terms)

    @staticmethod
    def const(field: Field, value: int | Fraction | FieldScalar) -> "MultiPoly":
        c = value if isinstance(value, FieldScalar) else field.scalar(value)
        return MultiPoly.make(field, (), {(): c})

    @staticmethod
    def variable(field: Field, name: str, power: int = 1) -> "MultiPoly":
        if power < 0:
            raise PreconditionError("polynomial exponents must be nonnegative")
        return MultiPoly.make(field, (name,), {(power,): field.one()})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return not self.vars

    def constant_value(self) -> FieldScalar:
        if not self.is_constant:
            raise PreconditionError("polynomial is not constant")
        return self.terms.get((), self.field.zero())

    def _aligned(self, target: tuple[str, ...]) -> dict[Exponents, FieldScalar]:
        pos = {v: i for i, v in enumerate(target)}
        out: dict[Exponents, FieldScalar] = {}
        for e, c in self.terms.items():
            key = [0] * len(target)
            for i, v in enumerate(self.vars):
                key[pos[v]] = e[i]
            out[tuple(key)] = c
        return out

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if self.field != other.field:
            raise PreconditionError("mixed fields in polynomial arithmetic")
        allv = _sorted_union(self.vars, other.vars)
        a = self._aligned(allv)
        for e, c in other._aligned(allv).items():
            if e in a:
                s = a[e] + c
                if s.is_zero:
                    del a[e]
                else:
                    a[e] = s
            else:
                a[e] = c
        return MultiPoly.make(self.field, allv, a)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.field, self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        if self.field != other.field:
            raise PreconditionError("mixed fields in polynomial arithmetic")
        allv = _sorted_union(self.vars, other.vars)
        a = self._aligned(allv)
        b = other._aligned(allv)
        out: dict[Exponents, FieldScalar] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                prod = ca * cb
                if key in out:
                    s = out[key] + prod
                    if s.is_zero:
                        del out[key]
                    else:
                        out[key] = s
                else:
                    out[key] = prod
        return MultiPoly.make(self.field, allv, out)

    def scale(self, c: FieldScalar) -> "MultiPoly":
        if c.is_zero:
            return MultiPoly(self.field, (), {})
        return MultiPoly(self.field, self.vars, {e: x * c for e, x in self.terms.items()})

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise PreconditionError("negative power of a polynomial")
        result = MultiPoly.const(self.field, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.field == other.field and self.vars == other.vars and dict(self.terms) == dict(other.terms)

    __hash__ = None  # type: ignore[assignment]

    def ord_in(self, var: str) -> int:
        """Least exponent of `var` over all monomials (the divisorial valuation)."""
        if self.is_zero:
            raise PreconditionError("order of the zero polynomial")
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return min(e[i] for e in self.terms)

    def degree_in(self, var: str) -> int:
        if self.is_zero:
            raise PreconditionError("degree of the zero polynomial")
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def decompose(self, var: str) -> dict[int, "MultiPoly"]:
        """Coefficients of powers of `var`, each a polynomial without `var`."""
        if var not in self.vars:
            return {} if self.is_zero else {0: self}
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1 :]
        buckets: dict[int, dict[Exponents, FieldScalar]] = {}
        for e, c in self.terms.items():
            k = e[i]
            key = e[:i] + e[i + 1 :]
            buckets.setdefault(k, {})[key] = c
        return {k: MultiPoly.make(self.field, rest, t) for k, t in buckets.items()}

    def shift_down(self, var: str, amount: int) -> "MultiPoly":
        """Divide by var^amount; every monomial must have exponent >= amount."""
        if amount == 0 or var not in self.vars:
            if amount != 0 and not self.is_zero:
                raise PreconditionError(f"{var}^{amount} does not divide the polynomial")
            return self
        i = self.vars.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i] < amount:
                raise PreconditionError(f"{var}^{amount} does not divide the polynomial")
            out[e[:i] + (e[i] - amount,) + e[i + 1 :]] = c
        return MultiPoly.make(self.field, self.vars, out)

    def subs_zero(self, var: str) -> "MultiPoly":
        """Substitute var := 0."""
        if var not in self.vars:
            return self
        i = self.vars.index(var)
        out = {e[:i] + e[i + 1 :]: c for e, c in self.terms.items() if e[i] == 0}
        return MultiPoly.make(self.field, self.vars[:i] + self.vars[i + 1 :], out)

    def subs(self, assignment: Mapping[str, "RatFun"]) -> "RatFun":
        """Substitute rational functions for variables (missing ones stay)."""
        result = RatFun.zero(self.field)
        for e, c in self.terms.items():
            term = RatFun.const(self.field, c)
            for v, k in zip(self.vars, e):
                if k == 0:
                    continue
                val = assignment.get(v)
                if val is None:
                    val = RatFun.from_poly(MultiPoly.variable(self.field, v))
                term = term * val**k
            result = result + term
        return result

    def eval_ext(self, ext: ExtField, assignment: Mapping[str, ExtElem]) -> ExtElem:
        """Evaluate with all variables bound to extension-field elements."""
        result = ext.zero()
        for e, c in self.terms.items():
            term = ext.from_scalar(c)
            for v, k in zip(self.vars, e):
                if k == 0:
                    continue
                if v not in assignment:
                    raise PreconditionError(f"no value assigned to variable {v}")
                term = term * assignment[v] ** k
            result = result + term
        return result

    def lex_leading(self) -> tuple[Exponents, FieldScalar]:
        if self.is_zero:
            raise PreconditionError("leading term of the zero polynomial")
        key = max(self.terms)
        return key, self.terms[key]

    def monomials(self) -> Iterator[tuple[Exponents, FieldScalar]]:
        return iter(sorted(self.terms.items(), reverse=True))

    def to_dense(self, var: str) -> tuple:
        """Dense univariate coefficient tuple; requires vars ⊆ {var}."""
        if self.vars not in ((), (var,)):
            raise PreconditionError("polynomial is not univariate in " + var)
        deg = self.degree_in(var) if not self.is_zero else -1
        out = [self.field.zero()] * (deg + 1)
        for e, c in self.terms.items():
            out[e[0] if self.vars else 0] = c
        return _ptrim(out)

    @staticmethod
    def from_dense(field: Field, var: str, coeffs: tuple) -> "MultiPoly":
        return MultiPoly.make(field, (var,), {(i,): c for i, c in enumerate(coeffs)})

    def divmod_univariate(self, other: "MultiPoly", var: str) -> tuple["MultiPoly", "MultiPoly"]:
        from .fields import _pdivmod

        q, r = _pdivmod(self.to_dense(var), other.to_dense(var), self.field)
        return MultiPoly.from_dense(self.field, var, q), MultiPoly.from_dense(self.field, var, r)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for e, c in self.monomials():
            factors = []
            for v, k in zip(self.vars, e):
                if k == 1:
                    factors.append(v)
                elif k != 0:
                    factors.append(f"{v}^{k}")
            if not factors:
                parts.append(str(c))
            elif c == self.field.one():
                parts.append("*".join(factors))
            elif c == -self.field.one() and self.field.char == 0:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


@dataclass(frozen=True)
class RatFun:
    """A ratio of polynomials with nonzero denominator.

    The stored pair is normalized: shared monomial factors are cancelled,
    the denominator is scaled to have lex-leading coefficient 1, and the
    univariate case is gcd-reduced.  Equality still cross-multiplies, so
    unreduced multivariate representatives compare correctly.
    """

    field: Field
    num: MultiPoly
    den: MultiPoly

    @staticmethod
    def make(num: MultiPoly, den: MultiPoly) -> "RatFun":
        if den.is_zero:
            raise PreconditionError("rational function with zero denominator")
        field = num.field
        if num.is_zero:
            return RatFun(field, num, MultiPoly.const(field, 1))
        # cancel shared monomial content
        for v in set(num.vars) & set(den.vars):
            k = min(num.ord_in(v), den.ord_in(v))
            if k > 0:
                num = num.shift_down(v, k)
                den = den.shift_down(v, k)
        allv = set(num.vars) | set(den.vars)
        if len(allv) == 1:
            v = next(iter(allv))
            g = _pgcd(num.to_dense(v), den.to_dense(v), field)
            if len(g) > 1:
                gp = MultiPoly.from_dense(field, v, g)
                num = num.divmod_univariate(gp, v)[0]
                den = den.divmod_univariate(gp, v)[0]
        lead = den.lex_leading()[1]
        if lead != field.one():
            inv = lead.inv()
            num = num.scale(inv)
            den = den.scale(inv)
        return RatFun(field, num, den)

    @staticmethod
    def from_poly(p: MultiPoly) -> "RatFun":
        return RatFun.make(p, MultiPoly.const(p.field, 1))

    @staticmethod
    def const(field: Field, value: int | Fraction | FieldScalar) -> "RatFun":
        return RatFun.from_poly(MultiPoly.const(field, value))

    @staticmethod
    def zero(field: Field) -> "RatFun":
        return RatFun.from_poly(MultiPoly.const(field, 0))

    @staticmethod
    def var(field: Field, name: str) -> "RatFun":
        return RatFun.from_poly(MultiPoly.variable(field, name))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def vars(self) -> tuple[str, ...]:
        return _sorted_union(self.num.vars, self.den.vars)

    @property
    def is_constant(self) -> bool:
        return not self.vars

    def constant_value(self) -> FieldScalar:
        return self.num.constant_value() / self.den.constant_value()

    def __add__(self, other: "RatFun") -> "RatFun":
        return RatFun.make(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "RatFun") -> "RatFun":
        return self + (-other)

    def __neg__(self) -> "RatFun":
        return RatFun(self.field, -self.num, self.den)

    def __mul__(self, other: "RatFun") -> "RatFun":
        return RatFun.make(self.num * other.num, self.den * other.den)

    def inv(self) -> "RatFun":
        if self.is_zero:
            raise PreconditionError("inverse of the zero rational function")
        return RatFun.make(self.den, self.num)

    def __truediv__(self, other: "RatFun") -> "RatFun":
        return self * other.inv()

    def __pow__(self, n: int) -> "RatFun":
        if n < 0:
            return self.inv() ** (-n)
        result = RatFun.const(self.field, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatFun):
            return NotImplemented
        return self.field == other.field and (self.num * other.den) == (other.num * self.den)

    __hash__ = None  # type: ignore[assignment]

    def ord_in(self, var: str) -> int:
        """Valuation along {var = 0}: least var-exponent of num minus den."""
        if self.is_zero:
            raise PreconditionError("order of the zero rational function")
        return self.num.ord_in(var) - self.den.ord_in(var)

    def shift_out(self, var: str) -> tuple[int, "RatFun"]:
        """Write the function as var^v * unit and return (v, unit)."""
        v = self.ord_in(var)
        num = self.num.shift_down(var, self.num.ord_in(var))
        den = self.den.shift_down(var, self.den.ord_in(var))
        return v, RatFun.make(num, den)

    def subs_zero(self, var: str) -> "RatFun":
        num = self.num.subs_zero(var)
        den = self.den.subs_zero(var)
        if den.is_zero:
            raise PreconditionError(f"substituting {var}=0 hits a pole")
        return RatFun.make(num, den)

    def residue_at_zero(self, var: str) -> "RatFun":
        """Value at var=0 of the unit part; requires ord_in(var) == 0."""
        if self.ord_in(var) != 0:
            raise PreconditionError(f"not a unit along {var}=0")
        _, unit = self.shift_out(var)
        return unit.subs_zero(var)

    def subs(self, assignment: Mapping[str, "RatFun"]) -> "RatFun":
        num = self.num.subs(assignment)
        den = self.den.subs(assignment)
        return num / den

    def eval_ext(self, ext: ExtField, assignment: Mapping[str, ExtElem]) -> ExtElem:
        den = self.den.eval_ext(ext, assignment)
        if den.is_zero:
            raise PreconditionError("evaluation hits a pole")
        return self.num.eval_ext(ext, assignment) / den

    def __str__(self) -> str:
        if self.den == MultiPoly.const(self.field, 1):
            return str(self.num)
        ns = str(self.num) if len(self.num.terms) == 1 else f"({self.num})"
        ds = str(self.den) if len(self.den.terms) == 1 else f"({self.den})"
        return f"{ns}/{ds}"


# Expression parser.  Variables are identifiers, ^ is power (integer, possibly
# negative), / is ordinary division, so both 3/4 and (s+t)/t parse naturally.

_TOKEN_CHARS = set("+-*/^()")


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _TOKEN_CHARS:
            tokens.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r} in expression")
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[str], field: Field):
        self.tokens = tokens
        self.pos = 0
        self.field = field

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> RatFun:
        value = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at {self.peek()!r}")
        return value

    def expr(self) -> RatFun:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RatFun:
        value = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.factor()
            value = value * rhs if op == "*" else value / rhs
        return value

    def factor(self) -> RatFun:
        if self.peek() == "-":
            self.take()
            return -self.factor()
        if self.peek() == "+":
            self.take()
            return self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if not tok.isdigit():
                raise ParseError(f"expected integer exponent, got {tok!r}")
            return base ** (sign * int(tok))
        return base

    def atom(self) -> RatFun:
        tok = self.take()
        if tok == "(":
            value = self.expr()
            if self.take() != ")":
                raise ParseError("unbalanced parentheses")
            return value
        if tok.isdigit():
            return RatFun.const(self.field, int(tok))
        if tok[0].isalpha() or tok[0] == "_":
            return RatFun.var(self.field, tok)
        raise ParseError(f"unexpected token {tok!r}")


def parse_ratfun(text: str, field: Field = QQ) -> RatFun:
    """Parse a rational-function expression over the given field."""
    return _ExprParser(_tokenize(text), field).parse()
