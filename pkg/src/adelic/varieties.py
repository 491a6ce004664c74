"""Chart-and-cocycle presentations of toy varieties, with builtin examples.

A variety here is a finite ordered list of affine charts (the cover, in
cover order), rational glue maps between them, a declared basis of prime
divisors carrying per-chart local equations, and a pool of saturated flags.
Each divisor designates one chart whose local equation serves as the
divisor's canonical rational function; transporting that function along
glue realizes it in any chart.

Line bundles are alternating Cech cocycles in a rigid shape: the entry for
an ordered chart pair is a unit constant times a monomial in the canonical
divisor functions, stored as the constant plus an integer exponent vector
over the divisor basis.  The cocycle identities are then exact integer and
constant identities, and every entry can be realized as a rational function
in any chart on demand.  Free-form rational entries are not accepted.

The chart assignment of a stratum is not stored: alpha_of computes the
least cover index containing it (the generic point lands in chart 0, a
divisor in the least chart where it has a declared equation, a closed point
in the least chart whose glue maps are defined at its coordinates).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from typing import Callable, Mapping

from .errors import ParseError, PreconditionError, InvariantError
from .fields import Field, FieldScalar, is_irreducible, parse_field
from .ratfun import MultiPoly, RatFun, parse_ratfun

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.coords:
            raise PreconditionError("chart needs at least one coordinate")
        if len(set(self.coords)) != len(self.coords):
            raise PreconditionError(f"chart {self.name} repeats a coordinate name")


@dataclass(frozen=True)
class Divisor:
    """A prime divisor: local equations per chart, one designated chart."""

    name: str
    equations: tuple[tuple[int, RatFun], ...]
    function_chart: int

    def equation_in(self, chart: int) -> RatFun | None:
        for i, eq in self.equations:
            if i == chart:
                return eq
        return None


@dataclass(frozen=True)
class Flag:
    """A saturated chain of strata: variety, divisor, ..., closed point.

    `local_coords` lists c_1 .. c_n in the flag's chart, the i-th stratum
    being cut by c_1 = ... = c_i = 0 there.  Labels name the strata, the
    generic point first; the label at position 1 must be a declared divisor.
    A closed point of a curve may instead be cut by an irreducible
    `modulus` polynomial in the single local coordinate.
    """

    labels: tuple[str, ...]
    chart: int
    local_coords: tuple[str, ...]
    modulus: MultiPoly | None = None

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.local_coords) + 1:
            raise PreconditionError("flag needs one label per stratum, generic point included")
        if self.modulus is not None and len(self.local_coords) != 1:
            raise PreconditionError("modulus points are restricted to curves")

    @property
    def codim(self) -> int:
        return len(self.local_coords)

    @property
    def residue_degree(self) -> int:
        if self.modulus is None:
            return 1
        return self.modulus.degree_in(self.local_coords[0])

    def chain_text(self) -> str:
        return " > ".join(self.labels)


def flag_id(flag: Flag) -> str:
    basis = f"{flag.chain_text()}|{flag.chart}|{','.join(flag.local_coords)}"
    return hashlib.sha256(basis.encode()).hexdigest()[:12]


CocycleEntry = tuple[FieldScalar, tuple[int, ...]]


@dataclass
class CechCocycle:
    """Transition data of a line bundle over the ordered chart cover.

    One entry per ordered chart pair: a unit constant and an integer
    exponent vector over the variety's divisor basis.  The alternating and
    triple-overlap identities are identities of constants and vectors.
    """

    name: str
    assignments: dict[tuple[int, int], CocycleEntry]

    def entry_data(self, i: int, j: int, spec: "VarietySpec") -> CocycleEntry:
        if i == j:
            return spec.field.one(), (0,) * len(spec.divisors)
        data = self.assignments.get((i, j))
        if data is None:
            raise PreconditionError(f"cocycle {self.name} has no entry for charts {i},{j}")
        return data

    def realize(self, i: int, j: int, spec: "VarietySpec", chart: int) -> RatFun:
        """The transition function g_{ij} as a rational function in `chart`."""
        const, exps = self.entry_data(i, j, spec)
        g = RatFun.const(spec.field, const)
        for d, e in zip(spec.divisors, exps):
            if e != 0:
                g = g * spec.canonical_function(d.name, chart) ** e
        return g

    def tensor(self, other: "CechCocycle", name: str | None = None) -> "CechCocycle":
        """Entrywise product: exponent vectors add, constants multiply."""
        if set(self.assignments) != set(other.assignments):
            raise PreconditionError("cocycles live on different covers")
        out: dict[tuple[int, int], CocycleEntry] = {}
        for key, (c1, e1) in self.assignments.items():
            c2, e2 = other.assignments[key]
            out[key] = (c1 * c2, tuple(a + b for a, b in zip(e1, e2)))
        return CechCocycle(name or f"{self.name}*{other.name}", out)


@dataclass
class VarietySpec:
    """Charts, glue, divisor basis and flag pool of one toy variety."""

    name: str
    field: Field
    dim: int
    charts: tuple[Chart, ...]
    glue: dict[tuple[int, int], dict[str, RatFun]]
    divisors: tuple[Divisor, ...]
    flags: tuple[Flag, ...]
    proper: bool = True
    named_cocycles: dict[str, CechCocycle] = dc_field(default_factory=dict)
    standard_potentials: Callable[[tuple[int, ...]], tuple[tuple[int, ...], ...]] | None = None

    def __post_init__(self) -> None:
        self.validate()

    # ---- structure checks ------------------------------------------------

    def validate(self) -> None:
        if self.dim < 1:
            raise PreconditionError("variety dimension must be positive")
        if not self.charts:
            raise PreconditionError("variety needs at least one chart")
        for chart in self.charts:
            if len(chart.coords) != self.dim:
                raise PreconditionError(f"chart {chart.name} has the wrong coordinate count")
        n = len(self.charts)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                key = (i, j)
                if key not in self.glue:
                    raise PreconditionError(f"missing glue map for chart pair {i},{j}")
                assignment = self.glue[key]
                if set(assignment) != set(self.charts[j].coords):
                    raise PreconditionError(f"glue {i}->{j} must assign exactly chart {j}'s coordinates")
                allowed = set(self.charts[i].coords)
                for expr in assignment.values():
                    if not set(expr.vars) <= allowed:
                        raise PreconditionError(f"glue {i}->{j} uses variables outside chart {i}")
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for c in self.charts[j].coords:
                    back = self.glue[(i, j)][c].subs(self.glue[(j, i)])
                    if back != RatFun.var(self.field, c):
                        raise InvariantError(f"glue maps {i}->{j}->{i} do not round-trip on {c}")
        seen = set()
        for d in self.divisors:
            if d.name in seen:
                raise PreconditionError(f"divisor name {d.name} repeats")
            seen.add(d.name)
            if not d.equations:
                raise PreconditionError(f"divisor {d.name} has no local equation")
            if d.equation_in(d.function_chart) is None:
                raise PreconditionError(f"divisor {d.name} lacks an equation in its designated chart")
            for i, eq in d.equations:
                self._check_chart_index(i)
                if not set(eq.vars) <= set(self.charts[i].coords):
                    raise PreconditionError(f"divisor {d.name} equation uses variables outside chart {i}")
                _check_prime_equation(d.name, eq, self.field)
        for f in self.flags:
            self._check_chart_index(f.chart)
            coords = self.charts[f.chart].coords
            if len(set(f.local_coords)) != len(f.local_coords):
                raise PreconditionError("flag repeats a local coordinate")
            if not set(f.local_coords) <= set(coords):
                raise PreconditionError(f"flag {f.chain_text()} uses coordinates outside its chart")
            if f.modulus is None and len(f.local_coords) != self.dim:
                raise PreconditionError(f"flag {f.chain_text()} is not a saturated chain")
            if f.codim >= 2 and not any(d.name == f.labels[1] for d in self.divisors):
                raise PreconditionError(
                    f"flag {f.chain_text()} has no declared divisor at depth one"
                )
            if f.modulus is not None:
                var = f.local_coords[0]
                if set(f.modulus.vars) - {var}:
                    raise PreconditionError("point modulus must be univariate in the local coordinate")
                dense = f.modulus.to_dense(var)
                if len(dense) - 1 <= 4 and not is_irreducible(dense, self.field):
                    raise PreconditionError(f"point modulus of flag {f.chain_text()} is reducible")

    def _check_chart_index(self, i: int) -> None:
        if not 0 <= i < len(self.charts):
            raise PreconditionError(f"chart index {i} out of range")

    # ---- transports and canonical functions ------------------------------

    def transport(self, f: RatFun, src_chart: int, dst_chart: int) -> RatFun:
        """Rewrite f from src chart coordinates into dst chart coordinates."""
        self._check_chart_index(src_chart)
        self._check_chart_index(dst_chart)
        if src_chart == dst_chart:
            return f
        return f.subs(self.glue[(dst_chart, src_chart)])

    def divisor(self, name: str) -> Divisor:
        for d in self.divisors:
            if d.name == name:
                return d
        raise PreconditionError(f"unknown divisor {name!r}")

    def divisor_index(self, name: str) -> int:
        for k, d in enumerate(self.divisors):
            if d.name == name:
                return k
        raise PreconditionError(f"unknown divisor {name!r}")

    def canonical_function(self, divisor_name: str, chart: int) -> RatFun:
        """The divisor's designated local equation, moved into `chart`."""
        d = self.divisor(divisor_name)
        eq = d.equation_in(d.function_chart)
        assert eq is not None
        return self.transport(eq, d.function_chart, chart)

    # ---- cocycles ---------------------------------------------------------

    def check_cocycle(self, cocycle: CechCocycle) -> None:
        """Alternating and triple identities on constants and exponent vectors."""
        n = len(self.charts)
        width = len(self.divisors)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if (i, j) not in cocycle.assignments:
                    raise PreconditionError(f"cocycle {cocycle.name} misses the pair {i},{j}")
                const, exps = cocycle.assignments[(i, j)]
                if const.is_zero:
                    raise PreconditionError(f"cocycle {cocycle.name} entry {i},{j} has zero constant")
                if len(exps) != width:
                    raise PreconditionError(
                        f"cocycle {cocycle.name} entry {i},{j} has the wrong exponent width"
                    )
        for (i, j), (const, exps) in cocycle.assignments.items():
            rconst, rexps = cocycle.assignments[(j, i)]
            if rexps != tuple(-e for e in exps) or rconst != const.inv():
                raise PreconditionError(f"cocycle {cocycle.name} is not alternating on charts {i},{j}")
        n_range = range(n)
        for i in n_range:
            for j in n_range:
                for k in n_range:
                    if len({i, j, k}) != 3:
                        continue
                    cij, eij = cocycle.assignments[(i, j)]
                    cjk, ejk = cocycle.assignments[(j, k)]
                    cik, eik = cocycle.assignments[(i, k)]
                    if tuple(a + b for a, b in zip(eij, ejk)) != eik or cij * cjk != cik:
                        raise PreconditionError(
                            f"cocycle {cocycle.name} fails the triple identity on {i},{j},{k}"
                        )

    def cocycle_from_potentials(
        self,
        vectors: tuple[tuple[int, ...], ...],
        name: str,
        constants: tuple[FieldScalar, ...] | None = None,
    ) -> CechCocycle:
        """Entry (i,j) = potential(j) - potential(i); automatically a cocycle."""
        n = len(self.charts)
        if len(vectors) != n:
            raise PreconditionError("one potential vector per chart is required")
        width = len(self.divisors)
        for v in vectors:
            if len(v) != width:
                raise PreconditionError("potential vectors must match the divisor basis")
        if constants is None:
            constants = tuple(self.field.one() for _ in range(n))
        out: dict[tuple[int, int], CocycleEntry] = {}
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                exps = tuple(b - a for a, b in zip(vectors[i], vectors[j]))
                out[(i, j)] = (constants[j] / constants[i], exps)
        cocycle = CechCocycle(name, out)
        self.check_cocycle(cocycle)
        return cocycle

    def standard_bundle(self, params: tuple[int, ...], name: str | None = None) -> CechCocycle:
        """The builtin's standard line-bundle family at the given parameters."""
        if self.standard_potentials is None:
            raise PreconditionError(
                f"variety {self.name} has no standard bundle family; use a named cocycle"
            )
        label = name or f"O({','.join(str(p) for p in params)})"
        return self.cocycle_from_potentials(self.standard_potentials(params), label)

    def cocycle(self, name: str) -> CechCocycle:
        if name in self.named_cocycles:
            return self.named_cocycles[name]
        raise PreconditionError(f"unknown cocycle {name!r}")

    def parse_bundle(self, text: str) -> CechCocycle:
        """Either a stored cocycle name or comma-separated standard parameters."""
        text = text.strip()
        if text in self.named_cocycles:
            return self.named_cocycles[text]
        try:
            params = tuple(int(chunk) for chunk in text.split(","))
        except ValueError as exc:
            raise ParseError(
                f"bundle {text!r} is neither a stored cocycle nor integer parameters"
            ) from exc
        return self.standard_bundle(params)

    # ---- the alpha assignment --------------------------------------------

    def chart_contains_point(self, flag: Flag, chart: int) -> bool:
        """Whether the flag's closed point lies in the chart, by testing
        that the glue from the flag's own chart is defined at the point."""
        if chart == flag.chart:
            return True
        assignment = self.glue[(flag.chart, chart)]
        if flag.modulus is not None:
            from .fields import ExtField

            var = flag.local_coords[0]
            ext = ExtField(self.field, var, flag.modulus.to_dense(var))
            theta = ext.generator()
            values = {var: theta}
            for expr in assignment.values():
                den = expr.den.eval_ext(ext, values)
                if den.is_zero:
                    return False
            return True
        origin = {c: self.field.zero() for c in self.charts[flag.chart].coords}
        for expr in assignment.values():
            if _eval_scalar(expr.den, origin, self.field).is_zero:
                return False
        return True

    def alpha_of(self, flag: Flag, level: int) -> int:
        """Least cover index containing the level-th stratum of the flag."""
        if not 0 <= level <= flag.codim:
            raise PreconditionError(f"flag has no stratum at level {level}")
        if level == 0:
            return 0
        if level == flag.codim:
            for k in range(len(self.charts)):
                if self.chart_contains_point(flag, k):
                    return k
            raise InvariantError(f"flag point {flag.labels[-1]} lies in no chart")
        if level == 1:
            d = self.divisor(flag.labels[1])
            return min(i for i, _ in d.equations)
        raise PreconditionError(
            "intermediate strata beyond the divisor level need a declared divisor reference"
        )

    def alphas(self, flag: Flag) -> tuple[int, ...]:
        return tuple(self.alpha_of(flag, i) for i in range(flag.codim + 1))


def _eval_scalar(p: MultiPoly, values: Mapping[str, FieldScalar], field: Field) -> FieldScalar:
    out = field.zero()
    for e, c in p.terms.items():
        term = c
        for v, k in zip(p.vars, e):
            if k:
                term = term * values[v] ** k
        out = out + term
    return out


def _total_degree(p: MultiPoly) -> int:
    return max((sum(e) for e in p.terms), default=0)


def _check_prime_equation(name: str, eq: RatFun, field: Field) -> None:
    """Cheap primality screen for local equations.

    Constants are rejected; degree-one polynomials pass; univariate ones up
    to degree four get a real irreducibility check; a monomial factor that
    is not the whole equation is rejected.  Anything deeper is the
    configuration author's contract.
    """
    if eq.is_zero:
        raise PreconditionError(f"divisor {name} has a zero local equation")
    if _total_degree(eq.den) != 0:
        raise PreconditionError(f"divisor {name} local equation must be polynomial")
    num = eq.num
    if _total_degree(num) == 0:
        raise PreconditionError(f"divisor {name} local equation is a unit")
    for v in num.vars:
        if num.ord_in(v) > 0 and _total_degree(num) > 1:
            raise PreconditionError(f"divisor {name} local equation is divisible by {v}")
    if len(num.vars) == 1 and _total_degree(num) <= 4:
        var = num.vars[0]
        if not is_irreducible(num.to_dense(var), field):
            raise PreconditionError(f"divisor {name} local equation is reducible")


# ---- builtin presentations ----------------------------------------------


def _rf(field: Field, text: str) -> RatFun:
    return parse_ratfun(text, field)


def build_p1(field: Field | None = None) -> VarietySpec:
    """The projective line: charts t0 and 1/t0, divisors at zero and infinity."""
    from .fields import QQ

    F = field if field is not None else QQ
    charts = (Chart("U0", ("t0",)), Chart("U1", ("t1",)))
    glue = {
        (0, 1): {"t1": _rf(F, "1/t0")},
        (1, 0): {"t0": _rf(F, "1/t1")},
    }
    divisors = (
        Divisor("Z", ((0, _rf(F, "t0")),), 0),
        Divisor("W", ((1, _rf(F, "t1")),), 1),
    )
    flags = (
        Flag(("P1", "Z"), 0, ("t0",)),
        Flag(("P1", "W"), 1, ("t1",)),
    )

    def potentials(params: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        if len(params) != 1:
            raise PreconditionError("the projective line's bundle family takes one parameter")
        (d,) = params
        return ((0, 0), (-d, 0))

    return VarietySpec("P1", F, 1, charts, glue, divisors, flags, standard_potentials=potentials)


def build_p1_redundant(field: Field | None = None) -> VarietySpec:
    """The projective line again, with a third chart repeating the first."""
    from .fields import QQ

    F = field if field is not None else QQ
    charts = (Chart("U0", ("t0",)), Chart("U1", ("t1",)), Chart("V0", ("u0",)))
    glue = {
        (0, 1): {"t1": _rf(F, "1/t0")},
        (1, 0): {"t0": _rf(F, "1/t1")},
        (0, 2): {"u0": _rf(F, "t0")},
        (2, 0): {"t0": _rf(F, "u0")},
        (1, 2): {"u0": _rf(F, "1/t1")},
        (2, 1): {"t1": _rf(F, "1/u0")},
    }
    divisors = (
        Divisor("Z", ((0, _rf(F, "t0")), (2, _rf(F, "u0"))), 0),
        Divisor("W", ((1, _rf(F, "t1")),), 1),
    )
    flags = (
        Flag(("P1", "Z"), 2, ("u0",)),
        Flag(("P1", "W"), 1, ("t1",)),
    )

    def potentials(params: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        if len(params) != 1:
            raise PreconditionError("the projective line's bundle family takes one parameter")
        (d,) = params
        return ((0, 0), (-d, 0), (0, 0))

    return VarietySpec(
        "P1-redundant", F, 1, charts, glue, divisors, flags, standard_potentials=potentials
    )


def build_p2(field: Field | None = None) -> VarietySpec:
    """The projective plane with its three standard charts and toric flags."""
    from .fields import QQ

    F = field if field is not None else QQ
    charts = (Chart("U0", ("x1", "x2")), Chart("U1", ("y0", "y2")), Chart("U2", ("z0", "z1")))
    glue = {
        (0, 1): {"y0": _rf(F, "1/x1"), "y2": _rf(F, "x2/x1")},
        (0, 2): {"z0": _rf(F, "1/x2"), "z1": _rf(F, "x1/x2")},
        (1, 0): {"x1": _rf(F, "1/y0"), "x2": _rf(F, "y2/y0")},
        (1, 2): {"z0": _rf(F, "y0/y2"), "z1": _rf(F, "1/y2")},
        (2, 0): {"x1": _rf(F, "z1/z0"), "x2": _rf(F, "1/z0")},
        (2, 1): {"y0": _rf(F, "z0/z1"), "y2": _rf(F, "1/z1")},
    }
    divisors = (
        Divisor("L0", ((1, _rf(F, "y0")), (2, _rf(F, "z0"))), 1),
        Divisor("L1", ((0, _rf(F, "x1")), (2, _rf(F, "z1"))), 0),
        Divisor("L2", ((0, _rf(F, "x2")), (1, _rf(F, "y2"))), 0),
    )
    flags = (
        Flag(("P2", "L0", "P_010"), 1, ("y0", "y2")),
        Flag(("P2", "L0", "P_001"), 2, ("z0", "z1")),
        Flag(("P2", "L1", "P_100"), 0, ("x1", "x2")),
        Flag(("P2", "L1", "P_001"), 2, ("z1", "z0")),
        Flag(("P2", "L2", "P_100"), 0, ("x2", "x1")),
        Flag(("P2", "L2", "P_010"), 1, ("y2", "y0")),
    )

    def potentials(params: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        if len(params) != 1:
            raise PreconditionError("the projective plane's bundle family takes one parameter")
        (a,) = params
        return ((0, 0, 0), (0, -a, 0), (0, 0, -a))

    return VarietySpec("P2", F, 2, charts, glue, divisors, flags, standard_potentials=potentials)


def build_p1xp1(field: Field | None = None) -> VarietySpec:
    """The product of two projective lines on four bi-affine charts."""
    from .fields import QQ

    F = field if field is not None else QQ
    charts = (
        Chart("C00", ("s0", "t0")),
        Chart("C01", ("s0b", "t1")),
        Chart("C10", ("s1", "t0b")),
        Chart("C11", ("s1b", "t1b")),
    )
    s_of = ("s0", "s0b", "s1", "s1b")
    t_of = ("t0", "t1", "t0b", "t1b")
    s_kind = (0, 0, 1, 1)  # 0: the affine coordinate s, 1: its reciprocal
    t_kind = (0, 1, 0, 1)
    glue: dict[tuple[int, int], dict[str, RatFun]] = {}
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            glue[(i, j)] = {
                s_of[j]: _rf(F, s_of[i] if s_kind[j] == s_kind[i] else f"1/{s_of[i]}"),
                t_of[j]: _rf(F, t_of[i] if t_kind[j] == t_kind[i] else f"1/{t_of[i]}"),
            }
    divisors = (
        Divisor("ZA", ((0, _rf(F, "s0")), (1, _rf(F, "s0b"))), 0),
        Divisor("WA", ((2, _rf(F, "s1")), (3, _rf(F, "s1b"))), 2),
        Divisor("ZB", ((0, _rf(F, "t0")), (2, _rf(F, "t0b"))), 0),
        Divisor("WB", ((1, _rf(F, "t1")), (3, _rf(F, "t1b"))), 1),
    )
    flags = (
        Flag(("P1xP1", "ZA", "p00"), 0, ("s0", "t0")),
        Flag(("P1xP1", "ZA", "p01"), 1, ("s0b", "t1")),
        Flag(("P1xP1", "WA", "p10"), 2, ("s1", "t0b")),
        Flag(("P1xP1", "WA", "p11"), 3, ("s1b", "t1b")),
        Flag(("P1xP1", "ZB", "p00"), 0, ("t0", "s0")),
        Flag(("P1xP1", "ZB", "p10"), 2, ("t0b", "s1")),
        Flag(("P1xP1", "WB", "p01"), 1, ("t1", "s0b")),
        Flag(("P1xP1", "WB", "p11"), 3, ("t1b", "s1b")),
    )

    def potentials(params: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        if len(params) != 2:
            raise PreconditionError("the ruled surface's bundle family takes two parameters")
        a, b = params
        return tuple(
            (-a * s_kind[k], 0, -b * t_kind[k], 0) for k in range(4)
        )

    return VarietySpec("P1xP1", F, 2, charts, glue, divisors, flags, standard_potentials=potentials)


BUILTIN_VARIETIES = {
    "P1": build_p1,
    "P1-redundant": build_p1_redundant,
    "P2": build_p2,
    "P1xP1": build_p1xp1,
}


def builtin_variety(name: str, field: Field | None = None) -> VarietySpec:
    if name not in BUILTIN_VARIETIES:
        raise ParseError(f"unknown builtin variety {name!r}; have {sorted(BUILTIN_VARIETIES)}")
    return BUILTIN_VARIETIES[name](field)


def builtin(text: str, field: Field | None = None) -> tuple[VarietySpec, CechCocycle]:
    """Parameterized builtins: 'P1(3)', 'P2(-2)', 'P1xP1(1,1)'."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ParseError(f"builtin spec {text!r} is not NAME(params)")
    name, _, inside = text[:-1].partition("(")
    try:
        params = tuple(int(p) for p in inside.split(","))
    except ValueError as exc:
        raise ParseError(f"bad builtin parameters in {text!r}") from exc
    spec = builtin_variety(name.strip(), field)
    return spec, spec.standard_bundle(params)


def enumerate_flags(spec: VarietySpec, cocycles: tuple[CechCocycle, ...] = ()) -> tuple[Flag, ...]:
    """The declared flag pool: a finite superset of every flag that can
    contribute.  Canonical divisor functions may have zeros or poles along
    divisors outside a cocycle's exponent support, so no support-based
    filtering is attempted; zero contributions are filtered by computing them.
    """
    for c in cocycles:
        spec.check_cocycle(c)
    if not spec.flags:
        raise PreconditionError(
            f"variety {spec.name} declares no flags; a candidate pool is required"
        )
    return spec.flags


# ---- config round trip ----------------------------------------------------


_TOP_KEYS = {
    "schema_version", "name", "field", "dim", "charts", "glue",
    "divisors", "cocycles", "flags", "proper",
}


def _reject_unknown(obj: Mapping, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ParseError(f"unknown keys {sorted(extra)} in {where}")


def _parse_pair_key(key: str, where: str) -> tuple[int, int]:
    try:
        a, b = key.split("->")
        return int(a), int(b)
    except ValueError as exc:
        raise ParseError(f"{where} key {key!r} is not 'i->j'") from exc


def load_variety(config: Mapping | str) -> VarietySpec:
    """Build a variety from a strict JSON-style description."""
    if isinstance(config, str):
        try:
            config = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
    if not isinstance(config, Mapping):
        raise ParseError("variety config must be an object")
    _reject_unknown(config, _TOP_KEYS, "variety config")
    for key in ("schema_version", "name", "field", "dim", "charts", "glue", "divisors", "flags"):
        if key not in config:
            raise ParseError(f"variety config misses {key!r}")
    if config["schema_version"] != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {config['schema_version']!r}")
    field = parse_field(config["field"])
    dim = config["dim"]
    if not isinstance(dim, int):
        raise ParseError("dim must be an integer")

    charts = []
    for c in config["charts"]:
        _reject_unknown(c, {"name", "coords"}, "chart")
        charts.append(Chart(str(c["name"]), tuple(str(x) for x in c["coords"])))

    glue: dict[tuple[int, int], dict[str, RatFun]] = {}
    for key, assignment in config["glue"].items():
        pair = _parse_pair_key(key, "glue")
        glue[pair] = {str(v): parse_ratfun(str(expr), field) for v, expr in assignment.items()}

    divisors = []
    for d in config["divisors"]:
        _reject_unknown(d, {"name", "equations", "chart"}, "divisor")
        eqs = tuple(
            (int(i), parse_ratfun(str(expr), field))
            for i, expr in sorted(d["equations"].items(), key=lambda kv: int(kv[0]))
        )
        divisors.append(Divisor(str(d["name"]), eqs, int(d["chart"])))

    flags = []
    for f in config["flags"]:
        _reject_unknown(f, {"labels", "chart", "coords", "modulus", "modulus_var"}, "flag")
        modulus = None
        if f.get("modulus") is not None:
            var = f.get("modulus_var") or f["coords"][0]
            if str(var) != str(f["coords"][0]):
                raise ParseError("modulus_var must be the flag's local coordinate")
            modulus = parse_ratfun(str(f["modulus"]), field).num
        flags.append(
            Flag(
                tuple(str(x) for x in f["labels"]),
                int(f["chart"]),
                tuple(str(x) for x in f["coords"]),
                modulus,
            )
        )

    spec = VarietySpec(
        str(config["name"]), field, dim, tuple(charts), glue, tuple(divisors), tuple(flags),
        proper=bool(config.get("proper", True)),
    )
    for c in config.get("cocycles", []):
        _reject_unknown(c, {"name", "entries"}, "cocycle")
        cname = str(c["name"])
        entries: dict[tuple[int, int], CocycleEntry] = {}
        for key, data in c["entries"].items():
            pair = _parse_pair_key(key, "cocycle entry")
            _reject_unknown(data, {"const", "exps"}, f"cocycle entry {key}")
            const_rf = parse_ratfun(str(data.get("const", "1")), field)
            if not const_rf.is_constant:
                raise ParseError(f"cocycle {cname} entry {key} constant is not a scalar")
            entries[pair] = (const_rf.constant_value(), tuple(int(e) for e in data["exps"]))
        cocycle = CechCocycle(cname, entries)
        spec.check_cocycle(cocycle)
        spec.named_cocycles[cname] = cocycle
    return spec


def dump_variety(spec: VarietySpec) -> dict:
    """The strict config form of a variety; inverse to load_variety."""
    out = {
        "schema_version": SCHEMA_VERSION,
        "name": spec.name,
        "field": str(spec.field),
        "dim": spec.dim,
        "charts": [{"name": c.name, "coords": list(c.coords)} for c in spec.charts],
        "glue": {
            f"{i}->{j}": {v: str(expr) for v, expr in assignment.items()}
            for (i, j), assignment in sorted(spec.glue.items())
        },
        "divisors": [
            {
                "name": d.name,
                "equations": {str(i): str(eq) for i, eq in d.equations},
                "chart": d.function_chart,
            }
            for d in spec.divisors
        ],
        "flags": [
            {
                "labels": list(f.labels),
                "chart": f.chart,
                "coords": list(f.local_coords),
                "modulus": str(RatFun.from_poly(f.modulus)) if f.modulus is not None else None,
                "modulus_var": f.local_coords[0] if f.modulus is not None else None,
            }
            for f in spec.flags
        ],
        "proper": spec.proper,
    }
    if spec.named_cocycles:
        out["cocycles"] = [
            {
                "name": c.name,
                "entries": {
                    f"{i}->{j}": {"const": str(const), "exps": list(exps)}
                    for (i, j), (const, exps) in sorted(c.assignments.items())
                },
            }
            for c in spec.named_cocycles.values()
        ]
    return out
