"""Tower descriptors for Tate-style objects, shuffles, lattices, index maps.

A descriptor is a base category tag plus an ordered list of legs, innermost
first; each leg is Ind, Pro, or Tate(var).  The normally ordered tensor of
two descriptors interleaves their legs along a shuffle, the trivial shuffle
placing the first factor's legs innermost, so Tate(s) tensored with Tate(t)
realizes k((s))((t)).  Shuffle words are stored innermost first with L
marking legs of the first factor.

Lattices here are the monomial ones in the outermost layer: L(a) is spanned
by powers outer^k with k >= a, so L(a) is contained in L(b) exactly when
a >= b, and the index map of a unit f measures dim(L2 / f L1) - dim(L2 / L1).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import ParseError, PreconditionError, InvariantError
from .fields import Field, parse_field
from .series import CoordTower, NestedSeries, expand


@dataclass(frozen=True)
class Leg:
    kind: str  # "Ind" | "Pro" | "Tate"
    var: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("Ind", "Pro", "Tate"):
            raise PreconditionError(f"unknown leg kind {self.kind!r}")
        if (self.kind == "Tate") != (self.var is not None):
            raise PreconditionError("exactly Tate legs carry a variable")

    def dual(self) -> "Leg":
        if self.kind == "Ind":
            return Leg("Pro")
        if self.kind == "Pro":
            return Leg("Ind")
        return self

    def __str__(self) -> str:
        return f"Tate({self.var})" if self.kind == "Tate" else self.kind


@dataclass(frozen=True)
class BaseTag:
    """Base category of a descriptor: Vect over a field, or LCA."""

    kind: str  # "Vect" | "LCA"
    field: Field | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("Vect", "LCA"):
            raise PreconditionError(f"unknown base tag {self.kind!r}")
        if (self.kind == "Vect") != (self.field is not None):
            raise PreconditionError("exactly Vect bases carry a field")

    def __str__(self) -> str:
        return f"Vect({self.field})" if self.kind == "Vect" else "LCA"


@dataclass(frozen=True)
class TateDescriptor:
    """A base tag with legs ordered innermost first."""

    base: BaseTag
    legs: tuple[Leg, ...] = ()

    @property
    def depth(self) -> int:
        return sum(1 for leg in self.legs if leg.kind == "Tate")

    @property
    def tate_vars(self) -> tuple[str, ...]:
        return tuple(leg.var for leg in self.legs if leg.kind == "Tate")  # type: ignore[misc]

    def dual(self) -> "TateDescriptor":
        return TateDescriptor(self.base, tuple(leg.dual() for leg in self.legs))

    def to_tower(self) -> CoordTower:
        """The iterated Laurent tower of an all-Tate descriptor over Vect."""
        if self.base.kind != "Vect":
            raise PreconditionError("only Vect descriptors realize Laurent towers")
        if any(leg.kind != "Tate" for leg in self.legs) or not self.legs:
            raise PreconditionError("only nonempty all-Tate descriptors realize Laurent towers")
        return CoordTower.of(*self.tate_vars, residue=self.base.field)

    def __str__(self) -> str:
        legs = ".".join(str(leg) for leg in self.legs) if self.legs else "1"
        return f"{legs}@{self.base}"


def parse_descriptor(text: str) -> TateDescriptor:
    """Parse forms like 'Tate(s).Tate(t)@Vect(Q)', 'Ind.Pro@LCA', '1@Vect(F5)'."""
    if "@" not in text:
        raise ParseError("descriptor needs an @base suffix")
    legs_text, base_text = text.rsplit("@", 1)
    base_text = base_text.strip()
    if base_text == "LCA":
        base = BaseTag("LCA")
    elif base_text.startswith("Vect(") and base_text.endswith(")"):
        base = BaseTag("Vect", parse_field(base_text[5:-1]))
    else:
        raise ParseError(f"unknown base tag {base_text!r}")
    legs: list[Leg] = []
    legs_text = legs_text.strip()
    if legs_text not in ("", "1"):
        for chunk in legs_text.split("."):
            chunk = chunk.strip()
            if chunk in ("Ind", "Pro"):
                legs.append(Leg(chunk))
            elif chunk.startswith("Tate(") and chunk.endswith(")"):
                legs.append(Leg("Tate", chunk[5:-1].strip()))
            else:
                raise ParseError(f"unknown leg {chunk!r}")
    return TateDescriptor(base, tuple(legs))


@dataclass(frozen=True)
class Shuffle:
    """An (n, m)-shuffle as a word over {L, R}, innermost position first."""

    n: int
    m: int
    word: str

    def __post_init__(self) -> None:
        if len(self.word) != self.n + self.m:
            raise PreconditionError("shuffle word length must be n + m")
        if self.word.count("L") != self.n or self.word.count("R") != self.m:
            raise PreconditionError("shuffle word must contain n L's and m R's")

    @staticmethod
    def trivial(n: int, m: int) -> "Shuffle":
        return Shuffle(n, m, "L" * n + "R" * m)

    @staticmethod
    def all(n: int, m: int) -> list["Shuffle"]:
        out = []
        for pos in combinations(range(n + m), n):
            word = ["R"] * (n + m)
            for p in pos:
                word[p] = "L"
            out.append(Shuffle(n, m, "".join(word)))
        return out

    def left_positions(self) -> tuple[int, ...]:
        """Images of the first block, 1-based, increasing."""
        return tuple(i + 1 for i, ch in enumerate(self.word) if ch == "L")

    def right_positions(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, ch in enumerate(self.word) if ch == "R")

    def interleave(self, left: tuple, right: tuple) -> tuple:
        """Merge two tuples along the word (position 1 innermost)."""
        if len(left) != self.n or len(right) != self.m:
            raise PreconditionError("interleave arity mismatch")
        il = iter(left)
        ir = iter(right)
        return tuple(next(il) if ch == "L" else next(ir) for ch in self.word)

    def __str__(self) -> str:
        return self.word


def tensor_descriptor(v: TateDescriptor, w: TateDescriptor, shuffle: Shuffle | None = None) -> TateDescriptor:
    """Normally ordered tensor along a shuffle (trivial: v inside, w outside)."""
    if v.base != w.base:
        raise PreconditionError(f"mixed bases {v.base} and {w.base}")
    if shuffle is None:
        shuffle = Shuffle.trivial(len(v.legs), len(w.legs))
    if (shuffle.n, shuffle.m) != (len(v.legs), len(w.legs)):
        raise PreconditionError("shuffle arity does not match the leg counts")
    legs = shuffle.interleave(v.legs, w.legs)
    vars_seen = [leg.var for leg in legs if leg.kind == "Tate"]
    if len(set(vars_seen)) != len(vars_seen):
        raise PreconditionError("tensor would repeat a Tate variable")
    return TateDescriptor(v.base, legs)


def tensor_all(v: TateDescriptor, w: TateDescriptor) -> list[tuple[Shuffle, TateDescriptor]]:
    """Every shuffle variant, as the formal list of summand descriptors."""
    return [(s, tensor_descriptor(v, w, s)) for s in Shuffle.all(len(v.legs), len(w.legs))]


def hom_descriptor(u: TateDescriptor, v: TateDescriptor) -> TateDescriptor:
    """Internal hom shape: v tensored with the dual of u, trivially shuffled."""
    return tensor_descriptor(v, u.dual())


def tensor_element(
    v: NestedSeries, w: NestedSeries, shuffle: Shuffle | None = None, prec: int | None = None
) -> NestedSeries:
    """Shuffled product of two expansions of rational functions.

    Both inputs must remember rational sources (the shuffled tensor is only
    defined through joint re-expansion of the product); their variables must
    be disjoint and their residues equal.
    """
    if v.source is None or w.source is None:
        raise PreconditionError("shuffled tensor needs elements with rational sources")
    if v.tower.residue != w.tower.residue:
        raise PreconditionError("mixed residue fields in element tensor")
    if (v.tower.moduli and any(v.tower.moduli)) or (w.tower.moduli and any(w.tower.moduli)):
        raise PreconditionError("element tensor is not defined over modulus layers")
    if set(v.tower.layers) & set(w.tower.layers):
        raise PreconditionError("element tensor needs disjoint tower variables")
    if shuffle is None:
        shuffle = Shuffle.trivial(v.depth, w.depth)
    if (shuffle.n, shuffle.m) != (v.depth, w.depth):
        raise PreconditionError("shuffle arity does not match the tower depths")
    layers = shuffle.interleave(v.tower.layers, w.tower.layers)
    tower = CoordTower(layers, v.tower.residue, (None,) * len(layers))
    if prec is None:
        prec = min(v.prec - v.val, w.prec - w.val)
    return expand(v.source * w.source, tower, prec)


def shuffle_compose(sigma: Shuffle, tau: Shuffle) -> tuple[Shuffle, Shuffle]:
    """Solve tau ∘ (sigma ⊔ id) = sigma' ∘ (id ⊔ tau') for the unique pair.

    sigma is an (n, m)-shuffle, tau an (n+m, l)-shuffle; the result is the
    (n, m+l)-shuffle sigma' and the (m, l)-shuffle tau'.
    """
    n, m = sigma.n, sigma.m
    if tau.n != n + m:
        raise PreconditionError("tau must shuffle the n+m output of sigma against l")
    ell = tau.m
    tau_l = tau.left_positions()
    tau_r = tau.right_positions()
    psi_v = [tau_l[p - 1] for p in sigma.left_positions()]
    psi_w = [tau_l[p - 1] for p in sigma.right_positions()]
    psi_u = list(tau_r)
    total = n + m + ell
    word1 = ["R"] * total
    for p in psi_v:
        word1[p - 1] = "L"
    sigma_prime = Shuffle(n, m + ell, "".join(word1))
    merged = sorted([(p, "L") for p in psi_w] + [(p, "R") for p in psi_u])
    tau_prime = Shuffle(m, ell, "".join(tag for _, tag in merged))
    # verify the exchange identity by evaluating both composites
    sp_l = sigma_prime.left_positions()
    sp_r = sigma_prime.right_positions()
    tp_l = tau_prime.left_positions()
    tp_r = tau_prime.right_positions()
    for i in range(n):
        if sp_l[i] != psi_v[i]:
            raise InvariantError("shuffle composition failed on the first block")
    for j in range(m):
        if sp_r[tp_l[j] - 1] != psi_w[j]:
            raise InvariantError("shuffle composition failed on the middle block")
    for k in range(ell):
        if sp_r[tp_r[k] - 1] != psi_u[k]:
            raise InvariantError("shuffle composition failed on the last block")
    return sigma_prime, tau_prime


def composite_map(sigma: Shuffle, tau: Shuffle) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Images of the three blocks under tau ∘ (sigma ⊔ id); test oracle hook."""
    tau_l = tau.left_positions()
    tau_r = tau.right_positions()
    return (
        tuple(tau_l[p - 1] for p in sigma.left_positions()),
        tuple(tau_l[p - 1] for p in sigma.right_positions()),
        tuple(tau_r),
    )


def composite_map_prime(sigma_prime: Shuffle, tau_prime: Shuffle) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Images of the three blocks under sigma' ∘ (id ⊔ tau'); test oracle hook."""
    sp_l = sigma_prime.left_positions()
    sp_r = sigma_prime.right_positions()
    tp_l = tau_prime.left_positions()
    tp_r = tau_prime.right_positions()
    return (
        tuple(sp_l),
        tuple(sp_r[p - 1] for p in tp_l),
        tuple(sp_r[p - 1] for p in tp_r),
    )


@dataclass(frozen=True)
class Lattice:
    """The monomial lattice L(offset) in the outermost layer of a tower."""

    tower: CoordTower
    offset: int

    def contains(self, x: NestedSeries) -> bool:
        if x.tower != self.tower:
            raise PreconditionError("element lives on a different tower")
        if x.source is not None and x.source.is_zero:
            return True
        if x.is_zero_within_window and x.source is None:
            raise PreconditionError("cannot certify membership of an uncertified zero window")
        v, _ = x.valuation_and_unit()
        return v >= self.offset

    def is_sublattice_of(self, other: "Lattice") -> bool:
        if self.tower != other.tower:
            raise PreconditionError("lattices live on different towers")
        return self.offset >= other.offset

    def quotient_dim_in(self, other: "Lattice") -> int:
        """dim(other / self), defined when self is a sublattice of other."""
        if not self.is_sublattice_of(other):
            raise PreconditionError(
                f"L({self.offset}) is not contained in L({other.offset}); quotient undefined"
            )
        return self.offset - other.offset

    def scaled_by(self, valuation: int) -> "Lattice":
        return Lattice(self.tower, self.offset + valuation)


def index_map(f: NestedSeries, lattice1: Lattice, lattice2: Lattice) -> int:
    """Relative index dim(L2 / f L1) - dim(L2 / L1) for an invertible f.

    Preconditions: L1 and f L1 are both sublattices of L2.  The value is
    the outer valuation of f, independently of the admissible pair.
    """
    if lattice1.tower != f.tower or lattice2.tower != f.tower:
        raise PreconditionError("element and lattices must share one tower")
    v, _ = f.valuation_and_unit()
    if not lattice1.is_sublattice_of(lattice2):
        raise PreconditionError(
            f"precondition failed: L({lattice1.offset}) is not contained in L({lattice2.offset})"
        )
    f_l1 = lattice1.scaled_by(v)
    if not f_l1.is_sublattice_of(lattice2):
        raise PreconditionError(
            f"precondition failed: f*L({lattice1.offset}) = L({f_l1.offset}) "
            f"is not contained in L({lattice2.offset})"
        )
    return f_l1.quotient_dim_in(lattice2) - lattice1.quotient_dim_in(lattice2)
