"""Acting groups, driving measures κ, base systems and F-valued cocycles.

Two groups are supported: the integers (acting on a finite cycle by
rotation) and F itself (acting on K by translation, with Haar measure).
Cocycles are action cocycles α(g, x) with α(gh, x) = α(g, hx) + α(h, x);
``alpha(T_g x, x)`` in orbit notation.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .cantor import GroupElement
from .errors import UnreachableElement

Element = Union[int, GroupElement]
Weight = Union[Fraction, float]

INTEGERS = "Integers"
DIRECT_SUM = "DirectSumZ2"


@dataclass(frozen=True)
class GroupSpec:
    kind: str

    def __post_init__(self):
        if self.kind not in (INTEGERS, DIRECT_SUM):
            raise ValueError(f"unknown group kind {self.kind!r}")

    @classmethod
    def integers(cls) -> "GroupSpec":
        return cls(INTEGERS)

    @classmethod
    def direct_sum(cls) -> "GroupSpec":
        return cls(DIRECT_SUM)

    @property
    def identity(self) -> Element:
        return 0 if self.kind == INTEGERS else GroupElement()

    def add(self, a: Element, b: Element) -> Element:
        return a + b

    def neg(self, a: Element) -> Element:
        return -a

    def contains(self, a) -> bool:
        if self.kind == INTEGERS:
            return isinstance(a, int) and not isinstance(a, bool)
        return isinstance(a, GroupElement)

    def parse(self, text) -> Element:
        if self.kind == INTEGERS:
            if isinstance(text, bool):
                raise ValueError("booleans are not integers")
            if isinstance(text, int):
                return text
            return int(str(text).strip())
        return GroupElement.parse(text)

    def format(self, a: Element) -> str:
        if self.kind == INTEGERS:
            return f"{a:+d}" if a else "0"
        return str(a)


def _is_exact(w) -> bool:
    return isinstance(w, (Fraction, int))


@dataclass(frozen=True)
class KappaMeasure:
    """Finitely supported probability on the acting group, with an enumeration.

    ``atoms`` is an ordered tuple of (element, weight) pairs; its order is
    the enumeration g_1, g_2, ....
    """

    atoms: tuple[tuple[Element, Weight], ...]

    def __post_init__(self):
        if isinstance(self.atoms, Mapping):
            object.__setattr__(self, "atoms", tuple(self.atoms.items()))
        atoms = tuple((g, w) for g, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("kappa needs at least one atom")
        seen = set()
        for g, w in atoms:
            if g in seen:
                raise ValueError(f"duplicate kappa atom {g}")
            seen.add(g)
            if not w > 0:
                raise ValueError(f"kappa weight must be positive, got {w} at {g}")
        total = self.total_mass()
        exact = all(_is_exact(w) for _, w in atoms)
        if (exact and total != 1) or (not exact and abs(total - 1.0) > 1e-12):
            raise ValueError(f"kappa mass ≠ 1 (got {float(total)!r})")

    @classmethod
    def point_mass(cls, g: Element) -> "KappaMeasure":
        return cls(((g, Fraction(1)),))

    def total_mass(self) -> Weight:
        ws = [w for _, w in self.atoms]
        if all(_is_exact(w) for w in ws):
            return sum(ws, Fraction(0))
        return math.fsum(float(w) for w in ws)

    @property
    def enumeration(self) -> tuple[Element, ...]:
        return tuple(g for g, _ in self.atoms)

    @property
    def weights(self) -> tuple[Weight, ...]:
        return tuple(w for _, w in self.atoms)

    def weight(self, g: Element) -> Weight:
        for h, w in self.atoms:
            if h == g:
                return w
        return 0

    def __len__(self):
        return len(self.atoms)


FINITE_CYCLE = "FiniteCycle"
HAAR_ODOMETER = "HaarOdometer"


@dataclass(frozen=True)
class BaseSystem:
    """Measure-preserving base: rotation on Z/m, or translation on (K, Haar)."""

    kind: str
    m: int = 0

    def __post_init__(self):
        if self.kind == FINITE_CYCLE:
            if self.m < 1:
                raise ValueError("FiniteCycle needs m >= 1")
        elif self.kind != HAAR_ODOMETER:
            raise ValueError(f"unknown base kind {self.kind!r}")

    @classmethod
    def finite_cycle(cls, m: int) -> "BaseSystem":
        return cls(FINITE_CYCLE, m)

    @classmethod
    def haar_odometer(cls) -> "BaseSystem":
        return cls(HAAR_ODOMETER)

    @property
    def group(self) -> GroupSpec:
        return GroupSpec(INTEGERS if self.kind == FINITE_CYCLE else DIRECT_SUM)

    @property
    def finite(self) -> bool:
        return self.kind == FINITE_CYCLE

    def points(self) -> list[tuple[int, Fraction]]:
        """(x, μ(x)) for a finite base."""
        if not self.finite:
            raise ValueError("HaarOdometer has no finite enumeration")
        return [(x, Fraction(1, self.m)) for x in range(self.m)]

    def act(self, g: int, x: int) -> int:
        if not self.finite:
            raise ValueError("points of K are handled by the fiber sampler")
        return (x + g) % self.m


# --------------------------------------------------------------------------
# cocycles

CONSTANT = "ConstantPerGenerator"
TABLE = "GeneratorTable"


@dataclass(frozen=True)
class CocycleSpec:
    """F-valued cocycle over a base system.

    ``ConstantPerGenerator``: α(g, x) = φ(g) for a homomorphism φ fixed by its
    values on the declared generators (``labels``); ``canonical=True`` is
    Appendix-style β(S_f y, y) = f on the odometer, i.e. φ = id.

    ``GeneratorTable``: over FiniteCycle(m), α(+1, x) = table[x], extended
    to all of Z by the cocycle identity.

    ``projection``, when set, restricts every value to those coordinates
    and relabels them 1, 2, ...
    """

    kind: str
    labels: tuple[tuple[Element, GroupElement], ...] = ()
    canonical: bool = False
    table: tuple[GroupElement, ...] = ()
    projection: tuple[int, ...] | None = None

    def __post_init__(self):
        if isinstance(self.labels, Mapping):
            object.__setattr__(self, "labels", tuple(self.labels.items()))
        object.__setattr__(self, "table", tuple(self.table))
        if self.kind == CONSTANT:
            if self.table:
                raise ValueError("ConstantPerGenerator takes labels, not a table")
            if self.canonical and self.labels:
                raise ValueError("canonical cocycle takes no labels")
        elif self.kind == TABLE:
            if not self.table:
                raise ValueError("GeneratorTable needs a non-empty table")
            if self.labels or self.canonical:
                raise ValueError("GeneratorTable takes a table, not labels")
        else:
            raise ValueError(f"unknown cocycle kind {self.kind!r}")
        if self.projection is not None:
            p = tuple(int(n) for n in self.projection)
            if any(b <= a for a, b in zip(p, p[1:])) or (p and p[0] < 1):
                raise ValueError("projection coordinates must be strictly increasing and >= 1")
            object.__setattr__(self, "projection", p)

    @classmethod
    def canonical_odometer(cls) -> "CocycleSpec":
        return cls(CONSTANT, canonical=True)

    @classmethod
    def constant(cls, labels: Mapping[Element, GroupElement]) -> "CocycleSpec":
        return cls(CONSTANT, labels=tuple(labels.items()))

    @classmethod
    def generator_table(cls, table: Sequence[GroupElement]) -> "CocycleSpec":
        return cls(TABLE, table=tuple(table))

    @classmethod
    def identity(cls) -> "CocycleSpec":
        return cls(CONSTANT, labels=())

    @property
    def x_independent(self) -> bool:
        return self.kind == CONSTANT

    def homomorphism(self, group: GroupSpec) -> "_Homomorphism":
        return _homomorphism(self, group)


class _Homomorphism:
    """φ on the subgroup generated by the declared generators; exact GF(2) / Z algebra."""

    def __init__(self, labels, group: GroupSpec):
        self.group = group
        # no declared generators: the trivial cocycle, defined on the whole group
        self.trivial = not labels
        if group.kind == DIRECT_SUM:
            self._basis: dict[int, tuple[int, int]] = {}
            for g, lab in labels:
                if not isinstance(g, GroupElement):
                    raise ValueError(f"generator {g!r} is not an element of F")
                rest, val = self._reduce(g.to_mask(), lab.to_mask())
                if rest == 0:
                    if val != 0:
                        raise ValueError(
                            f"labels are not consistent with a homomorphism (generator {g})")
                    continue
                self._basis[rest.bit_length() - 1] = (rest, val)
        else:
            gens = [(int(g), lab) for g, lab in labels]
            d = 0
            for g, _ in gens:
                d = math.gcd(d, g)
            self._d = d
            self._phi_d = GroupElement()
            if d:
                odd = [lab for g, lab in gens if (g // d) % 2]
                self._phi_d = odd[0]
                for g, lab in gens:
                    want = self._phi_d if (g // d) % 2 else GroupElement()
                    if lab != want:
                        raise ValueError(
                            f"labels are not consistent with a homomorphism Z -> F (generator {g:+d})")
            else:
                for g, lab in gens:
                    if lab:
                        raise ValueError("the identity must carry the identity label")

    def _reduce(self, g: int, val: int) -> tuple[int, int]:
        while g:
            top = g.bit_length() - 1
            b = self._basis.get(top)
            if b is None:
                break
            g ^= b[0]
            val ^= b[1]
        return g, val

    def __call__(self, g: Element) -> GroupElement:
        if self.trivial:
            return GroupElement()
        if self.group.kind == DIRECT_SUM:
            rest, val = self._reduce(g.to_mask(), 0)
            if rest:
                raise UnreachableElement(f"{g} is not in the span of the declared generators")
            return GroupElement.from_mask(val)
        if g == 0:
            return GroupElement()
        if self._d == 0 or g % self._d:
            raise UnreachableElement(f"{g:+d} is not a word in the declared generators")
        return self._phi_d if (g // self._d) % 2 else GroupElement()


_HOM_CACHE: dict = {}


def _homomorphism(c: CocycleSpec, group: GroupSpec) -> _Homomorphism:
    key = (c.labels, group)
    h = _HOM_CACHE.get(key)
    if h is None:
        h = _HOM_CACHE[key] = _Homomorphism(c.labels, group)
    return h


def _table_value(table: tuple[GroupElement, ...], k: int, x: int) -> GroupElement:
    m = len(table)
    if k < 0:
        # α(-k, x) = α(k, x - k): elements of F are their own inverses
        return _table_value(table, -k, (x + k) % m)
    mask = 0
    full, rem = divmod(k, m)
    if full % 2:
        for w in table:
            mask ^= w.to_mask()
    for j in range(rem):
        mask ^= table[(x + j) % m].to_mask()
    return GroupElement.from_mask(mask)


def evaluate_cocycle(c: CocycleSpec, base: BaseSystem, g: Element, x=None) -> GroupElement:
    """α(T_g x, x), telescoped along generator words."""
    group = base.group
    if c.kind == CONSTANT:
        if c.canonical:
            if group.kind != DIRECT_SUM:
                raise ValueError("the canonical cocycle lives on the odometer")
            val = g
        else:
            val = c.homomorphism(group)(g)
    else:
        if not base.finite or len(c.table) != base.m:
            raise ValueError("GeneratorTable needs a FiniteCycle base of matching size")
        val = _table_value(c.table, int(g), int(x) % base.m)
    if c.projection is not None:
        val = val.restrict(c.projection)
    return val


def pushforward_kappa(c: CocycleSpec, base: BaseSystem, kappa: KappaMeasure,
                      x=None) -> dict[GroupElement, Weight]:
    """κ_x: image of κ under g -> α(T_g x, x)."""
    out: dict[GroupElement, Weight] = {}
    for g, w in kappa.atoms:
        f = evaluate_cocycle(c, base, g, x)
        out[f] = out.get(f, 0) + w
    return out


def fiber_decomposition(c: CocycleSpec, base: BaseSystem,
                        kappa: KappaMeasure) -> list[tuple[Weight, dict[GroupElement, Weight]]]:
    """[(μ(x), κ_x)] over the base, collapsed to one term when κ_x is constant in x."""
    if base.finite and not c.x_independent:
        return [(mu, pushforward_kappa(c, base, kappa, x)) for x, mu in base.points()]
    if not base.finite and not c.x_independent:
        raise ValueError("x-dependent cocycles need a finite base")
    x0 = 0 if base.finite else None
    return [(Fraction(1), pushforward_kappa(c, base, kappa, x0))]


def project_cocycle(c: CocycleSpec, coords: Sequence[int]) -> CocycleSpec:
    """Quotient by {f : f(M_n) = 0 for all n}, relabelling M_n -> n."""
    coords = tuple(int(n) for n in coords)
    if any(b <= a for a, b in zip(coords, coords[1:])):
        raise ValueError("coords must be strictly increasing")
    if c.projection is not None:
        # compose: coordinate k of the old image is c.projection[k-1] in the original
        coords = tuple(c.projection[k - 1] for k in coords if k <= len(c.projection))
    return CocycleSpec(c.kind, c.labels, c.canonical, c.table, coords)


@dataclass(frozen=True)
class BudgetRow:
    n: int
    atom: Element
    kappa_n: Weight
    mean_norm: Weight
    bound: int
    ok: bool


def norm_budget_report(c: CocycleSpec, base: BaseSystem, kappa: KappaMeasure,
                       l: Sequence[int]) -> list[BudgetRow]:
    """∫‖α(T_{g_n}x, x)‖dμ(x) against l_n + 1 for each enumerated atom g_n.

    ``l[n - 1]`` is l_n.
    """
    rows = []
    for n, (g, w) in enumerate(kappa.atoms, start=1):
        if base.finite and not c.x_independent:
            integral = sum((mu * evaluate_cocycle(c, base, g, x).norm for x, mu in base.points()),
                           Fraction(0))
        else:
            integral = Fraction(evaluate_cocycle(c, base, g, 0 if base.finite else None).norm)
        bound = int(l[n - 1]) + 1
        rows.append(BudgetRow(n, g, w, integral, bound, integral <= bound))
    return rows


GENERATES = "generates-declared-subgroup"
FAILS = "fails-within-depth"


@dataclass(frozen=True)
class GeneratingVerdict:
    verdict: str
    depth: int
    closure_size: int
    missing_inverses: tuple = ()

    @property
    def generates(self) -> bool:
        return self.verdict == GENERATES


def check_generating(group: GroupSpec, kappa: KappaMeasure, depth: int) -> GeneratingVerdict:
    """Semigroup closure of supp κ up to word length ``depth``.

    If every generator's inverse appears, the closure is a group: κ
    generates (as a semigroup) the subgroup its support spans.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    gens = list(kappa.enumeration)
    closure = set(gens)
    frontier = deque(gens)
    for _ in range(depth - 1):
        nxt = deque()
        while frontier:
            w = frontier.popleft()
            for g in gens:
                v = group.add(w, g)
                if v not in closure:
                    closure.add(v)
                    nxt.append(v)
        frontier = nxt
        if all(group.neg(g) in closure for g in gens):
            break
    missing = tuple(g for g in gens if group.neg(g) not in closure)
    verdict = FAILS if missing else GENERATES
    return GeneratingVerdict(verdict, depth, len(closure), missing)
