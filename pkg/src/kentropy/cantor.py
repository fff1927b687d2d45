"""The Cantor group F = finite subsets of {1, 2, ...} under symmetric
difference, points of K = (Z/2Z)^N, and product measures on K.

Everything here is an immutable value. Radon-Nikodym derivatives are carried
in log space; exponentiate only at the boundary.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

# spawn-key tags keep the lazy-prefix stream disjoint from Monte Carlo chunk streams
PREFIX_STREAM = 0
MC_STREAM = 1
RATIO_STREAM = 2

_BLOCK = 64


@dataclass(frozen=True, order=False)
class GroupElement:
    """Element f of F, stored as its support N_f (1-based coordinates)."""

    support: frozenset[int] = frozenset()

    def __post_init__(self):
        if not isinstance(self.support, frozenset):
            object.__setattr__(self, "support", frozenset(self.support))
        for n in self.support:
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise ValueError(f"coordinates are positive integers, got {n!r}")

    @classmethod
    def of(cls, *coords: int) -> "GroupElement":
        return cls(frozenset(coords))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls()

    @classmethod
    def parse(cls, text: str | Iterable[int]) -> "GroupElement":
        """Parse ``"{1,4,9}"`` (or a plain list of ints) into an element.

        Repeated coordinates cancel, as they would under addition.
        """
        if not isinstance(text, str):
            coords = list(text)
        else:
            body = text.strip()
            if not (body.startswith("{") and body.endswith("}")):
                raise ValueError(f"group element must look like '{{1,4}}', got {text!r}")
            body = body[1:-1].strip()
            coords = [int(tok) for tok in body.split(",")] if body else []
        out = frozenset()
        for c in coords:
            out = out ^ {int(c)}
        return cls(out)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.support ^ other.support)

    __sub__ = __add__

    def __neg__(self) -> "GroupElement":
        return self

    def __bool__(self) -> bool:
        return bool(self.support)

    def __contains__(self, n: int) -> bool:
        return n in self.support

    @property
    def norm(self) -> int:
        return max(self.support, default=0)

    def sorted_support(self) -> tuple[int, ...]:
        return tuple(sorted(self.support))

    def sort_key(self):
        return (len(self.support), self.sorted_support())

    def to_mask(self) -> int:
        m = 0
        for n in self.support:
            m |= 1 << (n - 1)
        return m

    @classmethod
    def from_mask(cls, mask: int) -> "GroupElement":
        coords = []
        n = 1
        while mask:
            if mask & 1:
                coords.append(n)
            mask >>= 1
            n += 1
        return cls(frozenset(coords))

    def restrict(self, coords: tuple[int, ...]) -> "GroupElement":
        """Keep coordinates in ``coords`` and relabel ``coords[k]`` to ``k + 1``."""
        pos = {m: k + 1 for k, m in enumerate(coords)}
        return GroupElement(frozenset(pos[n] for n in self.support if n in pos))

    def __str__(self) -> str:
        return "{" + ",".join(str(n) for n in self.sorted_support()) + "}"

    def __repr__(self) -> str:
        return f"GroupElement({self})"


def norm(f: GroupElement) -> int:
    """‖f‖ = largest flipped coordinate; 0 for the identity."""
    return f.norm


# --------------------------------------------------------------------------
# product measures


@dataclass(frozen=True)
class Deformation:
    n0: int
    theta: float

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")
        if not (0.0 < self.theta <= 1.0):
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")


FAMILIES = ("zero", "constant", "power", "periodic")


@dataclass(frozen=True)
class ProductMeasureSpec:
    """ν = ⊗ν_n on K with ν_n(0) = 1/(1+e^{ε_n}), ν_n(1) = e^{ε_n}/(1+e^{ε_n}).

    ε_n comes from a closed-form family:

    * ``zero``: ε_n = 0 (Haar measure)
    * ``constant``: ε_n = epsilon
    * ``power``: ε_n = c * n**(-a)
    * ``periodic``: ε_n = values[(n - 1) % len(values)]

    ``overrides`` replaces finitely many coordinates by explicit pairs
    (ν_n(0), ν_n(1)); ``deformation`` marks ν_{n0} -> θν_{n0} + (1-θ)δ_1,
    applied after overrides.
    """

    family: str = "zero"
    epsilon: float = 0.0
    c: float = 0.0
    a: float = 0.0
    values: tuple[float, ...] = ()
    overrides: tuple[tuple[int, tuple[float, float]], ...] = ()
    deformation: Deformation | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "periodic" and not self.values:
            raise ValueError("periodic family needs at least one value")
        if isinstance(self.overrides, Mapping):
            object.__setattr__(self, "overrides", tuple(sorted(self.overrides.items())))
        clean = []
        for n, (p0, p1) in self.overrides:
            p0, p1 = float(p0), float(p1)
            if n < 1:
                raise ValueError("override coordinates are >= 1")
            if p0 <= 0 or p1 <= 0 or abs(p0 + p1 - 1.0) > 1e-12:
                raise ValueError(f"override at {n} must be a strictly positive probability pair")
            clean.append((int(n), (p0, p1)))
        ns = [n for n, _ in clean]
        if len(set(ns)) != len(ns):
            raise ValueError("duplicate override coordinate")
        object.__setattr__(self, "overrides", tuple(sorted(clean)))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def zero(cls) -> "ProductMeasureSpec":
        return cls("zero")

    @classmethod
    def constant(cls, epsilon: float) -> "ProductMeasureSpec":
        return cls("constant", epsilon=float(epsilon))

    @classmethod
    def power(cls, c: float, a: float) -> "ProductMeasureSpec":
        return cls("power", c=float(c), a=float(a))

    @classmethod
    def periodic(cls, values: Iterable[float]) -> "ProductMeasureSpec":
        return cls("periodic", values=tuple(values))

    @property
    def override_map(self) -> dict[int, tuple[float, float]]:
        return dict(self.overrides)

    def family_epsilon(self, n: int) -> float:
        """ε_n from the closed form, ignoring overrides and deformation."""
        if n < 1:
            raise ValueError("coordinates are 1-based")
        if self.family == "zero":
            return 0.0
        if self.family == "constant":
            return self.epsilon
        if self.family == "power":
            return self.c * n ** (-self.a)
        return self.values[(n - 1) % len(self.values)]

    def with_overrides(self, overrides: Mapping[int, tuple[float, float]]) -> "ProductMeasureSpec":
        merged = self.override_map
        merged.update(overrides)
        return ProductMeasureSpec(self.family, self.epsilon, self.c, self.a, self.values,
                                  tuple(sorted(merged.items())), self.deformation)

    def undeformed(self) -> "ProductMeasureSpec":
        return ProductMeasureSpec(self.family, self.epsilon, self.c, self.a, self.values,
                                  self.overrides, None)

    def special_coordinates(self) -> set[int]:
        """Coordinates where the effective law differs from the family law."""
        out = {n for n, _ in self.overrides}
        if self.deformation is not None and self.deformation.theta != 1.0:
            out.add(self.deformation.n0)
        return out


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def _family_pair(eps: float) -> tuple[float, float]:
    if eps >= 0:
        z = math.exp(-eps)
        return z / (1.0 + z), 1.0 / (1.0 + z)
    z = math.exp(eps)
    return 1.0 / (1.0 + z), z / (1.0 + z)


@dataclass(frozen=True)
class Coordinate:
    """Effective law of one coordinate, in both linear and log form."""

    p0: float
    p1: float
    log_p0: float
    log_p1: float
    log_ratio: float  # log ν_n(1)/ν_n(0)
    jeffreys: float  # (ν_n(1) - ν_n(0)) log ν_n(1)/ν_n(0)


@functools.lru_cache(maxsize=1 << 16)
def coordinate(spec: ProductMeasureSpec, n: int) -> Coordinate:
    over = spec.override_map.get(n) if spec.overrides else None
    def_ = spec.deformation
    deformed = def_ is not None and def_.n0 == n and def_.theta != 1.0
    if over is None and not deformed:
        eps = spec.family_epsilon(n)
        p0, p1 = _family_pair(eps)
        sp = _softplus(eps)
        return Coordinate(p0, p1, -sp, eps - sp, eps, jeffreys_weight(eps))
    if over is not None:
        p0, p1 = over
        lp0, lp1 = math.log(p0), math.log(p1)
    else:
        eps = spec.family_epsilon(n)
        p0, p1 = _family_pair(eps)
        lp0, lp1 = -_softplus(eps), eps - _softplus(eps)
    if deformed:
        theta = def_.theta
        q0 = theta * p0
        lp0 = math.log(theta) + lp0
        lp1 = math.log1p(-q0)
        p0, p1 = q0, 1.0 - q0
    return Coordinate(p0, p1, lp0, lp1, lp1 - lp0, phi(p0))


def coordinate_distribution(spec: ProductMeasureSpec, n: int) -> tuple[float, float]:
    """Effective (ν_n(0), ν_n(1)) after overrides and deformation."""
    if n < 1:
        raise ValueError("coordinates are 1-based")
    c = coordinate(spec, n)
    return c.p0, c.p1


def phi(t: float) -> float:
    """(1 - 2t) log((1 - t)/t) on (0, 1)."""
    if not (0.0 < t < 1.0):
        raise ValueError(f"phi is defined on (0, 1), got {t!r}")
    return (1.0 - 2.0 * t) * (math.log1p(-t) - math.log(t))


def jeffreys_weight(eps: float) -> float:
    """(ν(1) - ν(0)) log(ν(1)/ν(0)) for the two-point law with parameter eps.

    Equals eps * tanh(eps / 2) and phi(1 / (1 + e^eps)).
    """
    return eps * math.tanh(eps / 2.0)


# --------------------------------------------------------------------------
# points of K


def substream(seed: int, tag: int, index: int) -> np.random.Generator:
    """Counter-based child stream: depends only on (seed, tag, index)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


@functools.lru_cache(maxsize=8192)
def _prefix_block(seed: int, block: int) -> np.ndarray:
    u = substream(seed, PREFIX_STREAM, block).random(_BLOCK)
    u.setflags(write=False)
    return u


class PointPrefix:
    """Finitely many revealed coordinates of a point y in K.

    A prefix produced by :func:`sample_prefix` remembers its stream: asking
    for an unrevealed coordinate draws it deterministically from the seed,
    so the same seed always describes the same point.
    """

    __slots__ = ("_coords", "_spec", "_seed")

    def __init__(self, coords: Mapping[int, int] | Iterable[int] = (), *,
                 spec: ProductMeasureSpec | None = None, seed: int | None = None):
        if isinstance(coords, Mapping):
            d = {int(n): int(b) for n, b in coords.items()}
        else:
            d = {k + 1: int(b) for k, b in enumerate(coords)}
        if any(b not in (0, 1) for b in d.values()) or any(n < 1 for n in d):
            raise ValueError("coordinates are 1-based bits")
        self._coords = d
        self._spec = spec
        self._seed = seed

    @property
    def coords(self) -> dict[int, int]:
        return dict(self._coords)

    @property
    def lazy(self) -> bool:
        return self._spec is not None

    def __getitem__(self, n: int) -> int:
        b = self._coords.get(n)
        if b is not None:
            return b
        if self._spec is None:
            raise KeyError(f"coordinate {n} not revealed")
        u = _prefix_block(self._seed, (n - 1) // _BLOCK)[(n - 1) % _BLOCK]
        b = int(u < coordinate(self._spec, n).p1)
        self._coords[n] = b
        return b

    def reveals(self, coords: Iterable[int]) -> bool:
        return self._spec is not None or all(n in self._coords for n in coords)

    def flip(self, f: GroupElement) -> "PointPrefix":
        """S_f y: flip the coordinates in N_f."""
        d = dict(self._coords)
        for n in f.support:
            d[n] = 1 - self[n]
        return PointPrefix(d, spec=self._spec, seed=self._seed)

    def bits(self, depth: int) -> tuple[int, ...]:
        return tuple(self[n] for n in range(1, depth + 1))

    def __eq__(self, other):
        if not isinstance(other, PointPrefix):
            return NotImplemented
        return self._coords == other._coords

    def __hash__(self):
        return hash(tuple(sorted(self._coords.items())))

    def __repr__(self):
        items = ",".join(f"{n}:{b}" for n, b in sorted(self._coords.items()))
        return f"PointPrefix({{{items}}})"


def sample_prefix(spec: ProductMeasureSpec, depth: int, seed: int) -> PointPrefix:
    """y ~ ν with coordinates 1..depth revealed; more reveal on demand."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    y = PointPrefix(spec=spec, seed=seed)
    for n in range(1, depth + 1):
        y[n]
    return y


def sample_bits(spec: ProductMeasureSpec, coords: list[int], size: int,
                rng: np.random.Generator) -> np.ndarray:
    """``size`` independent draws of (y_n) for n in ``coords``; shape (size, len(coords))."""
    p1 = np.array([coordinate(spec, n).p1 for n in coords], dtype=float)
    u = rng.random((size, len(coords)))
    return (u < p1).astype(np.int8)


# --------------------------------------------------------------------------
# Radon-Nikodym derivatives


def log_rn_terms(f: GroupElement, y: PointPrefix, spec: ProductMeasureSpec) -> list[float]:
    """Per-coordinate terms log ν_n(y_n ⊕ 1) - log ν_n(y_n), n in N_f (sorted)."""
    out = []
    for n in f.sorted_support():
        lr = coordinate(spec, n).log_ratio
        out.append(lr if y[n] == 0 else -lr)
    return out


def rn_derivative(f: GroupElement, y: PointPrefix, spec: ProductMeasureSpec,
                  log: bool = False) -> float:
    """dν∘S_f/dν at y = ∏_{n in N_f} ν_n(y_n ⊕ 1)/ν_n(y_n)."""
    s = math.fsum(log_rn_terms(f, y, spec))
    return s if log else math.exp(s)
