"""Krieger type of the odometer action on (K, ν) for the closed-form families.

The rules are symbolic (read off the family), following the standard
Araki-Woods criteria for ITPFI_2 product measures:

* Σ ε_n² < ∞  -> ν is equivalent to Haar measure -> II_1
* ε_n ≡ ε ≠ 0 -> III_λ with λ = e^{-|ε|}
* ε_n -> 0, Σ ε_n² = ∞ -> III_1
* periodic ε with nonzero values v_i: III_λ when the |v_i| generate a
  lattice dZ (λ = e^{-d}), III_1 when they are rationally independent

Finite overrides and deformations are equivalent changes of measure and
never move the label. ``ratio_set_estimate`` is diagnostic only.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .cantor import RATIO_STREAM, ProductMeasureSpec, coordinate, sample_bits, substream

II_1 = "II_1"
III_LAMBDA = "III_lambda"
III_1 = "III_1"
III_0 = "III_0"
UNKNOWN = "Unknown"

LATTICE_TOL = 1e-9
LATTICE_MAX_DEN = 1000


@dataclass(frozen=True)
class KriegerType:
    label: str
    lam: float | None = None
    evidence: str = ""

    def __post_init__(self):
        if self.label not in (II_1, III_LAMBDA, III_1, III_0, UNKNOWN):
            raise ValueError(f"unknown Krieger label {self.label!r}")
        if (self.label == III_LAMBDA) != (self.lam is not None):
            raise ValueError("λ is recorded exactly for III_lambda")
        # λ lies in (0, 1); the float may round to an endpoint for extreme ε
        if self.lam is not None and not 0 <= self.lam <= 1:
            raise ValueError("λ must lie in [0, 1]")

    def __str__(self) -> str:
        if self.label == III_LAMBDA:
            return f"III_lambda({self.lam:.12g})"
        if self.label == UNKNOWN:
            return f"Unknown({self.evidence})"
        return self.label


@dataclass(frozen=True)
class SquareSum:
    converges: bool
    value: float | None = None
    rate: str | None = None


def _special_correction(spec: ProductMeasureSpec) -> float:
    return math.fsum(coordinate(spec, n).log_ratio ** 2 - spec.family_epsilon(n) ** 2
                     for n in sorted(spec.special_coordinates()))


def kakutani_square_sum(spec: ProductMeasureSpec) -> SquareSum:
    """Decide Σ ε_n² from the closed form.

    The verdict ignores overrides and deformation; a convergent value
    includes their (finitely many) corrections.
    """
    fam = spec.family
    if fam == "zero" or (fam == "constant" and spec.epsilon == 0) or \
            (fam == "power" and spec.c == 0) or (fam == "periodic" and not any(spec.values)):
        return SquareSum(True, _special_correction(spec))
    if fam == "constant":
        return SquareSum(False, rate=f"linear: {spec.epsilon ** 2:.12g}*n")
    if fam == "periodic":
        ms = math.fsum(v * v for v in spec.values) / len(spec.values)
        return SquareSum(False, rate=f"linear: {ms:.12g}*n")
    c2, a = spec.c ** 2, spec.a
    if a > 0.5:
        return SquareSum(True, c2 * float(zeta(2 * a, 1)) + _special_correction(spec))
    if a == 0.5:
        return SquareSum(False, rate=f"logarithmic: {c2:.12g}*log(n)")
    if a > 0:
        return SquareSum(False, rate=f"power: {c2 / (1 - 2 * a):.12g}*n^{1 - 2 * a:.12g}")
    return SquareSum(False, rate=f"power: terms do not vanish (a = {a:g})")


def lattice_generator(values: Sequence[float], tol: float = LATTICE_TOL,
                      max_den: int = LATTICE_MAX_DEN) -> tuple[float | None, float]:
    """Generator d of the smallest lattice dZ containing ``values``.

    Each value is compared with the smallest nonzero |value| by a
    continued-fraction approximation (denominator <= ``max_den``). Returns
    (d, max residual), or (None, inf) if some ratio is not rational at
    ``tol``. All-zero input gives (0.0, 0.0).
    """
    vals = np.asarray([v for v in values if abs(v) > tol], dtype=float)
    if vals.size == 0:
        return 0.0, 0.0
    ref = float(np.min(np.abs(vals)))
    fracs = []
    for v in np.unique(np.abs(vals)):
        ratio = float(v) / ref
        q = Fraction(ratio).limit_denominator(max_den)
        if abs(ratio - float(q)) > tol * max(1.0, abs(ratio)):
            return None, math.inf
        fracs.append(q)
    den = 1
    for q in fracs:
        den = den * q.denominator // math.gcd(den, q.denominator)
    num = 0
    for q in fracs:
        num = math.gcd(num, q.numerator * (den // q.denominator))
    d = ref * num / den
    resid = float(np.max(np.abs(vals - np.round(vals / d) * d)))
    return d, resid


def classify_family(spec: ProductMeasureSpec) -> KriegerType:
    fam = spec.family
    if fam == "zero":
        return KriegerType(II_1, evidence="Haar measure is invariant")
    if fam == "constant" or (fam == "power" and spec.a == 0):
        eps = spec.epsilon if fam == "constant" else spec.c
        if eps == 0:
            return KriegerType(II_1, evidence="Haar measure is invariant")
        return KriegerType(III_LAMBDA, math.exp(-abs(eps)),
                           evidence=f"constant ratio parameter {eps:.12g}: ratio set is the lattice e^(Z*{abs(eps):.12g})")
    if fam == "power":
        if spec.c == 0:
            return KriegerType(II_1, evidence="Haar measure is invariant")
        if spec.a > 0.5:
            return KriegerType(II_1, evidence="sum of squared ratio parameters converges: equivalent to Haar (Kakutani)")
        if spec.a > 0:
            return KriegerType(III_1, evidence="ratio parameters vanish with divergent square sum")
        return KriegerType(UNKNOWN, evidence="ratio parameters do not tend to 0; no implemented rule applies")
    nonzero = [abs(v) for v in spec.values if v != 0]
    if not nonzero:
        return KriegerType(II_1, evidence="Haar measure is invariant")
    d, _ = lattice_generator(nonzero)
    if d is None:
        return KriegerType(III_1, evidence="periodic ratio parameters are rationally independent: ratio set is dense")
    return KriegerType(III_LAMBDA, math.exp(-d),
                       evidence=f"periodic ratio parameters generate the lattice {d:.12g}*Z")


@dataclass
class RatioSetEstimate:
    values: np.ndarray  # sorted distinct log-ratios
    multiplicities: np.ndarray
    lattice: float | None
    residual: float
    depth: int
    samples: int
    seed: int

    def max_gap(self, lo: float = -1.0, hi: float = 1.0) -> float:
        """Largest gap between consecutive distinct values in [lo, hi], endpoints included."""
        inside = self.values[(self.values >= lo) & (self.values <= hi)]
        pts = np.concatenate([[lo], inside, [hi]])
        return float(np.max(np.diff(pts)))


CHUNK = 4096
MERGE_TOL = 1e-10


def _distinct(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.sort(raw)
    if s.size == 0:
        return s, np.zeros(0, dtype=int)
    breaks = np.flatnonzero(np.diff(s) > MERGE_TOL) + 1
    starts = np.concatenate([[0], breaks])
    counts = np.diff(np.concatenate([starts, [s.size]]))
    return s[starts], counts


def ratio_set_estimate(spec: ProductMeasureSpec, depth: int, samples: int, seed: int,
                       workers: int = 1) -> RatioSetEstimate:
    """Sample (f, y) with N_f a uniform random subset of [1, depth] and
    y ~ ν; record log dν∘S_f/dν(y)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    coords = list(range(1, depth + 1))
    lr = np.array([coordinate(spec, n).log_ratio for n in coords])

    def chunk(i: int, n: int) -> np.ndarray:
        rng = substream(seed, RATIO_STREAM, i)
        f = rng.random((n, depth)) < 0.5
        y = sample_bits(spec, coords, n, rng)
        return np.where(f, (1.0 - 2.0 * y) * lr, 0.0).sum(axis=1)

    jobs = [(i, min(CHUNK, samples - i * CHUNK)) for i in range((samples + CHUNK - 1) // CHUNK)]
    if workers <= 1:
        parts = [chunk(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: chunk(*j), jobs))
    raw = np.concatenate(parts) if parts else np.zeros(0)
    values, mult = _distinct(raw)
    lattice, resid = lattice_generator(values)
    return RatioSetEstimate(values, mult, lattice, resid, depth, samples, seed)
