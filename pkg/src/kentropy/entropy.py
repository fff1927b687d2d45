"""Furstenberg entropy of skew products over measure-preserving bases.

Exact values come from the per-coordinate Jeffreys terms; the Monte Carlo
estimators evaluate the defining integral directly and exist to check them.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .actions import fiber_decomposition
from .cantor import (MC_STREAM, GroupElement, PointPrefix, ProductMeasureSpec, coordinate,
                     phi, rn_derivative, sample_bits, substream)
from .scenario import Scenario

CHUNK = 16384


@dataclass(frozen=True)
class EntropyBreakdown:
    base_term: float
    fiber_integral: float
    total: float
    per_coordinate: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def within(self, value: float, k: float = 4.0) -> bool:
        """|mean - value| <= k * stderr (exact match required when stderr is 0)."""
        return abs(self.mean - value) <= k * self.stderr


def coordinate_masses(xi: Mapping[GroupElement, float]) -> dict[int, float]:
    """n -> ξ({f : n in N_f})."""
    out: dict[int, float] = {}
    for f, w in xi.items():
        for n in f.support:
            out[n] = out.get(n, 0) + w
    return out


def exact_entropy(xi: Mapping[GroupElement, float], spec: ProductMeasureSpec) -> float:
    """h_ξ(S, ν) = Σ_f ξ(f) Σ_{n in N_f} (ν_n(1) - ν_n(0)) log(ν_n(1)/ν_n(0)).

    ``xi`` may be a sub-probability.
    """
    return math.fsum(float(w) * coordinate(spec, n).jeffreys
                     for f, w in xi.items() for n in f.support)


def exact_entropy_fubini(xi: Mapping[GroupElement, float], spec: ProductMeasureSpec) -> float:
    """Same quantity summed coordinate-first: Σ_n ξ(n in N_f) Φ(ν_n(0))."""
    return math.fsum(float(m) * phi(coordinate(spec, n).p0)
                     for n, m in sorted(coordinate_masses(xi).items()))


def skew_entropy(scenario: Scenario) -> EntropyBreakdown:
    """Addition formula: base term (0, the base preserves μ) plus ∫ h_{κ_x}(S, ν) dμ(x)."""
    parts = fiber_decomposition(scenario.cocycle, scenario.base, scenario.kappa)
    fiber = math.fsum(float(mu) * exact_entropy(kx, scenario.nu) for mu, kx in parts)
    per: dict[int, float] = {}
    for mu, kx in parts:
        for n, m in coordinate_masses(kx).items():
            per[n] = per.get(n, 0.0) + float(mu) * float(m)
    per = {n: per[n] * coordinate(scenario.nu, n).jeffreys for n in sorted(per)}
    base_term = 0.0
    return EntropyBreakdown(base_term, fiber, base_term + fiber, per)


def product_space_entropy(scenario: Scenario, max_coords: int = 18) -> float:
    """Brute force over X × {0,1}^U of -Σ_g κ(g) ∫ log d(μ×ν)∘T_g/d(μ×ν).

    U is the union of all cocycle supports; only usable when it is small.
    """
    parts = fiber_decomposition(scenario.cocycle, scenario.base, scenario.kappa)
    coords = sorted({n for _, kx in parts for f in kx for n in f.support})
    if len(coords) > max_coords:
        raise ValueError(f"{len(coords)} fiber coordinates is too many to enumerate")
    laws = [coordinate(scenario.nu, n) for n in coords]
    terms = []
    for bits in itertools.product((0, 1), repeat=len(coords)):
        y = PointPrefix(dict(zip(coords, bits)))
        log_nu_y = math.fsum(c.log_p1 if b else c.log_p0 for c, b in zip(laws, bits))
        nu_y = math.exp(log_nu_y)
        for mu, kx in parts:
            for f, w in kx.items():
                terms.append(-float(mu) * float(w) * nu_y * rn_derivative(f, y, scenario.nu, log=True))
    return math.fsum(terms)


# --------------------------------------------------------------------------
# Monte Carlo


class _Design:
    """Flattened (x, f) atoms of the skew action, as an incidence matrix on U."""

    def __init__(self, scenario: Scenario):
        parts = fiber_decomposition(scenario.cocycle, scenario.base, scenario.kappa)
        self.coords = sorted({n for _, kx in parts for f in kx for n in f.support})
        col = {n: j for j, n in enumerate(self.coords)}
        self.x_weight = np.array([float(mu) for mu, _ in parts])
        rows, self.atom_x, self.atom_w = [], [], []
        for i, (_, kx) in enumerate(parts):
            for f, w in kx.items():
                r = np.zeros(len(self.coords))
                for n in f.support:
                    r[col[n]] = 1.0
                rows.append(r)
                self.atom_x.append(i)
                self.atom_w.append(float(w))
        self.incidence = np.array(rows).reshape(len(rows), len(self.coords))
        self.atom_x = np.array(self.atom_x, dtype=int)
        self.atom_w = np.array(self.atom_w)
        self.log_ratio = np.array([coordinate(scenario.nu, n).log_ratio for n in self.coords])
        self.nu = scenario.nu

    def log_rn(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(size, atoms) array of log dν∘S_f/dν(y) for fresh y ~ ν."""
        y = sample_bits(self.nu, self.coords, size, rng)
        signed = (1.0 - 2.0 * y) * self.log_ratio
        return signed @ self.incidence.T

    def draw_x(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.x_weight), size=size, p=self.x_weight)


def _chunks(samples: int):
    return [(i, min(CHUNK, samples - i * CHUNK)) for i in range((samples + CHUNK - 1) // CHUNK)]


def _run_chunked(fn, samples: int, workers: int) -> np.ndarray:
    chunks = _chunks(samples)
    if workers <= 1:
        parts = [fn(i, n) for i, n in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: fn(*c), chunks))
    return np.concatenate(parts) if parts else np.zeros(0)


def _estimate(values: np.ndarray, seed: int) -> McEstimate:
    n = len(values)
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return McEstimate(mean, stderr, n, seed)


def mc_entropy(scenario: Scenario, samples: int, seed: int, workers: int = 1,
               full: bool = False) -> McEstimate:
    """Monte Carlo estimate of -Σ_g κ(g) ∫ log d(μ×ν)∘T_g(α)/d(μ×ν).

    By default the base is integrated exactly (finite X) and only the fiber
    point is sampled; ``full=True`` samples the base point as well. Chunks
    use counter-based substreams, so the result does not depend on
    ``workers``.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    d = _Design(scenario)

    def chunk(i: int, n: int) -> np.ndarray:
        rng = substream(seed, MC_STREAM, i)
        lr = d.log_rn(rng, n)
        if full:
            x = d.draw_x(rng, n)
            mask = d.atom_x[None, :] == x[:, None]
            return -(lr * mask) @ d.atom_w
        w = d.atom_w * d.x_weight[d.atom_x]
        return -(lr @ w)

    return _estimate(_run_chunked(chunk, samples, workers), seed)


def stationarity_defect(scenario: Scenario, samples: int, seed: int,
                        workers: int = 1) -> McEstimate:
    """Monte Carlo estimate of E|Σ_g κ(g) dν∘S_{α(g,x)}/dν(y) - 1|.

    Computed as |Σ κ(g)(rn_g - 1)|, so it is exactly 0 when every rn is 1.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = _Design(scenario)

    def chunk(i: int, n: int) -> np.ndarray:
        rng = substream(seed, MC_STREAM, i)
        excess = np.expm1(d.log_rn(rng, n)) * d.atom_w
        per_x = np.zeros((n, len(d.x_weight)))
        for j, xi in enumerate(d.atom_x):
            per_x[:, xi] += excess[:, j]
        return np.abs(per_x) @ d.x_weight

    return _estimate(_run_chunked(chunk, samples, workers), seed)
