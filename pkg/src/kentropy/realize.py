"""θ-deformation of one fiber coordinate, the target-entropy solver, and the
slow-growth budget construction for small-entropy scenarios."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .actions import (CONSTANT, DIRECT_SUM, BaseSystem, CocycleSpec, GroupSpec, KappaMeasure,
                      fiber_decomposition)
from .cantor import Deformation, GroupElement, ProductMeasureSpec, coordinate
from .entropy import skew_entropy
from .errors import Infeasible, NoMass, Unreachable
from .scenario import Scenario

DEFAULT_TOL = 1e-9
MAX_ITER = 200
MAX_HALVINGS = 100_000
LOG2 = math.log(2.0)


def deform(spec: ProductMeasureSpec, n0: int, theta: float) -> ProductMeasureSpec:
    """Mark ν_{n0} -> θν_{n0} + (1-θ)δ_1, so the new ν_{n0}(0) is θ·ν_{n0}(0)."""
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    if spec.deformation is not None:
        raise ValueError(f"spec is already deformed at n0={spec.deformation.n0}")
    return dataclasses.replace(spec, deformation=Deformation(int(n0), float(theta)))


def kappa_bar(scenario: Scenario, n0: int) -> float:
    """∫ κ_x({f : n0 in N_f}) dμ(x)."""
    parts = fiber_decomposition(scenario.cocycle, scenario.base, scenario.kappa)
    total = sum((mu * w for mu, kx in parts for f, w in kx.items() if n0 in f), Fraction(0))
    return float(total)


def _phi_log(log_t: float) -> float:
    """Φ(t) from log t; stays finite when t underflows."""
    t = math.exp(log_t)
    return (1.0 - 2.0 * t) * (math.log1p(-t) - log_t)


def _undeformed(scenario: Scenario) -> ProductMeasureSpec:
    if scenario.nu.deformation is not None:
        raise ValueError("scenario measure is already deformed; start from the undeformed measure")
    return scenario.nu


def entropy_shift(scenario: Scenario, n0: int, theta: float) -> float:
    """h(ν) - h(ν^θ) = κ̄(n0)·(Φ(p) - Φ(θp)), p = ν_{n0}(0). Negative: entropy rises."""
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    nu = _undeformed(scenario)
    kb = kappa_bar(scenario, n0)
    if kb == 0 or theta == 1.0:
        return 0.0
    c = coordinate(nu, n0)
    return kb * (_phi_log(c.log_p0) - _phi_log(math.log(theta) + c.log_p0))


@dataclass(frozen=True)
class RealizationResult:
    theta_star: float
    achieved_entropy: float
    iterations: int
    bracket_width: float
    base_entropy: float = math.nan
    kappa_bar: float = math.nan
    log_theta_star: float = 0.0


class EntropyCurve:
    """θ -> h(θ) = h(1) + κ̄·(Φ(θp) - Φ(p)) for a deformation at n0."""

    def __init__(self, scenario: Scenario, n0: int):
        nu = _undeformed(scenario)
        self.n0 = n0
        self.kbar = kappa_bar(scenario, n0)
        self.h1 = skew_entropy(scenario).total
        c = coordinate(nu, n0)
        self.p = c.p0
        self._log_p = c.log_p0
        self._phi_p = _phi_log(c.log_p0)

    def at_log(self, log_theta: float) -> float:
        if log_theta == 0.0:
            return self.h1
        return self.h1 + self.kbar * (_phi_log(log_theta + self._log_p) - self._phi_p)

    def __call__(self, theta: float) -> float:
        if not (0.0 < theta <= 1.0):
            raise ValueError(f"theta must lie in (0, 1], got {theta}")
        return self.at_log(math.log(theta))

    @property
    def log_theta_top(self) -> float:
        """Largest θ from which the curve decreases monotonically toward θ = 0.

        1 when p <= 1/2; otherwise the θ < 1 with Φ(θp) = Φ(p), i.e. θp = 1 - p.
        """
        if self.p <= 0.5:
            return 0.0
        return math.log1p(-self.p) - self._log_p


def realize_target(scenario: Scenario, n0: int, target: float, tol: float = DEFAULT_TOL,
                   max_iter: int = MAX_ITER) -> RealizationResult:
    """Find θ* in (0, 1] with |h(θ*) - target| <= tol.

    Geometric bracketing (halve θ until h(θ) >= target), then bisection; both
    run on log θ so very large targets do not underflow.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    curve = EntropyCurve(scenario, n0)
    if curve.kbar == 0:
        raise NoMass(f"no κ_x mass on elements flipping coordinate {n0}")
    h1 = curve.h1
    if abs(target - h1) <= tol:
        return RealizationResult(1.0, h1, 0, 0.0, h1, curve.kbar, 0.0)
    if target < h1:
        raise Unreachable(f"target {target!r} is below h(1) = {h1!r}; "
                          "the deformation only raises entropy")

    hi = curve.log_theta_top  # h(hi) == h1 < target
    lo = hi - LOG2
    iterations = 0
    while curve.at_log(lo) < target:
        iterations += 1
        if iterations > MAX_HALVINGS:
            raise RuntimeError("bracketing did not reach the target")
        hi, lo = lo, lo - LOG2
    # stop at tol/2 so an independent re-evaluation still lands within tol
    stop = 0.5 * tol
    steps = 0
    while True:
        iterations += 1
        steps += 1
        mid = 0.5 * (lo + hi)
        h = curve.at_log(mid)
        if abs(h - target) <= stop:
            theta = math.exp(mid)
            if theta == 0.0:
                raise ValueError(f"theta* = exp({mid!r}) underflows double precision")
            return RealizationResult(theta, h, iterations, math.exp(hi) - math.exp(lo),
                                     h1, curve.kbar, mid)
        if steps >= max_iter or mid in (lo, hi):
            raise RuntimeError(f"bisection stalled at |h - t| = {abs(h - target):.3g} > tol")
        if h > target:
            lo = mid
        else:
            hi = mid


# --------------------------------------------------------------------------
# budget sequences


@dataclass(frozen=True)
class BudgetSequences:
    """Nondecreasing l with unit steps: ``prefix`` on the support of κ, then
    l_n = l_K + (n - K) beyond it (κ vanishes there, so growth is free)."""

    prefix: tuple[int, ...]
    weights: tuple
    budget: Fraction | float
    kappa_weighted_sum: Fraction | float

    def l(self, n: int) -> int:
        if n < 1:
            raise ValueError("1-based index")
        k = len(self.prefix)
        return self.prefix[n - 1] if n <= k else self.prefix[-1] + (n - k)

    def sequence(self, length: int) -> list[int]:
        return [self.l(n) for n in range(1, length + 1)]

    def rows(self):
        """(n, κ(g_n), l_n, partial weighted sum) over the support."""
        acc = Fraction(0) if all(isinstance(w, (Fraction, int)) for w in self.weights) else 0.0
        for n, (w, ln) in enumerate(zip(self.weights, self.prefix), start=1):
            acc = acc + w * (ln + 1)
            yield n, w, ln, acc


def budget_weighted_sum(weights: Sequence, ls: Sequence[int]):
    """Σ κ(g_n)(l_n + 1) over the given terms."""
    exact = all(isinstance(w, (Fraction, int)) for w in weights)
    if exact:
        return sum((w * (l + 1) for w, l in zip(weights, ls)), Fraction(0))
    return math.fsum(float(w) * (l + 1) for w, l in zip(weights, ls))


def build_budget(kappa: KappaMeasure, budget=2) -> BudgetSequences:
    """Greedy slow growth from l_1 = 0: step up only while the cheapest
    completion (holding l flat over the remaining κ-mass) stays under budget."""
    weights = kappa.weights
    exact = all(isinstance(w, (Fraction, int)) for w in weights)
    B = Fraction(str(budget)) if exact and not isinstance(budget, Fraction) else budget
    total_mass = kappa.total_mass()
    # any admissible l has l_n >= 0, so the weighted sum is at least the mass
    if not total_mass < B:
        raise Infeasible(f"Σκ(g_n)(l_n+1) >= Σκ = {total_mass} >= budget {budget}")
    tails = [0] * len(weights)
    acc = Fraction(0) if exact else 0.0
    for i in range(len(weights) - 1, -1, -1):
        tails[i] = acc
        acc = acc + weights[i]
    ls = [0]
    spent = weights[0] * 1
    for i in range(1, len(weights)):
        up = ls[-1] + 1
        if spent + (weights[i] + tails[i]) * (up + 1) < B:
            ls.append(up)
        else:
            ls.append(ls[-1])
        spent = spent + weights[i] * (ls[-1] + 1)
    total = budget_weighted_sum(weights, ls)
    if not total < B:
        raise Infeasible(f"greedy sequence overshoots: {total} >= budget {budget}")
    return BudgetSequences(tuple(ls), tuple(weights), B, total)


# --------------------------------------------------------------------------
# small-entropy construction

III_1 = "III_1"
III_LAMBDA = "III_lambda"


def _independent(elems) -> bool:
    basis: dict[int, int] = {}
    for g in elems:
        m = g.to_mask()
        while m:
            top = m.bit_length() - 1
            if top not in basis:
                basis[top] = m
                break
            m ^= basis[top]
        if m == 0:
            return False
    return True


def build_small_entropy_scenario(kappa: KappaMeasure, eps: float, type_flag: str,
                                 budget=2) -> Scenario:
    """Odometer scenario with skew entropy in (0, budget·eps).

    The atom g_n gets the constant label {l_n + 1}, so ∫‖α(g_n)‖ = l_n + 1.
    κ is kept when it already sits on F with linearly independent atoms;
    otherwise its weights are carried over, in enumeration order, to the
    free generators {1}, {2}, ... (only the weights and labels enter the
    entropy).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if type_flag == III_1:
        nu = ProductMeasureSpec.power(eps, 0.5)
    elif type_flag == III_LAMBDA:
        nu = ProductMeasureSpec.constant(eps)
    else:
        raise ValueError(f"type_flag must be {III_1!r} or {III_LAMBDA!r}")
    seq = build_budget(kappa, budget)
    atoms = kappa.atoms
    on_f = all(isinstance(g, GroupElement) for g, _ in atoms)
    transported = not (on_f and _independent(g for g, _ in atoms))
    if transported:
        atoms = tuple((GroupElement.of(n), w) for n, (_, w) in enumerate(atoms, start=1))
    labels = tuple((g, GroupElement.of(seq.l(n) + 1)) for n, (g, _) in enumerate(atoms, start=1))
    desc = f"small-entropy construction: eps={eps!r}, type={type_flag}, budget={budget}"
    if transported:
        desc += "; kappa transported to free generators {n}"
    return Scenario(GroupSpec.direct_sum(), KappaMeasure(atoms), BaseSystem.haar_odometer(),
                    CocycleSpec(CONSTANT, labels=labels), nu,
                    name=f"construct-{type_flag}-{eps!r}", description=desc)
