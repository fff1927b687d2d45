import math
from fractions import Fraction as Fr

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LN2, cycle2, odometer, single
from kentropy.actions import CocycleSpec, KappaMeasure, norm_budget_report
from kentropy.cantor import GroupElement, ProductMeasureSpec, coordinate_distribution
from kentropy.classify import classify_family
from kentropy.entropy import skew_entropy
from kentropy.errors import Infeasible, NoMass, Unreachable
from kentropy.realize import (III_1, III_LAMBDA, EntropyCurve, budget_weighted_sum, build_budget,
                              build_small_entropy_scenario, deform, entropy_shift, kappa_bar,
                              realize_target)

G = GroupElement.of
E = GroupElement()

# θ* solving Φ(θ/3) = t on the single-coordinate fixture, from the 40-digit
# bisection below; frozen so the solver is checked against fixed numbers.
THETA_ORACLE = {
    0.5: 0.78135236532506841541,
    1.0: 0.5281226564555958756,
    2.0: 0.24966516059855295235,
    5.0: 0.018848565470933157716,
}


def mp_theta(t):
    mp.mp.dps = 40
    phi = lambda s: (1 - 2 * s) * mp.log((1 - s) / s)
    a, b = mp.mpf("1e-30"), mp.mpf(1)
    for _ in range(200):
        m = (a + b) / 2
        if phi(m / 3) > t:
            a = m
        else:
            b = m
    return float((a + b) / 2)


@pytest.mark.parametrize("t", sorted(THETA_ORACLE))
def test_oracle_table(t):
    assert mp_theta(t) == pytest.approx(THETA_ORACLE[t], abs=1e-15)


class TestDeform:
    def test_identity_deformation(self):
        nu = ProductMeasureSpec.constant(LN2)
        d = deform(nu, 1, 1.0)
        assert all(coordinate_distribution(d, n) == coordinate_distribution(nu, n) for n in range(1, 6))

    def test_values(self):
        d = deform(ProductMeasureSpec.constant(LN2), 2, 0.3)
        assert coordinate_distribution(d, 2) == pytest.approx((0.1, 0.9), abs=1e-15)
        assert coordinate_distribution(d, 1) == coordinate_distribution(ProductMeasureSpec.constant(LN2), 1)

    @pytest.mark.parametrize("theta", [0.0, -0.5, 1.01])
    def test_theta_range(self, theta):
        with pytest.raises(ValueError):
            deform(ProductMeasureSpec.zero(), 1, theta)

    def test_single_marker(self):
        with pytest.raises(ValueError):
            deform(deform(ProductMeasureSpec.zero(), 1, 0.5), 2, 0.5)


class TestKappaBar:
    def test_identity(self):
        s = cycle2()
        s = type(s)(s.group, s.kappa, s.base, CocycleSpec.identity(), s.nu)
        assert all(kappa_bar(s, n) == 0 for n in range(1, 5))

    def test_direct_count(self):
        s = odometer([(G(1), Fr(2, 5)), (G(1, 2), Fr(3, 10)), (G(2), Fr(3, 10))],
                     ProductMeasureSpec.constant(1.0))
        assert kappa_bar(s, 1) == pytest.approx(0.7, abs=1e-15)

    def test_cycle2(self):
        # κ_0 puts all mass on elements containing 1, κ_1 puts half
        assert kappa_bar(cycle2(), 1) == 0.75
        assert kappa_bar(cycle2(), 2) == 0.75


class TestShift:
    def test_trivial_cases(self):
        assert entropy_shift(single(), 1, 1.0) == 0.0
        assert entropy_shift(single(), 5, 0.2) == 0.0

    def test_value(self):
        assert entropy_shift(single(), 1, 0.3) == pytest.approx(-1.5267306016823270698, abs=1e-13)

    @settings(max_examples=60)
    @given(st.dictionaries(st.frozensets(st.integers(1, 6), min_size=1, max_size=3).map(GroupElement),
                           st.integers(1, 20), min_size=1, max_size=5),
           st.floats(-2.5, 2.5), st.integers(1, 6), st.floats(1e-6, 1.0))
    def test_matches_exact_difference(self, raw, eps, n0, theta):
        total = sum(raw.values())
        s = odometer([(f, Fr(w, total)) for f, w in raw.items()], ProductMeasureSpec.constant(eps))
        shifted = s.with_nu(deform(s.nu, n0, theta))
        diff = skew_entropy(s).total - skew_entropy(shifted).total
        assert abs(entropy_shift(s, n0, theta) - diff) <= 1e-12

    def test_curve_strictly_decreasing(self):
        for s in (single(), cycle2()):
            curve = EntropyCurve(s, 1)
            vals = [curve(k / 100) for k in range(1, 101)]
            assert all(a > b for a, b in zip(vals, vals[1:]))


class TestRealize:
    def test_at_base_entropy(self):
        s = single()
        r = realize_target(s, 1, skew_entropy(s).total)
        assert r.theta_star == 1.0 and r.achieved_entropy == skew_entropy(s).total

    @pytest.mark.parametrize("t", sorted(THETA_ORACLE))
    def test_against_oracle(self, t):
        r = realize_target(single(), 1, t)
        assert abs(r.achieved_entropy - t) <= 1e-9
        assert r.theta_star == pytest.approx(THETA_ORACLE[t], abs=1e-6)

    def test_unreachable(self):
        s = single()
        with pytest.raises(Unreachable):
            realize_target(s, 1, skew_entropy(s).total - 0.1)

    def test_no_mass(self):
        with pytest.raises(NoMass):
            realize_target(single(), 3, 1.0)

    @pytest.mark.parametrize("t", [0.8, 3.0, 40.0])
    def test_end_to_end_finite_base(self, t):
        s = cycle2()
        r = realize_target(s, 2, t, tol=1e-10)
        h = skew_entropy(s.with_nu(deform(s.nu, 2, r.theta_star))).total
        assert abs(h - t) <= 1e-10

    def test_heavy_coordinate(self):
        # ε < 0 puts p = ν(0) above 1/2; the curve first dips, then climbs
        s = odometer([(G(1), Fr(1))], ProductMeasureSpec.constant(-1.2))
        h1 = skew_entropy(s).total
        for t in (h1 + 1e-3, h1 + 0.5, 4.0):
            r = realize_target(s, 1, t)
            h = skew_entropy(s.with_nu(deform(s.nu, 1, r.theta_star))).total
            assert abs(h - t) <= 1e-9

    def test_large_target(self):
        s = single()
        r = realize_target(s, 1, 300.0)
        assert 0 < r.theta_star < 1e-120
        assert abs(EntropyCurve(s, 1).at_log(r.log_theta_star) - 300.0) <= 1e-9
        with pytest.raises(ValueError, match="underflows"):
            realize_target(s, 1, 900.0)


class TestBudget:
    def test_geometric_example(self):
        ws = [Fr(1, 2 ** n) for n in range(1, 121)]
        ls = [(n - 1) // 2 for n in range(1, 121)]
        total = budget_weighted_sum(ws, ls)
        # closed form: Σ_k 3k 4^{-k} = 4/3, tail beyond 120 terms below 2^-100
        assert 0 <= Fr(4, 3) - total < Fr(1, 2 ** 100)

    def test_point_mass(self):
        b = build_budget(KappaMeasure.point_mass(7), 2)
        assert b.prefix == (0,) and b.kappa_weighted_sum == 1

    @pytest.mark.parametrize("B", [1, Fr(1, 2), 0.99])
    def test_infeasible(self, B):
        with pytest.raises(Infeasible):
            build_budget(KappaMeasure(((1, Fr(1, 2)), (2, Fr(1, 2)))), B)

    @given(st.lists(st.integers(1, 50), min_size=1, max_size=40),
           st.fractions(Fr(101, 100), Fr(5)))
    def test_structure(self, raw, B):
        total = sum(raw)
        k = KappaMeasure(tuple((i, Fr(w, total)) for i, w in enumerate(raw)))
        b = build_budget(k, B)
        seq = b.sequence(10_000)
        assert seq[0] == 0
        assert all(y - x in (0, 1) for x, y in zip(seq, seq[1:]))
        assert b.kappa_weighted_sum < B
        assert b.kappa_weighted_sum == budget_weighted_sum(k.weights, seq)
        assert b.l(10 ** 9) > b.l(10 ** 6)  # closed-form tail grows without bound


class TestSmallEntropy:
    @pytest.mark.parametrize("flag,label", [(III_1, "III_1"), (III_LAMBDA, "III_lambda(%.12g)" % math.exp(-0.01))])
    def test_eps_001(self, flag, label):
        k = KappaMeasure(tuple((G(n), Fr(1, 2 ** n)) for n in range(1, 12)) + ((G(12), Fr(1, 2 ** 11)),))
        s = build_small_entropy_scenario(k, 0.01, flag)
        h = skew_entropy(s).total
        assert 0 < h <= 0.02
        assert str(classify_family(s.nu)) == label
        b = build_budget(s.kappa)
        assert b.prefix[0] == 0 and b.kappa_weighted_sum < 2
        assert all(r.ok for r in norm_budget_report(s.cocycle, s.base, s.kappa, b.prefix))
        assert h <= 0.01 * b.kappa_weighted_sum

    def test_integer_kappa_is_transported(self):
        k = KappaMeasure(((1, Fr(1, 2)), (-1, Fr(1, 2))))
        s = build_small_entropy_scenario(k, 0.05, III_LAMBDA)
        assert s.kappa.enumeration == (G(1), G(2))
        assert 0 < skew_entropy(s).total <= 0.1

    def test_labels_never_trivial(self):
        s = build_small_entropy_scenario(KappaMeasure.point_mass(E), 0.2, III_1)
        assert skew_entropy(s).total > 0

    def test_same_type_after_deformation(self):
        s = build_small_entropy_scenario(KappaMeasure.point_mass(G(1)), 0.1, III_LAMBDA)
        r = realize_target(s, 1, 2.0)
        assert classify_family(deform(s.nu, 1, r.theta_star)) == classify_family(s.nu)
