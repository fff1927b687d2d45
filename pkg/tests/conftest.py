import math
from fractions import Fraction as Fr

import pytest

from kentropy import (BaseSystem, CocycleSpec, GroupElement, GroupSpec, KappaMeasure,
                      ProductMeasureSpec, Scenario, deform)

G = GroupElement.of
LN2 = math.log(2)


def odometer(atoms, nu, name=""):
    return Scenario(GroupSpec.direct_sum(), KappaMeasure(tuple(atoms)), BaseSystem.haar_odometer(),
                    CocycleSpec.canonical_odometer(), nu, name=name)


def single():
    return odometer([(G(1), Fr(1))], ProductMeasureSpec.constant(LN2), "single")


def two_coord():
    return odometer([(G(1), Fr(1, 2)), (G(1, 2), Fr(1, 2))], ProductMeasureSpec.constant(LN2),
                    "two-coord")


def mixed():
    return odometer([(G(1), Fr(1, 5)), (G(2, 3), Fr(3, 10)), (G(1, 3), Fr(1, 2))],
                    ProductMeasureSpec.constant(0.5), "mixed")


def power():
    return odometer([(G(1), Fr(1, 3)), (G(2, 5), Fr(1, 3)), (G(3, 4, 7), Fr(1, 3))],
                    ProductMeasureSpec.power(0.8, 0.5), "power")


def deformed():
    s = single()
    return s.with_nu(deform(s.nu, 1, 0.3))


def cycle2(nu=None):
    """FiniteCycle(2), w(0) = {1}, w(1) = {2}, κ = {+1: 1/2, +2: 1/2}."""
    return Scenario(GroupSpec.integers(), KappaMeasure(((1, Fr(1, 2)), (2, Fr(1, 2)))),
                    BaseSystem.finite_cycle(2), CocycleSpec.generator_table([G(1), G(2)]),
                    nu or ProductMeasureSpec.constant(LN2), name="cycle2")


def cycle3():
    nu = ProductMeasureSpec.power(0.7, 0.5).with_overrides({2: (0.25, 0.75)})
    return Scenario(GroupSpec.integers(),
                    KappaMeasure(((1, Fr(1, 2)), (-1, Fr(1, 4)), (2, Fr(1, 4)))),
                    BaseSystem.finite_cycle(3),
                    CocycleSpec.generator_table([G(1), G(2, 3), G()]), nu, name="cycle3")


MC_FIXTURES = {"single": single, "two-coord": two_coord, "mixed": mixed, "power": power,
               "deformed": deformed}
FINITE_FIXTURES = {"cycle2": cycle2, "cycle3": cycle3}


@pytest.fixture
def single_scenario():
    return single()
