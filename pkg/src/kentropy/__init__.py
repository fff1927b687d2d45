"""Furstenberg entropy for nonsingular odometer skew products."""
from .actions import (BaseSystem, CocycleSpec, GroupSpec, KappaMeasure, check_generating,
                      evaluate_cocycle, norm_budget_report, project_cocycle, pushforward_kappa)
from .cantor import (GroupElement, PointPrefix, ProductMeasureSpec, coordinate_distribution,
                     jeffreys_weight, norm, phi, rn_derivative, sample_prefix)
from .classify import (KriegerType, classify_family, kakutani_square_sum, lattice_generator,
                       ratio_set_estimate)
from .entropy import (EntropyBreakdown, McEstimate, exact_entropy, exact_entropy_fubini,
                      mc_entropy, product_space_entropy, skew_entropy, stationarity_defect)
from .errors import Infeasible, NoMass, ScenarioError, Unreachable, UnreachableElement
from .realize import (BudgetSequences, RealizationResult, build_budget,
                      build_small_entropy_scenario, deform, entropy_shift, kappa_bar,
                      realize_target)
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"
