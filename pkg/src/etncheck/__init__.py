"""etncheck: desk-scale verification of equivariant BSD / Tamagawa criteria.

Exact cyclotomic and group-ring arithmetic, Gauss sums, regulator minors and
the conjecture-level verdict engine for cyclic extensions of odd prime-power
degree, driven by ingested height and L-value data.
"""

from .characters import AbelianFieldSetup, GaussSumValue, gauss_sum, tau_star, unramified_factor
from .criteria import (
    CheckResult,
    VerificationReport,
    augmentation_congruence_suite,
    bsd_unit_check,
    hypotheses_check,
    integral_unit_check,
    max_order_check,
    mazur_tate_element,
    normalized_leading_terms,
    rationality_check,
)
from .cyclotomic import BigComplex, CycNum, embed, valuation_above_p
from .groupring import (
    Character,
    CyclicGroup,
    GroupRingElt,
    char_eval,
    exact_inverse_dft,
    ideal_power_membership,
    inverse_dft,
    is_zp_unit,
)
from .problem import ProblemFile, fetch_metadata, load_problem, serialize_problem
from .regulator import (
    ExtensionMatrix,
    HeightTable,
    RegulatorMatrix,
    build_regulator,
    extension_minor,
    filtration_minor,
    regulator_minor,
)
from .runner import VerifyConfig, run_all
from .shapes import (
    PermutationShape,
    augmentation_height,
    deepest_nontrivial_level,
    predicted_valuation,
    ranks_from_shape,
    shape_from_ranks,
)

__version__ = "0.1.0"
