"""Pipeline orchestration: problem file in, verification report out.

Stage order: hypotheses, shape, regulator, normalization, rationality,
maximal order, integral unit, Mazur-Tate element, augmentation congruences,
BSD units.  A hard upstream failure (inconsistent shape, degenerate
regulator, failed or inconclusive rationality) marks everything downstream
as blocked; hypothesis failures are reported but do not block, since the
data checks remain meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from . import criteria
from .characters import AbelianFieldSetup, MissingDataError
from .criteria import (
    BLOCKED,
    FAIL,
    PASS,
    SKIPPED,
    BsdFieldData,
    CheckResult,
    LeadingTermData,
    VerificationReport,
)
from .cyclotomic import BigComplex, decimal_to_fraction
from .groupring import Character, CyclicGroup, GroupRingElt
from .problem import ProblemFile, relabel_problem, twist_problem
from .regulator import (
    ExtensionMatrix,
    HeightTable,
    InvalidTransitionMatrixError,
    build_regulator,
    point_indices,
    regulator_minor,
)
from .shapes import (
    NotPermutationShapeError,
    PermutationShape,
    augmentation_height,
    deepest_nontrivial_level,
    ranks_from_shape,
    ranks_from_vanishing_orders,
    shape_from_ranks,
)

__all__ = ["VerifyConfig", "run_all", "CHECK_STAGES"]

# stages executed for each --check selection, in pipeline order
CHECK_STAGES = {
    "rat": ("hypotheses", "shape", "regulator", "rationality"),
    "max": ("hypotheses", "shape", "regulator", "rationality", "maximal_order"),
    "zpg": ("hypotheses", "shape", "regulator", "rationality", "maximal_order", "integral_unit"),
    "cor1": (
        "hypotheses",
        "shape",
        "regulator",
        "rationality",
        "maximal_order",
        "mazur_tate",
        "congruences",
    ),
    "bsd": ("hypotheses", "bsd"),
    "all": (
        "hypotheses",
        "shape",
        "regulator",
        "rationality",
        "maximal_order",
        "integral_unit",
        "mazur_tate",
        "congruences",
        "bsd",
    ),
}


@dataclass
class VerifyConfig:
    check: str = "all"
    tol: Optional[float] = None
    denom_bound: int = 10**6
    precision: int = 192
    relabel: int = 1  # generator / primitive-root relabeling exponent
    twist: int = 1  # simulated embedding twist

    def effective_tol(self, digits: int) -> float:
        if self.tol is not None:
            return self.tol
        # default: leave ten guard digits on the declared input precision
        return 10.0 ** (-(digits - 10))


def _big(re: str, im: str, precision: int) -> BigComplex:
    return BigComplex.from_decimals(re, im, precision)


def _setup_from_problem(pf: ProblemFile, group: CyclicGroup, precision: int) -> AbelianFieldSetup:
    supplied = None
    if pf.analytic.supplied_tau_star:
        supplied = {e.j: _big(e.re, e.im, precision) for e in pf.analytic.supplied_tau_star}
    if pf.header.q is not None:
        setup = AbelianFieldSetup.rational_cyclotomic(
            group, pf.header.q, pf.header.primitive_root, dimension=pf.curve.dimension
        )
        if supplied is not None:
            setup = AbelianFieldSetup(
                group=group,
                conductor=setup.conductor,
                primitive_root=setup.primitive_root,
                ramified=setup.ramified,
                dimension=pf.curve.dimension,
                supplied_tau_star=supplied,
            )
        return setup
    if supplied is None:
        raise MissingDataError("no conductor q given: modified Gauss sums must be supplied")
    return AbelianFieldSetup(
        group=group,
        conductor=None,
        primitive_root=None,
        ramified=(),
        dimension=pf.curve.dimension,
        supplied_tau_star=supplied,
    )


def run_all(pf: ProblemFile, config: VerifyConfig = VerifyConfig()) -> VerificationReport:
    if config.relabel != 1:
        pf = relabel_problem(pf, config.relabel)
    if config.twist != 1:
        pf = twist_problem(pf, config.twist)

    stages = CHECK_STAGES[config.check]
    group = CyclicGroup(pf.header.p, pf.header.n)
    precision = config.precision
    tol = config.effective_tol(pf.header.digits)
    report = VerificationReport()
    report.metadata = {
        "label": pf.curve.label,
        "p": str(pf.header.p),
        "n": str(pf.header.n),
        "q": str(pf.header.q) if pf.header.q is not None else "(none)",
        "labeling": (
            f"primitive root {pf.header.primitive_root} mod {pf.header.q} maps to the generator; "
            "character j sends the generator to zeta^j"
            if pf.header.q is not None
            else "abstract generator; character j sends the generator to zeta^j"
        ),
        "tolerance": f"{tol:.3e}",
        "denominator_bound": str(config.denom_bound),
        "precision_bits": str(precision),
    }
    if pf.header.provenance:
        report.metadata["provenance"] = pf.header.provenance

    blocked_reason: Optional[str] = None

    def blocked(name: str) -> CheckResult:
        return CheckResult(name, BLOCKED, {"reason": blocked_reason or "upstream failure"})

    # ----- hypotheses ---------------------------------------------------
    if "hypotheses" in stages:
        ram = [str(pf.header.q)] if pf.header.q is not None else []
        report.add(
            criteria.hypotheses_check(
                p=pf.header.p,
                torsion_order=pf.curve.torsion_order,
                dual_torsion_order=pf.curve.dual_torsion_order,
                tamagawa=pf.curve.tamagawa,
                bad_reduction=pf.curve.bad_reduction,
                ramified_places=ram,
                residue_counts=pf.curve.residue_counts,
                good_reduction_at_p=pf.curve.conductor % pf.header.p != 0,
                p_unramified=pf.header.q != pf.header.p,
                finiteness_asserted=pf.header.finiteness_asserted,
                intermediate_sha_asserted=pf.header.intermediate_sha_asserted,
            )
        )

    # ----- shape ---------------------------------------------------------
    shape: Optional[PermutationShape] = None
    if "shape" in stages:
        result = CheckResult("shape", PASS)
        try:
            declared_ranks = pf.arithmetic.ranks
            derived_ranks = None
            if pf.analytic.vanishing_orders is not None:
                derived_ranks = ranks_from_vanishing_orders(group, pf.analytic.vanishing_orders)
                result.details["ranks_from_vanishing_orders"] = str(derived_ranks)
            if pf.arithmetic.shape is not None:
                shape = PermutationShape(group, tuple(pf.arithmetic.shape))
                if declared_ranks is not None and tuple(declared_ranks) != ranks_from_shape(shape):
                    result.status = FAIL
                    result.details["witness"] = (
                        f"declared ranks {declared_ranks} disagree with shape ranks {ranks_from_shape(shape)}"
                    )
            else:
                ranks = declared_ranks if declared_ranks is not None else derived_ranks
                shape = shape_from_ranks(group, ranks)
            if declared_ranks is not None and derived_ranks is not None and tuple(declared_ranks) != derived_ranks:
                result.status = FAIL
                result.details["witness"] = (
                    f"ranks {declared_ranks} disagree with vanishing-order ranks {derived_ranks}"
                )
            if shape is not None:
                result.details["multiplicities"] = str(shape.multiplicities)
                result.details["ranks"] = str(ranks_from_shape(shape))
                result.details["h"] = str(augmentation_height(shape))
                t0 = deepest_nontrivial_level(shape)
                result.details["t0"] = str(t0) if t0 is not None else "(none: free module)"
        except NotPermutationShapeError as exc:
            result.status = FAIL
            result.details["witness"] = str(exc)
            result.details["level"] = str(exc.level)
            shape = None
        report.add(result)
        if result.status == FAIL and shape is None:
            blocked_reason = "shape solver rejected the rank data"

    # ----- regulator + normalized leading terms --------------------------
    ratios: Optional[dict[int, BigComplex]] = None
    if "regulator" in stages or "rationality" in stages:
        if pf.analytic.mode == "ratios":
            if "regulator" in stages:
                report.add(
                    CheckResult(
                        "regulator",
                        SKIPPED,
                        {"reason": "normalized ratios supplied directly; no height table needed"},
                    )
                )
            ratios = {e.j: _big(e.re, e.im, precision) for e in pf.analytic.ratios}
        elif blocked_reason is not None:
            report.add(blocked("regulator"))
        else:
            assert shape is not None
            result = CheckResult("regulator", PASS)
            try:
                table = HeightTable(
                    shape,
                    pf.arithmetic.heights_digits or pf.header.digits,
                    {
                        (e.row, e.tau, e.col): decimal_to_fraction(e.value)
                        for e in pf.arithmetic.heights
                    },
                )
                matrix = build_regulator(table, precision)
                result.details["size"] = str(matrix.size)
                result.details["component_deviation"] = mpmath.nstr(matrix.component_deviation(), 8)
                minors: dict[int, BigComplex] = {}
                degenerate = None
                for j in range(group.order):
                    lam = regulator_minor(matrix, Character(group, j), shape)
                    minors[j] = lam
                    if lam.abs() < tol:
                        degenerate = j
                if degenerate is not None:
                    result.status = FAIL
                    result.details["witness"] = (
                        f"regulator degenerate: minor at character {degenerate} below tolerance"
                    )
                    blocked_reason = "regulator degenerate"
                else:
                    setup = _setup_from_problem(pf, group, precision)
                    data = LeadingTermData(
                        leading={e.j: _big(e.re, e.im, precision) for e in pf.analytic.leading_terms},
                        orders=pf.analytic.vanishing_orders or {},
                        omega=_big(pf.analytic.omega, "0", precision),
                        truncated=pf.analytic.truncated,
                        ramified_residue_counts=dict(pf.curve.residue_counts),
                    )
                    terms = criteria.normalized_leading_terms(data, setup, precision)
                    ratios = {j: terms[j] / minors[j] for j in range(group.order)}
            except (ValueError, MissingDataError) as exc:
                result.status = FAIL
                result.details["witness"] = str(exc)
                blocked_reason = "regulator/normalization failed"
            report.add(result)

    # ----- transition matrix (shared by unit + congruence stages) --------
    transition: Optional[ExtensionMatrix] = None
    transition_error: Optional[str] = None
    if shape is not None and pf.arithmetic.transition:
        try:
            by_pos = {(e.row, e.col): e for e in pf.arithmetic.transition}
            idx = point_indices(shape)
            rows = []
            for r in idx:
                row = []
                for c in idx:
                    entry = by_pos.get((tuple(r), tuple(c)))
                    if entry is None:
                        raise InvalidTransitionMatrixError(f"missing transition entry at {(r, c)}")
                    row.append(GroupRingElt(group, [Fraction(x) for x in entry.coeffs]))
                rows.append(row)
            transition = ExtensionMatrix(shape, rows)
            for j in range(group.order):
                from .regulator import extension_minor

                extension_minor(transition, Character(group, j))
        except InvalidTransitionMatrixError as exc:
            transition = None
            transition_error = str(exc)

    # ----- rationality ----------------------------------------------------
    rationality = None
    if "rationality" in stages:
        if blocked_reason is not None or ratios is None:
            report.add(blocked("rationality"))
        else:
            rationality = criteria.rationality_check(
                group, ratios, tol, config.denom_bound, precision
            )
            report.add(rationality.as_result(tol))
            if rationality.status != PASS:
                blocked_reason = f"rationality {rationality.status}"

    recognized = rationality.recognized if rationality is not None and rationality.status == PASS else None

    # ----- maximal order ---------------------------------------------------
    max_result = None
    if "maximal_order" in stages:
        if recognized is None or shape is None:
            report.add(blocked("maximal_order"))
        else:
            max_result = criteria.max_order_check(recognized, shape)
            if not pf.header.sha_p_trivial:
                max_result.notes.append(
                    "p-primary Sha over the top field is flagged nontrivial; "
                    "this criterion assumes it vanishes and is reported for information"
                )
            report.add(max_result)

    # ----- integral unit ----------------------------------------------------
    unit_result = None
    if "integral_unit" in stages:
        if recognized is None or shape is None:
            report.add(blocked("integral_unit"))
        elif transition_error is not None:
            report.add(CheckResult("integral_unit", FAIL, {"witness": transition_error}))
        else:
            unit_result = criteria.integral_unit_check(recognized, shape, transition)
            if not pf.header.sha_p_trivial:
                unit_result.notes.append(
                    "p-primary Sha over the top field is flagged nontrivial; "
                    "this criterion assumes it vanishes and is reported for information"
                )
            report.add(unit_result)

    # ----- Mazur-Tate element + congruences ---------------------------------
    element = None
    if "mazur_tate" in stages:
        if recognized is None or shape is None:
            report.add(blocked("mazur_tate"))
        else:
            element = criteria.mazur_tate_element(recognized, shape)
            report.add(
                CheckResult(
                    "mazur_tate",
                    PASS,
                    {
                        "element": repr(element),
                        "support": "all characters" if shape.is_free() else "characters nontrivial on the deepest level",
                    },
                )
            )
    if "congruences" in stages:
        if element is None or shape is None or recognized is None:
            for name in ("containment", "transition_unit", "trivial_unit", "leading_congruence", "exact_order"):
                report.add(blocked(name))
        else:
            if transition_error is not None:
                report.add(CheckResult("transition_unit", FAIL, {"witness": transition_error}))
            trivial_ratio = recognized[0].as_rational()
            for res in criteria.augmentation_congruence_suite(
                element, shape, transition, trivial_ratio, pf.header.sha_p_trivial
            ):
                if transition_error is not None and res.name == "transition_unit":
                    continue
                report.add(res)

    # ----- BSD units ---------------------------------------------------------
    if "bsd" in stages:
        if not pf.analytic.bsd_fields:
            report.add(CheckResult("bsd_units", SKIPPED, {"reason": "no per-field data supplied"}))
        else:
            fields = [
                BsdFieldData(
                    label=e.label,
                    leading=_big(e.leading, "0", precision),
                    abs_discriminant=e.abs_discriminant,
                    height_determinant=_big(e.height_determinant, "0", precision),
                    period_product=_big(e.period_product, "0", precision),
                )
                for e in pf.analytic.bsd_fields
            ]
            report.add(
                criteria.bsd_unit_check(
                    fields, pf.header.p, pf.curve.dimension, tol, config.denom_bound, precision
                )
            )

    _assert_monotonicity(report)
    return report


def _assert_monotonicity(report: VerificationReport) -> None:
    # Z_p[G]-units sit inside the maximal order's units: a passing unit check
    # with a failing maximal-order or rationality check means a bug, not data.
    unit = report.get("integral_unit")
    maxr = report.get("maximal_order")
    rat = report.get("rationality")
    cong = report.get("leading_congruence")
    if unit is not None and unit.status == PASS:
        if maxr is not None and maxr.status == FAIL:
            raise AssertionError("verdict monotonicity violated: unit pass with maximal-order fail")
        # the augmentation congruence is a consequence of the unit criterion
        if cong is not None and cong.status == FAIL:
            raise AssertionError("verdict monotonicity violated: unit pass with congruence fail")
    if maxr is not None and maxr.status == PASS:
        if rat is not None and rat.status == FAIL:
            raise AssertionError("verdict monotonicity violated: maximal-order pass with rationality fail")
