"""The verdict engine: normalized leading terms and the conjecture-level checks.

Checks are pure functions from ingested data to structured outcomes.  The
chain, in dependency order:

1. rationality: the per-character ratios (leading term / regulator minor)
   must come from a single element of Q[G]; recognition is a numeric inverse
   DFT followed by rational rounding, and acceptance is a residual test.
2. maximal order: the valuation of each recognized value at the prime above p
   must equal the shape-predicted valuation.
3. integral unit: after dividing by the filtration and transition minors, the
   recognized values must assemble into a unit of Z_p[G].
4. Mazur-Tate element and its augmentation-ideal congruences: containment in
   I^h, the unit conditions, the congruence modulo I^(h+1), and the exact
   order question (gated by the Sha flag).
5. BSD p-unit tests over intermediate fields, when per-field data is present.

Every fail carries a witness and every pass carries its residual margin; an
"inconclusive" verdict separates under-precision data from refutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import mpmath

from .characters import AbelianFieldSetup, MissingDataError, archimedean_constant, tau_star
from .cyclotomic import (
    DEFAULT_PRECISION,
    BigComplex,
    CycNum,
    _vp,
    mpf_to_fraction,
    valuation_above_p,
)
from .groupring import (
    Character,
    CyclicGroup,
    GroupRingElt,
    NonIntegralError,
    char_eval,
    exact_inverse_dft,
    inverse_dft,
    is_zp_unit,
)
from .regulator import ExtensionMatrix, filtration_minor
from .shapes import (
    PermutationShape,
    augmentation_height,
    deepest_nontrivial_level,
    predicted_valuation,
)

__all__ = [
    "PASS",
    "FAIL",
    "INCONCLUSIVE",
    "WARNING",
    "SKIPPED",
    "BLOCKED",
    "CheckResult",
    "VerificationReport",
    "LeadingTermData",
    "BsdFieldData",
    "normalized_leading_terms",
    "RationalityOutcome",
    "rationality_check",
    "max_order_check",
    "integral_unit_check",
    "mazur_tate_element",
    "augmentation_congruence_suite",
    "bsd_unit_check",
    "hypotheses_check",
]

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
WARNING = "warning"
SKIPPED = "skipped"
BLOCKED = "blocked"


@dataclass
class CheckResult:
    name: str
    status: str
    details: dict[str, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


@dataclass
class VerificationReport:
    metadata: dict[str, str] = field(default_factory=dict)
    results: list[CheckResult] = field(default_factory=list)

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        return result

    def get(self, name: str) -> Optional[CheckResult]:
        for r in self.results:
            if r.name == name:
                return r
        return None

    def has_status(self, status: str) -> bool:
        return any(r.status == status for r in self.results)


def _fmt(x) -> str:
    if isinstance(x, BigComplex):
        return f"{mpmath.nstr(x.re, 24)} + {mpmath.nstr(x.im, 24)}i"
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 12)
    return str(x)


# ---------------------------------------------------------------------------
# Normalized leading terms.
# ---------------------------------------------------------------------------


@dataclass
class LeadingTermData:
    """Per-character analytic inputs.

    ``leading[j]`` is the leading Taylor coefficient at s = 1 of the L-series
    of A twisted by the contragredient of chi_j, truncated at the ramified
    places when ``truncated`` is set; ``orders[j]`` the order of vanishing.
    """

    leading: dict[int, BigComplex]
    orders: dict[int, int]
    omega: BigComplex
    truncated: bool = True
    ramified_residue_counts: Optional[dict[str, int]] = None

    def euler_correction(self, setup: AbelianFieldSetup) -> Fraction:
        """Factor converting a plain leading term at the trivial character to
        the ramified-truncated one (d = 1, good reduction at ramified places)."""
        if self.truncated:
            return Fraction(1)
        if setup.dimension != 1:
            raise MissingDataError("Euler-factor conversion only implemented for dimension 1")
        if self.ramified_residue_counts is None:
            raise MissingDataError("plain leading terms need residue point counts at ramified places")
        out = Fraction(1)
        for place in setup.ramified:
            count = self.ramified_residue_counts.get(place.label)
            if count is None:
                raise MissingDataError(f"no residue point count for ramified place {place.label}")
            out *= Fraction(count, int(place.label))
        return out


def normalized_leading_terms(
    data: LeadingTermData,
    setup: AbelianFieldSetup,
    precision: int = DEFAULT_PRECISION,
) -> dict[int, BigComplex]:
    """L*(A, contragredient chi, 1) * tau*(chi)^d / (Omega * w^d) per character.

    With ``truncated`` unset the trivial-character term is converted by the
    removed Euler factors first; nontrivial characters are ramified at every
    ramified place in the supported setups, so only the trivial term moves.
    """
    group = setup.group
    d = setup.dimension
    w = archimedean_constant(setup, precision)
    out: dict[int, BigComplex] = {}
    for j in range(group.order):
        chi = Character(group, j)
        lead = data.leading[j]
        if lead.abs() == 0:
            raise ValueError(f"leading term at character {j} is zero")
        if j == 0 and not data.truncated:
            corr = data.euler_correction(setup)
            lead = lead * corr
        if j != 0 and not data.truncated:
            for place in setup.ramified:
                if chi.is_trivial_on_level(place.inertia_level):
                    raise MissingDataError(
                        "Euler-factor conversion for characters unramified at a ramified place "
                        "is not supported; supply truncated leading terms"
                    )
        ts = tau_star(chi, setup, precision)
        value = lead * (ts.numeric**d if d != 1 else ts.numeric)
        out[j] = value / (data.omega * (w**d if d != 1 else w))
    return out


# ---------------------------------------------------------------------------
# Rationality.
# ---------------------------------------------------------------------------


@dataclass
class RationalityOutcome:
    status: str
    element: GroupRingElt
    recognized: dict[int, CycNum]
    residual: mpmath.mpf
    per_character: dict[int, mpmath.mpf]

    def as_result(self, tol: float) -> CheckResult:
        details = {
            "residual": _fmt(self.residual),
            "tolerance": f"{tol:.3e}",
        }
        for j in sorted(self.recognized):
            details[f"recognized[{j}]"] = repr(self.recognized[j])
        return CheckResult("rationality", self.status, details)


def rationality_check(
    group: CyclicGroup,
    ratios: Mapping[int, BigComplex],
    tol: float,
    denom_bound: int = 10**6,
    precision: int = DEFAULT_PRECISION,
) -> RationalityOutcome:
    """Recognize the ratio vector as one element of Q[G].

    A single rational-coefficient element interpolating all characters is
    exactly the conjunction of per-character rationality and Galois
    equivariance across each orbit, so recognition and acceptance happen
    orbit-averaged in one inverse DFT.  Residuals in [tol, sqrt(tol)) yield
    an inconclusive verdict instead of a refutation.
    """
    rec = inverse_dft(group, dict(ratios), denom_bound=denom_bound, precision=precision)
    recognized = {j: char_eval(rec.element, Character(group, j)) for j in range(group.order)}
    if rec.residual < tol:
        status = PASS
    elif rec.residual < math.sqrt(tol):
        status = INCONCLUSIVE
    else:
        status = FAIL
    return RationalityOutcome(status, rec.element, recognized, rec.residual, rec.per_character)


# ---------------------------------------------------------------------------
# Maximal order.
# ---------------------------------------------------------------------------


def max_order_check(recognized: Mapping[int, CycNum], shape: PermutationShape) -> CheckResult:
    """Valuation of each recognized value must equal the predicted one."""
    group = shape.group
    details: dict[str, str] = {}
    mismatches = []
    for j in sorted(recognized):
        chi = Character(group, j)
        v = valuation_above_p(recognized[j], group.p)
        b = predicted_valuation(shape, chi)
        details[f"chi[{j}]"] = f"valuation {v}, predicted {b}"
        if v != b:
            mismatches.append((j, v, b))
    if mismatches:
        j, v, b = mismatches[0]
        details["witness"] = f"character {j}: valuation {v} != predicted {b}"
        return CheckResult("maximal_order", FAIL, details)
    return CheckResult("maximal_order", PASS, details)


# ---------------------------------------------------------------------------
# Z_p[G]-unit criterion.
# ---------------------------------------------------------------------------


def integral_unit_check(
    recognized: Mapping[int, CycNum],
    shape: PermutationShape,
    transition: Optional[ExtensionMatrix],
) -> CheckResult:
    """Divide by the filtration and transition minors and test for a unit.

    The quotient vector is Galois-equivariant whenever the inputs are, so the
    exact inverse DFT lands in Q[G]; the unit test is then local at p.
    """
    group = shape.group
    from .regulator import extension_minor  # local import avoids cycle at module load

    if transition is None:
        if shape.is_free():
            transition = ExtensionMatrix.identity(shape)
        else:
            return CheckResult(
                "integral_unit",
                SKIPPED,
                {"reason": "no transition matrix supplied and the point module is not free"},
            )
    quotient: dict[int, CycNum] = {}
    for j in sorted(recognized):
        chi = Character(group, j)
        eps = extension_minor(transition, chi)
        delta = filtration_minor(shape, chi)
        value = recognized[j]
        # all conductors are p-powers dividing p^n, so the largest dominates
        m = max(eps.m, delta.m, value.m)
        quotient[j] = value.lift(m) * (eps.lift(m) * delta.lift(m)).inverse()
    element = exact_inverse_dft(group, quotient)
    verdict = is_zp_unit(element)
    details = {"element": repr(element)}
    for k, v in verdict.witness.items():
        details[str(k)] = str(v)
    return CheckResult("integral_unit", PASS if verdict.ok else FAIL, details)


# ---------------------------------------------------------------------------
# Mazur-Tate element and augmentation congruences.
# ---------------------------------------------------------------------------


def mazur_tate_element(recognized: Mapping[int, CycNum], shape: PermutationShape) -> GroupRingElt:
    """Interpolate the recognized ratios into the group ring.

    When the point module is free (ranks are maximal over the tower) every
    character contributes; otherwise only the characters nontrivial on the
    deepest nontrivial subgroup level do, and the rest interpolate zero.
    """
    group = shape.group
    if shape.is_free():
        values = {j: recognized[j] for j in range(group.order)}
    else:
        t0 = deepest_nontrivial_level(shape)
        assert t0 is not None
        values = {}
        for j in range(group.order):
            chi = Character(group, j)
            values[j] = recognized[j] if chi.level > t0 else CycNum.zero()
    return exact_inverse_dft(group, values)


def augmentation_congruence_suite(
    element: GroupRingElt,
    shape: PermutationShape,
    transition: Optional[ExtensionMatrix],
    trivial_ratio: Fraction,
    sha_p_trivial: bool,
) -> list[CheckResult]:
    """The four congruence-level verdicts plus the exact-order question."""
    from .groupring import ideal_power_membership

    group = shape.group
    p = group.p
    h = augmentation_height(shape)
    results: list[CheckResult] = []

    if transition is None and shape.is_free():
        transition = ExtensionMatrix.identity(shape)

    # (i) containment in I^h
    try:
        member = ideal_power_membership(element, h)
        results.append(
            CheckResult(
                "containment",
                PASS if member else FAIL,
                {"h": str(h), "element": repr(element), "contained": str(member)},
            )
        )
    except NonIntegralError:
        results.append(
            CheckResult(
                "containment",
                FAIL,
                {
                    "h": str(h),
                    "element": repr(element),
                    "witness": "element has a coefficient that is not p-integral",
                },
            )
        )
        member = False

    # (ii) augmentation determinant of the transition matrix
    if transition is not None:
        eps = transition.augmentation_determinant()
        v_eps = _vp(eps, p)
        results.append(
            CheckResult(
                "transition_unit",
                PASS if v_eps == 0 else FAIL,
                {"determinant": str(eps), "valuation": str(v_eps)},
            )
        )
    else:
        eps = None
        results.append(
            CheckResult("transition_unit", SKIPPED, {"reason": "no transition matrix supplied"})
        )

    # (iii) trivial-character unit
    v_triv = _vp(trivial_ratio, p)
    results.append(
        CheckResult(
            "trivial_unit",
            PASS if v_triv == 0 else FAIL,
            {"value": str(trivial_ratio), "valuation": str(v_triv)},
        )
    )

    # (iv) congruence mod I^(h+1)
    if eps is None:
        results.append(
            CheckResult("leading_congruence", SKIPPED, {"reason": "transition determinant unavailable"})
        )
    else:
        lead = GroupRingElt.one(group)
        for t in range(group.n):
            if shape[t]:
                lead = lead * GroupRingElt.sigma_power_minus_one(group, t) ** shape[t]
        target = (trivial_ratio / eps) * lead
        diff = element - target
        try:
            cong = ideal_power_membership(diff, h + 1)
            results.append(
                CheckResult(
                    "leading_congruence",
                    PASS if cong else FAIL,
                    {"h_plus_one": str(h + 1), "difference": repr(diff)},
                )
            )
        except NonIntegralError:
            results.append(
                CheckResult(
                    "leading_congruence",
                    FAIL,
                    {"h_plus_one": str(h + 1), "witness": "difference is not p-integral"},
                )
            )

    # exact order: element should not drop into I^(h+1) unless Sha is nontrivial
    try:
        deeper = ideal_power_membership(element, h + 1)
        if sha_p_trivial:
            results.append(
                CheckResult(
                    "exact_order",
                    PASS if not deeper else FAIL,
                    {"h": str(h), "in_next_power": str(deeper)},
                )
            )
        else:
            res = CheckResult(
                "exact_order",
                WARNING,
                {"h": str(h), "in_next_power": str(deeper)},
            )
            res.notes.append(
                "p-primary Sha over the top field is flagged nontrivial: "
                "the exact-order prediction is not asserted"
            )
            results.append(res)
    except NonIntegralError:
        res = CheckResult("exact_order", WARNING if not sha_p_trivial else FAIL,
                          {"witness": "element is not p-integral"})
        if not sha_p_trivial:
            res.notes.append(
                "p-primary Sha over the top field is flagged nontrivial: "
                "the exact-order prediction is not asserted"
            )
        results.append(res)

    return results


# ---------------------------------------------------------------------------
# BSD p-unit tests over intermediate fields.
# ---------------------------------------------------------------------------


@dataclass
class BsdFieldData:
    """Classical BSD quotient inputs over one intermediate field."""

    label: str
    leading: BigComplex
    abs_discriminant: int
    height_determinant: BigComplex
    period_product: BigComplex


def bsd_unit_check(
    fields: Sequence[BsdFieldData],
    p: int,
    dimension: int,
    tol: float,
    denom_bound: int = 10**6,
    precision: int = DEFAULT_PRECISION,
) -> CheckResult:
    """p-adic unit test of the BSD quotient for each supplied field."""
    details: dict[str, str] = {}
    status = PASS
    for data in fields:
        with mpmath.workprec(precision + 16):
            root = mpmath.sqrt(mpmath.mpf(data.abs_discriminant)) ** dimension
            quotient = (
                data.leading.to_mpc() * root / (data.height_determinant.to_mpc() * data.period_product.to_mpc())
            )
            if abs(quotient.imag) > math.sqrt(tol):
                details[data.label] = f"quotient not real: {_fmt(BigComplex.from_mpc(quotient, precision))}"
                status = FAIL
                continue
            recognized = mpf_to_fraction(quotient.real).limit_denominator(denom_bound)
            residual = abs(quotient.real - mpmath.mpf(recognized.numerator) / recognized.denominator)
        if residual >= math.sqrt(tol):
            details[data.label] = f"unrecognizable quotient, residual {_fmt(residual)}"
            status = FAIL
            continue
        if residual >= tol:
            details[data.label] = f"residual {_fmt(residual)} between tol and sqrt(tol)"
            if status == PASS:
                status = INCONCLUSIVE
            continue
        v = _vp(recognized, p)
        details[data.label] = f"quotient {recognized}, valuation {v}, residual {_fmt(residual)}"
        if v != 0:
            status = FAIL
            details[f"witness[{data.label}]"] = f"quotient {recognized} has p-valuation {v}"
    return CheckResult("bsd_units", status, details)


# ---------------------------------------------------------------------------
# Hypotheses checklist.
# ---------------------------------------------------------------------------


def hypotheses_check(
    *,
    p: int,
    torsion_order: int,
    dual_torsion_order: int,
    tamagawa: Mapping[str, int],
    bad_reduction: Sequence[int],
    ramified_places: Sequence[str],
    residue_counts: Mapping[str, int],
    good_reduction_at_p: bool,
    p_unramified: bool,
    finiteness_asserted: bool,
    intermediate_sha_asserted: bool,
) -> CheckResult:
    """The (a)-(f) checklist plus the two user-asserted flags."""
    details: dict[str, str] = {}
    failures = []

    ok = torsion_order % p != 0 and dual_torsion_order % p != 0
    details["(a) torsion prime to p"] = f"{'pass' if ok else 'fail'} (|tor| = {torsion_order}, |dual tor| = {dual_torsion_order})"
    if not ok:
        failures.append("a")

    tam = 1
    for v in tamagawa.values():
        tam *= v
    ok = tam % p != 0
    details["(b) Tamagawa numbers prime to p"] = f"{'pass' if ok else 'fail'} (product = {tam})"
    if not ok:
        failures.append("b")

    details["(c) good reduction at p-adic places"] = "pass" if good_reduction_at_p else "fail"
    if not good_reduction_at_p:
        failures.append("c")

    details["(d) p unramified in F/Q"] = "pass" if p_unramified else "fail"
    if not p_unramified:
        failures.append("d")

    overlap = sorted(set(str(v) for v in bad_reduction) & set(str(v) for v in ramified_places))
    ok = not overlap
    details["(e) bad and ramified places disjoint"] = "pass" if ok else f"fail (overlap {overlap})"
    if not ok:
        failures.append("e")

    prod = 1
    for v in ramified_places:
        prod *= residue_counts[str(v)]
    ok = prod % p != 0
    details["(f) residue points prime to p"] = f"{'pass' if ok else 'fail'} (product = {prod})"
    if not ok:
        failures.append("f")

    details["(g) Sha finiteness"] = "asserted" if finiteness_asserted else "not asserted"
    details["(h) intermediate Sha vanishing"] = "asserted" if intermediate_sha_asserted else "not asserted"

    if failures:
        details["witness"] = f"hypotheses {failures} fail"
        return CheckResult("hypotheses", FAIL, details)
    result = CheckResult("hypotheses", PASS, details)
    if not (finiteness_asserted and intermediate_sha_asserted):
        result.status = INCONCLUSIVE
        result.notes.append("user-asserted hypotheses are missing; verdicts are conditional")
    return result
