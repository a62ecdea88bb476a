from dataclasses import replace
from fractions import Fraction

import pytest

from etncheck.criteria import BLOCKED, FAIL, PASS, SKIPPED, WARNING
from etncheck.groupring import CyclicGroup, GroupRingElt
from etncheck.problem import load_problem, relabel_problem, twist_problem
from etncheck.report import exit_code
from etncheck.runner import VerifyConfig, run_all


def _results(report):
    return {r.name: r for r in report.results}


def test_79a1_pipeline_all_green(fixtures_dir):
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    report = run_all(pf, VerifyConfig())
    res = _results(report)
    for name in (
        "hypotheses",
        "rationality",
        "maximal_order",
        "integral_unit",
        "mazur_tate",
        "containment",
        "transition_unit",
        "trivial_unit",
        "leading_congruence",
        "exact_order",
    ):
        assert res[name].status == PASS, name
    assert res["shape"].details["multiplicities"] == "(0, 1)"
    assert res["regulator"].status == SKIPPED  # ratio-mode input
    assert exit_code(report) == 0


def test_79a1_mazur_tate_value(fixtures_dir):
    # hand-derived interpolation of the published ratios:
    # (-51 + 65 s + 65 s^2 + 65 s^3 - 51 s^4 - 51 s^5 - 51 s^6)/116
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    report = run_all(pf, VerifyConfig())
    expected = GroupRingElt(
        CyclicGroup(7, 1),
        [Fraction(c, 116) for c in (-51, 65, 65, 65, -51, -51, -51)],
    )
    assert _results(report)["mazur_tate"].details["element"] == repr(expected)


def test_389a1_pipeline_honest_outcome(fixtures_dir):
    # recognition, valuations and the Sha-gated exact order behave as
    # published; the containment check fails because the published ratio
    # vector and the published interpolation element are inconsistent
    # (see the decisions ledger)
    pf = load_problem(fixtures_dir / "389a1_q37_p9.toml")
    report = run_all(pf, VerifyConfig())
    res = _results(report)
    assert res["hypotheses"].status == PASS
    assert res["shape"].details["multiplicities"] == "(2, 0, 0)"
    assert res["shape"].details["h"] == "2"
    assert res["rationality"].status == PASS
    assert res["rationality"].details["recognized[0]"] == "-46/37"
    assert res["maximal_order"].status == PASS
    assert res["integral_unit"].status == SKIPPED  # no transition matrix, not free
    assert res["containment"].status == FAIL
    assert res["exact_order"].status == WARNING
    assert any("Sha" in n for n in res["exact_order"].notes)
    assert exit_code(report) == 1


def test_synthetic_full_pipeline(fixtures_dir):
    pf = load_problem(fixtures_dir / "synthetic_m110_p3.toml")
    report = run_all(pf, VerifyConfig())
    res = _results(report)
    assert all(
        res[name].status == PASS
        for name in (
            "hypotheses",
            "shape",
            "regulator",
            "rationality",
            "maximal_order",
            "integral_unit",
            "mazur_tate",
            "containment",
            "transition_unit",
            "trivial_unit",
            "leading_congruence",
            "exact_order",
            "bsd_units",
        )
    )
    assert res["mazur_tate"].details["element"] == "1 + -1*s + -1*s^3 + 1*s^4"
    assert exit_code(report) == 0


def test_inconsistent_ranks_block_downstream(fixtures_dir):
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    pf = replace(pf, arithmetic=replace(pf.arithmetic, ranks=(1, 2)))
    # vanishing orders disagree too; drop them to isolate the shape failure
    pf = replace(pf, analytic=replace(pf.analytic, vanishing_orders=None))
    report = run_all(pf, VerifyConfig())
    res = _results(report)
    assert res["shape"].status == FAIL
    assert res["shape"].details["level"] == "1"
    assert res["rationality"].status == BLOCKED
    assert res["containment"].status == BLOCKED
    assert exit_code(report) == 1


def test_rank_vs_vanishing_order_discrepancy(fixtures_dir):
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    orders = dict(pf.analytic.vanishing_orders)
    orders[3] = 2  # breaks r_1 = 8 != 7
    pf = replace(pf, analytic=replace(pf.analytic, vanishing_orders=orders))
    report = run_all(pf, VerifyConfig())
    assert _results(report)["shape"].status == FAIL


def test_degenerate_regulator_blocks(fixtures_dir):
    pf = load_problem(fixtures_dir / "synthetic_m110_p3.toml")
    zeroed = tuple(
        replace(e, value="0.0") if e.row == (0, 1) else e for e in pf.arithmetic.heights
    )
    pf = replace(pf, arithmetic=replace(pf.arithmetic, heights=zeroed))
    report = run_all(pf, VerifyConfig())
    res = _results(report)
    assert res["regulator"].status == FAIL
    assert "degenerate" in res["regulator"].details["witness"]
    assert res["rationality"].status == BLOCKED


def test_failed_rationality_blocks_downstream(fixtures_dir):
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    ratios = tuple(
        replace(e, re="0.33") if e.j == 2 else e for e in pf.analytic.ratios
    )
    pf = replace(pf, analytic=replace(pf.analytic, ratios=ratios))
    report = run_all(pf, VerifyConfig())
    res = _results(report)
    assert res["rationality"].status == FAIL
    assert res["maximal_order"].status == BLOCKED
    assert res["integral_unit"].status == BLOCKED
    assert exit_code(report) == 1


def test_check_selection_limits_stages(fixtures_dir):
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    report = run_all(pf, VerifyConfig(check="rat"))
    names = [r.name for r in report.results]
    assert names == ["hypotheses", "shape", "regulator", "rationality"]
    report = run_all(pf, VerifyConfig(check="bsd"))
    names = [r.name for r in report.results]
    assert names == ["hypotheses", "bsd_units"]
    assert _results(report)["bsd_units"].status == SKIPPED


def test_relabel_and_twist_preserve_verdicts(fixtures_dir):
    for name, relabels, twists in (
        ("79a1_q29_p7.toml", (3, 5), (2, 3)),
        ("389a1_q37_p9.toml", (5, 7), (2, 4)),
    ):
        pf = load_problem(fixtures_dir / name)
        base = [(r.name, r.status) for r in run_all(pf, VerifyConfig()).results]
        for c in relabels:
            got = [(r.name, r.status) for r in run_all(pf, VerifyConfig(relabel=c)).results]
            assert got == base, (name, "relabel", c)
        for s in twists:
            got = [(r.name, r.status) for r in run_all(pf, VerifyConfig(twist=s)).results]
            assert got == base, (name, "twist", s)


def test_relabel_full_mode_safe_exponent(fixtures_dir):
    # exponents = 1 mod p^n exercise the independent discrete-log path while
    # keeping the filtration-minor normalization fixed
    pf = load_problem(fixtures_dir / "synthetic_m110_p3.toml")
    base = [(r.name, r.status) for r in run_all(pf, VerifyConfig()).results]
    got = [(r.name, r.status) for r in run_all(pf, VerifyConfig(relabel=19)).results]
    assert got == base


def test_twist_rejected_outside_ratio_mode(fixtures_dir):
    pf = load_problem(fixtures_dir / "synthetic_m110_p3.toml")
    with pytest.raises(ValueError, match="ratio-mode"):
        twist_problem(pf, 2)


def test_relabel_requires_valid_exponent(fixtures_dir):
    pf = load_problem(fixtures_dir / "79a1_q29_p7.toml")
    with pytest.raises(ValueError):
        relabel_problem(pf, 7)  # not prime to p
    with pytest.raises(ValueError):
        relabel_problem(pf, 2)  # 2 does not preserve primitive roots mod 29 (gcd(2,28) > 1)


def test_389a1_recognition_from_six_digit_data(fixtures_dir):
    # the published table prints only six decimals; recognition still lands
    # on the same exact vector once the denominator bound is matched to the
    # data precision (bound * true denominator must stay below 10^digits,
    # otherwise continued-fraction rounding legitimately chases the noise)
    pf = load_problem(fixtures_dir / "389a1_q37_p9.toml")
    truncated = tuple(
        replace(e, re=e.re[: e.re.index(".") + 7], im=e.im if e.im == "0" else e.im[: e.im.index(".") + 7])
        for e in pf.analytic.ratios
    )
    pf = replace(pf, analytic=replace(pf.analytic, ratios=truncated))
    report = run_all(pf, VerifyConfig(tol=1e-4, denom_bound=500))
    res = _results(report)
    assert res["rationality"].status == PASS
    assert res["rationality"].details["recognized[0]"] == "-46/37"
    assert res["maximal_order"].status == PASS


def test_reports_are_deterministic(fixtures_dir):
    from etncheck.report import render_report

    pf = load_problem(fixtures_dir / "389a1_q37_p9.toml")
    a = render_report(run_all(pf, VerifyConfig()))
    b = render_report(run_all(load_problem(fixtures_dir / "389a1_q37_p9.toml"), VerifyConfig()))
    assert a == b
