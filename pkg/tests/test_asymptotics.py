import math

import pytest

from thinfrac import constants as K
from thinfrac.asymptotics import (
    RegimeLabel,
    bbm_sweep,
    blowup_matching,
    classify_regime,
    critical_candidates,
    critical_sweep,
    dyadic_ladder,
    expansion_report,
    loglog_slope,
    parse_schedule,
    predicted_limit,
    run_sweep,
    vertical_regime,
)
from thinfrac.errors import DomainError, SweepFailure, UsageError
from thinfrac.geometry import FractionalParams
from thinfrac.kernelquad import QuadratureSpec
from thinfrac.testfns import Constant, PlanarLinear, PlanarSine, Sum, VerticalProfile

GRID = QuadratureSpec()


@pytest.mark.parametrize(
    "d,s,p,label,exponent",
    [
        (2, 0.3, 2, RegimeLabel.SUBCRITICAL, 2.0),
        (2, 0.5, 2, RegimeLabel.CRITICAL, 2.0),
        (3, 0.75, 2, RegimeLabel.SUPERCRITICAL, 1.5),
        (2, 0.25, 4, RegimeLabel.CRITICAL, 2.0),
        (2, 0.5, 4, RegimeLabel.SUPERCRITICAL, 3.0),
        (2, 0.9, 1, RegimeLabel.SUBCRITICAL, 2.0),
    ],
)
def test_classify(d, s, p, label, exponent):
    r = classify_regime(FractionalParams(d, s, p))
    assert r.label is label
    assert r.scaling_exponent == pytest.approx(exponent)
    assert r.log_correction == (label is RegimeLabel.CRITICAL)


def test_classify_tolerance():
    assert classify_regime(FractionalParams(2, 0.5 + 5e-13)).label is RegimeLabel.CRITICAL
    assert classify_regime(FractionalParams(2, 0.5 + 1e-9)).label is RegimeLabel.SUPERCRITICAL


@pytest.mark.parametrize("s", [0.1, 0.3, 0.6, 0.9])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_classify_consistent_with_sp(s, p):
    lab = classify_regime(FractionalParams(2, s, p)).label
    assert (lab is RegimeLabel.SUPERCRITICAL) == (s * p > 1 + 1e-12)


def test_scales():
    p = FractionalParams(2, 0.5)
    eps = 0.01
    assert classify_regime(p).scale(eps, 0.5, 2) == pytest.approx(eps**2 * abs(math.log(eps)))
    assert vertical_regime(p).scale(eps, 0.3, 2) == pytest.approx(eps**0.4)


def test_predicted_limit_examples():
    base_params = FractionalParams(2, 0.5)
    assert predicted_limit(VerticalProfile(), base_params, vertical_regime(base_params)) == pytest.approx(2.0)
    sup = FractionalParams(2, 0.75)
    assert predicted_limit(PlanarLinear((1.0,)), sup, classify_regime(sup)) == pytest.approx(K.k_closed(0.75, 2) / 0.25)
    sub = FractionalParams(2, 0.2)
    assert predicted_limit(PlanarLinear((1.0,)), sub, classify_regime(sub)) == pytest.approx(1 / (0.3 * 1.6), rel=1e-9)


def test_predicted_limit_critical_d3():
    params = FractionalParams(3, 0.5)
    assert predicted_limit(PlanarLinear((1.0, 0.0)), params, classify_regime(params)) == pytest.approx(math.pi)
    assert critical_candidates(3, 2.0, 1.0) == pytest.approx({"theorem": math.pi, "half": math.pi / 2})


def test_predicted_limit_incompatible():
    params = FractionalParams(2, 0.75)
    with pytest.raises(UsageError):
        predicted_limit(VerticalProfile(), params, classify_regime(params))
    with pytest.raises(UsageError):
        predicted_limit(PlanarLinear((1.0,)), params, vertical_regime(params))


def test_predicted_limit_diverges_toward_critical():
    vals = [
        predicted_limit(PlanarLinear((1.0,)), FractionalParams(2, s), classify_regime(FractionalParams(2, s)))
        for s in (0.6, 0.55, 0.51)
    ]
    assert vals[0] < vals[1] < vals[2]
    with pytest.raises(DomainError):
        predicted_limit(PlanarLinear((1.0,)), FractionalParams(2, 0.5, 4.0), classify_regime(FractionalParams(2, 0.5, 4.0)))


def test_blowup_matching_two_sided():
    for d in (2, 3):
        m = blowup_matching(d)
        assert m["super_gap"] <= 2e-2
    assert blowup_matching(2)["sub_gap"] <= 2e-2


def test_loglog_slope_exact():
    eps = dyadic_ladder(3, 8)
    assert loglog_slope(eps, [3 * e**1.7 for e in eps]) == pytest.approx(1.7)


def test_ladder_validation():
    with pytest.raises(UsageError):
        run_sweep(PlanarLinear((1.0,)), FractionalParams(2, 0.5), [0.1, 0.05, 0.02], GRID)
    with pytest.raises(UsageError):
        run_sweep(PlanarLinear((1.0,)), FractionalParams(2, 0.5), [0.1, 0.05, 0.06, 0.01], GRID)


def test_vertical_sweep_slope():
    rep = run_sweep(VerticalProfile(), FractionalParams(2, 0.3), dyadic_ladder(3, 10), GRID)
    assert rep.regime.label is RegimeLabel.VERTICAL
    assert rep.fitted_slope == pytest.approx(0.4, abs=0.05)
    assert rep.relative_error < 1e-3
    assert rep.scaled_energies == pytest.approx([r / e**0.4 for r, e in zip(rep.raw_energies, rep.eps_ladder)])


def test_constant_sweep_is_degenerate():
    rep = run_sweep(Constant(2.0), FractionalParams(2, 0.75), dyadic_ladder(3, 6), GRID)
    assert rep.degenerate and rep.fitted_slope is None
    assert all(v == 0 for v in rep.raw_energies)


def test_supercritical_richardson_reaches_prediction():
    rep = run_sweep(PlanarLinear((1.0,)), FractionalParams(2, 0.75), dyadic_ladder(3, 10), GRID)
    assert rep.relative_error < 0.1
    assert abs(rep.richardson_limit / rep.predicted_limit - 1) < 0.01


def test_sweep_failure_carries_partial():
    sched = parse_schedule("bbm-log")
    # at eps = 0.5 the schedule leaves (0, 1)
    with pytest.raises(DomainError):
        run_sweep(PlanarLinear((1.0,)), FractionalParams(2, 0.5), [0.5, 0.25, 0.125, 0.0625], GRID, s_schedule=sched)
    with pytest.raises(SweepFailure) as info:
        run_sweep(PlanarLinear((1.0, 0.0)), FractionalParams(3, 0.5), dyadic_ladder(2, 5), GRID)
    assert info.value.partial is not None and not info.value.partial.complete


def test_critical_sweep_adjudicates():
    rep = critical_sweep(PlanarLinear((1.0,)), 2, 2.0, dyadic_ladder(4, 12), GRID)
    ex = rep.extras
    assert ex["candidates"] == {"theorem": 2.0, "half": 1.0}
    assert ex["closest_candidate"] == "theorem"
    assert ex["log_coefficient"] == pytest.approx(2.0, rel=0.1)


def test_critical_sweep_constant():
    rep = critical_sweep(Constant(1.0), 2, 2.0, dyadic_ladder(4, 8), GRID)
    assert rep.degenerate and rep.extras["log_coefficient"] == 0.0


def test_bbm_sweep_and_kappa():
    rep = bbm_sweep(PlanarLinear((1.0,)), 2, dyadic_ladder(3, 10), parse_schedule("bbm-log2"), GRID)
    assert rep.extrapolated_limit == pytest.approx(math.pi / 2, rel=0.1)
    rep = bbm_sweep(PlanarLinear((1.0,)), 2, dyadic_ladder(3, 10), parse_schedule("bbm-log"), GRID)
    assert rep.extras["kappa"][-1] == pytest.approx(math.exp(-1))
    assert rep.extras["kappa_predicted"] == pytest.approx(math.exp(-2) * math.pi / 2)


def test_bbm_schedule_must_increase():
    with pytest.raises(UsageError):
        bbm_sweep(PlanarLinear((1.0,)), 2, dyadic_ladder(3, 7), lambda e: 0.5 + e, GRID)


def test_schedules():
    assert parse_schedule("const:0.3")(0.01) == 0.3
    assert parse_schedule("bbm-log2")(math.exp(-2)) == pytest.approx(0.75)
    with pytest.raises(UsageError):
        parse_schedule("linear")
    with pytest.raises(DomainError):
        parse_schedule("const:1.5")(0.1)


def test_expansion_report_pure_cases():
    params = FractionalParams(2, 0.75)
    ladder = dyadic_ladder(3, 7)
    planar_only = expansion_report(Sum(PlanarLinear((1.0,)), VerticalProfile("linear", 0.0)), params, ladder, GRID)
    assert planar_only.first_scale_term == 0.0
    sweep = run_sweep(PlanarLinear((1.0,)), params, ladder, GRID)
    assert planar_only.residual_scaled == pytest.approx(sweep.scaled_energies, rel=1e-10)

    vertical_only = expansion_report(Sum(PlanarLinear((0.0,)), VerticalProfile()), params, ladder, GRID)
    assert vertical_only.second_scale_term is None
    vsweep = run_sweep(VerticalProfile(), params, ladder, GRID)
    assert vertical_only.raw_energies == pytest.approx(vsweep.raw_energies, rel=1e-12)

    mixed = expansion_report(Sum(PlanarLinear((1.0,)), VerticalProfile()), params, ladder, GRID)
    assert all(math.isfinite(r) for r in mixed.residual_trace)
    with pytest.raises(UsageError):
        expansion_report(PlanarLinear((1.0,)), params, ladder, GRID)


def test_report_serialises():
    import json

    rep = run_sweep(PlanarSine((1,)), FractionalParams(2, 0.25), dyadic_ladder(3, 6), GRID)
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["regime"]["label"] == "SubCritical"
    assert len(rep.rows()) == 4
