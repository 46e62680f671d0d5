import math

import numpy as np
import pytest

from thinfrac.constants import c_closed
from thinfrac.errors import DomainError, NumericalFailure, UnsupportedFamilyError, UsageError
from thinfrac.geometry import BaseDomain, FractionalParams, ThinFilm
from thinfrac.kernelquad import (
    Engine,
    QuadratureSpec,
    grid_rectangle,
    mc_box,
    planar_seminorm,
    planar_seminorm_mc,
    seminorm,
    seminorm_grid,
    seminorm_mc,
    vertical_seminorm,
)
from thinfrac.testfns import Affine, Constant, PlanarLinear, PlanarSine, Sum, VerticalProfile

GRID = QuadratureSpec()
MC = QuadratureSpec(engine=Engine.MC, samples=200_000, seed=1)
INTERVAL = BaseDomain.for_dimension(2)


@pytest.mark.parametrize("kw", [{"samples": 999}, {"panels": 4}, {"grading_strength": 1.0}, {"seed": -1}, {"engine": "fem"}])
def test_spec_validation(kw):
    with pytest.raises((UsageError, ValueError)):
        QuadratureSpec(**kw)


@pytest.mark.parametrize("spec", [GRID, MC])
@pytest.mark.parametrize("d", [2, 3])
def test_zero_on_constants(spec, d):
    if spec.engine is Engine.GRID and d == 3:
        pytest.skip("grid is d = 2 only")
    est = seminorm(Constant(2.0), ThinFilm.unit(d, 0.1), FractionalParams(d, 0.4), spec)
    assert est.value == 0.0


def test_grid_rejects_d3():
    with pytest.raises(UnsupportedFamilyError):
        seminorm_grid(PlanarLinear((1.0, 0.0)), ThinFilm.unit(3, 0.1), FractionalParams(3, 0.5), GRID)


def test_grid_matches_closed_form_on_square():
    # u = x1 on the unit square: compare with a slow independent Duffy/quad evaluation
    from scipy import integrate

    s = 0.5
    val = grid_rectangle(lambda x: x[..., 0], [0.0, 0.0], (1.0, 1.0), s, 2.0, 32, 2.0, 8)
    gamma = 2 + 2 * s

    def quadrant(e1, e2):
        return (1 - e1) * (1 - e2) * e1**2 * (e1**2 + e2**2) ** (-gamma / 2)

    # polar coordinates around the singular corner
    def inner(theta):
        rmax = min(1 / math.cos(theta), 1 / math.sin(theta)) if 0 < theta < math.pi / 2 else 1.0
        f = lambda r: r * quadrant(r * math.cos(theta), r * math.sin(theta))
        return integrate.quad(f, 0, rmax, epsabs=0, epsrel=1e-12)[0]

    ref = 4 * integrate.quad(inner, 0, math.pi / 2, points=[math.pi / 4], epsabs=0, epsrel=1e-11)[0]
    assert val == pytest.approx(ref, rel=1e-9)


def test_grid_error_halves_with_panel_width():
    f, film, params = PlanarSine((1,)), ThinFilm.unit(2, 0.05), FractionalParams(2, 0.5)
    coarse = seminorm_grid(f, film, params, GRID.with_(panels=8)).error
    fine = seminorm_grid(f, film, params, GRID.with_(panels=16)).error
    assert fine <= coarse / 2


def test_mc_agrees_with_grid_shared_example():
    f, film, params = PlanarLinear((1.0,)), ThinFilm.unit(2, 0.05), FractionalParams(2, 0.75)
    g = seminorm_grid(f, film, params, GRID)
    m = seminorm_mc(f, film, params, MC.with_(samples=1_000_000, threads=4))
    assert abs(m.value - g.value) <= 3 * (m.error + g.error)


@pytest.mark.parametrize("samples,shift", [(10_000_000, 0.0), (2_000_000, -1.3)])
def test_vertical_first_scaling_mc(samples, shift):
    # most radii overshoot a thin film; a negative tilt puts them back inside
    eps, s = 1e-3, 0.3
    spec = MC.with_(samples=samples, threads=4, radial_exponent_shift=shift)
    est = seminorm_mc(VerticalProfile(), ThinFilm.unit(2, eps), FractionalParams(2, s), spec)
    pred = c_closed(s, 2) / ((1 - s) * (3 - 2 * s))
    assert eps ** (2 * s - 1) * est.value == pytest.approx(pred, rel=0.05)


def test_mc_deterministic_across_threads():
    f, film, params = PlanarSine((1, 1)), ThinFilm.unit(3, 0.1), FractionalParams(3, 0.6)
    spec = MC.with_(samples=150_000, chunk_size=10_000)
    vals = {seminorm_mc(f, film, params, spec.with_(threads=t)).value for t in (1, 2, 4, 7)}
    assert len(vals) == 1
    other = seminorm_mc(f, film, params, spec.with_(seed=2)).value
    assert other not in vals


def test_mc_unbiased_for_radial_shift():
    f, film, params = VerticalProfile(), ThinFilm.unit(2, 0.1), FractionalParams(2, 0.3)
    g = seminorm_grid(f, film, params, GRID)
    for shift in (-0.5, 0.5):
        m = seminorm_mc(f, film, params, MC.with_(radial_exponent_shift=shift, samples=1_000_000, threads=4))
        assert abs(m.value - g.value) <= 3 * m.error


def test_mc_bad_shift():
    with pytest.raises(UsageError):
        seminorm_mc(PlanarLinear((1.0,)), ThinFilm.unit(2, 0.1), FractionalParams(2, 0.5), MC.with_(radial_exponent_shift=-5))


def test_mc_low_confidence_flag():
    est = seminorm_mc(PlanarSine((3,)), ThinFilm.unit(2, 1e-3), FractionalParams(2, 0.5), MC.with_(samples=1000))
    assert est.low_confidence == (est.error > est.value)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_mc_nonfinite_weight_raises():
    def bad(x):
        return np.where(x[..., 0] > 0.5, np.inf, 0.0)

    with pytest.raises(NumericalFailure):
        mc_box(bad, [0.0, 0.0], [1.0, 1.0], 0.5, 2.0, MC.with_(samples=5000))


@pytest.mark.parametrize("f", [PlanarSine((1,)), VerticalProfile("sine"), Sum(PlanarLinear((1.0,)), VerticalProfile())])
@pytest.mark.parametrize("s", [0.25, 0.75])
def test_homogeneity_and_translation_grid(f, s):
    film, params = ThinFilm.unit(2, 0.05), FractionalParams(2, s)
    base = seminorm_grid(f, film, params, GRID)
    neg = seminorm_grid(Affine(f, -1.0, 2.0), film, params, GRID)
    scaled = seminorm_grid(Affine(f, 3.0), film, params, GRID)
    tol = 3 * (base.error + neg.error) + 1e-12 * base.value
    assert abs(neg.value - base.value) <= tol
    assert abs(scaled.value - 9 * base.value) <= 3 * (9 * base.error + scaled.error) + 1e-12 * scaled.value


def test_vertical_seminorm_exact():
    eps, s = 0.01, 0.4
    film = ThinFilm.unit(2, eps, tau=0.1)
    est = vertical_seminorm(VerticalProfile(), film, FractionalParams(2, s))
    assert est.value == pytest.approx(0.8 * eps ** (1 - 2 * s) / ((1 - s) * (3 - 2 * s)), rel=1e-13)
    assert vertical_seminorm(PlanarSine((1,)), film, FractionalParams(2, s)).value == 0.0
    summed = vertical_seminorm(Sum(PlanarSine((1,)), VerticalProfile()), film, FractionalParams(2, s))
    assert summed.value == est.value


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_sandwich_ratio_tends_to_one(s):
    ratios = []
    for eps in (1e-1, 1e-2, 1e-3):
        film, params = ThinFilm.unit(2, eps), FractionalParams(2, s)
        v = vertical_seminorm(VerticalProfile("sine"), film, params).value
        e = seminorm_grid(VerticalProfile("sine"), film, params, GRID).value
        ratios.append(c_closed(s, 2) * v / e)
    gaps = [abs(r - 1) for r in ratios]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3


def test_interior_margin_restricts_energy():
    f, params = PlanarLinear((1.0,)), FractionalParams(2, 0.5)
    full = seminorm_grid(f, ThinFilm.unit(2, 0.1), params, GRID).value
    inner = seminorm_grid(f, ThinFilm.unit(2, 0.1, tau=0.2), params, GRID).value
    assert inner < full


def test_planar_seminorm_examples():
    assert planar_seminorm(Constant(1.0), INTERVAL, 0.5).value == 0.0
    est = planar_seminorm(PlanarLinear((1.0,)), INTERVAL, 0.7)
    assert est.value == pytest.approx(1 / (0.3 * 1.6), rel=1e-10)
    assert (1 - 0.99) * planar_seminorm(PlanarLinear((1.0,)), INTERVAL, 0.99).value == pytest.approx(1.0, rel=0.02)
    with pytest.raises(DomainError):
        planar_seminorm(PlanarLinear((1.0,)), INTERVAL, 1.0)


def test_planar_seminorm_square_base_uses_mc():
    base = BaseDomain.for_dimension(3)
    spec = QuadratureSpec(engine=Engine.MC, samples=400_000, seed=3, threads=4)
    a = planar_seminorm(PlanarLinear((1.0, 0.0)), base, 0.6, spec=spec)
    b = planar_seminorm_mc(PlanarLinear((1.0, 0.0)), base, 0.6, 2.0, spec.with_(seed=4))
    assert a.engine == "mc"
    assert abs(a.value - b.value) <= 3 * math.hypot(a.error, b.error)


def test_planar_seminorm_oracle():
    ref = planar_seminorm(PlanarSine((1,)), INTERVAL, 0.7)
    mc = planar_seminorm_mc(PlanarSine((1,)), INTERVAL, 0.7, 2.0, QuadratureSpec(engine=Engine.MC, samples=500_000, seed=8))
    assert abs(mc.value - ref.value) <= 3 * (mc.error + ref.error)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_slicing_ratio_bounded(s):
    for f in (VerticalProfile(), Sum(PlanarSine((1,)), VerticalProfile("sine", 0.5)), PlanarLinear((1.0,))):
        for eps in (1e-1, 1e-2, 1e-3):
            film, params = ThinFilm.unit(2, eps), FractionalParams(2, s)
            v = vertical_seminorm(f, film, params).value
            e = seminorm_grid(f, film, params, GRID).value
            assert c_closed(s, 2) * v / e <= 1.1


def test_estimate_to_dict():
    d = seminorm_grid(PlanarLinear((1.0,)), ThinFilm.unit(2, 0.1), FractionalParams(2, 0.5), GRID).to_dict()
    assert set(d) >= {"value", "error", "engine", "params", "film"}
