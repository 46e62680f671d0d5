import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinfrac.errors import DomainError
from thinfrac.geometry import (
    BaseDomain,
    FractionalParams,
    Shape,
    ThinFilm,
    rescale_vertical,
    sample_point,
    sample_points,
    unscale_vertical,
)


def test_defaults_and_measures():
    film = ThinFilm.unit(3, 0.2)
    assert film.base.shape is Shape.UNIT_SQUARE
    assert film.measure == pytest.approx(0.2)
    assert film.diameter == pytest.approx(math.sqrt(2 + 0.04))
    assert ThinFilm.unit(2, 0.5).measure == 0.5


@pytest.mark.parametrize("extents", [(0.0,), (-1.0,), (math.inf,), (1.0, 2.0)])
def test_bad_interval_extents(extents):
    with pytest.raises(DomainError):
        BaseDomain(Shape.UNIT_INTERVAL, extents)


@pytest.mark.parametrize("eps,tau", [(0.0, 0.0), (1.5, 0.0), (0.1, -0.1), (0.1, 0.5)])
def test_bad_film(eps, tau):
    with pytest.raises(DomainError):
        ThinFilm.unit(2, eps, tau)


def test_interior_shrinks_base():
    film = ThinFilm(BaseDomain(Shape.UNIT_SQUARE, (2.0, 1.0)), 0.1, tau=0.25)
    inner = film.interior()
    assert inner.base.extents == (1.5, 0.5)
    assert inner.base.origin == (0.25, 0.25)
    assert inner.tau == 0


@pytest.mark.parametrize("d,s,p", [(1, 0.5, 2), (4, 0.5, 2), (2, 0.0, 2), (2, 1.0, 2), (2, 0.5, 0.5)])
def test_params_validation(d, s, p):
    with pytest.raises(DomainError):
        FractionalParams(d, s, p)


def test_kernel_exponent():
    assert FractionalParams(3, 0.25, 4).kernel_exponent == 4.0


def test_sample_point_in_film():
    rng = np.random.default_rng(0)
    film = ThinFilm.unit(2, 0.5)
    for _ in range(50):
        x = sample_point(film, rng)
        assert 0 <= x[0] <= 1 and 0 <= x[1] <= 0.5


def test_sample_mean_of_height():
    eps = 0.3
    film = ThinFilm.unit(3, eps)
    x = sample_points(film, np.random.default_rng(1), 10**6)
    se = eps / math.sqrt(12) / 1e3
    assert abs(x[:, -1].mean() - eps / 2) < 3 * se


def test_volume_by_hit_counting():
    film = ThinFilm(BaseDomain(Shape.UNIT_SQUARE, (0.7, 0.4), (0.1, 0.2)), 0.25)
    box_lo, box_hi = np.zeros(3), np.ones(3)
    n = 400_000
    pts = box_lo + np.random.default_rng(2).random((n, 3)) * (box_hi - box_lo)
    frac = film.contains(pts).mean()
    se = math.sqrt(frac * (1 - frac) / n)
    assert abs(frac - film.measure) < 3 * se


def test_rescale_examples():
    film = ThinFilm.unit(2, 0.1)
    np.testing.assert_allclose(rescale_vertical([0.3, 0.05], film), [0.3, 0.5])
    np.testing.assert_array_equal(rescale_vertical([0.3, 0.0], film), [0.3, 0.0])
    with pytest.raises(DomainError):
        rescale_vertical([0.3, 0.2], film)


def test_rescale_roundtrip_many():
    film = ThinFilm.unit(3, 0.01)
    x = sample_points(film, np.random.default_rng(3), 10**4)
    back = unscale_vertical(rescale_vertical(x, film), film)
    assert np.max(np.abs(back - x)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(0, 1), st.floats(0, 1))
def test_rescale_bijective(eps, a, b):
    film = ThinFilm.unit(2, eps)
    x = np.array([a, b * eps])
    z = rescale_vertical(x, film)
    assert 0 <= z[1] <= 1
    np.testing.assert_allclose(unscale_vertical(z, film), x, atol=1e-15)
