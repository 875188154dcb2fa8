import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dfbg.priors import (
    PriorParams,
    build_priors,
    initial_priors,
    smooth_posterior,
    smoothing_kernel,
    uniform_priors,
)

# center tap of the normalized 7x7, sigma 1.75 kernel, evaluated and frozen
CENTER_TAP = 0.05669570096770275

prob_maps = arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 12)),
                   elements=st.floats(0.0, 1.0))


def test_kernel_sums_to_one_and_center_tap():
    k = smoothing_kernel(7, 1.75)
    assert k.shape == (7, 7) and k.sum() == pytest.approx(1.0, abs=1e-15)
    assert k[3, 3] == pytest.approx(CENTER_TAP, rel=1e-14)


def test_impulse_gives_center_tap():
    m = np.zeros((15, 15))
    m[7, 7] = 1.0
    assert smooth_posterior(m)[7, 7] == pytest.approx(CENTER_TAP, rel=1e-12)


def test_interior_mass_is_preserved(rng):
    m = np.zeros((24, 24))
    m[7:17, 7:17] = rng.random((10, 10))  # smoothed support stays 3 px clear of the border
    assert smooth_posterior(m).sum() == pytest.approx(m.sum(), abs=1e-12)


@given(st.floats(0.0, 1.0), st.integers(1, 10), st.integers(1, 10))
def test_constant_maps_stay_constant(p, h, w):
    np.testing.assert_allclose(smooth_posterior(np.full((h, w), p)), p, atol=1e-15)


@given(prob_maps)
def test_smoothing_stays_in_unit_interval(m):
    s = smooth_posterior(m)
    assert np.all(s >= 0) and np.all(s <= 1)


def test_transition_endpoints_are_exact():
    one = build_priors(np.ones((1, 1)))
    zero = build_priors(np.zeros((1, 1)))
    assert (one.bg[0, 0], one.fg[0, 0], one.fu[0, 0]) == (0.95, 0.025, 0.025)
    assert (zero.bg[0, 0], zero.fg[0, 0], zero.fu[0, 0]) == (0.50, 0.25, 0.25)


def test_half_probability():
    t = build_priors(np.full((1, 1), 0.5))
    assert t.bg[0, 0] == pytest.approx(0.725, abs=1e-15)
    assert t.fg[0, 0] == pytest.approx(0.1375, abs=1e-15)
    assert t.fu[0, 0] == pytest.approx(0.1375, abs=1e-15)


@given(prob_maps)
def test_triple_is_normalized_with_equal_foreground_priors(m):
    t = build_priors(m)
    np.testing.assert_allclose(t.bg + t.fg + t.fu, 1.0, atol=1e-12)
    assert np.array_equal(t.fg, t.fu)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_monotone_in_background_probability(a, b):
    if abs(a - b) < 1e-9:
        return
    lo, hi = sorted((a, b))
    tl, th = build_priors(np.array([[lo]])), build_priors(np.array([[hi]]))
    assert th.bg[0, 0] > tl.bg[0, 0] and th.fg[0, 0] < tl.fg[0, 0]


def test_initial_priors_constant_and_consistent():
    t = initial_priors(5, 3)
    assert t.bg.shape == (3, 5) and np.all(t.bg == 0.95) and np.all(t.fu == 0.025)
    s = build_priors(smooth_posterior(np.ones((3, 5))))
    np.testing.assert_allclose(s.bg, t.bg, atol=1e-15)
    one = initial_priors(1, 1)
    assert one.bg[0, 0] + one.fg[0, 0] + one.fu[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_smoothing_then_priors_is_translation_equivariant(rng):
    m = rng.random((24, 24))
    a = build_priors(smooth_posterior(m)).bg
    b = build_priors(smooth_posterior(np.roll(m, (2, 1), axis=(0, 1)))).bg
    np.testing.assert_allclose(b[8:16, 7:15], a[6:14, 6:14], rtol=1e-13)


def test_border_boost_raises_unseen_prior_only_at_the_border():
    params = PriorParams(fu_border_width=1, fu_border_boost=3.0)
    t = build_priors(np.ones((5, 5)), params)
    assert t.fu[0, 2] > t.fu[2, 2] == 0.025
    np.testing.assert_allclose(t.bg + t.fg + t.fu, 1.0, atol=1e-12)


@pytest.mark.parametrize("kwargs", [
    {"bg_stay": 0.9}, {"fg_stay_split": (0.3, 0.3)}, {"smooth_width": 6},
    {"smooth_sigma": 0.0}, {"fu_border_boost": 0.0},
])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        PriorParams(**kwargs)


def test_uniform_priors():
    t = uniform_priors(2, 2, fu=False)
    assert np.all(t.bg == 0.5) and np.all(t.fu == 0)
    t3 = uniform_priors(2, 2)
    assert np.all(t3.bg == 1 / 3)
