import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dfbg.postprocess import MrfParams, ising_energy, mrf_smooth, remove_small_components

posteriors = arrays(np.float64, st.tuples(st.integers(1, 10), st.integers(1, 10)),
                    elements=st.floats(0.0, 1.0))


@given(posteriors)
def test_zero_coupling_is_thresholding(p):
    assert np.array_equal(mrf_smooth(p, MrfParams(coupling=0.0)), p < 0.5)


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.5, 10.0])
def test_uniform_confident_background(lam):
    assert not mrf_smooth(np.full((6, 7), 0.9), MrfParams(coupling=lam)).any()


def test_isolated_weak_foreground_is_flipped():
    p = np.full((5, 5), 0.95)
    p[2, 2] = 0.4
    assert (p < 0.5)[2, 2]
    assert not mrf_smooth(p, MrfParams(coupling=1.0))[2, 2]


@settings(max_examples=40, deadline=None)
@given(posteriors, st.floats(0.0, 4.0))
def test_energy_never_increases(p, lam):
    mask, energies = mrf_smooth(p, MrfParams(coupling=lam), return_energies=True)
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))
    assert energies[-1] == pytest.approx(ising_energy(mask, p, lam))


@settings(max_examples=40, deadline=None)
@given(posteriors)
def test_idempotent_on_its_own_output(p):
    m = mrf_smooth(p)
    assert np.array_equal(mrf_smooth(np.where(m, 0.0, 1.0)), m)


def test_energy_counts_disagreeing_neighbors():
    mask = np.array([[True, False], [False, False]])
    p = np.full((2, 2), 0.5)
    assert ising_energy(mask, p, 2.0) == pytest.approx(4 * np.log(2) + 2 * 2.0)


@pytest.mark.parametrize("kw", [{"coupling": -1.0}, {"coupling": float("nan")}, {"max_iters": 0}])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        MrfParams(**kw)


def blob(mask, y, x, n):
    """Plant an n-pixel 8-connected snake starting at (y, x)."""
    for i in range(n):
        mask[y + i // 5, x + (i % 5)] = True
    return mask


def test_fourteen_pixel_blob_is_removed():
    m = blob(np.zeros((20, 20), bool), 3, 3, 14)
    assert m.sum() == 14 and not remove_small_components(m, 15).any()


def test_fifteen_pixel_blob_is_kept():
    m = blob(np.zeros((20, 20), bool), 3, 3, 15)
    assert np.array_equal(remove_small_components(m, 15), m)


def test_components_are_independent():
    m = np.zeros((40, 40), bool)
    m[1:3, 1:6] = True                 # 10 px
    m[20:30, 20:40] = True             # 200 px
    out = remove_small_components(m)
    assert out[1:3, 1:6].sum() == 0 and out[20:30, 20:40].all()


def test_diagonal_neighbours_join_components():
    m = np.zeros((20, 20), bool)
    idx = np.arange(15)
    m[idx, idx] = True
    assert remove_small_components(m).sum() == 15
