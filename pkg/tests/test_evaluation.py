import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dfbg.evaluation import evaluate_video, f_measure, score_frame, truth_from_gray

unit = st.floats(0.0, 1.0)


@pytest.mark.parametrize("p, r, f", [(1, 1, 1), (0.5, 0.5, 0.5), (0, 0, 0)])
def test_f_measure_examples(p, r, f):
    assert f_measure(p, r) == f


def test_f_measure_value():
    assert f_measure(0.8, 0.6) == pytest.approx(0.6857142857142857, rel=1e-15)


@given(unit, unit)
def test_f_measure_symmetric(p, r):
    assert f_measure(p, r) == f_measure(r, p)


@given(unit, unit, unit)
def test_f_measure_monotone(p, r, d):
    q = min(1.0, p + d)
    assert f_measure(q, r) >= f_measure(p, r) - 1e-15


def test_f_measure_validates():
    with pytest.raises(ValueError):
        f_measure(1.2, 0.5)


def test_identical_masks_score_perfect(rng):
    truth = {i: rng.random((8, 8)) > 0.7 for i in range(5)}
    rep = evaluate_video(dict(truth), truth)
    assert rep.pooled_f == 1.0 and rep.mean_f == 1.0


def test_all_background_against_nonempty_truth():
    t = np.zeros((4, 4), bool)
    t[1, 1] = True
    rep = evaluate_video({0: np.zeros((4, 4), bool)}, {0: t})
    assert rep.pooled_recall == 0.0 and rep.pooled_f == 0.0


def test_empty_truth_and_empty_mask_is_perfect():
    s = score_frame(np.zeros((3, 3), bool), np.zeros((3, 3), bool))
    assert (s.precision, s.recall, s.f) == (1.0, 1.0, 1.0)


def test_only_truth_frames_are_scored():
    t = np.ones((2, 2), bool)
    masks = {0: np.zeros((2, 2), bool), 5: t, 9: t}
    rep = evaluate_video(masks, {5: t, 9: t})
    assert [s.frame_id for s in rep.per_frame] == [5, 9] and rep.pooled_f == 1.0


def test_missing_mask_is_an_error():
    with pytest.raises(KeyError):
        evaluate_video({0: np.zeros((2, 2), bool)}, {1: np.zeros((2, 2), bool)})


def test_shape_mismatch_is_an_error():
    with pytest.raises(ValueError):
        score_frame(np.zeros((2, 2)), np.zeros((3, 2)))


def test_permutation_invariance(rng):
    truth = {i: rng.random((6, 6)) > 0.5 for i in range(6)}
    masks = {i: rng.random((6, 6)) > 0.5 for i in range(6)}
    a = evaluate_video(masks, truth)
    b = evaluate_video(masks, {k: truth[k] for k in reversed(list(truth))})
    assert a.pooled_f == b.pooled_f and a.mean_f == b.mean_f


def test_pooled_equals_mean_with_identical_counts():
    t = np.zeros((4, 4), bool)
    t[:2] = True
    m = np.zeros((4, 4), bool)
    m[1:3] = True
    rep = evaluate_video({0: m, 1: m, 2: m}, {0: t, 1: t, 2: t})
    assert rep.pooled_f == pytest.approx(rep.mean_f, abs=1e-15)


def test_report_serialization():
    t = np.ones((2, 2), bool)
    rep = evaluate_video({0: t}, {0: t}, fingerprint="abc")
    d = json.loads(rep.to_json())
    assert d["config_fingerprint"] == "abc" and d["pooled_f"] == 1.0
    assert "pooled" in rep.table() and "abc" in rep.table()


def test_truth_decoding():
    assert truth_from_gray(np.array([[0, 255]])).tolist() == [[False, True]]
    with pytest.raises(ValueError):
        truth_from_gray(np.array([[0, 128]]))
