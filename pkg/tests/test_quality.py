import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import label8, score_reference
from radhar.errors import InvalidArgumentError
from radhar.quality import (
    ScoreParams, cleanliness_score, count_subpeaks, lumps_from_frame, peak_score, valid_lumps,
)
from radhar.ramap import RAMap


def gaussian(shape, centre, sigma, amp=1.0):
    r = np.arange(shape[0])[:, None] - centre[0]
    c = np.arange(shape[1])[None, :] - centre[1]
    return amp * np.exp(-(r**2 + c**2) / (2 * sigma**2))


def random_frame(rng):
    shape = (int(rng.integers(12, 33)), int(rng.integers(12, 33)))
    x = np.abs(rng.normal(0, rng.uniform(0.01, 0.5), shape))
    for _ in range(rng.integers(0, 4)):
        x += gaussian(shape, rng.uniform(0, shape), rng.uniform(1, 4), rng.uniform(0.5, 5))
    return x


# lumps

def test_single_blob_single_lump():
    x = gaussian((64, 64), (30, 22), 3.0)
    lumps = lumps_from_frame(x)
    assert len(lumps) == 1
    assert len(label8(x > np.percentile(x, 90))) == 1
    assert any((p == (30, 22)).all() for p in lumps[0].pixels)
    assert lumps[0].centroid == pytest.approx((30.0, 22.0), abs=1e-9)


def test_two_equal_blobs():
    x = gaussian((40, 64), (20, 16), 2.5) + gaussian((40, 64), (20, 48), 2.5)
    lumps = lumps_from_frame(x)
    assert len(lumps) == 2
    assert lumps[0].energy == pytest.approx(lumps[1].energy, rel=1e-6)
    assert lumps[0].bbox[1] < lumps[1].bbox[1]  # tie broken by bbox origin


def test_constant_frame_has_no_lumps():
    assert lumps_from_frame(np.full((8, 8), 3.0)) == []
    assert lumps_from_frame(np.zeros((8, 8))) == []


def test_diagonal_pixels_connect():
    x = np.zeros((10, 10))
    x[2, 2] = x[3, 3] = x[4, 4] = 5.0
    lumps = lumps_from_frame(x, 90)
    assert len(lumps) == 1 and lumps[0].size == 3
    assert lumps[0].bbox == (2, 2, 4, 4)


def test_valid_lumps_fraction():
    x = gaussian((30, 60), (15, 10), 2.0, 100.0) + gaussian((30, 60), (15, 45), 2.0, 0.5)
    lumps = lumps_from_frame(x)
    assert len(valid_lumps(lumps, 0.01)) == 1
    assert len(valid_lumps(lumps, 0.001)) == 2
    assert valid_lumps([], 0.01) == []


# sub-peaks

def test_smooth_blob_one_subpeak():
    x = gaussian((40, 40), (20, 20), 3.0)
    assert count_subpeaks(x, lumps_from_frame(x)) == 1


def test_bimodal_lump_two_subpeaks():
    shape = (40, 60)
    x = gaussian(shape, (20, 25), 2.5) + gaussian(shape, (20, 33), 2.5, 0.9)
    lumps = lumps_from_frame(x)
    assert len(lumps) == 1
    assert count_subpeaks(x, lumps, gamma=0.5, d_min=3) == 2
    assert lumps[0].subpeak_count == 2


def test_low_secondary_peak_suppressed_by_gamma():
    shape = (40, 60)
    x = gaussian(shape, (20, 25), 2.0) + gaussian(shape, (20, 35), 2.0, 0.5)
    lumps = lumps_from_frame(x, 80)
    assert len(lumps) == 1
    assert count_subpeaks(x, lumps, gamma=0.6, d_min=3) == 1
    assert count_subpeaks(x, lumps, gamma=0.4, d_min=3) == 2


def test_close_peaks_merged_by_min_distance():
    shape = (40, 60)
    x = gaussian(shape, (20, 25), 1.0) + gaussian(shape, (20, 29), 1.0, 0.95)
    lumps = lumps_from_frame(x)
    assert count_subpeaks(x, lumps, gamma=0.5, d_min=1) == 2
    assert count_subpeaks(x, lumps, gamma=0.5, d_min=5) == 1


def test_plateau_is_not_a_peak():
    x = np.zeros((10, 10))
    x[4:6, 4:6] = 1.0
    assert count_subpeaks(x, lumps_from_frame(x)) == 0


# score

def test_all_zero_frame():
    fs = cleanliness_score(np.zeros((16, 16)))
    assert fs.S == 0.0 and fs.lump_inventory == []


def test_constant_frame_scores_zero():
    assert cleanliness_score(np.full((8, 8), 2.0)).S == 0.0
    assert peak_score(np.full((8, 8), 2.0)) == 0.0


def test_sharp_blob_scores_high_and_clutter_lowers():
    single = gaussian((64, 64), (32, 20), 2.0)
    s1 = cleanliness_score(single)
    assert s1.S >= 0.8
    assert score_reference(single)[0] == pytest.approx(s1.S, abs=1e-12)
    both = single + gaussian((64, 64), (32, 46), 2.0)
    s2 = cleanliness_score(both)
    assert s2.S < s1.S
    assert s2.leftover_ratio == pytest.approx(1.0, abs=0.05)


def test_matches_reference_on_random_frames():
    rng = np.random.default_rng(11)
    for _ in range(25):
        x = random_frame(rng)
        fs = cleanliness_score(x)
        ref = score_reference(x)
        assert fs.S == pytest.approx(ref[0], abs=1e-9)
        assert fs.lumps_score == pytest.approx(ref[1], abs=1e-9)
        assert fs.peak_score == pytest.approx(ref[2], abs=1e-9)
        assert fs.subpeak_count == ref[3]


def test_literal_sum_mode():
    rng = np.random.default_rng(4)
    x = random_frame(rng)
    p = ScoreParams(fusion_mode="literal_sum", w1=0.2, w2=0.8)
    fs = cleanliness_score(x, p)
    ref = score_reference(x, w1=0.2, w2=0.8, fusion="literal_sum")
    assert fs.S == pytest.approx(ref[0], abs=1e-12)
    assert fs.S == pytest.approx(min(1.0, fs.lumps_score**0.2 + fs.peak_score**0.8))


def test_ramap_input():
    x = gaussian((20, 30), (10, 10), 2.0)
    ra = RAMap(x, np.arange(30.0), np.arange(20.0))
    assert cleanliness_score(ra).S == cleanliness_score(x).S


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 3.0, 100.0]))
def test_scale_invariance(seed, c):
    x = random_frame(np.random.default_rng(seed))
    assert cleanliness_score(c * x).S == pytest.approx(cleanliness_score(x).S, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_score_in_unit_interval(seed):
    fs = cleanliness_score(random_frame(np.random.default_rng(seed)))
    assert 0.0 <= fs.S <= 1.0
    assert 0.0 <= fs.lumps_score <= 1.0 and 0.0 <= fs.peak_score <= 1.0


@pytest.mark.parametrize("kw", [
    {"fusion_mode": "max"}, {"pct": 101}, {"gamma": 1.0}, {"d_min": 0}, {"phi": 0},
    {"w1": 0.5, "w2": 0.6}, {"std_eps": -1.0},
])
def test_param_validation(kw):
    with pytest.raises(InvalidArgumentError):
        ScoreParams(**kw)
