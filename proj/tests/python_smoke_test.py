"""Smoke tests for the _qbin extension module."""

import json
import math

import numpy as np
import pytest

import _qbin as q


def test_render_and_argmax():
    hm = q.render_gaussian(q.GaussianSpec((10.0, 12.0), 3.0), 32, 32)
    assert hm.shape == (32, 32)
    (coord, activation) = q.argmax_coord(hm)
    assert coord == (10, 12)
    assert activation == pytest.approx(1.0)


def test_measures():
    hm = q.render_gaussian(q.GaussianSpec((8.0, 8.0), 2.0), 24, 24)
    coord, unc = q.s_mha(hm)
    assert coord == (8.0, 8.0)
    assert unc == pytest.approx(1.0 / (1.0 + 1e-6))
    shifted = np.roll(hm, 4, axis=1)
    e_coord, e_unc = q.e_cpv([hm, shifted])
    assert e_coord == (8.0, 10.0)
    assert e_unc == pytest.approx(2.0)
    _, mean_unc = q.e_mha([hm, shifted])
    assert mean_unc > unc


def test_localization_error():
    assert q.localization_error((0.0, 3.0), (4.0, 0.0), 0.9375) == pytest.approx(4.6875)


def test_binning_and_bounds():
    validation = [(f"c{i}", float(i), float(i)) for i in range(1, 11)]
    t = q.fit_thresholds(validation, 5)
    assert t.alphas[:5] == [0.0, 3.0, 5.0, 7.0, 9.0]
    assert math.isinf(t.alphas[5])
    assert q.assign_bin(t, 3.5) == 2
    fit = q.fit_isotonic([x for _, x, _ in validation], [e for _, _, e in validation])
    bounds = q.estimate_bounds(fit, t)
    assert bounds.gammas == pytest.approx([1.0, 3.0, 5.0, 7.0, 9.0, 10.0])


def test_stats():
    rho, p = q.spearman_rho([1, 2, 3, 4, 5], [1, 3, 2, 5, 4])
    assert rho == pytest.approx(0.8)
    assert p == pytest.approx(0.10408803866182788)
    t, p, sig = q.significance_test([1, 2, 3, 4], [10, 11, 12, 13])
    assert t == pytest.approx(-9.85900603509299)
    assert sig


def test_end_to_end_synthetic():
    cfg = q.SyntheticConfig()
    cfg.seed = 3
    cfg.n_images = 120
    cfg.ensemble_size = 5
    cfg.epistemic_jitter_sigma = 2.0
    cfg.outlier_rate = 0.2
    cfg.outlier_displacement = 20.0
    report = json.loads(q.end_to_end_synthetic(cfg, 5, "ecpv"))
    assert len(report["mean_jaccard"]) == 5
    assert report["b1_mean_error"] < report["all_mean_error"]


def test_qbhm_roundtrip(tmp_path):
    hm = q.render_gaussian(q.GaussianSpec((5.0, 5.0), 2.0), 16, 16)
    path = tmp_path / "grid.qbhm"
    q.write_qbhm(path, hm)
    back = q.read_qbhm(path)
    assert np.allclose(back, hm, atol=1e-7)
