"""Detection scoring and Monte Carlo experiment tests."""
import dataclasses

import numpy as np
import pytest

from ciradar import (Detection, EvaluationError, ExperimentConfig, RadarNode,
                     RangeDopplerMap, Scene, Target, WaveformParams,
                     extract_peaks, generate_code, process_baseline,
                     process_enhanced, run_cpi, run_hit_rate_sweep,
                     run_psl_experiment, score_hits)


def small_config(**overrides):
    cfg = ExperimentConfig()
    wf = WaveformParams(code_length=64, pulses_per_cpi=16)
    return dataclasses.replace(cfg, waveform=wf, **overrides)


def test_extract_peaks_finds_and_suppresses():
    wf = WaveformParams(code_length=16, pulses_per_cpi=8)
    mag = np.zeros((16, 8))
    mag[4, 2] = 10.0
    mag[4, 3] = 9.0     # neighbor of the first peak: suppressed
    mag[10, 6] = 5.0
    dets = extract_peaks(RangeDopplerMap(mag.astype(complex)), 2, 1, wf)
    assert [(d.range_bin, d.doppler_bin) for d in dets] == [(4, 2), (10, 6)]
    # bin 4 -> 4 * c / (2B) = 5 m
    assert dets[0].range_m == pytest.approx(4 * 1.25, rel=1e-12)
    with pytest.raises(EvaluationError):
        extract_peaks(RangeDopplerMap(mag.astype(complex)), 0, 1, wf)


def test_extract_peaks_ties_resolve_to_lower_bins():
    wf = WaveformParams(code_length=8, pulses_per_cpi=4)
    mag = np.zeros((8, 4))
    mag[2, 1] = 1.0
    mag[6, 3] = 1.0
    dets = extract_peaks(RangeDopplerMap(mag.astype(complex)), 1, 1, wf)
    assert (dets[0].range_bin, dets[0].doppler_bin) == (2, 1)


def test_detection_velocity_wraps_to_signed_doppler():
    wf = WaveformParams(code_length=8, pulses_per_cpi=8)
    mag = np.zeros((8, 8))
    mag[1, 7] = 1.0     # highest Doppler bin = frequency bin -1
    dets = extract_peaks(RangeDopplerMap(mag.astype(complex)), 1, 0, wf)
    expected = (-1 / (8 * wf.pulse_s)) * wf.light_speed / (2 * wf.carrier_hz)
    assert dets[0].velocity_mps == pytest.approx(expected, rel=1e-12)


def test_score_hits_matches_within_range_resolution():
    wf = WaveformParams()   # resolution 1.25 m
    truth = [Target(range_to_c1=20.0, range_to_c2=30.0),
             Target(range_to_c1=50.0, range_to_c2=60.0)]
    hits = score_hits([
        Detection(range_m=20.6, velocity_mps=0, magnitude=1,
                  range_bin=0, doppler_bin=0),
        Detection(range_m=52.0, velocity_mps=0, magnitude=1,
                  range_bin=0, doppler_bin=0),
    ], truth, wf)
    assert hits == 1    # 20.6 within 1.25 of 20; 52.0 misses 50 by 2 m
    # one detection cannot claim two targets
    close_truth = [Target(range_to_c1=20.0, range_to_c2=1.0),
                   Target(range_to_c1=20.5, range_to_c2=1.0)]
    hits = score_hits([Detection(range_m=20.2, velocity_mps=0, magnitude=1,
                                 range_bin=0, doppler_bin=0)],
                      close_truth, wf)
    assert hits == 1
    with pytest.raises(EvaluationError):
        score_hits([], [], wf)


def test_baseline_pipeline_detects_clean_target():
    wf = WaveformParams(code_length=64, pulses_per_cpi=16)
    scene = Scene(RadarNode("c1"), RadarNode("c2"),
                  (Target(range_to_c1=5.0, range_to_c2=10.0, velocity=10.0),))
    c1 = generate_code("random-binary", wf.code_length, 0)
    c2 = generate_code("random-binary", wf.code_length, 1)
    res = run_cpi(scene, wf, "noncooperative", seed=1, snr_db=30.0,
                  code_c1=c1, code_c2=c2)
    rd = process_baseline(res.cube_c1, c1)
    dets = extract_peaks(rd, 1, 1, wf)
    assert dets[0].range_bin == 4


def test_enhanced_map_outscores_baseline_at_target_bin():
    wf = WaveformParams(code_length=64, pulses_per_cpi=16)
    scene = Scene(RadarNode("c1"), RadarNode("c2"),
                  (Target(range_to_c1=5.0, range_to_c2=10.0, velocity=10.0),))
    c1 = generate_code("random-binary", wf.code_length, 0)
    c2 = generate_code("random-binary", wf.code_length, 1)
    base = run_cpi(scene, wf, "noncooperative", seed=2, snr_db=30.0,
                   code_c1=c1, code_c2=c2)
    enh = run_cpi(scene, wf, "collaborative", seed=2, snr_db=30.0,
                  code_c1=c1, code_c2=c2)
    row = 4
    mag_base = process_baseline(base.cube_c1, c1).magnitude[row].max()
    mag_enh = process_enhanced(enh.cube_c1, c1, c2).magnitude[row].max()
    assert mag_enh > mag_base


def test_hit_rate_sweep_shapes_and_bounds():
    cfg = small_config(trials=4, snr_grid_db=(0.0, 10.0))
    curve = run_hit_rate_sweep(cfg)
    assert curve.snr_points_db.shape == (2,)
    assert curve.hit_rate_baseline.shape == (2,)
    assert np.all((curve.hit_rate_baseline >= 0)
                  & (curve.hit_rate_baseline <= 1))
    assert np.all((curve.hit_rate_enhanced >= 0)
                  & (curve.hit_rate_enhanced <= 1))
    again = run_hit_rate_sweep(cfg)
    assert np.array_equal(curve.hit_rate_enhanced, again.hit_rate_enhanced)
    with pytest.raises(EvaluationError):
        run_hit_rate_sweep(small_config(trials=0))


def test_psl_experiment_report_keys_and_determinism():
    cfg = small_config(psl_seeds=3)
    rep = run_psl_experiment(cfg)
    for key in ("psl_baseline_db", "psl_enhanced_db", "improvement_db"):
        assert np.isfinite(rep[key])
    assert len(rep["per_seed_baseline_db"]) == 3
    rep2 = run_psl_experiment(cfg)
    assert rep == rep2
