"""Range-Doppler processing tests with direct-summation oracles."""
import numpy as np
import pytest

from ciradar import (Code, DataCube, ProcessingError, RadarNode,
                     RangeDopplerMap, RangeProfileMatrix, Scene, Target,
                     WaveformParams, correlate_fast_time, cut_sidelobe_db,
                     derive_channel, doppler_dft, fuse_noncoherent,
                     generate_code, peak_sidelobe_level, save_map_csv,
                     save_map_pgm, synthesize_self_echo)
from ciradar.rdproc import PSL_FLOOR_DB


def brute_correlate(samples, code):
    """values[l, m] = sum_p samples[p, m] conj(code[(p - l) mod N])."""
    n, m = samples.shape
    out = np.zeros((n, m), dtype=complex)
    for l in range(n):
        ref = np.conj(np.roll(code, l))
        out[l] = samples.T @ ref
    return out


def test_cyclic_correlation_matches_direct_summation():
    rng = np.random.default_rng(0)
    n, m = 32, 6
    samples = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    code = generate_code("random-binary", n, 1)
    prof = correlate_fast_time(DataCube(samples), code, "cyclic")
    ref = brute_correlate(samples, code.samples)
    assert np.allclose(prof.values, ref, rtol=1e-10, atol=1e-12)


def test_linear_correlation_keeps_nonnegative_lags():
    rng = np.random.default_rng(1)
    n, m = 16, 3
    samples = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    code = generate_code("random-binary", n, 2)
    prof = correlate_fast_time(DataCube(samples), code, "linear")
    for mi in range(m):
        full = np.correlate(samples[:, mi], code.samples, mode="full")
        assert np.allclose(prof.values[:, mi], full[n - 1:])
    with pytest.raises(ProcessingError):
        correlate_fast_time(DataCube(samples), code, "nope")


def test_matched_filter_peaks_at_target_shift_with_full_gain():
    wf = WaveformParams(code_length=64, pulses_per_cpi=4)
    scene = Scene(RadarNode("c1"), RadarNode("c2"),
                  (Target(range_to_c1=5.0, range_to_c2=10.0, velocity=0.0),))
    chan = derive_channel(scene, wf)
    code = generate_code("random-binary", wf.code_length, 0)
    cube = synthesize_self_echo(code, chan, wf)
    prof = correlate_fast_time(cube, code)
    shift = int(chan.self_chip_shift[0])
    peak = np.abs(prof.values[shift, 0])
    expected = wf.code_length * np.abs(chan.self_amplitudes()[0])
    assert peak == pytest.approx(expected, rel=1e-12)
    assert np.argmax(np.abs(prof.values[:, 0])) == shift


def test_doppler_dft_matches_naive_sum_and_parseval():
    rng = np.random.default_rng(2)
    n, m = 8, 16
    vals = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    rd = doppler_dft(RangeProfileMatrix(vals))
    w = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    naive = vals @ w
    assert np.allclose(rd.values, naive, rtol=1e-10, atol=1e-12)
    assert np.sum(np.abs(rd.values) ** 2) == pytest.approx(
        m * np.sum(np.abs(vals) ** 2), rel=1e-12)
    with pytest.raises(ProcessingError):
        doppler_dft(RangeProfileMatrix(vals[:, :1]))


def test_fusion_is_magnitude_sum():
    rng = np.random.default_rng(3)
    a = RangeDopplerMap(rng.standard_normal((4, 4))
                        + 1j * rng.standard_normal((4, 4)))
    b = RangeDopplerMap(rng.standard_normal((4, 4))
                        + 1j * rng.standard_normal((4, 4)))
    fused = fuse_noncoherent(a, b)
    assert np.allclose(fused.values, np.abs(a.values) + np.abs(b.values))
    with pytest.raises(ProcessingError):
        fuse_noncoherent(a, RangeDopplerMap(np.ones((4, 5))))


def test_peak_sidelobe_level_on_constructed_map():
    mag = np.full((16, 8), 0.01)
    mag[5, 3] = 1.0       # peak
    mag[5, 4] = 0.6       # inside the +-1 exclusion window
    mag[9, 1] = 0.1       # the true sidelobe
    rd = RangeDopplerMap(mag.astype(complex))
    assert peak_sidelobe_level(rd, 1) == pytest.approx(-20.0, abs=1e-9)
    # widening the window only removes cells near the peak
    assert peak_sidelobe_level(rd, 2) == pytest.approx(-20.0, abs=1e-9)
    with pytest.raises(ProcessingError):
        peak_sidelobe_level(rd, 100)


def test_exclusion_window_wraps_around_edges():
    mag = np.full((8, 8), 1e-6)
    mag[0, 0] = 1.0
    mag[7, 7] = 0.5       # wrap-adjacent to the peak: must be excluded
    mag[4, 4] = 0.25
    rd = RangeDopplerMap(mag.astype(complex))
    assert peak_sidelobe_level(rd, 1) == pytest.approx(
        20 * np.log10(0.25), abs=1e-9)


def test_cut_sidelobe_db_reference_and_floor():
    cut = np.array([1.0, 0.0, 0.1, 0.0, 0.0])
    assert cut_sidelobe_db(cut, 0) == pytest.approx(-20.0, abs=1e-9)
    # external reference rescales the ratio
    assert cut_sidelobe_db(cut, 0, reference=10.0) == pytest.approx(
        -40.0, abs=1e-9)
    assert cut_sidelobe_db(np.array([1.0, 0, 0, 0, 0]), 0) == PSL_FLOOR_DB


def test_magnitude_db_is_peak_normalized():
    rd = RangeDopplerMap(np.array([[2.0, 1.0], [0.5, 0.2]], dtype=complex))
    db = rd.magnitude_db
    assert db[0, 0] == 0.0
    assert db[0, 1] == pytest.approx(-20 * np.log10(2.0), abs=1e-9)
    zero = RangeDopplerMap(np.zeros((2, 2), dtype=complex))
    assert np.all(zero.magnitude_db == PSL_FLOOR_DB)


def test_peak_list_orders_by_magnitude():
    mag = np.zeros((4, 4))
    mag[1, 2] = 3.0
    mag[0, 0] = 2.0
    mag[3, 3] = 1.0
    rd = RangeDopplerMap(mag.astype(complex))
    top = rd.peak_list(3)
    assert [(r, d) for r, d, _ in top] == [(1, 2), (0, 0), (3, 3)]


def test_map_serialization_formats(tmp_path):
    rng = np.random.default_rng(4)
    rd = RangeDopplerMap(rng.standard_normal((6, 5))
                         + 1j * rng.standard_normal((6, 5)))
    csv_path = tmp_path / "map.csv"
    save_map_csv(rd, csv_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "range_bin,doppler_bin,magnitude_db"
    assert len(lines) == 1 + 6 * 5
    pgm_path = tmp_path / "map.pgm"
    save_map_pgm(rd, pgm_path)
    blob = pgm_path.read_bytes()
    assert blob.startswith(b"P5\n5 6\n255\n")
    assert len(blob) == len(b"P5\n5 6\n255\n") + 30
