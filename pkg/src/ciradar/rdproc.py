"""Range-Doppler processing: fast-time correlation, slow-time DFT,
non-coherent fusion, and peak/sidelobe metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import Code
from .synth import DataCube

PSL_FLOOR_DB = -300.0


class ProcessingError(ValueError):
    pass


@dataclass
class RangeProfileMatrix:
    values: np.ndarray          # (N range bins, M pulses) complex
    reference_code: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2:
            raise ProcessingError("range profile must be 2-D")


@dataclass
class RangeDopplerMap:
    values: np.ndarray          # (N range bins, M Doppler bins)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or self.values.size == 0:
            raise ProcessingError("map must be a nonempty 2-D matrix")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def magnitude_db(self) -> np.ndarray:
        mag = self.magnitude
        peak = mag.max()
        if peak == 0.0:
            return np.full(mag.shape, PSL_FLOOR_DB)
        return 20.0 * np.log10(np.maximum(mag / peak, 1e-300))

    def peak_list(self, k: int = 10) -> list[tuple[int, int, float]]:
        """Top-k cells by magnitude as (range_bin, doppler_bin, magnitude)."""
        mag = self.magnitude
        flat = np.argsort(mag, axis=None)[::-1][:k]
        out = []
        for f in flat:
            n, w = np.unravel_index(f, mag.shape)
            out.append((int(n), int(w), float(mag[n, w])))
        return out


def correlate_fast_time(cube: DataCube, code: Code,
                        mode: str = "cyclic") -> RangeProfileMatrix:
    """Matched-filter each pulse: values[n, m] = sum_p cube[p, m] conj(code[p - n]).

    Cyclic mode wraps the code periodically (FFT-based); linear mode keeps
    the nonnegative lags 0..N-1 of the linear correlation.
    """
    if len(code) != cube.n_fast:
        raise ProcessingError(
            f"code length {len(code)} != cube fast-time size {cube.n_fast}")
    if mode == "cyclic":
        spectrum = np.fft.fft(cube.samples, axis=0) * \
            np.conj(np.fft.fft(code.samples))[:, None]
        values = np.fft.ifft(spectrum, axis=0)
    elif mode == "linear":
        n = cube.n_fast
        values = np.empty_like(cube.samples)
        for m in range(cube.n_slow):
            full = np.correlate(cube.samples[:, m], code.samples, mode="full")
            values[:, m] = full[n - 1:]
    else:
        raise ProcessingError(f"unknown correlation mode: {mode!r}")
    return RangeProfileMatrix(values, reference_code=code.family_id)


def doppler_dft(profile: RangeProfileMatrix) -> RangeDopplerMap:
    """Bare row-wise DFT over pulses (no window)."""
    if profile.values.shape[1] < 2:
        raise ProcessingError("Doppler DFT needs at least 2 pulses")
    return RangeDopplerMap(np.fft.fft(profile.values, axis=1))


def fuse_noncoherent(map_a: RangeDopplerMap,
                     map_b: RangeDopplerMap) -> RangeDopplerMap:
    """Magnitude sum of two maps (phase discarded)."""
    if map_a.values.shape != map_b.values.shape:
        raise ProcessingError(
            f"map shape mismatch: {map_a.values.shape} vs {map_b.values.shape}")
    return RangeDopplerMap(map_a.magnitude + map_b.magnitude)


def _excluded_mask(shape: tuple[int, int], center: tuple[int, int],
                   exclusion: int) -> np.ndarray:
    """True on cells within +-exclusion bins of center, wrap-aware."""
    n, m = shape
    dn = np.abs((np.arange(n) - center[0] + n // 2) % n - n // 2)
    dm = np.abs((np.arange(m) - center[1] + m // 2) % m - m // 2)
    return (dn[:, None] <= exclusion) & (dm[None, :] <= exclusion)


def peak_sidelobe_level(rd_map: RangeDopplerMap,
                        mainlobe_exclusion: int = 1) -> float:
    """Max magnitude outside the mainlobe window, in dB below the global peak."""
    if mainlobe_exclusion < 0:
        raise ProcessingError("exclusion must be >= 0")
    mag = rd_map.magnitude
    peak_idx = np.unravel_index(np.argmax(mag), mag.shape)
    mask = _excluded_mask(mag.shape, peak_idx, mainlobe_exclusion)
    if mask.all():
        raise ProcessingError("exclusion window covers the entire map")
    peak = mag[peak_idx]
    side = mag[~mask].max()
    if peak == 0.0 or side == 0.0:
        return PSL_FLOOR_DB
    return max(20.0 * np.log10(side / peak), PSL_FLOOR_DB)


def cut_sidelobe_db(cut: np.ndarray, peak_bin: int, exclusion: int = 1,
                    reference: float | None = None) -> float:
    """PSL of a 1-D range cut relative to ``reference`` (default: own peak)."""
    mag = np.abs(np.asarray(cut))
    n = mag.size
    d = np.abs((np.arange(n) - peak_bin + n // 2) % n - n // 2)
    side = mag[d > exclusion].max()
    ref = mag[peak_bin] if reference is None else reference
    if ref == 0.0 or side == 0.0:
        return PSL_FLOOR_DB
    return max(20.0 * np.log10(side / ref), PSL_FLOOR_DB)


def save_map_csv(rd_map: RangeDopplerMap, path) -> None:
    db = rd_map.magnitude_db
    with open(path, "w", newline="") as f:
        f.write("range_bin,doppler_bin,magnitude_db\n")
        for n in range(db.shape[0]):
            for w in range(db.shape[1]):
                f.write(f"{n},{w},{db[n, w]:.6f}\n")


def save_map_pgm(rd_map: RangeDopplerMap, path, floor_db: float = -60.0) -> None:
    """Grayscale raster of the dB map (portable graymap, 0 = floor, 255 = peak)."""
    db = np.clip(rd_map.magnitude_db, floor_db, 0.0)
    gray = np.round((db - floor_db) / (-floor_db) * 255.0).astype(np.uint8)
    n, m = gray.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{m} {n}\n255\n".encode())
        f.write(gray.tobytes())
