"""Sampled baseband echo synthesis.

Builds the N x M fast-time/slow-time receive matrices: monostatic
self-echoes, bistatic cross-path echoes (optionally premultiplied by a
transmit weight), and circularly-symmetric Gaussian noise. One sample per
chip; code shifts are cyclic (periodic continuous-wave modulation).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .align import WeightMatrix
from .codes import Code
from .scene import ChannelParams, WaveformParams


class SynthesisError(ValueError):
    pass


@dataclass
class DataCube:
    """Fast-time x slow-time sample matrix for one receiver over one CPI."""

    samples: np.ndarray                     # (N, M) complex
    receiver_id: str = "c1"
    components: dict = field(default_factory=dict)  # optional self/cross/noise
    pulse_indices: np.ndarray = None        # absolute slow-time index per column

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 2:
            raise SynthesisError(f"cube must be 2-D, got shape {self.samples.shape}")
        if self.pulse_indices is None:
            self.pulse_indices = np.arange(self.samples.shape[1])

    @property
    def n_fast(self) -> int:
        return self.samples.shape[0]

    @property
    def n_slow(self) -> int:
        return self.samples.shape[1]


def _shifted_code_columns(code: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """(N, K) matrix of cyclically shifted copies c[(n - shift_k) mod N]."""
    n = code.size
    idx = (np.arange(n)[:, None] - shifts[None, :]) % n
    return code[idx]


def _synthesize(code: Code, shifts: np.ndarray, dopplers: np.ndarray,
                amplitudes: np.ndarray, wf: WaveformParams,
                weight: WeightMatrix | None,
                pulse_indices: np.ndarray) -> np.ndarray:
    n = wf.code_length
    if len(code) != n:
        raise SynthesisError(f"code length {len(code)} != configured N {n}")
    cols = _shifted_code_columns(code.samples, shifts)      # (N, K)
    if weight is not None:
        cols = weight.apply_matrix(cols)
        dev = np.max(np.abs(np.abs(cols) - 1.0))
        if dev > 1e-6:
            raise SynthesisError(
                f"weighted shifted code not unimodular: max deviation {dev:.3e}")
    t_fast = np.arange(n)[:, None] * wf.chip_s              # (N, 1)
    fast = np.exp(-2j * np.pi * t_fast * dopplers[None, :])  # (N, K)
    slow = np.exp(2j * np.pi * wf.pulse_s
                  * np.outer(dopplers, pulse_indices))       # (K, M)
    return (cols * fast * amplitudes[None, :]) @ slow        # (N, M)


def synthesize_self_echo(code: Code, chan: ChannelParams, wf: WaveformParams,
                         pulse_indices: np.ndarray | None = None) -> DataCube:
    """Monostatic echo cube: shifted own code, self Doppler, 1/r^4 gains."""
    m_idx = np.arange(wf.pulses_per_cpi) if pulse_indices is None \
        else np.asarray(pulse_indices)
    samples = _synthesize(code, chan.self_chip_shift, chan.self_doppler_hz,
                          chan.self_amplitudes(), wf, None, m_idx)
    return DataCube(samples, components={"self": samples.copy()},
                    pulse_indices=m_idx)


def synthesize_cross_echo(code: Code, weight: WeightMatrix | None,
                          chan: ChannelParams, wf: WaveformParams,
                          pulse_indices: np.ndarray | None = None) -> DataCube:
    """Bistatic echo cube from the collaborating radar's transmission.

    Uses the combined-range chip shifts, the cross-path Doppler and the
    1/(r1^2 r2^2) gains; with ``weight`` given, each shifted code column is
    premultiplied by the transmit weight before synthesis.
    """
    m_idx = np.arange(wf.pulses_per_cpi) if pulse_indices is None \
        else np.asarray(pulse_indices)
    samples = _synthesize(code, chan.cross_chip_shift, chan.cross_doppler_hz,
                          chan.cross_amplitudes(), wf, weight, m_idx)
    return DataCube(samples, components={"cross": samples.copy()},
                    pulse_indices=m_idx)


def combine_cubes(*cubes: DataCube) -> DataCube:
    """Elementwise sum, merging component labels."""
    shapes = {c.samples.shape for c in cubes}
    if len(shapes) != 1:
        raise SynthesisError(f"cube shape mismatch: {shapes}")
    total = sum(c.samples for c in cubes)
    components = {}
    for c in cubes:
        components.update(c.components)
    return DataCube(total, receiver_id=cubes[0].receiver_id,
                    components=components, pulse_indices=cubes[0].pulse_indices)


def add_noise(cube: DataCube, snr_db: float, rng_seed: int,
              ref_power: float | None = None) -> DataCube:
    """Add CSCG white noise at the given SNR.

    The SNR reference is the peak per-sample power of the self-echo
    component (falling back to the cube's own peak), so snr_db is the
    per-sample SNR of the strongest monostatic return.

    Noise is drawn on the full 0..max(pulse_indices) slow-time grid and
    sliced to the cube's columns, so cubes covering different pulse
    subsets of the same CPI see identical per-pulse realizations.
    """
    if not np.isfinite(snr_db):
        raise SynthesisError("snr_db must be finite")
    if ref_power is None:
        ref = cube.components.get("self", cube.samples)
        ref_power = float(np.max(np.abs(ref)) ** 2)
    if ref_power == 0.0:
        raise SynthesisError("SNR undefined for an all-zero cube")
    var = ref_power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(rng_seed)
    scale = np.sqrt(var / 2.0)
    grid = int(np.max(cube.pulse_indices)) + 1
    full = scale * (rng.standard_normal((cube.n_fast, grid))
                    + 1j * rng.standard_normal((cube.n_fast, grid)))
    noise = full[:, np.asarray(cube.pulse_indices)]
    components = dict(cube.components)
    components["noise"] = noise
    return DataCube(cube.samples + noise, receiver_id=cube.receiver_id,
                    components=components, pulse_indices=cube.pulse_indices)


def save_cube_csv(cube: DataCube, path) -> None:
    with open(path, "w", newline="") as f:
        f.write("n,m,re,im\n")
        for n in range(cube.n_fast):
            for m in range(cube.n_slow):
                v = cube.samples[n, m]
                f.write(f"{n},{m},{float(v.real)!r},{float(v.imag)!r}\n")
