"""Radar/target kinematics and derived channel parameters.

Everything the echo synthesis needs is precomputed here: relative radial
velocities, self/cross Doppler frequencies, chip shifts from the
monostatic and bistatic delays, and the 1/r^4 vs 1/(r1^2 r2^2) path gains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LIGHT_SPEED = 3e8


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class RadarNode:
    id: str                    # "c1" or "c2"
    velocity: float = 0.0      # m/s along the common motion axis
    code_ref: str = ""

    def __post_init__(self):
        if self.id not in ("c1", "c2"):
            raise SceneError(f"radar id must be c1 or c2, got {self.id!r}")
        if not math.isfinite(self.velocity):
            raise SceneError("radar velocity must be finite")


@dataclass(frozen=True)
class Target:
    range_to_c1: float         # r_k1 > 0, meters
    range_to_c2: float         # r_k2 > 0, meters
    velocity: float = 0.0      # m/s
    angle_to_c1: float = 0.0   # radians, [0, pi)
    angle_to_c2: float = 0.0
    reflectivity: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (self.range_to_c1 > 0 and self.range_to_c2 > 0):
            raise SceneError("target ranges must be strictly positive")
        for a in (self.angle_to_c1, self.angle_to_c2):
            if not (0.0 <= a < math.pi):
                raise SceneError(f"angle {a} outside [0, pi)")
        vals = [self.range_to_c1, self.range_to_c2, self.velocity,
                self.angle_to_c1, self.angle_to_c2,
                abs(self.reflectivity)]
        if not all(math.isfinite(v) for v in vals):
            raise SceneError("non-finite target parameter")


@dataclass(frozen=True)
class Scene:
    radar_c1: RadarNode
    radar_c2: RadarNode
    targets: tuple[Target, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise SceneError("scene needs at least one target")


@dataclass(frozen=True)
class WaveformParams:
    carrier_hz: float = 77e9
    bandwidth_hz: float = 120e6
    code_length: int = 256       # N chips per pulse
    pulses_per_cpi: int = 128    # M
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise SceneError("carrier_hz and bandwidth_hz must be positive")
        if self.code_length < 2 or self.pulses_per_cpi < 1:
            raise SceneError("code_length >= 2 and pulses_per_cpi >= 1 required")

    @property
    def chip_s(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def pulse_s(self) -> float:
        return self.code_length * self.chip_s

    @property
    def range_resolution_m(self) -> float:
        return self.light_speed / (2.0 * self.bandwidth_hz)


@dataclass
class ChannelParams:
    """Per-target derived channel values, one array entry per target."""

    self_doppler_hz: np.ndarray      # f_d of the monostatic path at c1
    cross_doppler_hz: np.ndarray     # f_d of the bistatic c2->target->c1 path
    self_chip_shift: np.ndarray      # integer chips
    cross_chip_shift: np.ndarray
    bistatic_range_m: np.ndarray     # r_k1 + r_k2
    self_gain: np.ndarray            # power gain, g0 / r1^4
    cross_gain: np.ndarray           # power gain, g0 / (r1^2 r2^2)
    radial_velocity_mps: np.ndarray  # (v_k - v_1) cos(theta_k1)
    self_phase: np.ndarray           # absorbed constant phase, radians
    cross_phase: np.ndarray
    reflectivity: np.ndarray

    @property
    def num_targets(self) -> int:
        return self.self_chip_shift.size

    def self_amplitudes(self) -> np.ndarray:
        """Complex amplitude of each target on the monostatic path."""
        return (self.reflectivity * np.sqrt(self.self_gain)
                * np.exp(1j * self.self_phase))

    def cross_amplitudes(self) -> np.ndarray:
        return (self.reflectivity * np.sqrt(self.cross_gain)
                * np.exp(1j * self.cross_phase))


def _ceil_snapped(x: float) -> int:
    """ceil with snapping of near-integer float noise (e.g. 4.0000000001 -> 4)."""
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, abs(x)):
        return int(nearest)
    return int(math.ceil(x))


def path_gains(target: Target, g0: float = 1.0) -> tuple[float, float]:
    """Power gains of the self and cross paths; amplitudes are the sqrt."""
    r1, r2 = target.range_to_c1, target.range_to_c2
    return g0 / r1 ** 4, g0 / (r1 ** 2 * r2 ** 2)


def derive_channel(scene: Scene, wf: WaveformParams,
                   phase_seed: int | None = None) -> ChannelParams:
    """Compute every synthesis parameter for all targets in the scene.

    With ``phase_seed`` set, the constant phase absorbed into each
    reflection coefficient is drawn uniformly in [0, 2pi) per target and
    per path; with None both absorbed phases are zero.
    """
    c = wf.light_speed
    tc = wf.chip_s
    v1 = scene.radar_c1.velocity
    v2 = scene.radar_c2.velocity
    k = len(scene.targets)

    self_fd = np.empty(k)
    cross_fd = np.empty(k)
    self_shift = np.empty(k, dtype=np.int64)
    cross_shift = np.empty(k, dtype=np.int64)
    bistatic = np.empty(k)
    sgain = np.empty(k)
    xgain = np.empty(k)
    vrad = np.empty(k)
    refl = np.empty(k, dtype=np.complex128)

    for i, t in enumerate(scene.targets):
        vk1 = (t.velocity - v1) * math.cos(t.angle_to_c1)
        self_fd[i] = 2.0 * vk1 * wf.carrier_hz / c
        cross_fd[i] = ((2.0 * t.velocity - (v1 + v2))
                       * math.cos(t.angle_to_c1) * wf.carrier_hz / c)
        self_shift[i] = _ceil_snapped(2.0 * t.range_to_c1 / (c * tc))
        r12 = t.range_to_c1 + t.range_to_c2
        cross_shift[i] = _ceil_snapped(r12 / (c * tc))
        bistatic[i] = r12
        sgain[i], xgain[i] = path_gains(t)
        vrad[i] = vk1
        refl[i] = t.reflectivity

    if phase_seed is None:
        sphase = np.zeros(k)
        xphase = np.zeros(k)
    else:
        rng = np.random.default_rng(phase_seed)
        sphase = rng.uniform(0.0, 2.0 * np.pi, size=k)
        xphase = rng.uniform(0.0, 2.0 * np.pi, size=k)

    return ChannelParams(
        self_doppler_hz=self_fd,
        cross_doppler_hz=cross_fd,
        self_chip_shift=self_shift,
        cross_chip_shift=cross_shift,
        bistatic_range_m=bistatic,
        self_gain=sgain,
        cross_gain=xgain,
        radial_velocity_mps=vrad,
        self_phase=sphase,
        cross_phase=xphase,
        reflectivity=refl,
    )
