"""CPI orchestration of the two-radar collaboration.

Collaborative mode follows the coordination schedule: pulse 1 the enhanced
radar transmits alone with the collaborator's code and captures its
self-echo; pulse 2 the collaborator transmits alone and the enhanced radar
captures the cross-path echo; the alignment weight is solved locally,
pushed through a (possibly lossy) side channel, and both radars transmit
simultaneously for the remaining pulses. Non-cooperative mode transmits
both codes on every pulse with no weighting.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .align import (AlignmentProblem, WeightMatrix,
                    solve_alignment_closed_form)
from .codes import Code
from .scene import ChannelParams, Scene, Target, WaveformParams, derive_channel
from .synth import DataCube, add_noise, combine_cubes, synthesize_cross_echo, \
    synthesize_self_echo

COORDINATION_PULSES = 2


class ProtocolError(ValueError):
    pass


@dataclass
class PulseAction:
    c1_transmits: str | None     # code id or None (silent)
    c2_transmits: str | None
    weighted: bool = False


@dataclass
class CpiSchedule:
    pulse_assignments: list
    coordination_pulses: int = COORDINATION_PULSES

    def trace(self) -> str:
        lines = []
        for i, a in enumerate(self.pulse_assignments):
            tx1 = f"c1({a.c1_transmits})" if a.c1_transmits else "c1(-)"
            code2 = a.c2_transmits
            if code2 and a.weighted:
                code2 = f"W*{code2}"
            tx2 = f"c2({code2})" if code2 else "c2(-)"
            lines.append(f"pulse {i + 1:03d}: {tx1} {tx2}")
        return "\n".join(lines)


def collaborative_schedule(m: int) -> CpiSchedule:
    actions = [PulseAction("c2", None), PulseAction(None, "c2")]
    actions += [PulseAction("c1", "c2", weighted=True)
                for _ in range(m - COORDINATION_PULSES)]
    return CpiSchedule(actions)


def noncooperative_schedule(m: int) -> CpiSchedule:
    return CpiSchedule([PulseAction("c1", "c2") for _ in range(m)],
                       coordination_pulses=0)


@dataclass
class SideChannel:
    """Wireless exchange model for the weight payload."""

    quantization_bits: int | None = None   # per real component of each entry
    drop_probability: float = 0.0
    latency_pulses: int = 0

    def __post_init__(self):
        if not (0.0 <= self.drop_probability <= 1.0):
            raise ProtocolError("drop_probability must be in [0, 1]")
        if self.latency_pulses < 0:
            raise ProtocolError("latency_pulses must be >= 0")

    def transfer(self, weight: WeightMatrix,
                 rng: np.random.Generator) -> WeightMatrix:
        """Quantize/drop the payload; a drop falls back to identity."""
        if self.drop_probability > 0 and \
                rng.random() < self.drop_probability:
            out = WeightMatrix.identity(weight.n)
            out.degraded = True
            return out
        if self.quantization_bits is None:
            return weight
        levels = 2 ** self.quantization_bits - 1
        # components of unit-modulus entries live in [-1, 1]
        q = np.round((weight.entries.real + 1.0) / 2.0 * levels) / levels * 2 - 1
        p = np.round((weight.entries.imag + 1.0) / 2.0 * levels) / levels * 2 - 1
        entries = q + 1j * p
        mag = np.abs(entries)
        entries = np.where(mag > 0, entries / np.where(mag > 0, mag, 1.0), 1.0)
        out = WeightMatrix(kind="diagonal", entries=entries,
                           solver_iterations=weight.solver_iterations)
        return out


def channel_payload_size(weight: WeightMatrix,
                         channel: SideChannel) -> int:
    """Exchange size in bytes (two real components per diagonal entry)."""
    bits = channel.quantization_bits if channel.quantization_bits else 32
    if weight.kind == "diagonal":
        return weight.n * 2 * bits // 8
    return weight.n * weight.n * 2 * bits // 8


def raw_cube_payload_size(wf: WaveformParams) -> int:
    """Cost of sharing a raw data cube instead (32-bit float components)."""
    return wf.code_length * wf.pulses_per_cpi * 2 * 4


@dataclass
class CpiResult:
    cube_c1: DataCube
    weight: WeightMatrix | None
    schedule: CpiSchedule
    channel: ChannelParams = None


def _perturbed_scene(scene: Scene, range_offset_m: float,
                     velocity_offset_mps: float) -> Scene:
    targets = tuple(
        replace(t,
                range_to_c1=max(t.range_to_c1 + range_offset_m, 1e-6),
                range_to_c2=max(t.range_to_c2 + range_offset_m, 1e-6),
                velocity=t.velocity + velocity_offset_mps)
        for t in scene.targets)
    return replace(scene, targets=targets)


def run_cpi(scene: Scene, wf: WaveformParams, mode: str,
            channel: SideChannel | None = None, seed: int = 0,
            snr_db: float = 10.0, code_c1: Code = None, code_c2: Code = None,
            coordination_noise: bool = False,
            stale_range_offset_m: float = 0.0,
            stale_velocity_offset_mps: float = 0.0) -> CpiResult:
    """Run one CPI at radar c1 and return its data cube.

    Collaborative mode spends the first two pulses on coordination, so the
    returned cube holds the remaining M-2 pulses; non-cooperative mode
    returns all M pulses. The coordination captures are noise-free by
    default (channel state assumed estimated); set ``coordination_noise``
    to study alignment under raw single-pulse estimates. Deterministic for
    a fixed argument set.
    """
    if mode not in ("noncooperative", "collaborative"):
        raise ProtocolError(f"unknown mode: {mode!r}")
    if channel is None:
        channel = SideChannel()
    m = wf.pulses_per_cpi
    if mode == "collaborative" and m < 3:
        raise ProtocolError("collaborative mode needs at least 3 pulses")
    if code_c1 is None or code_c2 is None:
        raise ProtocolError("both radar codes are required")

    seq = np.random.SeedSequence(seed)
    phase_seed, coord_seed, cube_seed, drop_seed = [
        int(s.generate_state(1)[0]) for s in seq.spawn(4)]
    chan = derive_channel(scene, wf, phase_seed=phase_seed)

    # SNR reference shared by both modes: peak self-echo sample over the CPI
    self_full = synthesize_self_echo(code_c1, chan, wf)
    ref_power = float(np.max(np.abs(self_full.samples)) ** 2)

    if mode == "noncooperative":
        cube = combine_cubes(self_full,
                             synthesize_cross_echo(code_c2, None, chan, wf))
        cube = add_noise(cube, snr_db, cube_seed, ref_power=ref_power)
        return CpiResult(cube, None, noncooperative_schedule(m), chan)

    # coordination captures; optionally against a stale channel estimate
    if stale_range_offset_m or stale_velocity_offset_mps:
        coord_scene = _perturbed_scene(scene, stale_range_offset_m,
                                       stale_velocity_offset_mps)
        coord_chan = derive_channel(coord_scene, wf, phase_seed=phase_seed)
    else:
        coord_chan = chan
    y_s = synthesize_self_echo(code_c2, coord_chan, wf,
                               pulse_indices=np.array([0]))
    y_c2 = synthesize_cross_echo(code_c2, None, coord_chan, wf,
                                 pulse_indices=np.array([1]))
    if coordination_noise:
        sub = np.random.SeedSequence(coord_seed).spawn(2)
        y_s = add_noise(y_s, snr_db, int(sub[0].generate_state(1)[0]),
                        ref_power=ref_power)
        y_c2 = add_noise(y_c2, snr_db, int(sub[1].generate_state(1)[0]),
                         ref_power=ref_power)
    problem = AlignmentProblem(self_echo=y_s.samples[:, 0],
                               cross_echo=y_c2.samples[:, 0],
                               code=code_c2, channel_hint=coord_chan)
    weight = solve_alignment_closed_form(problem)
    drop_rng = np.random.default_rng(drop_seed)
    delivered = channel.transfer(weight, drop_rng)

    pulses = np.arange(COORDINATION_PULSES, m)
    self_cube = DataCube(self_full.samples[:, COORDINATION_PULSES:],
                         components={"self":
                                     self_full.samples[:, COORDINATION_PULSES:]},
                         pulse_indices=pulses)
    identity_pulses = min(channel.latency_pulses, pulses.size)
    if identity_pulses:
        # weight arrives late: the first pulses go out unweighted
        early = synthesize_cross_echo(code_c2, None, chan, wf,
                                      pulse_indices=pulses[:identity_pulses])
        late = synthesize_cross_echo(code_c2, delivered, chan, wf,
                                     pulse_indices=pulses[identity_pulses:])
        cross = np.concatenate([early.samples, late.samples], axis=1)
        cross_cube = DataCube(cross, components={"cross": cross.copy()},
                              pulse_indices=pulses)
    else:
        cross_cube = synthesize_cross_echo(code_c2, delivered, chan, wf,
                                           pulse_indices=pulses)
    cube = combine_cubes(self_cube, cross_cube)
    cube = add_noise(cube, snr_db, cube_seed, ref_power=ref_power)
    return CpiResult(cube, delivered, collaborative_schedule(m), chan)
