"""Experiment configuration: a flat key = value file with repeatable
``target`` lines. Unknown keys are rejected; every value is validated
against the owning module's invariants at load time."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .protocol import SideChannel
from .scene import RadarNode, Scene, SceneError, Target, WaveformParams

DEFAULT_SNR_GRID = tuple(-15.0 + 3.0 * i for i in range(11))


class ConfigError(ValueError):
    pass


@dataclass
class SolverOptions:
    max_iter: int = 500
    tol: float = 1e-8
    step: float = 0.1


@dataclass
class ExperimentConfig:
    waveform: WaveformParams = field(default_factory=WaveformParams)
    scene: Scene = None
    mode: str = "collaborative"
    code_family: str = "random-binary"
    snr_db: float = 10.0
    snr_grid_db: tuple = DEFAULT_SNR_GRID
    trials: int = 1000
    master_seed: int = 1
    output_dir: str = "out"
    psl_seeds: int = 50
    psl_scene: tuple = (5.0, 10.0, 10.0)   # r1, r2, v of the reference target
    side_channel: SideChannel = field(default_factory=SideChannel)
    solver: SolverOptions = field(default_factory=SolverOptions)
    max_workers: int = 1
    source_text: str = ""

    def config_hash(self) -> str:
        return hashlib.sha256(self.source_text.encode()).hexdigest()[:16]


# key -> (section, attribute, parser)
def _float(v):
    return float(v)


def _int(v):
    return int(float(v))


def _optional_int(v):
    return None if v.lower() in ("none", "") else int(float(v))


_SCALARS = {
    "code_length": ("wf", "code_length", _int),
    "carrier_hz": ("wf", "carrier_hz", _float),
    "bandwidth_hz": ("wf", "bandwidth_hz", _float),
    "pulses_per_cpi": ("wf", "pulses_per_cpi", _int),
    "light_speed": ("wf", "light_speed", _float),
    "radar1_velocity": ("scene", "v1", _float),
    "radar2_velocity": ("scene", "v2", _float),
    "mode": ("top", "mode", str),
    "code_family": ("top", "code_family", str),
    "snr_db": ("top", "snr_db", _float),
    "trials": ("top", "trials", _int),
    "master_seed": ("top", "master_seed", _int),
    "output_dir": ("top", "output_dir", str),
    "psl_seeds": ("top", "psl_seeds", _int),
    "solver_max_iter": ("solver", "max_iter", _int),
    "solver_tol": ("solver", "tol", _float),
    "solver_step": ("solver", "step", _float),
    "quantization_bits": ("chan", "quantization_bits", _optional_int),
    "drop_probability": ("chan", "drop_probability", _float),
    "latency_pulses": ("chan", "latency_pulses", _int),
    "max_workers": ("top", "max_workers", _int),
}


def parse_config(text: str) -> ExperimentConfig:
    wf_kw: dict = {}
    top_kw: dict = {}
    solver_kw: dict = {}
    chan_kw: dict = {}
    scene_kw = {"v1": 0.0, "v2": 0.0}
    snr_grid = None
    targets = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "target":
                parts = [float(p) for p in value.replace(",", " ").split()]
                if len(parts) not in (3, 5, 6, 7):
                    raise ValueError(
                        "target needs r1 r2 v [theta1 theta2 [alpha_re [alpha_im]]]")
                r1, r2, v = parts[:3]
                th1, th2 = (parts[3], parts[4]) if len(parts) >= 5 else (0.0, 0.0)
                a_re = parts[5] if len(parts) >= 6 else 1.0
                a_im = parts[6] if len(parts) >= 7 else 0.0
                targets.append(Target(range_to_c1=r1, range_to_c2=r2,
                                      velocity=v, angle_to_c1=th1,
                                      angle_to_c2=th2,
                                      reflectivity=complex(a_re, a_im)))
            elif key == "snr_grid_db":
                snr_grid = tuple(float(p) for p in
                                 value.replace(",", " ").split())
                if not snr_grid:
                    raise ValueError("snr_grid_db must list at least one value")
            elif key == "psl_scene":
                parts = [float(p) for p in value.replace(",", " ").split()]
                if len(parts) != 3:
                    raise ValueError("psl_scene needs r1 r2 v")
                top_kw["psl_scene"] = tuple(parts)
            elif key in _SCALARS:
                section, attr, parser = _SCALARS[key]
                parsed = parser(value)
                {"wf": wf_kw, "top": top_kw, "solver": solver_kw,
                 "chan": chan_kw, "scene": scene_kw}[section][attr] = parsed
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except (ValueError, SceneError) as exc:
            raise ConfigError(f"line {lineno}: field {key!r}: {exc}") from exc

    try:
        wf = WaveformParams(**wf_kw)
    except SceneError as exc:
        bad = next(iter(wf_kw)) if wf_kw else "waveform"
        raise ConfigError(f"field {bad!r}: {exc}") from exc
    if not targets:
        targets = [Target(range_to_c1=5.0, range_to_c2=10.0, velocity=10.0)]
    scene = Scene(RadarNode("c1", velocity=scene_kw["v1"]),
                  RadarNode("c2", velocity=scene_kw["v2"]),
                  tuple(targets))
    try:
        side = SideChannel(**chan_kw)
    except ValueError as exc:
        raise ConfigError(f"field 'drop_probability': {exc}") from exc
    cfg = ExperimentConfig(waveform=wf, scene=scene,
                           side_channel=side,
                           solver=SolverOptions(**solver_kw),
                           source_text=text, **top_kw)
    if snr_grid is not None:
        cfg.snr_grid_db = snr_grid
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.mode not in ("noncooperative", "collaborative"):
        raise ConfigError(f"field 'mode': must be noncooperative or "
                          f"collaborative, got {cfg.mode!r}")
    if cfg.code_family not in ("random-binary", "polyphase"):
        raise ConfigError(f"field 'code_family': unsupported {cfg.code_family!r}")
    if cfg.trials < 1:
        raise ConfigError("field 'trials': must be >= 1")
    if cfg.psl_seeds < 1:
        raise ConfigError("field 'psl_seeds': must be >= 1")
    if cfg.max_workers < 1:
        raise ConfigError("field 'max_workers': must be >= 1")
    if not math.isfinite(cfg.snr_db):
        raise ConfigError("field 'snr_db': must be finite")
    if cfg.solver.max_iter < 1 or cfg.solver.tol <= 0 or cfg.solver.step <= 0:
        raise ConfigError("field 'solver_*': max_iter >= 1, tol > 0, step > 0")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
