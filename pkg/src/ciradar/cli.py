"""Command-line entry point.

Subcommands: simulate (one CPI in both modes with map artifacts), sweep
(hit-rate vs SNR curve), psl (sidelobe comparison report), codes
(correlation audit). Every run writes its artifacts plus a manifest under
the configured output directory.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .align import save_weight_csv
from .codes import cross_correlate, generate_code, save_code_csv
from .config import ConfigError, ExperimentConfig, load_config
from .evaluate import (extract_peaks, process_baseline, process_enhanced,
                       run_hit_rate_sweep, run_psl_experiment)
from .protocol import channel_payload_size, raw_cube_payload_size, run_cpi
from .rdproc import save_map_csv, save_map_pgm


class _ArtifactWriter:
    """Tracks every file written so the manifest is complete by construction."""

    def __init__(self, outdir: Path, config: ExperimentConfig):
        self.outdir = outdir
        self.config = config
        self.files: list[str] = []
        outdir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.outdir / name

    def header_lines(self) -> list[str]:
        return [f"# config_hash={self.config.config_hash()}",
                f"# master_seed={self.config.master_seed}",
                f"# version=ciradar-{__version__}"]

    def write_manifest(self) -> Path:
        path = self.outdir / "manifest.txt"
        with open(path, "w") as f:
            for line in self.header_lines():
                f.write(line + "\n")
            for name in sorted(self.files):
                f.write(name + "\n")
        return path


def _cmd_simulate(cfg: ExperimentConfig, out: _ArtifactWriter) -> None:
    wf = cfg.waveform
    c1 = generate_code(cfg.code_family, wf.code_length, cfg.master_seed)
    c2 = generate_code(cfg.code_family, wf.code_length, cfg.master_seed + 1)
    results = {}
    for mode in ("noncooperative", "collaborative"):
        res = run_cpi(cfg.scene, wf, mode, cfg.side_channel,
                      seed=cfg.master_seed, snr_db=cfg.snr_db,
                      code_c1=c1, code_c2=c2)
        tag = "baseline" if mode == "noncooperative" else "enhanced"
        results[tag] = res
        map_self = process_baseline(res.cube_c1, c1)
        map_fused = process_enhanced(res.cube_c1, c1, c2)
        for kind, rd_map in (("complex", map_self), ("fused", map_fused)):
            save_map_csv(rd_map, out.path(f"map_{tag}_{kind}.csv"))
            save_map_pgm(rd_map, out.path(f"map_{tag}_{kind}.pgm"))
        peaks = extract_peaks(map_fused if tag == "enhanced" else map_self,
                              len(cfg.scene.targets), 1, wf)
        with open(out.path(f"peaks_{tag}.csv"), "w") as f:
            f.write("range_bin,doppler_bin,range_m,velocity_mps,magnitude\n")
            for d in peaks:
                f.write(f"{d.range_bin},{d.doppler_bin},{float(d.range_m)!r},"
                        f"{float(d.velocity_mps)!r},{float(d.magnitude)!r}\n")
        with open(out.path(f"schedule_{tag}.txt"), "w") as f:
            f.write(res.schedule.trace() + "\n")
    weight = results["enhanced"].weight
    save_weight_csv(weight, out.path("weight.csv"))
    with open(out.path("summary.txt"), "w") as f:
        for line in out.header_lines():
            f.write(line + "\n")
        f.write(f"weight_payload_bytes="
                f"{channel_payload_size(weight, cfg.side_channel)}\n")
        f.write(f"raw_cube_payload_bytes={raw_cube_payload_size(wf)}\n")
        f.write(f"alignment_residual={float(weight.objective_residual)!r}\n")
    print(f"simulate: artifacts in {out.outdir}")


def _cmd_sweep(cfg: ExperimentConfig, out: _ArtifactWriter) -> None:
    curve = run_hit_rate_sweep(cfg)
    with open(out.path("hit_rate_curve.csv"), "w") as f:
        for line in out.header_lines():
            f.write(line + "\n")
        f.write(f"# trials={curve.trials}\n")
        f.write("snr_db,hit_rate_baseline,hit_rate_enhanced\n")
        for s, b, e in zip(curve.snr_points_db, curve.hit_rate_baseline,
                           curve.hit_rate_enhanced):
            f.write(f"{float(s)!r},{float(b)!r},{float(e)!r}\n")
    print("sweep: snr_db baseline enhanced")
    for s, b, e in zip(curve.snr_points_db, curve.hit_rate_baseline,
                       curve.hit_rate_enhanced):
        print(f"  {s:+6.1f}  {b:.3f}  {e:.3f}")


def _cmd_psl(cfg: ExperimentConfig, out: _ArtifactWriter) -> None:
    report = run_psl_experiment(cfg)
    with open(out.path("psl_report.csv"), "w") as f:
        for line in out.header_lines():
            f.write(line + "\n")
        f.write("metric,value_db\n")
        f.write(f"psl_baseline_db,{float(report['psl_baseline_db'])!r}\n")
        f.write(f"psl_enhanced_db,{float(report['psl_enhanced_db'])!r}\n")
        f.write(f"improvement_db,{float(report['improvement_db'])!r}\n")
    with open(out.path("psl_per_seed.csv"), "w") as f:
        f.write("seed_index,psl_baseline_db,psl_enhanced_db\n")
        for i, (b, e) in enumerate(zip(report["per_seed_baseline_db"],
                                       report["per_seed_enhanced_db"])):
            f.write(f"{i},{float(b)!r},{float(e)!r}\n")
    print(f"psl: baseline {report['psl_baseline_db']:.2f} dB, "
          f"enhanced {report['psl_enhanced_db']:.2f} dB, "
          f"improvement {report['improvement_db']:.2f} dB")


def _cmd_codes(cfg: ExperimentConfig, out: _ArtifactWriter) -> None:
    wf = cfg.waveform
    c1 = generate_code(cfg.code_family, wf.code_length, cfg.master_seed)
    c2 = generate_code(cfg.code_family, wf.code_length, cfg.master_seed + 1)
    save_code_csv(c1, out.path("code_c1.csv"))
    save_code_csv(c2, out.path("code_c2.csv"))
    report = cross_correlate(c1, c2, "cyclic")
    with open(out.path("correlation_report.csv"), "w") as f:
        for line in out.header_lines():
            f.write(line + "\n")
        f.write(f"# psl_db={float(report.psl_db)!r} zcz_length={report.zcz_length}\n")
        f.write("lag,autocorr_mag,crosscorr_mag\n")
        for lag, a, x in zip(report.lags, report.autocorr, report.crosscorr):
            f.write(f"{lag},{float(a)!r},{float(x)!r}\n")
    print(f"codes: zero-lag autocorr {report.autocorr[wf.code_length - 1]:.1f}, "
          f"cross PSL {report.psl_db:.2f} dB, zcz {report.zcz_length}")


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "psl": _cmd_psl,
    "codes": _cmd_codes,
}


def run_command(subcommand: str, config: ExperimentConfig) -> int:
    if subcommand not in _COMMANDS:
        print(f"error: unknown subcommand {subcommand!r}", file=sys.stderr)
        return 1
    outdir = Path(os.environ.get("CIRADAR_OUTPUT_DIR", config.output_dir))
    writer = _ArtifactWriter(outdir, config)
    try:
        _COMMANDS[subcommand](config, writer)
        writer.write_manifest()
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ciradar",
        description="Two-radar PMCW collaborative sensing simulator")
    parser.add_argument("--version", action="version",
                        version=f"ciradar {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, doc in (("simulate", "one CPI in both modes, map artifacts"),
                      ("sweep", "hit-rate vs SNR Monte Carlo sweep"),
                      ("psl", "range-cut sidelobe comparison"),
                      ("codes", "code generation and correlation audit")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("config", nargs="?", default=None,
                       help="config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, default=None,
                       help="override master_seed")
        p.add_argument("--trials", type=int, default=None,
                       help="override trials")
        p.add_argument("--output-dir", default=None,
                       help="override output_dir")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            cfg = ExperimentConfig()
            from .config import parse_config
            cfg = parse_config("")
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.trials is not None:
            cfg.trials = args.trials
        if args.output_dir is not None:
            cfg.output_dir = args.output_dir
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run_command(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
