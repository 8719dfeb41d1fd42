"""Command line front end: ``foliage-rt {generate,trace,calibrate,sweep,cdf}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .channel import Scene, build_scene, trace_paths, write_paths_csv
from .foliage import generate_foliage
from .metrics import assemble_cir, cdf_median, channel_stats, write_cir_csv
from .runner import (
    ConfigError,
    ExperimentConfig,
    calibrate,
    cdf_values,
    cell_seed,
    check_output_dir,
    emit_outputs,
    run_sweep,
    write_cdf_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2

log = logging.getLogger("foliage_rt")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "output_dir", None):
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    out = check_output_dir(args.output_dir or cfg.output_dir)
    params = cfg.crown
    if args.realization is not None:
        params = params.replace(seed=cell_seed(params.seed, args.realization, args.alpha))
    foliage = generate_foliage(params)
    stem = out / args.name
    foliage.to_obj(stem.with_suffix(".obj"))
    foliage.to_json(stem.with_suffix(".json"))
    print(f"{foliage.n_scatterers} scatterers, volume {foliage.achieved_volume:.6f} m^3 -> {stem}.obj")
    return EXIT_OK


def cmd_trace(args) -> int:
    if args.scene:
        try:
            scene = Scene.from_json(args.scene)
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot load scene {args.scene}: {exc}") from exc
        bw = scene.bw
        grid_len = ExperimentConfig().grid_len
    else:
        cfg = _load_config(args)
        seed = cell_seed(cfg.crown.seed, args.realization, args.alpha)
        params = cfg.crown.replace(seed=seed)
        scene = build_scene(params, args.alpha, args.freq, **cfg.scene_options())
        bw, grid_len = cfg.bw, cfg.grid_len
    out = check_output_dir(args.output_dir or ".")
    paths = trace_paths(scene)
    cir = assemble_cir(paths, bw, grid_len, f_c=scene.f_c)
    write_cir_csv(out / "cir.csv", cir)
    write_paths_csv(out / "paths.csv", paths)
    scene.to_json(out / "scene.json")
    stats = channel_stats(cir)
    print(f"{len(paths)} paths, PL {stats.pl_db:.2f} dB, DS {stats.ds_s * 1e9:.3f} ns")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    gain = calibrate(cfg, args.target, args.alpha, args.freq, workers=args.workers)
    print(f"calibration_gain_db = {gain:.6f}")
    if args.write:
        cfg.with_gain(gain).to_json(args.write)
        print(f"calibrated config written to {args.write}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    check_output_dir(cfg.output_dir)
    result = run_sweep(cfg, workers=args.workers)
    emit_outputs(result, cfg)
    failed = result.failed
    print(f"{len(result.records)} records, {len(failed)} failed -> {cfg.output_dir}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_cdf(args) -> int:
    cfg = _load_config(args)
    out = check_output_dir(cfg.output_dir)
    freqs = args.freq or list(cfg.frequencies)
    for f_c in freqs:
        vals = cdf_values(cfg, f_c, args.alpha, workers=args.workers)
        name = f"cdf_a{(cfg.cdf_alpha if args.alpha is None else args.alpha):g}_{f_c / 1e9:g}GHz.csv"
        write_cdf_csv(out / name, vals)
        print(f"{f_c / 1e9:g} GHz: median RSSI {cdf_median(vals):.2f} dBm -> {out / name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foliage-rt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", help="experiment JSON file")
        sp.add_argument("--seed", type=int, help="override the crown seed")
        sp.add_argument("-o", "--output-dir")

    g = sub.add_parser("generate", help="generate one foliage model (OBJ + JSON)")
    common(g)
    g.add_argument("--name", default="foliage")
    g.add_argument("--realization", type=int, help="derive the seed as a sweep cell would")
    g.add_argument("--alpha", type=float, default=0.0)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("trace", help="trace one scene to CIR/path CSVs")
    common(t)
    t.add_argument("--scene", help="scene JSON (overrides --config)")
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--freq", type=float, default=60e9)
    t.add_argument("--realization", type=int, default=0)
    t.set_defaults(func=cmd_trace)

    c = sub.add_parser("calibrate", help="fit the global scattering gain")
    common(c)
    c.add_argument("--target", type=float, default=-140.0)
    c.add_argument("--alpha", type=float, default=0.0)
    c.add_argument("--freq", type=float, default=60e9)
    c.add_argument("--write", help="write the calibrated config here")
    c.add_argument("--workers", type=int)
    c.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("sweep", help="full azimuth x frequency x realization sweep")
    common(s)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("cdf", help="received-power CDF at one azimuth")
    common(d)
    d.add_argument("--alpha", type=float)
    d.add_argument("--freq", type=float, action="append")
    d.add_argument("--workers", type=int)
    d.set_defaults(func=cmd_cdf)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
