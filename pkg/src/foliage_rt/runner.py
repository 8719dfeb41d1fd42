"""Seeded realization sweeps over receiver azimuth and carrier frequency."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import Material, ScatterModel, build_scene, trace_paths
from .foliage import CrownParams, generate_foliage
from .metrics import (
    DEFAULT_GRID_LEN,
    NOISE_FLOOR_DBM,
    DEFAULT_LEAD_TAPS,
    assemble_cir,
    channel_stats,
    empirical_cdf,
    pdp_from_realizations,
    rssi_dbm,
)

log = logging.getLogger(__name__)

_MASK64 = 0xFFFF_FFFF_FFFF_FFFF


class ConfigError(ValueError):
    pass


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def cell_seed(seed: int, realization: int, alpha_deg: float) -> int:
    """Seed of one (realization, azimuth) cell.

    Keyed on the azimuth value (millidegrees) rather than its grid position,
    so a cell's foliage does not depend on which other angles are swept.
    """
    key = (int(realization) << 32) | (int(round(alpha_deg * 1000)) & 0xFFFF_FFFF)
    return (int(seed) ^ splitmix64(key)) & _MASK64


@dataclass(frozen=True)
class ExperimentConfig:
    crown: CrownParams = field(default_factory=CrownParams)
    frequencies: tuple[float, ...] = (60e9, 80e9)
    alphas: tuple[float, ...] = tuple(float(a) for a in range(0, 181, 15))
    n_realizations: int = 20
    material: Material = field(default_factory=Material)
    scatter: ScatterModel = field(default_factory=ScatterModel)
    bw: float = 2e9
    suppress_los: bool = True
    tx_power_dbm: float = 0.0
    antenna_gain_dbi: float = 0.0
    grid_len: int = DEFAULT_GRID_LEN
    noise_floor_dbm: float = NOISE_FLOOR_DBM
    pl_bin_db: float = 1.0
    ds_bin_s: float = 0.5e-9
    cdf_alpha: float = 105.0
    output_dir: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if not self.frequencies or any(f <= 0 for f in self.frequencies):
            raise ConfigError("frequencies must be a non-empty list of positive values")
        if not self.alphas or any(not 0.0 <= a <= 180.0 for a in self.alphas):
            raise ConfigError("alphas must be a non-empty subset of [0, 180] degrees")
        if self.bw <= 0 or self.pl_bin_db <= 0 or self.ds_bin_s <= 0:
            raise ConfigError("bw and bin widths must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "crown" in doc:
                doc["crown"] = CrownParams(**doc["crown"])
            if "material" in doc:
                doc["material"] = Material(**doc["material"])
            if "scatter" in doc:
                doc["scatter"] = ScatterModel(**doc["scatter"])
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["frequencies"] = list(self.frequencies)
        doc["alphas"] = list(self.alphas)
        return doc

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, crown=self.crown.replace(seed=seed))

    def with_gain(self, gain_db: float) -> "ExperimentConfig":
        return replace(self, scatter=replace(self.scatter, calibration_gain_db=gain_db))

    def scene_options(self) -> dict:
        return dict(
            bw=self.bw,
            material=self.material,
            scatter=self.scatter,
            suppress_los=self.suppress_los,
            tx_power_dbm=self.tx_power_dbm,
            antenna_gain_dbi=self.antenna_gain_dbi,
        )


@dataclass(frozen=True)
class CellRecord:
    alpha: float
    realization: int
    f_c: float
    seed: int
    pl_db: float
    ds_s: float
    rssi_dbm: float
    n_paths: int
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


@dataclass(frozen=True, eq=False)
class Heatmap:
    """Occurrence counts of one metric: rows are azimuths, columns bins.

    ``edges[j]`` is the lower edge of column ``j``; non-finite values are
    counted separately in ``nonfinite`` so every record lands somewhere.
    """

    alphas: np.ndarray
    edges: np.ndarray
    width: float
    counts: np.ndarray
    nonfinite: np.ndarray

    @classmethod
    def from_values(cls, alphas, values_by_alpha: list[np.ndarray], width: float) -> "Heatmap":
        finite = [v[np.isfinite(v)] for v in values_by_alpha]
        allv = np.concatenate(finite) if finite else np.zeros(0)
        if allv.size:
            first = math.floor(allv.min() / width)
            last = math.floor(allv.max() / width)
        else:
            first = last = 0
        edges = np.arange(first, last + 1) * width
        counts = np.zeros((len(alphas), len(edges)), dtype=int)
        for i, v in enumerate(finite):
            idx = np.floor(v / width).astype(int) - first
            np.add.at(counts[i], idx, 1)
        nonfinite = np.array([np.sum(~np.isfinite(v)) for v in values_by_alpha], dtype=int)
        return cls(np.asarray(alphas, float), edges, width, counts, nonfinite)

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1) + self.nonfinite


@dataclass(eq=False)
class SweepResult:
    config: ExperimentConfig
    records: list[CellRecord]
    heatmaps: dict[tuple[str, float], Heatmap] = field(default_factory=dict)

    @property
    def failed(self) -> list[CellRecord]:
        return [r for r in self.records if r.failed]

    def select(self, f_c=None, alpha=None) -> list[CellRecord]:
        return [
            r for r in self.records
            if (f_c is None or r.f_c == f_c) and (alpha is None or r.alpha == alpha)
        ]

    def values(self, metric: str, f_c=None, alpha=None) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.select(f_c, alpha)], dtype=float)

    def mean_pl(self, f_c: float) -> np.ndarray:
        """Mean path-loss per azimuth (dB average over realizations)."""
        return np.array([self.values("pl_db", f_c, a).mean() for a in self.config.alphas])

    def ds_by_alpha(self, f_c: float) -> list[np.ndarray]:
        return [self.values("ds_s", f_c, a) for a in self.config.alphas]


def run_cell(config: ExperimentConfig, alpha: float, realization: int) -> list[CellRecord]:
    """All frequencies for one (azimuth, realization); the foliage is shared."""
    seed = cell_seed(config.crown.seed, realization, alpha)
    try:
        params = config.crown.replace(seed=seed)
        foliage = generate_foliage(params)
    except Exception as exc:  # recorded per cell; the sweep continues
        msg = f"{type(exc).__name__}: {exc}"
        return [
            CellRecord(alpha, realization, f, seed, math.nan, math.nan, math.nan, 0, msg)
            for f in config.frequencies
        ]

    out = []
    for f_c in config.frequencies:
        try:
            scene = build_scene(params, alpha, f_c, foliage=foliage, **config.scene_options())
            paths = trace_paths(scene)
            cir = assemble_cir(paths, config.bw, config.grid_len, f_c=f_c)
            stats = channel_stats(cir)
            rssi = rssi_dbm(cir, config.tx_power_dbm, config.noise_floor_dbm)
            out.append(
                CellRecord(alpha, realization, f_c, seed, stats.pl_db, stats.ds_s, rssi, len(paths))
            )
        except Exception as exc:
            out.append(
                CellRecord(alpha, realization, f_c, seed, math.nan, math.nan, math.nan, 0,
                           f"{type(exc).__name__}: {exc}")
            )
    return out


def _run_cell_args(args):
    return run_cell(*args)


def _cells(config: ExperimentConfig, alphas=None, realizations=None):
    alphas = config.alphas if alphas is None else alphas
    realizations = range(config.n_realizations) if realizations is None else realizations
    return [(config, a, r) for a in alphas for r in realizations]


def _execute(cells, workers: int | None) -> list[CellRecord]:
    if workers is None or workers <= 1:
        chunks = [_run_cell_args(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map() preserves submission order, so merging is deterministic.
            chunks = list(pool.map(_run_cell_args, cells, chunksize=4))
    return [rec for chunk in chunks for rec in chunk]


def build_heatmaps(config: ExperimentConfig, records: list[CellRecord]) -> dict:
    maps = {}
    for f_c in config.frequencies:
        for metric, width in (("pl_db", config.pl_bin_db), ("ds_s", config.ds_bin_s)):
            vals = [
                np.array([getattr(r, metric) for r in records if r.f_c == f_c and r.alpha == a])
                for a in config.alphas
            ]
            maps[(metric, f_c)] = Heatmap.from_values(config.alphas, vals, width)
    return maps


def run_sweep(config: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Trace every (frequency, azimuth, realization) cell of ``config``.

    Records are ordered by azimuth, realization, then frequency regardless
    of ``workers``.  Failed cells carry an error string and NaN metrics.
    """
    records = _execute(_cells(config), workers)
    for r in records:
        if r.failed:
            log.warning("cell alpha=%g r=%d f=%g failed: %s", r.alpha, r.realization, r.f_c, r.error)
    return SweepResult(config, records, build_heatmaps(config, records))


def calibrate(
    config: ExperimentConfig,
    target_pl_db: float = -140.0,
    at_alpha: float = 0.0,
    at_f: float = 60e9,
    workers: int | None = None,
) -> float:
    """Calibration gain making the mean PL at ``(at_alpha, at_f)`` equal the target.

    The gain multiplies every scattered path, so PL in dB shifts by exactly
    the gain change and one evaluation suffices.
    """
    if config.n_realizations < 5:
        raise ConfigError("calibration needs at least 5 realizations")
    cfg = replace(config, frequencies=(float(at_f),), alphas=(float(at_alpha),))
    records = _execute(_cells(cfg), workers)
    pl = np.array([r.pl_db for r in records])
    if any(r.failed for r in records) or not np.all(np.isfinite(pl)):
        raise RuntimeError(f"no usable paths at calibration anchor alpha={at_alpha}, f={at_f}")
    return config.scatter.calibration_gain_db + target_pl_db - float(pl.mean())


def cdf_values(config: ExperimentConfig, f_c: float, alpha: float | None = None,
               workers: int | None = None) -> np.ndarray:
    """Per-realization received power [dBm] at one azimuth, taps above the floor."""
    alpha = config.cdf_alpha if alpha is None else alpha
    cfg = replace(config, frequencies=(float(f_c),), alphas=(float(alpha),))
    return np.array([r.rssi_dbm for r in _execute(_cells(cfg), workers)])


def realization_pdp(config: ExperimentConfig, alpha: float, f_c: float):
    """Average PDP over all realizations of one cell, on a shared delay grid.

    Returns:
        ``(pdp, paths_per_realization)``.
    """
    traced = []
    for r in range(config.n_realizations):
        params = config.crown.replace(seed=cell_seed(config.crown.seed, r, alpha))
        scene = build_scene(params, alpha, f_c, **config.scene_options())
        traced.append(trace_paths(scene))
    delays = [p.tau for paths in traced for p in paths]
    if not delays:
        raise RuntimeError(f"no paths at alpha={alpha}, f={f_c}")
    tau0 = min(delays) - DEFAULT_LEAD_TAPS / config.bw
    cirs = [assemble_cir(paths, config.bw, config.grid_len, tau0=tau0, f_c=f_c) for paths in traced]
    return pdp_from_realizations(cirs), traced


# --------------------------------------------------------------------------
# Output files
# --------------------------------------------------------------------------

RECORD_COLUMNS = ("alpha_deg", "realization", "f_hz", "seed", "pl_db", "ds_s", "rssi_dbm", "n_paths", "error")


def _fmt(x: float) -> str:
    return repr(float(x))


def _ghz(f: float) -> str:
    return f"{f / 1e9:g}GHz"


def check_output_dir(path) -> Path:
    """Create ``path`` and prove it is writable, before any computation."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def write_records_csv(path, records: list[CellRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([_fmt(r.alpha), r.realization, _fmt(r.f_c), r.seed, _fmt(r.pl_db),
                        _fmt(r.ds_s), _fmt(r.rssi_dbm), r.n_paths, r.error])


def read_records_csv(path) -> list[CellRecord]:
    with open(path, newline="") as fh:
        return [
            CellRecord(float(row["alpha_deg"]), int(row["realization"]), float(row["f_hz"]),
                       int(row["seed"]), float(row["pl_db"]), float(row["ds_s"]),
                       float(row["rssi_dbm"]), int(row["n_paths"]), row["error"])
            for row in csv.DictReader(fh)
        ]


def write_heatmap_csv(path, maps: dict, metric: str) -> None:
    """Long format: one row per (frequency, azimuth, bin)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f_hz", "alpha_deg", "bin_lo", "bin_hi", "count"])
        for (m, f_c), hm in sorted(maps.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            if m != metric:
                continue
            for i, a in enumerate(hm.alphas):
                for j, lo in enumerate(hm.edges):
                    w.writerow([_fmt(f_c), _fmt(a), _fmt(lo), _fmt(lo + hm.width), int(hm.counts[i, j])])
                if hm.nonfinite[i]:
                    w.writerow([_fmt(f_c), _fmt(a), "nan", "nan", int(hm.nonfinite[i])])


def write_cdf_csv(path, values) -> None:
    x, p = empirical_cdf(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rssi_dbm", "probability"])
        for xi, pi in zip(x, p):
            w.writerow([_fmt(xi), _fmt(pi)])


def emit_outputs(result: SweepResult, config: ExperimentConfig | None = None, output_dir=None) -> list[Path]:
    """Write CSV tables, first-realization OBJ models and a plot script."""
    config = config or result.config
    out = check_output_dir(output_dir or config.output_dir)
    written = []

    def target(name):
        p = out / name
        written.append(p)
        return p

    write_records_csv(target("records.csv"), result.records)
    write_heatmap_csv(target("heatmap_pl.csv"), result.heatmaps, "pl_db")
    write_heatmap_csv(target("heatmap_ds.csv"), result.heatmaps, "ds_s")
    for f_c in config.frequencies:
        vals = [r.rssi_dbm for r in result.records if r.f_c == f_c and np.isfinite(r.rssi_dbm)]
        if vals:
            write_cdf_csv(target(f"cdf_{_ghz(f_c)}.csv"), vals)
    for a in config.alphas:
        seed = cell_seed(config.crown.seed, 0, a)
        try:
            foliage = generate_foliage(config.crown.replace(seed=seed))
        except Exception as exc:
            log.warning("skipping OBJ for alpha=%g: %s", a, exc)
            continue
        foliage.to_obj(target(f"foliage_a{a:g}_r0.obj"))
    target("plot_results.py").write_text(PLOT_SCRIPT)
    config.to_json(target("config.json"))
    return written


PLOT_SCRIPT = '''\
"""Redraw the sweep figures from the CSV files in this directory.

Usage: python plot_results.py  (needs numpy and matplotlib)
"""
import csv
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        return list(csv.DictReader(fh))


def heatmap_panels(name, label, scale, fname):
    rows = [r for r in load(name) if r["bin_lo"] != "nan"]
    freqs = sorted({float(r["f_hz"]) for r in rows})
    fig, axes = plt.subplots(1, len(freqs), figsize=(5 * len(freqs), 4), squeeze=False)
    for ax, f in zip(axes[0], freqs):
        sub = [r for r in rows if float(r["f_hz"]) == f]
        alphas = sorted({float(r["alpha_deg"]) for r in sub})
        bins = sorted({float(r["bin_lo"]) for r in sub})
        grid = np.zeros((len(bins), len(alphas)))
        for r in sub:
            grid[bins.index(float(r["bin_lo"])), alphas.index(float(r["alpha_deg"]))] += int(r["count"])
        step = alphas[1] - alphas[0] if len(alphas) > 1 else 1.0
        width = (bins[1] - bins[0]) if len(bins) > 1 else 1.0
        extent = [alphas[0] - step / 2, alphas[-1] + step / 2,
                  bins[0] * scale, (bins[-1] + width) * scale]
        im = ax.imshow(grid, origin="lower", aspect="auto", extent=extent, cmap="viridis")
        ax.set_title(f"{f / 1e9:g} GHz")
        ax.set_xlabel("alpha [deg]")
        ax.set_ylabel(label)
        fig.colorbar(im, ax=ax, label="occurrences")
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, fname), dpi=150)


def cdf_panel():
    fig, ax = plt.subplots(figsize=(5, 4))
    for path in sorted(glob.glob(os.path.join(HERE, "cdf_*.csv"))):
        rows = load(os.path.basename(path))
        x = [float(r["rssi_dbm"]) for r in rows]
        p = [float(r["probability"]) for r in rows]
        ax.step(x, p, where="post", label=os.path.basename(path)[4:-4])
    ax.set_xlabel("RSSI [dBm]")
    ax.set_ylabel("CDF")
    ax.grid(True)
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "cdf.png"), dpi=150)


if __name__ == "__main__":
    heatmap_panels("heatmap_pl.csv", "path-loss [dB]", 1.0, "heatmap_pl.png")
    heatmap_panels("heatmap_ds.csv", "RMS delay spread [ns]", 1e9, "heatmap_ds.png")
    cdf_panel()
'''
