"""
Calibrating and sweeping the receiver angle
===========================================

Fits the single global gain at the through-tree position, then sweeps
the receiver around the half-circle in both bands and writes the CSV
files, heatmaps and a plotting script.
"""

from dataclasses import replace

import numpy as np

from foliage_rt import ExperimentConfig, calibrate, emit_outputs, run_sweep

# a lighter sweep than the default 20 realizations x 15 degree grid
config = ExperimentConfig(n_realizations=8, alphas=tuple(range(0, 181, 30)), output_dir="sweep_demo")

gain = calibrate(config, target_pl_db=-140.0, at_alpha=0.0, at_f=60e9)
config = config.with_gain(gain)
print(f"calibration gain {gain:.2f} dB")

result = run_sweep(config, workers=2)
print(f"{len(result.records)} cells, {len(result.failed)} failed")

print("alpha   PL60    PL80    DS60 [ns]")
for i, a in enumerate(config.alphas):
    ds = np.nanmean(result.values("ds_s", 60e9, a)) * 1e9
    print(f"{a:5.0f} {result.mean_pl(60e9)[i]:7.2f} {result.mean_pl(80e9)[i]:7.2f} {ds:8.2f}")

# each heatmap column holds one count per realization
hm = result.heatmaps[("pl_db", 60e9)]
print("PL heatmap column totals:", hm.row_totals().tolist())

for path in emit_outputs(result, config):
    print("wrote", path)
print("run `python3 sweep_demo/plot_results.py` to draw the figures (needs matplotlib)")

# a heavier occlusion loss widens the gap between angles
lossy = replace(config, scatter=replace(config.scatter, occlusion_loss_db=6.0))
m = run_sweep(lossy).mean_pl(60e9)
print(f"6 dB per crossing: PL(180) - PL(0) = {m[-1] - m[0]:.2f} dB")
