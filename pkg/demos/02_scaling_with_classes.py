"""
==========================
Adding more user classes
==========================

Each class has eight users and 256 private files; all classes share 256
common files and every user has room for M = 256 files. Adding classes grows
both the user population and the library. This script shows how fast each
scheme's rate grows as classes are added.

Run with ``python demos/02_scaling_with_classes.py``.
"""
import numpy as np

from hetcache import SystemConfig, demand_stats, optimize_x_avg, optimize_x_peak
from hetcache.ratecalc import scheme1_avg, scheme1_peak, scheme3_avg, scheme3_peak

# %%
rows = []
for G in range(1, 9):
    cfg = SystemConfig(K=8 * G, G=G, Nc=256, Nu=256, M=256)
    stats = demand_stats(cfg, mode='analytic')
    rows.append((G,
                 scheme1_peak(cfg), optimize_x_peak(cfg).rate, scheme3_peak(cfg),
                 scheme1_avg(cfg, stats=stats).mean,
                 optimize_x_avg(cfg, stats=stats).grid_rate.mean,
                 scheme3_avg(cfg, stats=stats).mean))
table = np.array(rows)

print(f"{'G':>3} {'R1':>8} {'R2':>8} {'R3':>8} {'R1avg':>8} {'R2avg':>8} {'R3avg':>8}")
for row in table:
    print(f"{row[0]:3.0f} " + ' '.join(f"{v:8.3f}" for v in row[1:]))

# %%
# Per-class increments. With one class Scheme 2 has nothing to split, and it
# pays for keeping a separate share for the private files. From two classes
# on, its rate grows the slowest of the three.
steps = np.diff(table[:, 1:], axis=0)
print(f"\n{'step':>6} {'dR1':>8} {'dR2':>8} {'dR3':>8} {'dR1avg':>8} {'dR2avg':>8} {'dR3avg':>8}")
for G, row in zip(range(2, 9), steps):
    print(f"{G - 1}->{G:<3} " + ' '.join(f"{v:8.3f}" for v in row))
