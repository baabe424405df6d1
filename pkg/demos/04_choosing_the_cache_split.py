"""
==========================
Choosing the cache split
==========================

Scheme 2 gives a fraction x of every cache to common files. For the peak
rate the server must assume the worst number of users per class asking for
private files; for the average rate it averages over uniform demands. This
script looks at both objectives as functions of x.

Run with ``python demos/04_choosing_the_cache_split.py``.
"""
import numpy as np

from hetcache import SystemConfig, demand_stats, optimize_x_avg, optimize_x_peak
from hetcache.optimizer import (closed_form_avg_split, exact_avg_split, small_cache_window,
                                theorem5_threshold, worst_alpha)
from hetcache.ratecalc import scheme2_avg

# %%
# Peak rate: the worst case over the number of private requesters per class.
cfg = SystemConfig(K=16, G=2, Nc=64, Nu=64, M=40)
print(f"{'x':>5} {'worst alpha':>12} {'peak':>8}")
for x in np.linspace(0, 1, 11):
    alpha, rate = worst_alpha(cfg, x)
    print(f"{x:5.2f} {alpha:12.3f} {rate:8.3f}")
opt = optimize_x_peak(cfg)
print(f"best split x*={opt.x_star:.4f}, peak {opt.rate:.4f}, worst alpha {opt.alpha_star:.3f}")

# %%
# With a small cache and many more private files than common ones, the
# closed-form threshold suggests putting everything on common files.
# The grid search does not always agree.
big = SystemConfig(K=16, G=2, Nc=64, Nu=256, M=0)
thr = theorem5_threshold(big)
small = big.replace(M=0.5 * thr)
print(f"\nthreshold {thr:.3f}; at M={float(small.M):.3f}: "
      f"x*={optimize_x_peak(small).x_star:.4f}, "
      f"rate at x=1 {worst_alpha(small, 1.0)[1]:.4f}, "
      f"best rate {optimize_x_peak(small).rate:.4f}")

# %%
# Average rate: inside the small-cache window the average is affine in x,
# so the best split is x = 0 or x = 1. The first-moment rule and the exact
# second-moment rule usually pick the same end.
cfg = SystemConfig(K=6, G=2, Nc=2, Nu=3, M=0)
cfg = cfg.replace(M=0.8 * small_cache_window(cfg))
stats = demand_stats(cfg, mode='exact')
for x in (0.0, 0.5, 1.0):
    print(f"x={x:.1f}: average {scheme2_avg(cfg, x, stats=stats).mean:.4f}")
res = optimize_x_avg(cfg, stats=stats)
print(f"first-moment rule picks x={closed_form_avg_split(cfg):.0f}, "
      f"exact rule picks x={exact_avg_split(cfg, stats):.0f}, grid x={res.grid_x:.3f}")
