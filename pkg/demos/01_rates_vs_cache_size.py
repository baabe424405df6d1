"""
=============================
Rates as the cache size grows
=============================

Two classes of eight users share 256 common files and each class has 256
files of its own. We sweep the per-user cache size M and compare the three
placement strategies against the cut-set lower bound.

Run with ``python demos/01_rates_vs_cache_size.py``.
"""
import numpy as np

from hetcache import SystemConfig, cutset_bound, demand_stats, optimize_x_avg, optimize_x_peak
from hetcache.bounds import classify_regime
from hetcache.ratecalc import scheme1_avg, scheme1_peak, scheme3_avg, scheme3_peak

# %%
# The library holds N = Nc + G*Nu = 768 files. Scheme 1 ignores the classes,
# Scheme 2 splits every cache between common and class files, Scheme 3 lets
# each class cache only the files its users can ask for.
base = SystemConfig(K=16, G=2, Nc=256, Nu=256, M=0)
print(f"K={base.K} users, G={base.G} classes, N={base.N} files")

# %%
# The average rates only depend on the demand distribution, not on M, so one
# set of distinct-count statistics serves the whole sweep.
stats = demand_stats(base, mode='analytic')

print(f"\n{'M':>6} {'R1':>8} {'R2':>8} {'x*':>6} {'R3':>8} {'bound':>8} "
      f"{'R1avg':>8} {'R2avg':>8} {'R3avg':>8}")
for M in [0, 8, 16, 32, 64, 128, 192, 256, 384, 512, 640, 768]:
    cfg = base.replace(M=M)
    peak2 = optimize_x_peak(cfg)
    avg2 = optimize_x_avg(cfg, stats=stats)
    print(f"{M:6.0f} {scheme1_peak(cfg):8.3f} {peak2.rate:8.3f} {peak2.x_star:6.3f} "
          f"{scheme3_peak(cfg):8.3f} {cutset_bound(cfg).bound_value:8.3f} "
          f"{scheme1_avg(cfg, stats=stats).mean:8.3f} {avg2.grid_rate.mean:8.3f} "
          f"{scheme3_avg(cfg, stats=stats).mean:8.3f}")

# %%
# Small caches favour Scheme 1: every user's cache helps everyone. Once the
# cache can hold a good part of each class library, Scheme 2 wins because it
# never spends space on files a user can not request.
print()
for M in [4, 100, 600]:
    rep = classify_regime(base.replace(M=M))
    rates = ', '.join(f"R{k}={v:.3f}" for k, v in rep.rates.items())
    print(f"M={M:>3}: {rep.label:<14} ({rates})")
