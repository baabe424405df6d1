"""Analytic peak and average rates of the three heterogeneous-profile schemes.

Scheme 1 treats every file as common, Scheme 2 splits each cache between
common files (fraction ``x``) and the class's unique files, and Scheme 3
runs an independent MN system inside each class. All rates are in file
units (bits divided by F).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .combinat import binom
from .model import (DemandProfile, DemandStats, Estimate, SystemConfig,
                    demand_stats, occupancy_pmf)

__all__ = [
    'SchemeParams',
    'RateReport',
    'Scheme2Rate',
    'scheme_params',
    'mn_peak',
    'mn_peak_closed',
    'mn_rate_distinct',
    'adjusted_rate',
    'scheme1_peak',
    'scheme1_avg',
    'scheme2_rate',
    'scheme2_rate_vector',
    'scheme2_peak',
    'scheme2_avg',
    'scheme3_peak',
    'scheme3_avg',
    'oracle_avg',
    'uniform_avg_report',
]

_EPS = 1e-12


@dataclass(frozen=True)
class SchemeParams:
    """Caching parameters of one (scheme, x) choice.

    ``t`` is the parameter driving the scheme (``t1``, ``t_c`` or ``t3``)
    and ``p_uncached``/``gamma_full`` are the boundary fractions of that
    driving group: the share of each file left uncached when ``t < 1``
    and the share cached by everybody when ``t > K_eff - 1``.
    """
    t: float
    t1: float
    t_c: float
    t_u: float
    t3: float
    p_uncached: float
    gamma_full: float


@dataclass(frozen=True)
class RateReport:
    scheme: object
    peak: Optional[float]
    avg: Optional[Estimate]
    params: Optional[SchemeParams]
    x: Optional[float] = None
    x_avg: Optional[float] = None
    alpha: Optional[float] = None


class Scheme2Rate(NamedTuple):
    """Scheme 2 rate split; ``unique`` already includes the factor G."""
    total: float
    common: float
    unique: float


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _cache_t(k_eff, m_cache, n_files):
    if n_files == 0:
        return 0.0
    return k_eff * min(float(m_cache), n_files) / n_files


def scheme_params(cfg: SystemConfig, scheme: int = 1, x: float = 1.0) -> SchemeParams:
    K, G, upc = cfg.K, cfg.G, cfg.users_per_class
    M = float(cfg.M)
    t1 = K * M / cfg.N
    t_c = _cache_t(K, M * x, cfg.Nc)
    t_u = _cache_t(upc, M * (1 - x), cfg.Nu)
    t3 = _cache_t(upc, M, cfg.demand_set_size)
    t, k_eff = {1: (t1, K), 2: (t_c, K), 3: (t3, upc)}[scheme]
    p = min(1.0, max(0.0, 1.0 - t))
    gamma = min(1.0, max(0.0, t - (k_eff - 1)))
    return SchemeParams(t=t, t1=t1, t_c=t_c, t_u=t_u, t3=t3, p_uncached=p, gamma_full=gamma)


def mn_peak(K_eff, t):
    """Worst-case MN rate C(K, t+1) / C(K, t) for ``1 <= t <= K_eff - 1``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 1 - _EPS) or np.any(t_arr > K_eff - 1 + _EPS):
        raise ValueError(f"mn_peak needs 1 <= t <= K_eff-1, got t={t}, K_eff={K_eff}")
    # rounding just past K_eff - 1 would hit the zero convention of binom
    t_arr = np.clip(t_arr, 1.0, K_eff - 1)
    return _out(binom(K_eff, t_arr + 1) / binom(K_eff, t_arr))


def mn_peak_closed(K_eff, t):
    """Closed form (K_eff - t) / (t + 1) of the same rate."""
    return _out((K_eff - np.asarray(t, dtype=float)) / (np.asarray(t, dtype=float) + 1))


def _mn_distinct(K, t, n):
    # C(K, t+1) / C(K, t) = (K - t) / (t + 1) for t <= K - 1
    return (K - t) / (t + 1) - binom(K - n, t + 1) / binom(K, t)


def mn_rate_distinct(K_eff, t, n_distinct):
    """MN delivery rate when only ``n_distinct`` different files are requested.

    Implements [C(K, t+1) - C(K - n, t+1)] / C(K, t) with relaxed binomials;
    the subtracted term vanishes once ``K - n < t + 1``.
    """
    n = np.asarray(n_distinct, dtype=float)
    if np.any(n < 0):
        raise ValueError("n_distinct must be non-negative")
    if np.any(n > K_eff + _EPS):
        raise ValueError(f"n_distinct cannot exceed K_eff={K_eff}")
    if not (1 - _EPS <= t <= K_eff - 1 + _EPS):
        raise ValueError(f"mn_rate_distinct needs 1 <= t <= K_eff-1, got t={t}")
    return _out(_mn_distinct(K_eff, t, n))


def adjusted_rate(K_eff, m_cache, n_files, n_distinct):
    """Rate of one MN delivery group, valid over the whole range ``0 <= t <= K_eff``.

    Parameters
    ----------
    K_eff : float
        Users in the group (may be fractional).
    m_cache : float or array
        Cache per user devoted to this group, in files.
    n_files : float
        Files placed in this group.
    n_distinct : float or array
        Distinct files requested inside the group.

    Notes
    -----
    With ``t = K_eff * m_cache / n_files``: for ``t <= 1`` a fraction
    ``1 - t`` of each file stays uncached and is sent uncoded, the rest
    follows the ``t = 1`` scheme; for ``t > K_eff - 1`` a fraction
    ``t - (K_eff - 1)`` is cached by everybody and the rest follows the
    ``t = K_eff - 1`` scheme; in between, Gamma-relaxed binomials are used.
    """
    m = np.asarray(m_cache, dtype=float)
    n = np.asarray(n_distinct, dtype=float)
    if np.any(n < 0):
        raise ValueError("n_distinct must be non-negative")
    if np.any(m < 0):
        raise ValueError("m_cache must be non-negative")
    if np.any(m > n_files * (1 + _EPS) + _EPS):
        raise ValueError(f"m_cache exceeds the {n_files} files of this group")
    if K_eff < 0:
        raise ValueError("K_eff must be non-negative")
    if n_files == 0 or K_eff == 0:
        return _out(np.zeros(np.broadcast(m, n).shape))
    m, n = np.broadcast_arrays(np.minimum(m, n_files), np.minimum(n, K_eff))
    t = K_eff * m / n_files
    if K_eff < 1:
        # below one user there is no t = 1 scheme; uncached share is 1 - m/n_files
        return _out(n * (1 - t / K_eff))
    r1 = _mn_distinct(K_eff, 1.0, n)
    low = n * (1 - t) + r1 * t
    if K_eff < 2:
        high = r1 * (K_eff - t) / (K_eff - 1) if K_eff > 1 else np.zeros_like(t)
        return _out(np.where(t <= 1, low, high))
    top = _mn_distinct(K_eff, K_eff - 1, n) * (K_eff - t)
    mid_t = np.clip(t, 1.0, K_eff - 1)
    mid = _mn_distinct(K_eff, mid_t, n)
    return _out(np.where(t <= 1, low, np.where(t > K_eff - 1, top, mid)))


def scheme1_peak(cfg: SystemConfig) -> float:
    return adjusted_rate(cfg.K, cfg.M, cfg.N, min(cfg.K, cfg.N))


def scheme3_peak(cfg: SystemConfig) -> float:
    upc, a = cfg.users_per_class, cfg.demand_set_size
    return cfg.G * adjusted_rate(upc, min(cfg.M, a), a, min(upc, a))


def _common_rate(cfg, x, n):
    mx = np.minimum(float(cfg.M) * np.asarray(x, dtype=float), cfg.Nc)
    return adjusted_rate(cfg.K, mx, cfg.Nc, np.minimum(n, cfg.Nc))


def _unique_rate(cfg, x, n):
    mu = np.minimum(float(cfg.M) * (1 - np.asarray(x, dtype=float)), cfg.Nu)
    return adjusted_rate(cfg.users_per_class, mu, cfg.Nu, np.minimum(n, cfg.Nu))


def scheme2_rate(cfg: SystemConfig, x, alpha) -> Scheme2Rate:
    """Scheme 2 rate when ``alpha`` users of every class request unique files.

    The other ``K - G*alpha`` users request distinct common files (at most
    ``Nc`` of them) and the ``alpha`` unique requests of each class are
    distinct (at most ``Nu``). Broadcasts over ``x`` and ``alpha``.
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any((x < -_EPS) | (x > 1 + _EPS)):
        raise ValueError("x must lie in [0, 1]")
    if np.any((alpha < -_EPS) | (alpha > cfg.users_per_class + _EPS)):
        raise ValueError(f"alpha must lie in [0, K/G={cfg.users_per_class}]")
    x = np.clip(x, 0.0, 1.0)
    alpha = np.clip(alpha, 0.0, cfg.users_per_class)
    common = _common_rate(cfg, x, cfg.K - cfg.G * alpha)
    unique = cfg.G * np.asarray(_unique_rate(cfg, x, alpha))
    return Scheme2Rate(_out(common + unique), _out(common), _out(unique))


def scheme2_rate_vector(cfg: SystemConfig, x, alphas) -> Scheme2Rate:
    """Scheme 2 rate for a per-class vector of unique-request counts."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape[-1] != cfg.G:
        raise ValueError(f"need one alpha per class (G={cfg.G})")
    common = _common_rate(cfg, x, cfg.K - alphas.sum(axis=-1))
    unique = np.asarray(_unique_rate(cfg, np.asarray(x)[..., None], alphas)).sum(axis=-1)
    return Scheme2Rate(_out(common + unique), _out(common), _out(unique))


def scheme2_peak(cfg: SystemConfig, n_grid: int = 1025, xtol: float = 1e-9):
    """Min over x of the worst-case Scheme 2 rate.

    Returns
    -------
    (rate, x_star, alpha_star)
    """
    from .optimizer import optimize_x_peak
    opt = optimize_x_peak(cfg, n_grid=n_grid, xtol=xtol)
    return opt.rate, opt.x_star, opt.alpha_star


def _stats_for(obj, mode, n_samples, rng, stats):
    """Demand statistics plus the config whose cache size the rates use.

    Statistics do not depend on M, so ``stats`` computed for another M
    (same K, G, Nc, Nu) may be reused across a sweep.
    """
    cfg = _cfg(obj)
    if stats is None:
        return demand_stats(obj, mode=mode, n_samples=n_samples, rng=rng), cfg
    s = stats.cfg
    if (s.K, s.G, s.Nc, s.Nu) != (cfg.K, cfg.G, cfg.Nc, cfg.Nu):
        raise ValueError("stats were computed for a different (K, G, Nc, Nu)")
    return stats, cfg


def _cfg(obj) -> SystemConfig:
    return obj.cfg if isinstance(obj, (DemandProfile, DemandStats)) else obj


def scheme1_table(cfg: SystemConfig) -> np.ndarray:
    return np.asarray(adjusted_rate(cfg.K, cfg.M, cfg.N, np.arange(cfg.K + 1)))


def scheme2_tables(cfg: SystemConfig, x):
    """Per-count rate tables of the common and per-class unique branches."""
    x = np.asarray(x, dtype=float)
    common = _common_rate(cfg, x[..., None], np.arange(cfg.K + 1))
    unique = _unique_rate(cfg, x[..., None], np.arange(cfg.users_per_class + 1))
    return np.asarray(common), np.asarray(unique)


def scheme3_table(cfg: SystemConfig) -> np.ndarray:
    upc, a = cfg.users_per_class, cfg.demand_set_size
    return np.asarray(adjusted_rate(upc, min(cfg.M, a), a, np.arange(upc + 1)))


def scheme1_avg(obj, mode='exact', n_samples=10_000, rng=None, stats=None) -> Estimate:
    """Average Scheme 1 rate over the demand measure of ``obj``.

    ``obj`` is a config (uniform profile) or a :class:`DemandProfile`.
    ``stats`` may carry a precomputed :class:`DemandStats`.
    """
    stats, cfg = _stats_for(obj, mode, n_samples, rng, stats)
    return stats.expect(total=scheme1_table(cfg))


def scheme2_avg(obj, x, mode='exact', n_samples=10_000, rng=None, stats=None) -> Estimate:
    stats, cfg = _stats_for(obj, mode, n_samples, rng, stats)
    common, unique = scheme2_tables(cfg, float(x))
    return stats.expect(common=common, unique=unique)


def scheme3_avg(obj, mode='exact', n_samples=10_000, rng=None, stats=None) -> Estimate:
    stats, cfg = _stats_for(obj, mode, n_samples, rng, stats)
    return stats.expect(per_class=scheme3_table(cfg))


def _group_expected_rate(users, m_cache, n_files) -> float:
    """E over distinct requests of an MN group with ``users`` uniform requesters.

    A fractional ``users`` interpolates linearly between the two
    neighbouring integer group sizes.
    """
    if users <= 0 or n_files == 0:
        return 0.0
    lo = math.floor(users)
    frac = users - lo
    total = 0.0
    for size, w in ((lo, 1 - frac), (lo + 1, frac)):
        if w == 0 or size == 0:
            continue
        pmf = occupancy_pmf(size, n_files)
        rates = adjusted_rate(size, min(float(m_cache), n_files), n_files, np.arange(len(pmf)))
        total += w * float(np.dot(pmf, rates))
    return total


def oracle_avg(cfg: SystemConfig, split: str = 'relaxed') -> float:
    """Uniform-average rate of MN with an oracle that knows who asks for what.

    The oracle places common files over the ``k_c`` users that will request
    common files and unique files over the remaining users of each class.
    ``split='relaxed'`` gives every class ``(K - k_c)/G`` unique requesters,
    possibly fractional; ``split='exact'`` draws the per-class counts
    independently, which is the true expectation under uniform demand.
    """
    K, G, upc = cfg.K, cfg.G, cfg.users_per_class
    a = cfg.demand_set_size
    q = cfg.Nc / a
    M = float(cfg.M)

    def pbin(n, k):
        return math.comb(n, k) * q ** k * (1 - q) ** (n - k)

    if split == 'relaxed':
        total = 0.0
        for kc in range(K + 1):
            p = pbin(K, kc)
            if p == 0:
                continue
            r = _group_expected_rate(kc, M, cfg.Nc)
            r += G * _group_expected_rate((K - kc) / G, M, cfg.Nu)
            total += p * r
        return total
    if split == 'exact':
        common = sum(pbin(K, kc) * _group_expected_rate(kc, M, cfg.Nc)
                     for kc in range(K + 1) if pbin(K, kc) > 0)
        unique = sum(pbin(upc, ac) * _group_expected_rate(upc - ac, M, cfg.Nu)
                     for ac in range(upc + 1) if pbin(upc, ac) > 0)
        return common + G * unique
    raise ValueError(f"split must be 'relaxed' or 'exact', got {split!r}")


def uniform_avg_report(cfg: SystemConfig, mode='exact', n_samples=10_000, rng=None,
                       stats=None, peaks=True) -> dict:
    """Peak and uniform-average rates of every scheme plus the oracle.

    Scheme 2's average is reported at its average-optimal split.
    """
    from .optimizer import optimize_x_avg, optimize_x_peak
    stats, _ = _stats_for(cfg, mode, n_samples, rng, stats)
    avg_opt = optimize_x_avg(cfg, stats=stats)
    peak2 = optimize_x_peak(cfg) if peaks else None
    reports = {
        1: RateReport(1, scheme1_peak(cfg) if peaks else None,
                      scheme1_avg(cfg, stats=stats), scheme_params(cfg, 1)),
        2: RateReport(2, peak2.rate if peaks else None, avg_opt.grid_rate,
                      scheme_params(cfg, 2, avg_opt.grid_x),
                      x=peak2.x_star if peaks else None, x_avg=avg_opt.grid_x,
                      alpha=peak2.alpha_star if peaks else None),
        3: RateReport(3, scheme3_peak(cfg) if peaks else None,
                      scheme3_avg(cfg, stats=stats), scheme_params(cfg, 3)),
        'oracle': RateReport('oracle', None, Estimate(oracle_avg(cfg)), None),
    }
    return reports
