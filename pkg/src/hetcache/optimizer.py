"""Cache-split optimization for the split scheme (Scheme 2).

The peak objective ``min_x max_alpha R(x, alpha)`` is piecewise smooth in
``x``, with seams wherever a branch's caching parameter crosses 1 or
``K_eff - 1``. The search evaluates a dense grid that includes those seams
as knots, using a coarse alpha grid with one parabolic step per point,
and then refines the best few brackets by golden-section search.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from .model import Estimate, SystemConfig, demand_stats, expected_distinct
from .ratecalc import scheme2_rate, scheme2_tables

__all__ = [
    'PeakOptimum',
    'AvgOptimum',
    'AppendixABounds',
    'golden_section_min',
    'alpha_grid',
    'worst_alpha',
    'worst_alpha_on_grid',
    'seam_knots',
    'optimize_x_peak',
    'theorem5_threshold',
    'small_cache_window',
    'closed_form_avg_split',
    'exact_avg_split',
    'optimize_x_avg',
    'appendix_a_bounds',
]

_INV_PHI = (math.sqrt(5) - 1) / 2


class PeakOptimum(NamedTuple):
    x_star: float
    rate: float
    alpha_star: float


class AvgOptimum(NamedTuple):
    """Average-rate split.

    ``x_star`` is the closed-form pick inside the small-cache window and the
    numeric minimizer elsewhere; ``grid_x``/``grid_rate`` always hold the
    numeric search result.
    """
    x_star: float
    rate: Estimate
    grid_x: float
    grid_rate: Estimate
    closed_form_x: Optional[float]

    @property
    def agrees(self) -> Optional[bool]:
        """Closed-form pick is a minimizer (ties with the grid count as agreement)."""
        if self.closed_form_x is None:
            return None
        return self.rate.mean <= self.grid_rate.mean + 1e-9 * max(1.0, abs(self.grid_rate.mean))


class AppendixABounds(NamedTuple):
    Y1: float
    Y2: float
    dRc_dx: Optional[float] = None
    dGRu_dx: Optional[float] = None


def golden_section_min(f, a, b, tol=1e-5):
    """Minimize a scalar function on ``[a, b]`` to bracket width ``tol``.

    Returns
    -------
    (x, f(x))
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def alpha_grid(cfg: SystemConfig, per_user: int = 32) -> np.ndarray:
    upc = cfg.users_per_class
    grid = np.linspace(0.0, upc, per_user * upc + 1)
    return np.union1d(grid, np.arange(upc + 1, dtype=float))


def worst_alpha_on_grid(cfg: SystemConfig, xs, alphas=None):
    """Max over a fixed alpha grid for every x; returns (rates, alphas*)."""
    alphas = alpha_grid(cfg) if alphas is None else np.asarray(alphas, dtype=float)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    total = np.asarray(scheme2_rate(cfg, xs[:, None], alphas[None, :]).total)
    rows = np.arange(len(xs))
    idx = np.argmax(total, axis=1)
    best, best_a = total[rows, idx], alphas[idx]
    if len(alphas) < 3:
        return best, best_a
    # one parabolic step through the argmax and its neighbours, evaluated exactly
    j = np.clip(idx, 1, len(alphas) - 2)
    a0, a1, a2 = alphas[j - 1], alphas[j], alphas[j + 1]
    f0, f1, f2 = total[rows, j - 1], total[rows, j], total[rows, j + 1]
    num = (a1 - a0) ** 2 * (f1 - f2) - (a1 - a2) ** 2 * (f1 - f0)
    den = (a1 - a0) * (f1 - f2) - (a1 - a2) * (f1 - f0)
    with np.errstate(divide='ignore', invalid='ignore'):
        vertex = a1 - 0.5 * num / den
    vertex = np.where(np.isfinite(vertex), np.clip(vertex, a0, a2), a1)
    refined = np.asarray(scheme2_rate(cfg, xs, vertex).total)
    better = refined > best
    return np.where(better, refined, best), np.where(better, vertex, best_a)


def worst_alpha(cfg: SystemConfig, x: float, integer: bool = False):
    """Number of unique requesters per class that maximizes the Scheme 2 rate.

    Parameters
    ----------
    integer : bool
        Restrict alpha to ``0 .. K/G``; otherwise alpha is continuous and
        the best grid point is refined by repeatedly zooming a finer grid
        into the bracket around it.

    Returns
    -------
    (alpha_star, rate)
    """
    if integer:
        alphas = np.arange(cfg.users_per_class + 1, dtype=float)
        rates = np.asarray(scheme2_rate(cfg, x, alphas).total)
        i = int(np.argmax(rates))
        return float(alphas[i]), float(rates[i])
    alphas = alpha_grid(cfg)
    for _ in range(6):
        rates = np.asarray(scheme2_rate(cfg, x, alphas).total)
        i = int(np.argmax(rates))
        best_a, best_r = float(alphas[i]), float(rates[i])
        lo = alphas[max(i - 1, 0)]
        hi = alphas[min(i + 1, len(alphas) - 1)]
        if hi - lo < 1e-8:
            break
        # zoom into the bracket around the best point; keeps it in the next grid
        alphas = np.union1d(np.linspace(lo, hi, 33), [best_a])
    return best_a, best_r


def seam_knots(cfg: SystemConfig) -> np.ndarray:
    """Split values where a Scheme 2 branch changes regime."""
    M = float(cfg.M)
    if M == 0:
        return np.array([])
    K, upc = cfg.K, cfg.users_per_class
    knots = []
    if cfg.Nc:
        knots += [t * cfg.Nc / (K * M) for t in (1.0, K - 1.0, float(K))]
    if cfg.Nu:
        knots += [1 - t * cfg.Nu / (upc * M) for t in (1.0, upc - 1.0, float(upc))]
    knots = np.array(knots)
    return knots[(knots >= 0) & (knots <= 1)]


def optimize_x_peak(cfg: SystemConfig, n_grid: int = 1025, xtol: float = 1e-9,
                    n_basins: int = 2) -> PeakOptimum:
    """Cache split minimizing the worst-case Scheme 2 rate.

    Degenerate libraries short-circuit: no unique files gives ``x = 1``,
    no common files gives ``x = 0``.
    """
    if cfg.Nu == 0 or cfg.Nc == 0:
        x = 1.0 if cfg.Nu == 0 else 0.0
        alpha, rate = worst_alpha(cfg, x)
        return PeakOptimum(x, rate, alpha)
    xs = np.union1d(np.linspace(0.0, 1.0, n_grid), seam_knots(cfg))
    rates, _ = worst_alpha_on_grid(cfg, xs, alpha_grid(cfg, per_user=8))
    # the coarse alpha grid underestimates the max, so refine several basins
    padded = np.concatenate(([np.inf], rates, [np.inf]))
    minima = np.nonzero((rates <= padded[:-2]) & (rates <= padded[2:]))[0]
    best_x, best_alpha, best_rate = None, None, np.inf
    for i in minima[np.argsort(rates[minima])][:n_basins]:
        x = float(xs[i])
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        if hi - lo > xtol:
            x = float(golden_section_min(lambda v: worst_alpha(cfg, v)[1], lo, hi, xtol)[0])
        for cand in (x, float(xs[i])):
            alpha, rate = worst_alpha(cfg, cand)
            if rate < best_rate:
                best_x, best_alpha, best_rate = cand, alpha, rate
    return PeakOptimum(best_x, best_rate, best_alpha)


def theorem5_threshold(cfg: SystemConfig) -> float:
    """Cache size below which devoting all cache to common files is peak-optimal.

    Value ``(Nc/K) * (sqrt(Nu (K+1) / (Nc (K/G + 1))) - 1)``, clamped at 0.
    """
    if cfg.Nc == 0:
        return 0.0
    K, upc = cfg.K, cfg.users_per_class
    root = math.sqrt(cfg.Nu * (K + 1) / (cfg.Nc * (upc + 1)))
    return max(0.0, cfg.Nc / K * (root - 1))


def small_cache_window(cfg: SystemConfig) -> float:
    """Upper end ``min(Nc, G*Nu) / K`` of the region where both branches have t <= 1."""
    return min(cfg.Nc, cfg.G * cfg.Nu) / cfg.K


def closed_form_avg_split(cfg: SystemConfig) -> float:
    """x in {0, 1} from the large-K approximation of the average-rate slope.

    Returns 1 (all cache to common files) when
    ``Nu/Nc > G (E_u^2 + E_u) / (E_c^2 + E_c)``, else 0.
    """
    if cfg.Nu == 0:
        return 1.0
    if cfg.Nc == 0:
        return 0.0
    e_c, e_u = expected_distinct(cfg)
    return 1.0 if cfg.Nu / cfg.Nc > cfg.G * (e_u ** 2 + e_u) / (e_c ** 2 + e_c) else 0.0


def exact_avg_split(cfg: SystemConfig, stats) -> float:
    """Same decision with exact second moments ``E[N^2] + E[N]`` in place of
    ``E[N]^2 + E[N]``; the average rate is affine in x inside the window so
    this is the exact minimizer (ties resolved to x = 1)."""
    if cfg.Nu == 0:
        return 1.0
    if cfg.Nc == 0:
        return 0.0
    n = np.arange(cfg.K + 1)
    m2c = stats.expect(common=n * n + n).mean
    nu = np.arange(cfg.users_per_class + 1)
    m2u = stats.expect(unique=nu * nu + nu).mean
    # m2u already sums over the G classes
    return 1.0 if m2u / cfg.Nu <= m2c / cfg.Nc else 0.0


def _avg_curve(cfg, stats, xs):
    common, unique = scheme2_tables(cfg, xs)
    return common @ stats.common_pmf + (unique @ stats.unique_pmfs.T).sum(axis=1)


def optimize_x_avg(cfg: SystemConfig, mode: str = 'exact', n_samples: int = 10_000,
                   rng=None, stats=None, n_grid: int = 1025,
                   xtol: float = 1e-5) -> AvgOptimum:
    """Cache split minimizing the Scheme 2 average rate.

    Inside the small-cache window the closed-form rule picks x in {0, 1};
    the numeric grid search always runs as a cross-check.
    """
    from .ratecalc import scheme2_avg
    if stats is None:
        stats = demand_stats(cfg, mode=mode, n_samples=n_samples, rng=rng)
    xs = np.union1d(np.linspace(0.0, 1.0, n_grid), seam_knots(cfg))
    curve = _avg_curve(cfg, stats, xs)
    i = int(np.argmin(curve))
    grid_x = float(xs[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    if hi - lo > xtol:
        x, r = golden_section_min(lambda v: float(_avg_curve(cfg, stats, np.array([v]))[0]),
                                  lo, hi, xtol)
        if r < curve[i]:
            grid_x = float(x)
    grid_rate = scheme2_avg(cfg, grid_x, stats=stats)
    closed = None
    if float(cfg.M) <= small_cache_window(cfg):
        closed = closed_form_avg_split(cfg)
        return AvgOptimum(closed, scheme2_avg(cfg, closed, stats=stats),
                          grid_x, grid_rate, closed)
    return AvgOptimum(grid_x, grid_rate, grid_x, grid_rate, None)


def appendix_a_bounds(cfg: SystemConfig, x: float, alpha: Optional[float] = None,
                      require_interior: bool = True, h: float = 1e-6) -> AppendixABounds:
    """Derivative bounds of the two Scheme 2 branches with respect to x.

    ``Y1 = -(KM/Nc) (K+1)/(t_c+1)^2`` bounds dR_c/dx from below and
    ``Y2 = (KM/Nu) (K/G+1)/(t_u+1)^2`` bounds d(G R_u)/dx from above.
    When both branches are interior (``1 <= t <= K_eff - 1``), central
    finite differences of the branch rates are returned as well.
    """
    K, upc = cfg.K, cfg.users_per_class
    M = float(cfg.M)
    if cfg.Nc == 0 or cfg.Nu == 0:
        raise ValueError("derivative bounds need both common and unique files")
    t_c = K * M * x / cfg.Nc
    t_u = upc * M * (1 - x) / cfg.Nu
    interior = 1 <= t_c <= K - 1 and 1 <= t_u <= upc - 1
    if require_interior and not interior:
        raise ValueError(f"branches not interior at x={x}: t_c={t_c:.4g}, t_u={t_u:.4g}")
    if t_c > K or t_u > upc:
        raise ValueError("cache share exceeds a branch library")
    ratio_c = (K - t_c) / (t_c + 1)
    ratio_u = (upc - t_u) / (t_u + 1)
    y1 = -(K * M / cfg.Nc) * ratio_c * (1 / (t_c + 1) + 1 / (K - t_c)) if t_c < K else 0.0
    y2 = (K * M / cfg.Nu) * ratio_u * (1 / (t_u + 1) + 1 / (upc - t_u)) if t_u < upc else 0.0
    if not interior:
        return AppendixABounds(y1, y2)
    alpha = upc / 2 if alpha is None else alpha
    lo, hi = max(0.0, x - h), min(1.0, x + h)
    r_lo = scheme2_rate(cfg, lo, alpha)
    r_hi = scheme2_rate(cfg, hi, alpha)
    return AppendixABounds(y1, y2,
                           (r_hi.common - r_lo.common) / (hi - lo),
                           (r_hi.unique - r_lo.unique) / (hi - lo))
