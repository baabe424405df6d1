"""Cut-set lower bound on the peak rate, gap ratios and regime thresholds."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import SystemConfig
from .ratecalc import scheme1_peak, scheme2_rate, scheme3_peak

__all__ = [
    'TrivialBoundError',
    'BoundReport',
    'RegimeReport',
    'cutset_terms',
    'cutset_bound',
    'gap_ratio',
    'gap_report',
    'classify_regime',
    'all_unique_cached_rate',
    'SCHEME1_BEST',
    'SCHEME2_BEST',
    'INDETERMINATE',
]

SCHEME1_BEST = 'scheme1_best'
SCHEME2_BEST = 'scheme2_best'
INDETERMINATE = 'indeterminate'

_TOL = 1e-9


class TrivialBoundError(ValueError):
    """The cut-set bound is not positive, so a gap ratio is undefined."""


@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    s_star: Optional[int]
    per_s_values: list
    trivial: bool
    gap_ratios: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RegimeReport:
    """Regime label, the threshold inequalities behind it and the numeric check.

    ``inequalities`` maps a name to ``(M, threshold, satisfied)``;
    thresholds that do not apply (G = 1 for the Scheme 2 vs 3 one) are None.
    ``threshold_label`` is the verdict of the thresholds alone. ``label``
    equals it unless the numeric comparison ran and contradicted it, in
    which case ``label`` is ``indeterminate`` and ``contradicted`` is True.
    """
    label: str
    inequalities: dict
    rates: dict
    numeric_best: list
    scheme3_le_scheme1: bool
    threshold_label: str = INDETERMINATE
    contradicted: bool = False


def cutset_terms(cfg: SystemConfig) -> list:
    """``[(s, G*s - G*s*M / floor(N / (G*s)))]`` for ``s = 1 .. floor(min(K, N)/G)``."""
    G, N, M = cfg.G, cfg.N, cfg.M
    s_max = min(cfg.K, N) // G
    terms = []
    for s in range(1, s_max + 1):
        blocks = N // (G * s)
        terms.append((s, G * s - G * s * M / blocks))
    return terms


def cutset_bound(cfg: SystemConfig) -> BoundReport:
    """Cut-set lower bound on the peak rate of any scheme.

    The bound is clamped at 0 and flagged trivial when every term is
    non-positive, which always happens for ``M > N/G``.
    """
    terms = cutset_terms(cfg)
    if not terms:
        return BoundReport(0.0, None, [], True)
    s_star, best = max(terms, key=lambda item: item[1])
    trivial = best <= 0 or cfg.M > cfg.N / cfg.G
    return BoundReport(max(0.0, float(best)), s_star, [(s, float(v)) for s, v in terms],
                       trivial)


def gap_ratio(cfg: SystemConfig, scheme_peak_rate: float, bound: Optional[BoundReport] = None) -> float:
    bound = cutset_bound(cfg) if bound is None else bound
    if bound.trivial or bound.bound_value <= 0:
        raise TrivialBoundError(
            f"cut-set bound is trivial for M={cfg.M} (N/G={cfg.N / cfg.G}); ratio undefined")
    return float(scheme_peak_rate) / bound.bound_value


def gap_report(cfg: SystemConfig, peaks: Optional[dict] = None) -> BoundReport:
    """Cut-set bound with the gap ratio of each scheme's peak rate."""
    from .optimizer import optimize_x_peak
    bound = cutset_bound(cfg)
    if peaks is None:
        peaks = {1: scheme1_peak(cfg), 2: optimize_x_peak(cfg).rate, 3: scheme3_peak(cfg)}
    ratios = {}
    if not bound.trivial:
        ratios = {k: gap_ratio(cfg, v, bound) for k, v in peaks.items()}
    return BoundReport(bound.bound_value, bound.s_star, bound.per_s_values, bound.trivial,
                       ratios)


def all_unique_cached_rate(cfg: SystemConfig) -> Optional[float]:
    """Scheme 2 rate at ``x = 1 - Nu/M`` with no unique requests.

    At that split every user stores all unique files of its class, so the
    worst case has every user asking for a common file. Returns None when
    the split is infeasible (``M < Nu``).
    """
    M = float(cfg.M)
    if M == 0 or M < cfg.Nu:
        return None
    return float(scheme2_rate(cfg, 1 - cfg.Nu / M, 0.0).total)


def classify_regime(cfg: SystemConfig, compare: bool = True) -> RegimeReport:
    """Which scheme has the lowest peak rate, from the closed-form thresholds.

    ``scheme1_best`` when ``M <= min(Nc - G Nu/K, Nc/K, G Nu/K)``;
    ``scheme2_best`` when ``M >= max(G/(G-1) (K+1)/K Nu, Nc/G + Nu)``
    (needs G > 1); otherwise ``indeterminate``. With ``compare`` the three
    peak rates are computed and the numerically best schemes listed; a
    threshold label the numbers contradict is demoted to ``indeterminate``.
    The Scheme 1 threshold is not sufficient on its own: for small M the
    optimized split can undercut sending everything as common files.
    """
    from .optimizer import optimize_x_peak
    K, G, Nc, Nu = cfg.K, cfg.G, cfg.Nc, cfg.Nu
    M = float(cfg.M)
    s1 = min(Nc - G * Nu / K, Nc / K, G * Nu / K)
    s2_vs_3 = G / (G - 1) * (K + 1) / K * Nu if G > 1 else None
    s2_vs_1 = Nc / G + Nu
    s1_vs_2 = min(Nc, G * Nu) / K
    s3_vs_1 = Nc - G * Nu / K
    ineq = {
        'scheme1_best': (M, s1, M <= s1),
        'scheme2_le_scheme3': (M, s2_vs_3, None if s2_vs_3 is None else M >= s2_vs_3),
        'scheme2_le_scheme1': (M, s2_vs_1, M >= s2_vs_1),
        'scheme1_le_scheme2': (M, s1_vs_2, M <= s1_vs_2),
        'scheme3_le_scheme1': (M, s3_vs_1, M >= s3_vs_1),
    }
    if M <= s1:
        label = SCHEME1_BEST
    elif s2_vs_3 is not None and M >= max(s2_vs_3, s2_vs_1):
        label = SCHEME2_BEST
    else:
        label = INDETERMINATE
    rates, best = {}, []
    threshold_label, contradicted = label, False
    if compare:
        rates = {1: float(scheme1_peak(cfg)), 2: optimize_x_peak(cfg).rate,
                 3: float(scheme3_peak(cfg))}
        low = min(rates.values())
        best = [k for k, v in rates.items() if v <= low + _TOL]
        winner = {SCHEME1_BEST: 1, SCHEME2_BEST: 2}.get(label)
        if winner is not None and winner not in best:
            label, contradicted = INDETERMINATE, True
    return RegimeReport(label, ineq, rates, best, M >= s3_vs_1, threshold_label, contradicted)
