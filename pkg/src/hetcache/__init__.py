"""Coded caching with heterogeneous user profiles.

Peak and uniform-average rates of three placement/delivery schemes, the
cut-set lower bound, cache-split optimization and a bit-exact simulator
used to check the formulas.
"""
from .bounds import (BoundReport, RegimeReport, TrivialBoundError, classify_regime,
                     cutset_bound, gap_ratio, gap_report)
from .combinat import binom, binom_exact, dbinom_dk, digamma, log_gamma
from .model import (ConfigError, DemandProfile, DemandSpaceTooLarge, Estimate, SystemConfig,
                    config_from_dict, demand_stats, distinct_stats, enumerate_demands,
                    expected_distinct, load_config)
from .optimizer import (appendix_a_bounds, optimize_x_avg, optimize_x_peak,
                        theorem5_threshold, worst_alpha)
from .ratecalc import (mn_peak, mn_rate_distinct, oracle_avg, scheme1_avg, scheme1_peak,
                       scheme2_avg, scheme2_peak, scheme2_rate, scheme3_avg, scheme3_peak,
                       scheme_params)
from .simcore import deliver, measured_rate, place, simulate, verify_decode

__version__ = '0.1.0'

__all__ = [
    'BoundReport', 'RegimeReport', 'TrivialBoundError', 'classify_regime', 'cutset_bound',
    'gap_ratio', 'gap_report',
    'binom', 'binom_exact', 'dbinom_dk', 'digamma', 'log_gamma',
    'ConfigError', 'DemandProfile', 'DemandSpaceTooLarge', 'Estimate', 'SystemConfig',
    'config_from_dict', 'demand_stats', 'distinct_stats', 'enumerate_demands',
    'expected_distinct', 'load_config',
    'appendix_a_bounds', 'optimize_x_avg', 'optimize_x_peak', 'theorem5_threshold',
    'worst_alpha',
    'mn_peak', 'mn_rate_distinct', 'oracle_avg', 'scheme1_avg', 'scheme1_peak', 'scheme2_avg',
    'scheme2_peak', 'scheme2_rate', 'scheme3_avg', 'scheme3_peak', 'scheme_params',
    'deliver', 'measured_rate', 'place', 'simulate', 'verify_decode',
]
