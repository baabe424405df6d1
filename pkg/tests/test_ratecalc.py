import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetcache.model import SystemConfig, demand_stats, distinct_stats, enumerate_demands, \
    expected_distinct
from hetcache.optimizer import optimize_x_peak, worst_alpha
from hetcache.ratecalc import (adjusted_rate, mn_peak, mn_peak_closed, mn_rate_distinct,
                               oracle_avg, scheme1_avg, scheme1_peak, scheme2_avg, scheme2_peak,
                               scheme2_rate, scheme2_rate_vector, scheme3_avg, scheme3_peak,
                               scheme_params, uniform_avg_report)

SMALL = [(4, 2, 2, 1), (2, 1, 2, 1), (3, 3, 1, 2), (4, 1, 2, 2), (6, 2, 1, 1), (4, 4, 2, 1)]


@pytest.mark.parametrize('K, t, expected', [(4, 2, 2 / 3), (2, 1, 1 / 2), (5, 4, 1 / 5)])
def test_mn_peak_examples(K, t, expected):
    assert mn_peak(K, t) == pytest.approx(expected, rel=1e-12)
    assert mn_peak_closed(K, t) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize('K, t', [(4, 0.5), (4, 3.5)])
def test_mn_peak_range(K, t):
    with pytest.raises(ValueError):
        mn_peak(K, t)


@pytest.mark.parametrize('K', [4, 7, 16, 32])
def test_binomial_ratio_equals_closed_form(K):
    ts = np.arange(1.0, K - 1 + 1e-9, 0.1)
    np.testing.assert_allclose(mn_peak(K, ts), mn_peak_closed(K, ts), rtol=1e-10)


@pytest.mark.parametrize('K, t, n, expected', [(4, 2, 0, 0.0), (4, 2, 1, 0.5), (4, 2, 4, 2 / 3),
                                               (6, 3, 2, (15 - 1) / 20)])
def test_mn_rate_distinct_examples(K, t, n, expected):
    assert mn_rate_distinct(K, t, n) == pytest.approx(expected, abs=1e-12)


def test_mn_rate_distinct_errors():
    with pytest.raises(ValueError):
        mn_rate_distinct(4, 2, -1)
    with pytest.raises(ValueError):
        mn_rate_distinct(4, 2, 5)
    with pytest.raises(ValueError):
        mn_rate_distinct(4, 0.5, 2)


def test_adjusted_rate_examples():
    assert adjusted_rate(5, 0.0, 10, 3) == pytest.approx(3.0)
    assert adjusted_rate(5, 10.0, 10, 5) == pytest.approx(0.0, abs=1e-15)
    assert adjusted_rate(2, 0.5, 2, 2) == pytest.approx(1.25)
    assert adjusted_rate(4, 1.0, 4, 0) == 0.0


def test_adjusted_rate_errors():
    with pytest.raises(ValueError):
        adjusted_rate(4, -1.0, 4, 2)
    with pytest.raises(ValueError):
        adjusted_rate(4, 5.0, 4, 2)
    with pytest.raises(ValueError):
        adjusted_rate(4, 1.0, 4, -1)


@pytest.mark.parametrize('K_eff', [2.0, 3.0, 5.5, 8.0, 16.0])
@pytest.mark.parametrize('n_frac', [0.3, 1.0])
def test_adjusted_rate_continuous_at_seams(K_eff, n_frac):
    n_files = 10.0
    n = n_frac * K_eff
    eps = 1e-12
    for seam in (1.0, K_eff - 1):
        m = seam * n_files / K_eff
        left = adjusted_rate(K_eff, m - eps, n_files, n)
        right = adjusted_rate(K_eff, m + eps, n_files, n)
        at = adjusted_rate(K_eff, m, n_files, n)
        assert left == pytest.approx(at, abs=1e-9)
        assert right == pytest.approx(at, abs=1e-9)


@pytest.mark.parametrize('K_eff', [0.5, 1.0, 1.5])
def test_adjusted_rate_small_groups(K_eff):
    # fewer than two users: no coding gain, only local caching
    r0 = adjusted_rate(K_eff, 0.0, 4, K_eff)
    r_full = adjusted_rate(K_eff, 4.0, 4, K_eff)
    assert r0 == pytest.approx(K_eff)
    assert r_full == pytest.approx(0.0, abs=1e-12)
    ms = np.linspace(0, 4, 41)
    assert np.all(np.diff(adjusted_rate(K_eff, ms, 4, K_eff)) <= 1e-12)


def test_scheme_params():
    cfg = SystemConfig(16, 2, 256, 256, 48)
    p = scheme_params(cfg, 1)
    assert p.t1 == pytest.approx(1.0) and p.p_uncached == pytest.approx(0.0)
    p = scheme_params(cfg.replace(M=24), 1)
    assert p.p_uncached == pytest.approx(0.5) and p.gamma_full == 0.0
    p = scheme_params(cfg.replace(M=768), 3)
    assert p.t3 == pytest.approx(8.0) and p.gamma_full == pytest.approx(1.0)
    p = scheme_params(cfg, 2, 0.5)
    assert p.t_c == pytest.approx(16 * 24 / 256) and p.t_u == pytest.approx(8 * 24 / 256)


def test_scheme1_peak_examples():
    cfg = SystemConfig(16, 2, 256, 256, 48)
    assert scheme1_peak(cfg) == pytest.approx(7.5)
    assert scheme1_peak(cfg.replace(M=768)) == pytest.approx(0.0, abs=1e-12)
    assert scheme1_peak(cfg.replace(M=0)) == pytest.approx(16)
    assert scheme1_peak(SystemConfig(8, 1, 3, 0, 0)) == pytest.approx(3)


def test_scheme3_peak_examples():
    cfg = SystemConfig(16, 2, 256, 256, 64)
    assert scheme3_peak(cfg) == pytest.approx(7.0)
    assert scheme3_peak(cfg.replace(M=512)) == pytest.approx(0.0, abs=1e-12)
    g1 = SystemConfig(8, 1, 5, 3, 2.5)
    assert scheme3_peak(g1) == pytest.approx(scheme1_peak(g1), abs=1e-12)


def test_scheme2_rate_examples():
    cfg = SystemConfig(4, 2, 2, 1, 1)
    r = scheme2_rate(cfg, 0.5, 1)
    assert r.common == pytest.approx(5 / 4)
    assert r.unique == pytest.approx(1.0)
    assert r.total == pytest.approx(9 / 4)
    assert scheme2_rate(cfg, 0.5, 0).unique == 0.0
    assert scheme2_rate(cfg, 0.5, 2).common == pytest.approx(0.0, abs=1e-12)


def test_scheme2_rate_errors_and_vector_form():
    cfg = SystemConfig(6, 2, 4, 3, 2)
    with pytest.raises(ValueError):
        scheme2_rate(cfg, 1.5, 1)
    with pytest.raises(ValueError):
        scheme2_rate(cfg, 0.5, 4)
    with pytest.raises(ValueError):
        scheme2_rate_vector(cfg, 0.5, [1, 1, 1])
    for a in range(4):
        assert scheme2_rate_vector(cfg, 0.3, [a, a]).total == pytest.approx(
            scheme2_rate(cfg, 0.3, a).total, abs=1e-12)


def test_scheme2_peak_degenerate_cases():
    cfg = SystemConfig(6, 2, 12, 0, 3)
    rate, x, _ = scheme2_peak(cfg)
    assert rate == pytest.approx(scheme1_peak(cfg), abs=1e-9)
    assert x == pytest.approx(1.0)
    cfg = SystemConfig(6, 1, 0, 12, 3)
    rate, x, _ = scheme2_peak(cfg)
    assert rate == pytest.approx(scheme3_peak(cfg), abs=1e-9)
    assert scheme3_peak(cfg) == pytest.approx(scheme1_peak(cfg), abs=1e-12)
    assert x == pytest.approx(0.0)


def _vector_rate(cfg, scheme, d, x=None):
    """Per-vector rate computed directly from the demand counts."""
    s = distinct_stats(d, cfg)
    if scheme == 1:
        return adjusted_rate(cfg.K, cfg.M, cfg.N, s.n_total)
    if scheme == 3:
        a = cfg.demand_set_size
        return sum(adjusted_rate(cfg.users_per_class, min(cfg.M, a), a, n)
                   for n in s.n_class_total)
    M = float(cfg.M)
    common = adjusted_rate(cfg.K, min(M * x, cfg.Nc), cfg.Nc, s.n_common)
    return common + sum(adjusted_rate(cfg.users_per_class, min(M * (1 - x), cfg.Nu), cfg.Nu, n)
                        for n in s.n_unique_per_class)


@pytest.mark.parametrize('shape', SMALL)
@pytest.mark.parametrize('frac', [0.0, 0.2, 0.5, 0.9])
def test_exact_averages_equal_enumeration(shape, frac):
    base = SystemConfig(*shape, 0)
    cfg = base.replace(M=frac * base.N)
    vectors = list(enumerate_demands(cfg))
    stats = demand_stats(base, 'exact')
    want1 = np.mean([_vector_rate(cfg, 1, d) for d in vectors])
    want3 = np.mean([_vector_rate(cfg, 3, d) for d in vectors])
    assert scheme1_avg(cfg, stats=stats).mean == pytest.approx(want1, abs=1e-12)
    assert scheme3_avg(cfg, stats=stats).mean == pytest.approx(want3, abs=1e-12)
    for x in (0.0, 0.4, 1.0):
        want2 = np.mean([_vector_rate(cfg, 2, d, x) for d in vectors])
        assert scheme2_avg(cfg, x, stats=stats).mean == pytest.approx(want2, abs=1e-12)


def test_average_examples():
    assert scheme1_avg(SystemConfig(1, 1, 2, 0, 0)).mean == pytest.approx(1.0)
    assert scheme3_avg(SystemConfig(3, 3, 2, 2, 0)).mean == pytest.approx(3.0)
    g1 = SystemConfig(4, 1, 2, 2, 1.5)
    assert scheme3_avg(g1).mean == pytest.approx(scheme1_avg(g1).mean, abs=1e-12)


def test_scheme2_average_endpoints_are_uncoded_branches():
    cfg = SystemConfig(4, 2, 2, 1, 1)
    e_c, e_u = expected_distinct(cfg)
    stats = demand_stats(cfg, 'exact')
    # x = 1: unique branch has no cache, so it sends every distinct unique file
    at_one = scheme2_avg(cfg, 1.0, stats=stats).mean
    common_only = stats.expect(common=[adjusted_rate(4, 1.0, 2, n) for n in range(5)]).mean
    assert at_one - common_only == pytest.approx(cfg.G * e_u, abs=1e-12)
    at_zero = scheme2_avg(cfg, 0.0, stats=stats).mean
    unique_only = stats.expect(unique=[adjusted_rate(2, 1.0, 1, n) for n in range(3)]).mean
    assert at_zero - unique_only == pytest.approx(e_c, abs=1e-12)


def test_stats_reuse_across_cache_sizes():
    base = SystemConfig(4, 2, 2, 1, 0)
    stats = demand_stats(base, 'exact')
    cfg = base.replace(M=2)
    assert scheme1_avg(cfg, stats=stats).mean == pytest.approx(scheme1_avg(cfg).mean)
    with pytest.raises(ValueError, match='different'):
        scheme1_avg(SystemConfig(4, 2, 3, 1, 0), stats=stats)


def _oracle_by_enumeration(cfg):
    """Condition on who asks for common files, then count distinct requests."""
    total = 0.0
    vectors = list(enumerate_demands(cfg))
    M = float(cfg.M)
    for d in vectors:
        common = [n for n in d if n < cfg.Nc]
        r = adjusted_rate(len(common), min(M, cfg.Nc), cfg.Nc, len(set(common)))
        for c in range(cfg.G):
            u = [d[k] for k in cfg.class_users(c) if d[k] >= cfg.Nc]
            r += adjusted_rate(len(u), min(M, cfg.Nu), cfg.Nu, len(set(u)))
        total += r
    return total / len(vectors)


@pytest.mark.parametrize('shape', [(4, 2, 2, 1), (2, 1, 2, 1), (3, 3, 1, 2), (6, 2, 1, 1)])
@pytest.mark.parametrize('M', [0.0, 0.5, 1.0, 2.5])
def test_oracle_exact_split_matches_conditional_enumeration(shape, M):
    cfg = SystemConfig(*shape, 0)
    cfg = cfg.replace(M=min(M, cfg.N))
    assert oracle_avg(cfg, 'exact') == pytest.approx(_oracle_by_enumeration(cfg), abs=1e-12)


def test_oracle_limits():
    cfg = SystemConfig(4, 2, 3, 2, 0)
    e_c, e_u = expected_distinct(cfg)
    assert oracle_avg(cfg, 'exact') == pytest.approx(e_c + cfg.G * e_u, abs=1e-12)
    # spreading unique requesters evenly over classes can only add distinct files
    assert oracle_avg(cfg) >= oracle_avg(cfg, 'exact') - 1e-12
    only_common = SystemConfig(4, 1, 3, 0, 1.5)
    assert oracle_avg(only_common) == pytest.approx(scheme1_avg(only_common).mean, abs=1e-12)
    assert oracle_avg(cfg.replace(M=cfg.N)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        oracle_avg(cfg, 'fuzzy')


def test_uniform_avg_report_consistent():
    cfg = SystemConfig(4, 2, 2, 1, 1)
    rep = uniform_avg_report(cfg)
    assert rep[1].avg.mean == pytest.approx(scheme1_avg(cfg).mean)
    assert rep[3].avg.mean == pytest.approx(scheme3_avg(cfg).mean)
    assert rep[2].avg.mean == pytest.approx(scheme2_avg(cfg, rep[2].x_avg).mean)
    assert rep[2].peak == pytest.approx(optimize_x_peak(cfg).rate)
    assert rep['oracle'].avg.mean == pytest.approx(oracle_avg(cfg))


@pytest.mark.parametrize('shape', [(4, 2, 2, 1), (4, 1, 3, 1), (6, 3, 2, 1), (4, 4, 1, 1)])
def test_monotone_in_cache_and_average_below_peak(shape):
    base = SystemConfig(*shape, 0)
    stats = demand_stats(base, 'exact')
    prev = None
    for M in np.arange(0, base.N + 1e-9, 0.25):
        cfg = base.replace(M=float(M))
        x = optimize_x_peak(cfg).x_star
        cur = np.array([scheme1_peak(cfg), optimize_x_peak(cfg).rate, scheme3_peak(cfg),
                        scheme1_avg(cfg, stats=stats).mean, scheme3_avg(cfg, stats=stats).mean,
                        oracle_avg(cfg), oracle_avg(cfg, 'exact')])
        assert np.all((cur >= -1e-12) & (cur <= cfg.K + 1e-12))
        if prev is not None:
            assert np.all(cur <= prev + 1e-9)
        assert cur[3] <= cur[0] + 1e-12 and cur[4] <= cur[2] + 1e-12
        assert scheme2_avg(cfg, x, stats=stats).mean <= worst_alpha(cfg, x)[1] + 1e-9
        prev = cur


@settings(max_examples=60, deadline=None)
@given(upc=st.integers(2, 8), Nu=st.integers(1, 20), frac=st.floats(0.0, 1.0),
       x=st.floats(0.0, 1.0))
def test_unique_rate_diminishing_increments(upc, Nu, frac, x):
    cfg = SystemConfig(2 * upc, 2, 4, Nu, frac * (4 + Nu))
    r = np.array([scheme2_rate(cfg, x, a).unique for a in range(upc + 1)]) / cfg.G
    inc = np.diff(r)
    assert np.all(np.diff(inc) <= 1e-9)


@settings(max_examples=60, deadline=None)
@given(G=st.integers(1, 4), upc=st.integers(1, 6), Nc=st.integers(0, 40),
       Nu=st.integers(1, 40), frac=st.floats(0.0, 1.0), x=st.floats(0.0, 1.0),
       afrac=st.floats(0.0, 1.0))
def test_rates_within_zero_and_K(G, upc, Nc, Nu, frac, x, afrac):
    cfg = SystemConfig(G * upc, G, Nc, Nu, frac * (Nc + G * Nu))
    for r in (scheme1_peak(cfg), scheme3_peak(cfg),
              scheme2_rate(cfg, x, afrac * upc).total):
        assert -1e-12 <= r <= cfg.K + 1e-9
        assert math.isfinite(r)
