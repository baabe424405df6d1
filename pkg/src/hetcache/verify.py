"""Cross-validation suites behind ``hetcache verify``.

Each suite returns a :class:`SuiteResult` with pass/fail counts and the
first counterexample. Suites are deterministic for a given seed. Two
checks whose closed-form rules are approximations are reported as
informational and do not affect the exit status.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from .bounds import all_unique_cached_rate, cutset_bound
from .model import SystemConfig, demand_stats, enumerate_demands, expected_distinct
from .optimizer import (exact_avg_split, optimize_x_avg, optimize_x_peak,
                        small_cache_window, theorem5_threshold, worst_alpha)
from .ratecalc import (_common_rate, _unique_rate, scheme1_avg, scheme1_peak,
                       scheme2_avg, scheme3_avg, scheme3_peak)
from .simcore import deliver, drop_message, place, verify_decode

__all__ = [
    'SuiteResult',
    'distinct_rate_exact',
    'integer_cases',
    'random_integer_case',
    'suite_simulator',
    'suite_decodability',
    'suite_averages',
    'suite_bounds',
    'suite_crossover',
    'suite_uniform_alpha',
    'suite_split_rules',
    'run_all',
]


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    counterexample: Optional[str] = None
    informational: bool = False
    notes: dict = field(default_factory=dict)

    def record(self, ok: bool, detail=None):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.counterexample is None:
                self.counterexample = str(detail)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        out = {'passed': self.passed, 'failed': self.failed, 'ok': self.ok}
        if self.counterexample is not None:
            out['counterexample'] = self.counterexample
        if self.informational:
            out['informational'] = True
        out.update(self.notes)
        return out


def distinct_rate_exact(K: int, t: int, n: int) -> Fraction:
    """[C(K, t+1) - C(K-n, t+1)] / C(K, t) in exact arithmetic."""
    return Fraction(comb(K, t + 1) - comb(K - n, t + 1), comb(K, t))


def integer_cases(K, G, Nc, Nu):
    """(cfg, scheme, x) triples with integer caching parameters.

    Scheme 1 and 3 cover every t; scheme 2 pairs each ``t_c`` with one
    ``t_u`` so the list stays linear in K.
    """
    upc = K // G
    out = []
    for t in range(K + 1):
        out.append((SystemConfig(K, G, Nc, Nu, Fraction(t * (Nc + G * Nu), K)), 1, None))
    for t in range(upc + 1):
        out.append((SystemConfig(K, G, Nc, Nu, Fraction(t * (Nc + Nu), upc)), 3, None))
    for tc in range(K + 1):
        tu = tc % (upc + 1)
        mc = Fraction(tc * Nc, K)
        mu = Fraction(tu * Nu, upc)
        if mc + mu == 0:
            continue
        out.append((SystemConfig(K, G, Nc, Nu, mc + mu), 2, mc / (mc + mu)))
    return out


def random_integer_case(rng: random.Random, max_users=4, max_g=2):
    """Random small config with integer caching parameters and a demand."""
    while True:
        G = rng.randint(1, max_g)
        K = G * rng.randint(1, max_users)
        Nc, Nu = rng.randint(0, 4), rng.randint(0, 3)
        if Nc + Nu:
            break
    upc = K // G
    scheme = rng.choice((1, 2, 3))
    x = None
    if scheme == 1:
        M = Fraction(rng.randint(0, K) * (Nc + G * Nu), K)
    elif scheme == 3:
        M = Fraction(rng.randint(0, upc) * (Nc + Nu), upc)
    else:
        mc = Fraction(rng.randint(0, K) * Nc, K)
        mu = Fraction(rng.randint(0, upc) * Nu, upc)
        M = mc + mu
        x = mc / M if M else Fraction(1)
    cfg = SystemConfig(K, G, Nc, Nu, M)
    d = [rng.choice(cfg.demand_set(k)) for k in range(K)]
    return cfg, scheme, x, d


def suite_simulator(configs=((2, 2, 1, 1), (4, 2, 2, 1), (4, 1, 3, 1), (6, 2, 1, 1))):
    """Leader-based simulated rate of every group equals the distinct-request formula."""
    res = SuiteResult('simulator_equivalence')
    for shape in configs:
        for cfg, scheme, x in integer_cases(*shape):
            placement = place(cfg, scheme, x)
            for d in enumerate_demands(cfg):
                per = {g.name: 0 for g in placement.groups}
                for msg in deliver(placement, d, leader_based=True):
                    per[msg.group] += msg.bits
                for g in placement.groups:
                    n = len({d[k] for k in g.users if d[k] in g.files})
                    want = distinct_rate_exact(g.size, g.t, n)
                    got = Fraction(per[g.name], placement.F)
                    res.record(got == want, f"{cfg} scheme={scheme} x={x} d={d} "
                                            f"group={g.name}: {got} != {want}")
    return res


def suite_decodability(trials=2000, seed=0, mutate=False):
    """Random (config, demand, scheme) trials decode; with ``mutate`` one message is dropped.

    Mutation runs use leader-based delivery: full delivery under repeated
    demands sends linearly dependent messages, so a single drop there can
    be harmless.
    """
    rng = random.Random(seed)
    res = SuiteResult('decodability')
    skipped = 0
    for i in range(trials):
        cfg, scheme, x, d = random_integer_case(rng)
        leader = mutate or rng.random() < 0.5
        placement = place(cfg, scheme, x, seed=i)
        messages = deliver(placement, d, leader_based=leader)
        if mutate:
            if not messages:
                skipped += 1
                continue
            messages = drop_message(messages, rng.randrange(len(messages)))
        outcome = verify_decode(placement, messages, d)
        res.record(bool(outcome), f"{cfg} scheme={scheme} x={x} d={d} "
                                  f"leader_based={leader}: {outcome!r}")
    if mutate:
        res.notes['skipped_no_messages'] = skipped
    return res


def suite_averages(configs=((4, 2, 2, 1), (2, 1, 2, 1), (3, 3, 1, 2), (4, 1, 2, 2))):
    """Exact-mode averages equal per-vector sums; expected-distinct closed forms hold."""
    res = SuiteResult('average_enumeration')
    for shape in configs:
        base = SystemConfig(*shape, 0)
        stats = demand_stats(base, 'exact')
        vectors = list(enumerate_demands(base))
        w = 1.0 / len(vectors)
        mean_c = sum(sum(1 for n in set(d) if n < base.Nc) for d in vectors) * w
        e_c, _ = expected_distinct(base)
        res.record(abs(mean_c - e_c) <= 1e-12, f"{base}: E[Nc] {mean_c} != {e_c}")
        for frac in (0.25, 0.5, 1.0):
            cfg = base.replace(M=frac * base.demand_set_size)
            for scheme, avg in ((1, scheme1_avg), (2, None), (3, scheme3_avg)):
                if scheme == 2:
                    got = scheme2_avg(cfg, 0.5, stats=stats).mean
                    want = sum(scheme2_avg_single(cfg, 0.5, d) for d in vectors) * w
                else:
                    got = avg(cfg, stats=stats).mean
                    want = sum(single_vector_rate(cfg, scheme, d) for d in vectors) * w
                res.record(abs(got - want) <= 1e-12, f"{cfg} scheme={scheme}: {got} != {want}")
    return res


def single_vector_rate(cfg, scheme, d):
    """Analytic rate of one demand vector under scheme 1 or 3."""
    from .ratecalc import adjusted_rate
    if scheme == 1:
        return float(adjusted_rate(cfg.K, cfg.M, cfg.N, len(set(d))))
    upc, a = cfg.users_per_class, cfg.demand_set_size
    return sum(float(adjusted_rate(upc, min(cfg.M, a), a, len(set(d[k] for k in cfg.class_users(c)))))
               for c in range(cfg.G))


def scheme2_avg_single(cfg, x, d):
    n_c = len({n for n in d if n < cfg.Nc})
    total = float(_common_rate(cfg, x, n_c))
    for c in range(cfg.G):
        u = len({d[k] for k in cfg.class_users(c) if d[k] >= cfg.Nc})
        total += float(_unique_rate(cfg, x, u))
    return total


def suite_bounds(n_configs=100, seed=0):
    """Cut-set soundness, gap factors and the all-unique-cached upper bound."""
    rng = np.random.default_rng(seed)
    res = SuiteResult('cutset_and_gaps')
    checked = 0
    while checked < n_configs:
        G = int(rng.choice([1, 2, 4]))
        K = G * int(rng.integers(1, 32 // G + 1))
        Nc, Nu = int(rng.integers(1, 257)), int(rng.integers(1, 257))
        N = Nc + G * Nu
        M = float(rng.uniform(0, N / G))
        cfg = SystemConfig(K, G, Nc, Nu, M)
        bound = cutset_bound(cfg)
        r1, r3 = float(scheme1_peak(cfg)), float(scheme3_peak(cfg))
        r2 = optimize_x_peak(cfg).rate
        checked += 1
        res.record(bound.bound_value <= min(r1, r2, r3) + 1e-9, f"{cfg}: bound above a scheme")
        upper = all_unique_cached_rate(cfg)
        if upper is not None:
            res.record(r2 <= upper + 1e-9, f"{cfg}: min-max {r2} above construction {upper}")
        if bound.trivial:
            continue
        if N / K <= M <= N / (2 * G):
            res.record(r1 / bound.bound_value <= 8, f"{cfg}: scheme 1 gap")
        if G / K * (Nc + Nu) <= M <= N / (2 * G):
            res.record(r3 / bound.bound_value <= 8 * K / G, f"{cfg}: scheme 3 gap")
            res.record(r2 / bound.bound_value < 8 + 8 * K / G, f"{cfg}: scheme 2 gap")
    return res


def interior_crossover_configs(n, rng):
    """Configs whose Scheme 1 / Scheme 3 crossover lies where both rates are interior."""
    out = []
    while len(out) < n:
        G = int(rng.choice([2, 4]))
        K = G * int(rng.integers(3, 9))
        Nc, Nu = int(rng.integers(16, 257)), int(rng.integers(1, 65))
        cfg = SystemConfig(K, G, Nc, Nu, 0)
        lo, hi = interior_range(cfg)
        thr = Nc - G * Nu / K
        if lo + 1 <= thr <= hi - 1:
            out.append(cfg)
    return out


def interior_range(cfg):
    """M range where both t1 and t3 lie in [1, K_eff - 1]."""
    K, upc = cfg.K, cfg.users_per_class
    a = cfg.demand_set_size
    lo = max(cfg.N / K, a / upc)
    hi = min((K - 1) * cfg.N / K, (upc - 1) * a / upc)
    return lo, hi


def crossover_check(cfg, step=0.5):
    """Sign agreement of R3 - R1 with Nc - G Nu/K - M on an interior M grid.

    Returns ``(n_points, mismatches, crossing_error)``; the crossing error
    is the distance between the first sign change and the threshold.
    """
    lo, hi = interior_range(cfg)
    thr = cfg.Nc - cfg.G * cfg.Nu / cfg.K
    Ms = np.arange(np.ceil(lo / step) * step, hi + 1e-9, step)
    mism = 0
    diffs = []
    for M in Ms:
        c = cfg.replace(M=float(M))
        diff = float(scheme3_peak(c)) - float(scheme1_peak(c))
        diffs.append(diff)
        want = np.sign(thr - M)
        got = np.sign(diff) if abs(diff) > 1e-9 else 0.0
        if want != 0 and got != want and abs(thr - M) > 1e-9:
            mism += 1
    diffs = np.array(diffs)
    idx = np.nonzero(diffs <= 1e-9)[0]
    cross = Ms[idx[0]] if len(idx) else np.inf
    return len(Ms), mism, abs(cross - thr)


def suite_crossover(n_configs=20, seed=0, step=0.5):
    """Scheme 3 beats Scheme 1 exactly when M >= Nc - G Nu / K."""
    rng = np.random.default_rng(seed)
    res = SuiteResult('scheme1_scheme3_crossover')
    for cfg in interior_crossover_configs(n_configs, rng):
        _, mism, err = crossover_check(cfg, step)
        res.record(mism == 0 and err <= step, f"{cfg}: {mism} sign mismatches, crossing off by {err}")
    return res


def uniform_alpha_check(cfg, x) -> bool:
    """Max Scheme 2 rate over integer alpha-vectors is attained by a most-uniform one."""
    upc = cfg.users_per_class
    vecs = np.array(list(itertools.product(range(upc + 1), repeat=cfg.G)))
    rates = (np.asarray(_common_rate(cfg, x, cfg.K - vecs.sum(axis=1)))
             + np.asarray(_unique_rate(cfg, x, vecs)).sum(axis=1))
    uniform = vecs.max(axis=1) - vecs.min(axis=1) <= 1
    return rates[uniform].max() >= rates.max() - 1e-12


def suite_uniform_alpha(max_upc=6, max_g=3):
    res = SuiteResult('uniform_alpha')
    for G in range(1, max_g + 1):
        for upc in range(1, max_upc + 1):
            for Nc, Nu in ((2, 1), (4, 3), (8, 8), (3, 12)):
                for frac in (0.1, 0.5, 0.9):
                    cfg = SystemConfig(G * upc, G, Nc, Nu, frac * (Nc + Nu))
                    for x in np.linspace(0, 1, 6):
                        res.record(uniform_alpha_check(cfg, x), f"{cfg} x={x}")
    return res


def suite_split_rules(n_configs=20, seed=0):
    """Split rules for Scheme 2.

    Gating: inside the small-cache window the exact-moment rule picks a
    minimizing endpoint. Informational: the closed-form average rule and
    the all-common peak rule below its threshold.
    """
    exact = SuiteResult('average_split_exact_rule')
    closed = SuiteResult('average_split_closed_form', informational=True)
    for G in (1, 2, 3):
        for upc in (1, 2, 3):
            for Nc in range(1, 5):
                for Nu in range(1, 4):
                    base = SystemConfig(G * upc, G, Nc, Nu, 0)
                    if base.demand_set_size ** base.K > 20_000:
                        continue
                    stats = demand_stats(base, 'exact')
                    cfg = base.replace(M=small_cache_window(base) / 2)
                    opt = optimize_x_avg(cfg, stats=stats)
                    pick = exact_avg_split(cfg, stats)
                    r = scheme2_avg(cfg, pick, stats=stats).mean
                    tol = 1e-9 * max(1.0, abs(opt.grid_rate.mean))
                    exact.record(r <= opt.grid_rate.mean + tol, f"{cfg}: exact rule x={pick}")
                    closed.record(bool(opt.agrees), f"{cfg}: closed form x={opt.closed_form_x}")
    peak = SuiteResult('peak_all_common_rule', informational=True)
    rng = np.random.default_rng(seed)
    while peak.passed + peak.failed < n_configs:
        G = int(rng.choice([2, 4]))
        K = G * int(rng.integers(2, 9))
        base = SystemConfig(K, G, int(rng.integers(4, 128)), int(rng.integers(4, 256)), 0)
        thr = theorem5_threshold(base)
        if thr <= 1e-3:
            continue
        cfg = base.replace(M=float(rng.uniform(0, thr)))
        opt = optimize_x_peak(cfg)
        at_one = worst_alpha(cfg, 1.0)[1]
        peak.record(opt.x_star >= 1 - 2 / 1024,
                    f"{cfg}: x*={opt.x_star:.4f} rate {opt.rate:.6g} < rate at x=1 {at_one:.6g}")
    return [exact, closed, peak]


def run_all(seed=0, trials=2000, n_configs=100, mutate_delivery=False) -> dict:
    """Run every suite; returns the JSON-ready report."""
    suites = [
        suite_simulator(),
        suite_decodability(trials, seed, mutate=mutate_delivery),
        suite_averages(),
        suite_bounds(n_configs, seed),
        suite_crossover(20, seed),
        suite_uniform_alpha(),
    ]
    suites += suite_split_rules(20, seed)
    gating = [s for s in suites if not s.informational]
    failing = [s for s in gating if not s.ok]
    return {
        'seed': seed,
        'trials': trials,
        'configs': n_configs,
        'mutate_delivery': mutate_delivery,
        'ok': not failing,
        'first_failure': None if not failing else {
            'suite': failing[0].name, 'counterexample': failing[0].counterexample},
        'suites': {s.name: s.to_dict() for s in suites},
    }
