"""Command-line driver: ``hetcache rate | sweep | verify``.

Exit status is 0 on success, 1 when a computation fails and 2 for usage
or configuration errors (including a missing config file).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bounds import cutset_bound
from .model import (ConfigError, DemandSpaceTooLarge, SystemConfig, demand_space_size,
                    demand_stats, load_config, max_enum)
from .optimizer import optimize_x_avg, optimize_x_peak, worst_alpha
from .ratecalc import (oracle_avg, scheme1_avg, scheme1_peak, scheme2_avg, scheme2_rate,
                       scheme3_avg, scheme3_peak)

__all__ = ['CSV_HEADER', 'parse_sweep', 'sweep_rows', 'build_parser', 'main']

CSV_HEADER = ['var', 'R1_peak', 'R2_peak', 'x_star', 'R3_peak', 'cutset',
              'R1_avg', 'R2_avg', 'R3_avg', 'oracle_avg']

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_MC_SAMPLES = 10_000


class UsageError(Exception):
    pass


def parse_sweep(text: str):
    """``M:start:stop:step`` (inclusive stop) or ``G:g1,g2,...`` -> (var, values)."""
    var, _, rest = text.partition(':')
    if var == 'M':
        parts = rest.split(':')
        if len(parts) != 3:
            raise UsageError(f"--sweep M needs start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"--sweep M bounds must be numbers, got {text!r}") from None
        if not step > 0:
            raise UsageError(f"--sweep step must be positive, got {step}")
        n = math.floor((stop - start) / step + 1e-9) + 1 if stop >= start else 0
        return 'M', [start + i * step for i in range(n)]
    if var == 'G':
        try:
            values = [int(v) for v in rest.split(',') if v.strip()]
        except ValueError:
            raise UsageError(f"--sweep G needs a comma-separated integer list, got {text!r}") from None
        return 'G', values
    raise UsageError(f"--sweep variable must be M or G, got {var!r}")


def _mode(args):
    if args.exact:
        return 'exact', None
    if args.analytic:
        return 'analytic', None
    if args.mc is not None:
        return 'mc', args.mc
    return 'auto', DEFAULT_MC_SAMPLES


def _resolve_mode(cfg, mode, n_samples):
    if mode != 'auto':
        return mode, n_samples
    if demand_space_size(cfg) <= max_enum():
        return 'exact', None
    return 'mc', n_samples


def _stats(cfg, mode, n_samples, seed):
    mode, n_samples = _resolve_mode(cfg, mode, n_samples)
    rng = np.random.default_rng(seed)
    return demand_stats(cfg, mode=mode, n_samples=n_samples or DEFAULT_MC_SAMPLES, rng=rng)


def _fmt(value) -> str:
    if value is None:
        return ''
    return format(float(value), '.10g')


def _point(task):
    """One sweep row; infeasible points come back flagged."""
    base, var, value, avg, mode, n_samples, seed, stats = task
    try:
        if var == 'M':
            cfg = base.replace(M=value)
        else:
            cfg = base.replace(G=value, K=value * base.users_per_class)
    except ConfigError as exc:
        return {'var': value, 'infeasible': str(exc)}
    row = {'var': value}
    opt = optimize_x_peak(cfg)
    row.update(R1_peak=float(scheme1_peak(cfg)), R2_peak=opt.rate, x_star=opt.x_star,
               R3_peak=float(scheme3_peak(cfg)), cutset=cutset_bound(cfg).bound_value)
    if avg:
        if stats is None:
            stats = _stats(cfg, mode, n_samples, seed)
        row.update(R1_avg=scheme1_avg(cfg, stats=stats).mean,
                   R2_avg=optimize_x_avg(cfg, stats=stats).grid_rate.mean,
                   R3_avg=scheme3_avg(cfg, stats=stats).mean,
                   oracle_avg=oracle_avg(cfg))
    return row


def sweep_rows(base: SystemConfig, var: str, values, avg=False, mode='auto',
               n_samples=DEFAULT_MC_SAMPLES, seed=0, jobs=1) -> list:
    """Evaluate every sweep point, in sweep order.

    For an M sweep the demand statistics do not depend on M, so one set
    (one seeded sample for Monte Carlo) is shared by all points.
    """
    shared = None
    if avg and var == 'M' and values:
        shared = _stats(base, mode, n_samples, seed)
    tasks = [(base, var, v, avg, mode, n_samples, seed, shared) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_point, tasks))
    return [_point(t) for t in tasks]


def _write_csv(rows, fh):
    writer = csv.writer(fh, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for row in rows:
        if 'infeasible' in row:
            writer.writerow([_fmt(row['var'])] + ['infeasible: ' + row['infeasible']]
                            + [''] * (len(CSV_HEADER) - 2))
        else:
            writer.writerow([_fmt(row['var'])] + [_fmt(row.get(k)) for k in CSV_HEADER[1:]])


def _emit(text: str, out):
    if out:
        with open(out, 'w') as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            cfg = load_config(path)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except ConfigError as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return cfg


def _cmd_rate(args) -> int:
    cfg = _load(args.config)
    mode, n_samples = _mode(args)
    report = {'config': cfg.to_dict()}
    stats = None
    if args.avg:
        stats = _stats(cfg, mode, n_samples, args.seed)
        report['avg_mode'] = {'mode': stats.mode, 'n_samples': stats.n_samples,
                              'seed': args.seed if stats.mode == 'mc' else None}
    if args.scheme == 2 and args.x is not None:
        if not 0 <= args.x <= 1:
            raise UsageError(f"--x must lie in [0, 1], got {args.x}")
        alpha, _ = worst_alpha(cfg, args.x)
        r = scheme2_rate(cfg, args.x, alpha)
        report['scheme2'] = {'x': args.x, 'alpha': alpha, 'total': float(r.total),
                             'common': float(r.common), 'unique': float(r.unique)}
        if stats is not None:
            est = scheme2_avg(cfg, args.x, stats=stats)
            report['scheme2']['avg'] = est.mean
            report['scheme2']['avg_stderr'] = est.stderr
    else:
        opt = optimize_x_peak(cfg)
        bound = cutset_bound(cfg)
        peaks = {'1': float(scheme1_peak(cfg)), '2': opt.rate, '3': float(scheme3_peak(cfg))}
        report['peak'] = {k: v for k, v in peaks.items()
                          if args.scheme is None or int(k) == args.scheme}
        report['x_star'] = opt.x_star
        report['alpha_star'] = opt.alpha_star
        report['cutset'] = {'value': bound.bound_value, 's_star': bound.s_star,
                            'trivial': bound.trivial}
        if stats is not None:
            a2 = optimize_x_avg(cfg, stats=stats)
            avgs = {'1': scheme1_avg(cfg, stats=stats), '2': a2.grid_rate,
                    '3': scheme3_avg(cfg, stats=stats)}
            report['avg'] = {k: {'mean': v.mean, 'stderr': v.stderr} for k, v in avgs.items()
                             if args.scheme is None or int(k) == args.scheme}
            report['x_avg'] = a2.grid_x
            report['oracle_avg'] = oracle_avg(cfg)
    if args.format == 'json':
        _emit(json.dumps(report, indent=2, sort_keys=True) + '\n', args.out)
    else:
        _emit(_rate_text(report), args.out)
    return EXIT_OK


def _rate_text(report) -> str:
    lines = ['config: ' + ' '.join(f"{k}={v}" for k, v in report['config'].items()
                                   if v is not None)]
    if 'scheme2' in report:
        s2 = report['scheme2']
        lines.append(f"scheme 2 at x={s2['x']}: worst alpha={s2['alpha']:.6g} "
                     f"rate={s2['total']:.10g} (common {s2['common']:.10g}, "
                     f"unique {s2['unique']:.10g})")
        if 'avg' in s2:
            lines.append(f"scheme 2 average at x={s2['x']}: {s2['avg']:.10g} "
                         f"+/- {s2['avg_stderr']:.3g}")
    else:
        for k, v in report['peak'].items():
            extra = f"  (x*={report['x_star']:.6g})" if k == '2' else ''
            lines.append(f"scheme {k} peak: {v:.10g}{extra}")
        cut = report['cutset']
        lines.append(f"cut-set bound: {cut['value']:.10g}"
                     + ("  (trivial)" if cut['trivial'] else f"  (s*={cut['s_star']})"))
        for k, v in report.get('avg', {}).items():
            lines.append(f"scheme {k} average: {v['mean']:.10g} +/- {v['stderr']:.3g}")
        if 'oracle_avg' in report:
            lines.append(f"oracle average: {report['oracle_avg']:.10g}")
    if 'avg_mode' in report:
        m = report['avg_mode']
        lines.append(f"average mode: {m['mode']}"
                     + (f" ({m['n_samples']} samples, seed {m['seed']})" if m['mode'] == 'mc' else ''))
    return '\n'.join(lines) + '\n'


def _cmd_sweep(args) -> int:
    cfg = _load(args.config)
    var, values = parse_sweep(args.sweep)
    mode, n_samples = _mode(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    rows = sweep_rows(cfg, var, values, avg=args.avg, mode=mode,
                      n_samples=n_samples or DEFAULT_MC_SAMPLES, seed=args.seed, jobs=args.jobs)
    if args.format == 'json':
        doc = {'variable': var, 'seed': args.seed, 'mode': mode if args.avg else None,
               'rows': rows}
        _emit(json.dumps(doc, indent=2, sort_keys=True) + '\n', args.out)
    else:
        buf = io.StringIO()
        _write_csv(rows, buf)
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_all
    report = run_all(seed=args.seed, trials=args.trials, n_configs=args.configs,
                     mutate_delivery=args.mutate_delivery)
    _emit(json.dumps(report, indent=2, sort_keys=True) + '\n', args.out)
    if not report['ok']:
        first = report['first_failure']
        print(f"FAIL {first['suite']}: {first['counterexample']}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _add_avg_flags(p):
    p.add_argument('--avg', action='store_true', help='also compute uniform-average rates')
    group = p.add_mutually_exclusive_group()
    group.add_argument('--exact', action='store_true', help='enumerate every demand vector')
    group.add_argument('--mc', type=int, metavar='N', help='Monte Carlo with N samples')
    group.add_argument('--analytic', action='store_true',
                       help='distinct-count recursions for the uniform profile')
    p.add_argument('--seed', type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hetcache', description='Coded caching rates for heterogeneous user profiles')
    sub = parser.add_subparsers(dest='command', required=True)

    p_rate = sub.add_parser('rate', help='peak/average rates and the cut-set bound')
    p_rate.add_argument('--config', required=True, metavar='PATH')
    _add_avg_flags(p_rate)
    p_rate.add_argument('--scheme', type=int, choices=(1, 2, 3))
    p_rate.add_argument('--x', type=float, help='cache split for --scheme 2')
    p_rate.add_argument('--format', choices=('text', 'json'), default='text')
    p_rate.add_argument('--out', metavar='PATH')

    p_sweep = sub.add_parser('sweep', help='rates over a range of M or G')
    p_sweep.add_argument('--config', required=True, metavar='PATH')
    p_sweep.add_argument('--sweep', required=True, metavar='M:start:stop:step | G:list')
    _add_avg_flags(p_sweep)
    p_sweep.add_argument('--format', choices=('csv', 'json'), default='csv')
    p_sweep.add_argument('--out', metavar='PATH')
    p_sweep.add_argument('--jobs', type=int, default=1)

    p_ver = sub.add_parser('verify', help='run the cross-validation suites')
    p_ver.add_argument('--seed', type=int, default=0)
    p_ver.add_argument('--trials', type=int, default=2000, help='decodability trials')
    p_ver.add_argument('--configs', type=int, default=100, help='random configs for bound checks')
    p_ver.add_argument('--mutate-delivery', action='store_true',
                       help='drop one message per trial (the decodability suite must fail)')
    p_ver.add_argument('--out', metavar='PATH')
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {'rate': _cmd_rate, 'sweep': _cmd_sweep, 'verify': _cmd_verify}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DemandSpaceTooLarge, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == '__main__':
    sys.exit(main())
