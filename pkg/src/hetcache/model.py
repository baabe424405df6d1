"""System configuration, demand profiles and distinct-request statistics.

Files use one global index: common files occupy ``0 .. Nc-1`` and the
unique files of class ``c`` occupy ``Nc + c*Nu .. Nc + (c+1)*Nu - 1``.
Users are grouped in contiguous blocks of ``K/G``, so user ``k`` belongs
to class ``k // (K/G)``.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    'ConfigError',
    'DemandSpaceTooLarge',
    'DemandSetWarning',
    'SystemConfig',
    'DemandProfile',
    'DistinctStats',
    'DemandStats',
    'Estimate',
    'load_config',
    'config_from_dict',
    'max_enum',
    'demand_space_size',
    'enumerate_demands',
    'sample_demand',
    'sample_demands',
    'distinct_stats',
    'expected_distinct',
    'occupancy_pmf',
    'demand_stats',
]

DEFAULT_MAX_ENUM = 10 ** 7
_ENUM_CHUNK = 1 << 16


class ConfigError(ValueError):
    """Invalid system configuration; the message names the offending field."""


class DemandSpaceTooLarge(ValueError):
    """Raised when exact enumeration of the demand space is refused."""


class DemandSetWarning(UserWarning):
    """More users than files in a demand block (allowed, but unusual)."""


@dataclass(frozen=True)
class SystemConfig:
    """Heterogeneous-profile caching system.

    Attributes
    ----------
    K : int
        Number of users.
    G : int
        Number of classes; each has ``K/G`` users.
    Nc : int
        Number of common files.
    Nu : int
        Number of unique files per class.
    M : real
        Cache size per user, in files. May be a ``Fraction`` for exact
        simulation.
    F : int, optional
        File size in bits, only used by the simulator.
    """
    K: int
    G: int
    Nc: int
    Nu: int
    M: Real
    F: Optional[int] = None

    def __post_init__(self):
        for name in ('K', 'G', 'Nc', 'Nu'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.G < 1:
            raise ConfigError(f"G must be >= 1, got {self.G}")
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.K % self.G:
            raise ConfigError(
                f"K mod G must be 0 (equal class sizes), got K={self.K}, G={self.G}")
        if self.Nc < 0 or self.Nu < 0:
            raise ConfigError("Nc and Nu must be non-negative")
        if self.Nc + self.Nu == 0:
            raise ConfigError("Nc + Nu must be positive (empty demand sets)")
        if not isinstance(self.M, Real) or isinstance(self.M, bool):
            raise ConfigError(f"M must be a real number, got {self.M!r}")
        if not (0 <= self.M <= self.N):
            raise ConfigError(f"M must satisfy 0 <= M <= N={self.N}, got M={self.M}")
        if self.F is not None and (int(self.F) != self.F or self.F < 1):
            raise ConfigError(f"F must be a positive integer, got {self.F!r}")

    @property
    def N(self) -> int:
        return self.Nc + self.G * self.Nu

    @property
    def users_per_class(self) -> int:
        return self.K // self.G

    @property
    def demand_set_size(self) -> int:
        return self.Nc + self.Nu

    def class_of(self, user: int) -> int:
        return user // self.users_per_class

    def class_users(self, c: int) -> range:
        upc = self.users_per_class
        return range(c * upc, (c + 1) * upc)

    def unique_files(self, c: int) -> range:
        start = self.Nc + c * self.Nu
        return range(start, start + self.Nu)

    def demand_set(self, user: int) -> list:
        """Global indices of the files user ``user`` may request."""
        return list(range(self.Nc)) + list(self.unique_files(self.class_of(user)))

    def file_class(self, n: int) -> Optional[int]:
        """Class owning file ``n``, or None for a common file."""
        if n < self.Nc:
            return None
        return (n - self.Nc) // self.Nu

    def replace(self, **changes) -> 'SystemConfig':
        values = dict(K=self.K, G=self.G, Nc=self.Nc, Nu=self.Nu, M=self.M, F=self.F)
        values.update(changes)
        return SystemConfig(**values)

    def to_dict(self) -> dict:
        m = self.M
        if isinstance(m, Fraction):
            m = float(m) if m.denominator != 1 else int(m)
        return {'K': self.K, 'G': self.G, 'Nc': self.Nc, 'Nu': self.Nu,
                'M': m, 'F': self.F, 'pmf': 'uniform'}


def config_from_dict(doc: dict, warn: bool = True) -> SystemConfig:
    """Build a config from the JSON document schema ``{K, G, Nc, Nu, M, F?, pmf?}``."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    missing = [f for f in ('K', 'G', 'Nc', 'Nu', 'M') if f not in doc]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}")
    unknown = set(doc) - {'K', 'G', 'Nc', 'Nu', 'M', 'F', 'pmf'}
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    pmf = doc.get('pmf', 'uniform')
    if pmf != 'uniform':
        raise ConfigError(f"pmf: only 'uniform' is supported in config files, got {pmf!r}")
    for name in ('K', 'G', 'Nc', 'Nu'):
        if not isinstance(doc[name], int) or isinstance(doc[name], bool):
            raise ConfigError(f"{name} must be an integer, got {doc[name]!r}")
    m = doc['M']
    if isinstance(m, bool) or not isinstance(m, (int, float)):
        raise ConfigError(f"M must be a number, got {m!r}")
    if isinstance(m, float):
        m = Fraction(repr(m))
        if m.denominator == 1:
            m = int(m)
    f = doc.get('F')
    if f is not None and (not isinstance(f, int) or isinstance(f, bool)):
        raise ConfigError(f"F must be an integer, got {f!r}")
    cfg = SystemConfig(K=doc['K'], G=doc['G'], Nc=doc['Nc'], Nu=doc['Nu'], M=m, F=f)
    if warn:
        if cfg.K > cfg.Nc:
            warnings.warn(f"K={cfg.K} exceeds Nc={cfg.Nc}", DemandSetWarning, stacklevel=2)
        if cfg.users_per_class > cfg.Nu:
            warnings.warn(f"K/G={cfg.users_per_class} exceeds Nu={cfg.Nu}",
                          DemandSetWarning, stacklevel=2)
    return cfg


def load_config(path) -> SystemConfig:
    """Read and validate a JSON config file."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    return config_from_dict(doc)


@dataclass(frozen=True, eq=False)
class DemandProfile:
    """Per-user request distributions over the global file index.

    ``pmfs[k, n]`` is the probability that user ``k`` requests file ``n``;
    each row must sum to 1 and vanish outside the user's demand set.
    """
    cfg: SystemConfig
    pmfs: np.ndarray = field(repr=False)
    uniform: bool = False

    def __post_init__(self):
        pmfs = np.asarray(self.pmfs, dtype=float)
        cfg = self.cfg
        if pmfs.shape != (cfg.K, cfg.N):
            raise ValueError(f"pmfs must have shape (K, N)={(cfg.K, cfg.N)}, got {pmfs.shape}")
        if np.any(pmfs < 0):
            raise ValueError("pmfs must be non-negative")
        if not np.allclose(pmfs.sum(axis=1), 1.0, rtol=0, atol=1e-12):
            raise ValueError("each user's pmf must sum to 1")
        for k in range(cfg.K):
            outside = np.ones(cfg.N, dtype=bool)
            outside[cfg.demand_set(k)] = False
            if np.any(pmfs[k, outside] > 0):
                raise ValueError(f"user {k} has mass outside its demand set")
        pmfs.setflags(write=False)
        object.__setattr__(self, 'pmfs', pmfs)

    @classmethod
    def uniform_profile(cls, cfg: SystemConfig) -> 'DemandProfile':
        pmfs = np.zeros((cfg.K, cfg.N))
        for k in range(cfg.K):
            pmfs[k, cfg.demand_set(k)] = 1.0 / cfg.demand_set_size
        return cls(cfg, pmfs, uniform=True)

    def support(self, user: int) -> np.ndarray:
        return np.flatnonzero(self.pmfs[user] > 0)

    def probability(self, d: Sequence[int]) -> float:
        return float(np.prod([self.pmfs[k, n] for k, n in enumerate(d)]))


def _as_profile(obj) -> DemandProfile:
    if isinstance(obj, DemandProfile):
        return obj
    if isinstance(obj, SystemConfig):
        return DemandProfile.uniform_profile(obj)
    raise TypeError(f"expected SystemConfig or DemandProfile, got {type(obj).__name__}")


def max_enum() -> int:
    """Enumeration guard, overridable through ``HETCACHE_MAX_ENUM``."""
    raw = os.environ.get('HETCACHE_MAX_ENUM')
    if raw is None:
        return DEFAULT_MAX_ENUM
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"HETCACHE_MAX_ENUM must be an integer, got {raw!r}") from None


def demand_space_size(obj) -> int:
    profile = _as_profile(obj)
    return math.prod(len(profile.support(k)) for k in range(profile.cfg.K))


def _check_enumerable(profile: DemandProfile) -> int:
    size = demand_space_size(profile)
    limit = max_enum()
    if size > limit:
        raise DemandSpaceTooLarge(
            f"demand space has {size} vectors, above the enumeration limit {limit}; "
            "use Monte Carlo sampling (mode='mc') or raise HETCACHE_MAX_ENUM")
    return size


def enumerate_demands(obj) -> Iterator[tuple]:
    """Yield every demand vector in S_1 x ... x S_K exactly once.

    Accepts a config (uniform demand sets) or a profile (its supports).
    Vectors come out in lexicographic order of the per-user supports.
    """
    profile = _as_profile(obj)
    _check_enumerable(profile)
    supports = [profile.support(k).tolist() for k in range(profile.cfg.K)]
    return itertools.product(*supports)


def sample_demand(profile, rng) -> tuple:
    """Draw one demand vector, each user independently from its pmf."""
    profile = _as_profile(profile)
    return tuple(int(v) for v in sample_demands(profile, 1, rng)[0])


def sample_demands(profile, n_samples: int, rng) -> np.ndarray:
    """Draw ``n_samples`` demand vectors as an integer array (n_samples, K)."""
    profile = _as_profile(profile)
    rng = np.random.default_rng(rng)
    cfg = profile.cfg
    out = np.empty((n_samples, cfg.K), dtype=np.int64)
    if profile.uniform:
        local = rng.integers(0, cfg.demand_set_size, size=(n_samples, cfg.K))
        for k in range(cfg.K):
            ds = np.asarray(cfg.demand_set(k))
            out[:, k] = ds[local[:, k]]
        return out
    for k in range(cfg.K):
        support = profile.support(k)
        out[:, k] = rng.choice(support, size=n_samples, p=profile.pmfs[k, support])
    return out


@dataclass(frozen=True)
class DistinctStats:
    """Distinct-request counts of one demand vector.

    ``n_class_total[i]`` is the number of distinct files (common or unique)
    requested inside class ``i``.
    """
    n_total: int
    n_common: int
    n_unique_per_class: tuple
    alpha_per_class: tuple
    n_class_total: tuple


def distinct_stats(d: Sequence[int], cfg: SystemConfig) -> DistinctStats:
    """Count distinct requests in demand vector ``d``."""
    if len(d) != cfg.K:
        raise ValueError(f"demand vector must have length K={cfg.K}, got {len(d)}")
    for k, n in enumerate(d):
        if not (0 <= n < cfg.N):
            raise IndexError(f"user {k} requests file {n}, outside 0..{cfg.N - 1}")
        c = cfg.file_class(n)
        if c is not None and c != cfg.class_of(k):
            raise ValueError(f"user {k} (class {cfg.class_of(k)}) requests file {n} "
                             f"unique to class {c}")
    common = {n for n in d if n < cfg.Nc}
    unique, alpha, per_class = [], [], []
    for c in range(cfg.G):
        reqs = [d[k] for k in cfg.class_users(c)]
        u = [n for n in reqs if n >= cfg.Nc]
        unique.append(len(set(u)))
        alpha.append(len(u))
        per_class.append(len(set(reqs)))
    return DistinctStats(
        n_total=len(set(d)),
        n_common=len(common),
        n_unique_per_class=tuple(unique),
        alpha_per_class=tuple(alpha),
        n_class_total=tuple(per_class),
    )


def expected_distinct(cfg: SystemConfig) -> tuple:
    """Expected distinct common and per-class unique requests, uniform demand.

    Returns
    -------
    (float, float)
        ``E[N_c(d)]`` over all K users and ``E[N_u(d)]`` within one class.
    """
    a = cfg.Nc + cfg.Nu
    if a == 0:
        raise ValueError("Nc + Nu must be positive")
    miss = (a - 1) / a
    e_c = cfg.Nc * (1.0 - miss ** cfg.K)
    e_u = cfg.Nu * (1.0 - miss ** (cfg.K / cfg.G))
    return e_c, e_u


def occupancy_pmf(draws: int, n_files: int) -> np.ndarray:
    """Distribution of the number of distinct files among ``draws`` uniform draws.

    Returns an array ``p`` with ``p[m] = P(m distinct)`` for
    ``m = 0 .. min(draws, n_files)``.
    """
    if draws < 0 or n_files < 0:
        raise ValueError("draws and n_files must be non-negative")
    if n_files == 0:
        if draws:
            raise ValueError("cannot draw from an empty library")
        return np.ones(1)
    top = min(draws, n_files)
    p = np.zeros(top + 1)
    p[0] = 1.0
    j = np.arange(top + 1)
    for _ in range(draws):
        new = np.zeros_like(p)
        new += p * (j / n_files)
        new[1:] += p[:-1] * ((n_files - j[:-1]) / n_files)
        p = new
    return p


class Estimate(NamedTuple):
    """An expectation with its Monte Carlo standard error (0 when exact)."""
    mean: float
    stderr: float = 0.0
    n_samples: Optional[int] = None

    def __float__(self):
        return float(self.mean)


@dataclass(frozen=True, eq=False)
class DemandStats:
    """Distribution of distinct-request counts under a demand measure.

    Marginal pmfs are always present. ``rows``/``weights`` hold the joint
    atoms (one row per distinct count tuple) when the measure came from
    enumeration or sampling; Monte Carlo standard errors need them.

    Row layout: ``[n_total, n_common, u_1..u_G, c_1..c_G, alpha_1..alpha_G]``
    where ``u_i`` counts distinct unique files requested in class ``i``,
    ``c_i`` distinct files of any kind in class ``i`` and ``alpha_i`` the
    users of class ``i`` requesting unique files.
    """
    cfg: SystemConfig
    mode: str
    total_pmf: np.ndarray
    common_pmf: np.ndarray
    unique_pmfs: np.ndarray
    class_pmfs: np.ndarray
    rows: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    n_samples: Optional[int] = None

    def expect(self, total=None, common=None, unique=None, per_class=None) -> Estimate:
        """Expectation of a sum of per-count lookup tables.

        ``total`` and ``common`` are indexed by ``n_total``/``n_common``;
        ``unique`` and ``per_class`` are applied to every class.
        """
        mean = 0.0
        if total is not None:
            mean += float(np.dot(self.total_pmf, np.asarray(total)[:len(self.total_pmf)]))
        if common is not None:
            mean += float(np.dot(self.common_pmf, np.asarray(common)[:len(self.common_pmf)]))
        if unique is not None:
            tbl = np.asarray(unique)[:self.unique_pmfs.shape[1]]
            mean += float((self.unique_pmfs @ tbl).sum())
        if per_class is not None:
            tbl = np.asarray(per_class)[:self.class_pmfs.shape[1]]
            mean += float((self.class_pmfs @ tbl).sum())
        if self.n_samples is None:
            return Estimate(mean, 0.0, None)
        values = self.row_values(total, common, unique, per_class)
        n = self.n_samples
        var = float(np.dot(self.weights, (values - mean) ** 2))
        stderr = math.sqrt(var * n / (n - 1) / n) if n > 1 else float('inf')
        return Estimate(mean, stderr, n)

    def row_values(self, total=None, common=None, unique=None, per_class=None) -> np.ndarray:
        if self.rows is None:
            raise ValueError("joint rows unavailable for this demand measure")
        G = self.cfg.G
        r = self.rows
        values = np.zeros(len(r))
        if total is not None:
            values += np.asarray(total)[r[:, 0]]
        if common is not None:
            values += np.asarray(common)[r[:, 1]]
        if unique is not None:
            values += np.asarray(unique)[r[:, 2:2 + G]].sum(axis=1)
        if per_class is not None:
            values += np.asarray(per_class)[r[:, 2 + G:2 + 2 * G]].sum(axis=1)
        return values

    @property
    def alpha_columns(self) -> np.ndarray:
        G = self.cfg.G
        return self.rows[:, 2 + 2 * G:2 + 3 * G]


def _count_distinct(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    v = np.where(valid, values, -1)
    v = np.sort(v, axis=1)
    first = np.ones_like(v, dtype=bool)
    first[:, 1:] = v[:, 1:] != v[:, :-1]
    return np.sum(first & (v >= 0), axis=1)


def _rows_from_demands(D: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Vectorized distinct counts for an (S, K) array of demand vectors."""
    S = D.shape[0]
    G = cfg.G
    rows = np.empty((S, 2 + 3 * G), dtype=np.int64)
    everything = np.ones_like(D, dtype=bool)
    rows[:, 0] = _count_distinct(D, everything)
    rows[:, 1] = _count_distinct(D, D < cfg.Nc)
    for c in range(G):
        users = cfg.class_users(c)
        Dc = D[:, users.start:users.stop]
        is_unique = Dc >= cfg.Nc
        rows[:, 2 + c] = _count_distinct(Dc, is_unique)
        rows[:, 2 + G + c] = _count_distinct(Dc, np.ones_like(Dc, dtype=bool))
        rows[:, 2 + 2 * G + c] = is_unique.sum(axis=1)
    return rows


def _aggregate(rows: np.ndarray, weights: np.ndarray):
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    w = np.bincount(inverse.ravel(), weights=weights, minlength=len(uniq))
    return uniq, w


def _marginals_from_rows(cfg: SystemConfig, rows, weights):
    G, upc = cfg.G, cfg.users_per_class
    total = np.bincount(rows[:, 0], weights=weights, minlength=cfg.K + 1)
    common = np.bincount(rows[:, 1], weights=weights, minlength=cfg.K + 1)
    unique = np.stack([np.bincount(rows[:, 2 + c], weights=weights, minlength=upc + 1)
                       for c in range(G)])
    per_class = np.stack([np.bincount(rows[:, 2 + G + c], weights=weights, minlength=upc + 1)
                          for c in range(G)])
    return total, common, unique, per_class


def _stats_from_rows(cfg, mode, rows, weights, n_samples=None) -> DemandStats:
    rows, weights = _aggregate(rows, weights)
    total, common, unique, per_class = _marginals_from_rows(cfg, rows, weights)
    return DemandStats(cfg, mode, total, common, unique, per_class,
                       rows=rows, weights=weights, n_samples=n_samples)


def _exact_stats(profile: DemandProfile) -> DemandStats:
    cfg = profile.cfg
    size = _check_enumerable(profile)
    supports = [profile.support(k) for k in range(cfg.K)]
    radices = np.array([len(s) for s in supports], dtype=np.int64)
    probs = [profile.pmfs[k, supports[k]] for k in range(cfg.K)]
    all_rows, all_w = [], []
    for start in range(0, size, _ENUM_CHUNK):
        idx = np.arange(start, min(size, start + _ENUM_CHUNK), dtype=np.int64)
        D = np.empty((len(idx), cfg.K), dtype=np.int64)
        w = np.ones(len(idx))
        rem = idx
        # last user varies fastest, matching enumerate_demands order
        for k in range(cfg.K - 1, -1, -1):
            digit = rem % radices[k]
            rem = rem // radices[k]
            D[:, k] = supports[k][digit]
            w *= probs[k][digit]
        rows, w = _aggregate(_rows_from_demands(D, cfg), w)
        all_rows.append(rows)
        all_w.append(w)
    return _stats_from_rows(cfg, 'exact', np.concatenate(all_rows), np.concatenate(all_w))


def _mc_stats(profile: DemandProfile, n_samples: int, rng) -> DemandStats:
    if n_samples < 2:
        raise ValueError("Monte Carlo needs at least 2 samples")
    cfg = profile.cfg
    rng = np.random.default_rng(rng)
    rows = []
    for start in range(0, n_samples, _ENUM_CHUNK):
        n = min(_ENUM_CHUNK, n_samples - start)
        rows.append(_rows_from_demands(sample_demands(profile, n, rng), cfg))
    rows = np.concatenate(rows)
    weights = np.full(len(rows), 1.0 / n_samples)
    return _stats_from_rows(cfg, 'mc', rows, weights, n_samples=n_samples)


def _growth_step(p: np.ndarray, axis: int, new_prob: np.ndarray) -> np.ndarray:
    """Move mass one step along ``axis`` with probabilities ``new_prob``."""
    moved = p * new_prob
    out = p - moved
    src = [slice(None)] * p.ndim
    dst = [slice(None)] * p.ndim
    src[axis] = slice(0, -1)
    dst[axis] = slice(1, None)
    out[tuple(dst)] += moved[tuple(src)]
    return out


def _analytic_stats(cfg: SystemConfig) -> DemandStats:
    """Exact marginals under the uniform profile via occupancy recursions."""
    a = cfg.demand_set_size
    K, G, upc = cfg.K, cfg.G, cfg.users_per_class
    jc = np.arange(min(K, cfg.Nc) + 1)
    common = np.zeros(len(jc))
    common[0] = 1.0
    for _ in range(K):
        common = _growth_step(common, 0, (cfg.Nc - jc) / a)
    ju = np.arange(min(upc, cfg.Nu) + 1)
    unique = np.zeros(len(ju))
    unique[0] = 1.0
    for _ in range(upc):
        unique = _growth_step(unique, 0, (cfg.Nu - ju) / a)
    per_class = occupancy_pmf(upc, a)

    # joint (distinct common, distinct unique so far, distinct unique in class)
    U = min(K, G * cfg.Nu)
    p = np.zeros((len(jc), U + 1, len(ju)))
    p[0, 0, 0] = 1.0
    pc = ((cfg.Nc - jc) / a)[:, None, None]
    pu = ((cfg.Nu - ju) / a)[None, None, :]
    for _ in range(G):
        for _ in range(upc):
            to_c = p * pc
            to_u = p * pu
            nxt = p - to_c - to_u
            nxt[1:] += to_c[:-1]
            nxt[:, :, 1:] += to_u[:, :, :-1]
            p = nxt
        folded = np.zeros((len(jc), U + 1, len(ju)))
        for u in range(len(ju)):
            folded[:, u:, 0] += p[:, :U + 1 - u, u]
        p = folded
    flat = p[:, :, 0]
    total = np.zeros(K + 1)
    for j in range(flat.shape[0]):
        for u in range(flat.shape[1]):
            if j + u <= K:
                total[j + u] += flat[j, u]

    def pad(x, n):
        out = np.zeros(n)
        out[:len(x)] = x
        return out

    return DemandStats(
        cfg, 'analytic',
        total_pmf=total,
        common_pmf=pad(common, K + 1),
        unique_pmfs=np.tile(pad(unique, upc + 1), (G, 1)),
        class_pmfs=np.tile(pad(per_class, upc + 1), (G, 1)),
    )


def demand_stats(obj, mode: str = 'exact', n_samples: int = 10_000, rng=None) -> DemandStats:
    """Distinct-count distribution under a demand profile.

    Parameters
    ----------
    obj : SystemConfig or DemandProfile
        A config means the uniform profile.
    mode : {'exact', 'mc', 'analytic'}
        ``exact`` enumerates every demand vector (guarded), ``mc`` samples
        ``n_samples`` vectors with ``rng``, ``analytic`` evaluates the
        uniform-profile marginals by recursion (no joint rows).
    """
    profile = _as_profile(obj)
    if mode == 'exact':
        return _exact_stats(profile)
    if mode == 'mc':
        return _mc_stats(profile, n_samples, rng)
    if mode == 'analytic':
        if not profile.uniform:
            raise ValueError("analytic mode requires the uniform profile")
        return _analytic_stats(profile.cfg)
    raise ValueError(f"unknown mode {mode!r}; expected 'exact', 'mc' or 'analytic'")
