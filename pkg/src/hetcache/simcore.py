"""Bit-exact placement and delivery simulator.

Every file is split into segments indexed by t-subsets of a delivery
group's users; a user caches the segments whose subset contains it.
Delivery sends XORs of segments over (t+1)-subsets, either for every
subset touching a requester or only for subsets touching a leader (one
lowest-index requester per distinct file). Decodability is checked by
elimination over GF(2) on each user's equations, using real random bits.

The simulator is an exact oracle for integer caching parameters; it is
not meant to be fast.
"""
from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .model import SystemConfig

__all__ = [
    'SimulationError',
    'SimulationScaleError',
    'DeliveryGroup',
    'Placement',
    'MulticastMessage',
    'DecodeResult',
    'SimResult',
    'MAX_GROUP_USERS',
    'MAX_SEGMENTS',
    'delivery_groups',
    'place',
    'deliver',
    'verify_decode',
    'simulate',
    'measured_rate',
    'transcript',
    'drop_message',
]

MAX_GROUP_USERS = 20
MAX_SEGMENTS = 10 ** 6


class SimulationError(ValueError):
    """Parameters the integer simulator cannot represent."""


class SimulationScaleError(SimulationError):
    """Group too large for exhaustive subset placement."""


@dataclass(frozen=True)
class DeliveryGroup:
    """Users and files handled by one independent MN placement/delivery."""
    name: str
    users: tuple
    files: tuple
    t: int

    @property
    def size(self) -> int:
        return len(self.users)

    @property
    def n_segments(self) -> int:
        return math.comb(self.size, self.t)


@dataclass(frozen=True)
class Placement:
    """Segment-level cache contents.

    ``segment_bits[g]`` is the segment size of group ``g`` and ``bits``
    maps a segment key ``(group name, file, subset)`` to its random
    payload. Groups are keyed separately, so a file placed in two groups
    (common files under scheme 3) is treated as two independent copies.
    """
    cfg: SystemConfig
    scheme: int
    x: Optional[Fraction]
    F: int
    groups: tuple
    segment_bits: tuple
    bits: dict = field(repr=False)

    def group_of_file(self, user: int, n: int) -> Optional[int]:
        """Index of the group that serves file ``n`` to ``user``, or None."""
        for i, g in enumerate(self.groups):
            if user in g.users and n in g.files:
                return i
        return None

    def cached(self, user: int) -> set:
        out = set()
        for g in self.groups:
            if user not in g.users:
                continue
            for n in g.files:
                for T in itertools.combinations(g.users, g.t):
                    if user in T:
                        out.add((g.name, n, T))
        return out

    def cache_bits(self, user: int) -> int:
        total = 0
        for g, seg in zip(self.groups, self.segment_bits):
            if user in g.users:
                total += len(g.files) * math.comb(g.size - 1, g.t - 1) * seg if g.t else 0
        return total


@dataclass(frozen=True)
class MulticastMessage:
    """XOR of ``segments`` sent to the users of ``subset``."""
    group: str
    subset: tuple
    segments: tuple
    bits: int
    payload: int = field(repr=False, default=0)


class DecodeResult:
    """Outcome of :func:`verify_decode`; truthy iff every request is recoverable."""

    def __init__(self, failures):
        self.failures = list(failures)

    def __bool__(self):
        return not self.failures

    def __repr__(self):
        if not self.failures:
            return 'DecodeResult(ok)'
        return f'DecodeResult(failed: {self.failures[:5]}{"..." if len(self.failures) > 5 else ""})'


@dataclass(frozen=True)
class SimResult:
    total_bits: int
    F: int
    per_group: dict
    decodable: bool
    messages: tuple = field(repr=False, default=())

    @property
    def rate(self) -> Fraction:
        return Fraction(self.total_bits, self.F)


def _exact(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _integer_t(name, t: Fraction, size: int, fix: str):
    if t.denominator != 1:
        raise SimulationError(f"{name}={float(t):.6g} is not an integer; {fix}")
    if not 0 <= t <= size:
        raise SimulationError(f"{name}={t} outside 0..{size}")
    return int(t)


def delivery_groups(cfg: SystemConfig, scheme: int, x=None) -> tuple:
    """Delivery groups of a scheme with integer caching parameters.

    Raises
    ------
    SimulationError
        If a caching parameter is not an integer; the message names the
        parameter and the nearest cache size or split that would work.
    """
    K, G, upc = cfg.K, cfg.G, cfg.users_per_class
    M = _exact(cfg.M)
    users = tuple(range(K))
    if scheme == 1:
        t = M * K / cfg.N
        fix = f"nearest feasible M={round(t) * Fraction(cfg.N, K)}"
        return (DeliveryGroup('all', users, tuple(range(cfg.N)), _integer_t('t1', t, K, fix)),)
    if scheme == 3:
        a = cfg.demand_set_size
        m3 = min(M, a)
        t = m3 * upc / a
        fix = f"nearest feasible M={round(t) * Fraction(a, upc)}"
        t = _integer_t('t3', t, upc, fix)
        return tuple(
            DeliveryGroup(f'class{c}', tuple(cfg.class_users(c)),
                          tuple(range(cfg.Nc)) + tuple(cfg.unique_files(c)), t)
            for c in range(G))
    if scheme == 2:
        if x is None:
            raise SimulationError("scheme 2 needs the cache split x")
        x = _exact(x)
        if not 0 <= x <= 1:
            raise SimulationError(f"x must lie in [0, 1], got {x}")
        groups = []
        if cfg.Nc:
            t_c = M * x * K / cfg.Nc
            near = round(t_c) * Fraction(cfg.Nc, K) / M if M else 0
            t_c = _integer_t('t_c', t_c, K, f"nearest feasible x={near}")
            groups.append(DeliveryGroup('common', users, tuple(range(cfg.Nc)), t_c))
        if cfg.Nu:
            t_u = M * (1 - x) * upc / cfg.Nu
            near = 1 - round(t_u) * Fraction(cfg.Nu, upc) / M if M else 0
            t_u = _integer_t('t_u', t_u, upc, f"nearest feasible x={near}")
            for c in range(G):
                groups.append(DeliveryGroup(f'unique{c}', tuple(cfg.class_users(c)),
                                            tuple(cfg.unique_files(c)), t_u))
        return tuple(groups)
    raise SimulationError(f"scheme must be 1, 2 or 3, got {scheme!r}")


def place(cfg: SystemConfig, scheme: int, x=None, seed: int = 0) -> Placement:
    """Build the segment placement for ``scheme`` (and split ``x`` for scheme 2).

    The file size is the least common multiple of the segment counts so
    that every segment has an integer number of bits. A configured ``F``
    is used only if it is a multiple of that value.
    """
    groups = delivery_groups(cfg, scheme, x)
    for g in groups:
        if g.size > MAX_GROUP_USERS:
            raise SimulationScaleError(
                f"group {g.name} has {g.size} users (limit {MAX_GROUP_USERS})")
        if g.n_segments > MAX_SEGMENTS:
            raise SimulationScaleError(
                f"group {g.name} needs C({g.size},{g.t})={g.n_segments} segments "
                f"(limit {MAX_SEGMENTS})")
    F_min = math.lcm(*(g.n_segments for g in groups)) if groups else 1
    if cfg.F is None:
        F = F_min
    elif cfg.F % F_min:
        raise SimulationError(f"F={cfg.F} is not divisible by every segment count; "
                              f"the smallest valid F is {F_min}")
    else:
        F = cfg.F
    seg = tuple(F // g.n_segments for g in groups)
    rng = random.Random(seed)
    bits = {}
    for g, size in zip(groups, seg):
        for n in g.files:
            for T in itertools.combinations(g.users, g.t):
                bits[(g.name, n, T)] = rng.getrandbits(size)
    placement = Placement(cfg, scheme, None if x is None else _exact(x), F, groups, seg, bits)
    budget = _exact(cfg.M) * F
    for k in range(cfg.K):
        if placement.cache_bits(k) > budget:
            raise SimulationError(f"user {k} would cache {placement.cache_bits(k)} bits, "
                                  f"more than M*F={budget}")
    return placement


def _active(placement: Placement, gi: int, d: Sequence[int]) -> list:
    g = placement.groups[gi]
    return [k for k in g.users if d[k] in g.files]


def _check_scope(placement: Placement, d: Sequence[int]):
    cfg = placement.cfg
    if len(d) != cfg.K:
        raise SimulationError(f"demand vector has {len(d)} entries, expected K={cfg.K}")
    for k, n in enumerate(d):
        if not 0 <= n < cfg.N:
            raise SimulationError(f"user {k} requests file {n}, outside 0..{cfg.N - 1}")
        if placement.group_of_file(k, n) is None:
            raise SimulationError(
                f"user {k} requests file {n}, which is outside its placement scope")


@functools.lru_cache(maxsize=64)
def _subsets(users: tuple, size: int) -> tuple:
    """Subsets of ``users`` with each member paired with the rest of its subset."""
    return tuple((S, tuple((k, S[:i] + S[i + 1:]) for i, k in enumerate(S)))
                 for S in itertools.combinations(users, size))


def deliver(placement: Placement, d: Sequence[int], leader_based: bool = True) -> list:
    """Multicast messages answering the demand vector ``d``.

    Full mode sends one message per (t+1)-subset of a group that contains
    a requester. Leader-based mode gives the group's non-requesting users
    the file of the first leader as a stand-in demand and sends only the
    subsets that contain a leader; the omitted messages are XORs of sent
    ones. Subsets are visited in lexicographic order.
    """
    _check_scope(placement, d)
    messages = []
    for gi, (g, seg) in enumerate(zip(placement.groups, placement.segment_bits)):
        active = _active(placement, gi, d)
        if not active or g.t >= g.size:
            continue
        demand = {k: d[k] for k in active}
        if leader_based:
            leaders = {}
            for k in active:
                leaders.setdefault(d[k], k)
            leader_set = set(leaders.values())
            stand_in = d[active[0]]
            for k in g.users:
                demand.setdefault(k, stand_in)
        for S, parts in _subsets(g.users, g.t + 1):
            if leader_based:
                if leader_set.isdisjoint(S):
                    continue
            elif not any(k in demand for k in S):
                continue
            segs = []
            payload = 0
            for k, rest in parts:
                if k not in demand:
                    continue
                sid = (demand[k], rest)
                segs.append(sid)
                payload ^= placement.bits[(g.name,) + sid]
            messages.append(MulticastMessage(g.name, S, tuple(segs), seg, payload))
    return messages


def _rref(rows):
    """Reduced row echelon form of GF(2) rows given as (mask, payload)."""
    pivots = {}
    for mask, value in rows:
        for col, (pmask, pval) in pivots.items():
            if mask >> col & 1:
                mask ^= pmask
                value ^= pval
        if not mask:
            continue
        col = mask.bit_length() - 1
        for c, (pmask, pval) in list(pivots.items()):
            if pmask >> col & 1:
                pivots[c] = (pmask ^ mask, pval ^ value)
        pivots[col] = (mask, value)
    return pivots


def verify_decode(placement: Placement, messages: Sequence[MulticastMessage],
                  d: Sequence[int]) -> DecodeResult:
    """Check that every user can rebuild its requested file.

    For each user the unknowns are the segments it does not cache; every
    message gives one GF(2) equation once cached segments are substituted.
    A requested segment counts as recovered only if elimination isolates
    it and the recovered bits equal the true ones. The result is falsy
    and lists ``(user, segment)`` pairs when something is missing.
    """
    failures = []
    for k in range(placement.cfg.K):
        gi = placement.group_of_file(k, d[k])
        if gi is None:
            failures.append((k, ('out of scope', d[k])))
            continue
        g = placement.groups[gi]
        cache = placement.cached(k)
        wanted = [(g.name, d[k], T)
                  for T in itertools.combinations(g.users, g.t) if k not in T]
        if not wanted:
            continue
        index = {}
        rows = []
        for msg in messages:
            mask, value = 0, msg.payload
            for seg in msg.segments:
                sid = (msg.group,) + seg
                if sid in cache:
                    value ^= placement.bits[sid]
                else:
                    mask ^= 1 << index.setdefault(sid, len(index))
            if mask:
                rows.append((mask, value))
        pivots = _rref(rows)
        for sid in wanted:
            col = index.get(sid)
            row = pivots.get(col) if col is not None else None
            if row is None or row[0] != 1 << col or row[1] != placement.bits[sid]:
                failures.append((k, sid))
    return DecodeResult(failures)


def simulate(cfg: SystemConfig, scheme: int, d: Sequence[int], x=None,
             leader_based: bool = True, seed: int = 0, check: bool = True) -> SimResult:
    """Place, deliver and (optionally) verify one demand vector."""
    placement = place(cfg, scheme, x, seed=seed)
    messages = deliver(placement, d, leader_based)
    per_group = {g.name: 0 for g in placement.groups}
    for msg in messages:
        per_group[msg.group] += msg.bits
    ok = bool(verify_decode(placement, messages, d)) if check else True
    return SimResult(sum(per_group.values()), placement.F, per_group, ok, tuple(messages))


def measured_rate(sim: SimResult) -> Fraction:
    """Transmitted bits over the file size, as an exact fraction."""
    return Fraction(sim.total_bits, sim.F)


def _fmt_set(items) -> str:
    return '{' + ','.join(str(i) for i in items) + '}'


def transcript(messages: Sequence[MulticastMessage]) -> str:
    """One line per message: ``S={users};file_ids;seg_subsets;bits``."""
    lines = []
    for msg in messages:
        files = ','.join(str(n) for n, _ in msg.segments)
        subsets = ','.join(_fmt_set(T) for _, T in msg.segments)
        lines.append(f"S={_fmt_set(msg.subset)};{files};{subsets};{msg.bits}")
    return '\n'.join(lines) + ('\n' if lines else '')


def drop_message(messages: Sequence[MulticastMessage], index: int) -> list:
    """Copy of ``messages`` without entry ``index`` (mutation control)."""
    messages = list(messages)
    del messages[index]
    return messages
