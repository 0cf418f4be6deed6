"""Subsample-comparison allocation: SSMC, SSTC, SSMC* and BESA.

All four procedures keep every reward of every arm. In each round after the
first, the arm with the most observations (the leader) is challenged by every
other arm; the comparison differs between procedures:

* SSMC: the challenger's full mean against the smallest mean over all windows
  of the leader's rewards with the challenger's sample size;
* SSMC*: as SSMC, restricted to disjoint blocks of the leader's rewards;
* SSTC: studentized version of the SSMC comparison, centred at the leader's
  full mean;
* BESA: one duel against a random subsample of the leader's rewards, with a
  single-elimination bracket for more than two arms.

The round functions are jitted and shared by the Python reference driver and
the jitted replication driver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FAMILY_BESA,
    FAMILY_SUBSAMPLE,
    ArmHistory,
    HistoryBank,
    Policy,
    PolicyDecision,
    jit,
    prefix_window_mean,
    prefix_window_std,
)

__all__ = [
    "BESA",
    "SSMC",
    "SSMCStar",
    "SSTC",
    "ExplorationSchedule",
    "WindowMinCache",
    "besa_duel",
    "besa_round",
    "select_leader",
    "ssmc_challenge",
    "ssmc_round",
    "ssmc_star_challenge",
    "sstc_challenge",
]

VARIANT_SSMC, VARIANT_SSTC, VARIANT_SSMC_STAR = 0, 1, 2

# cache_i columns
_LEN, _COV, _VALID, _LO, _HI, _ZERO, _ALWAYS = range(7)
# cache_f columns
_MIN, _LO_THR, _HI_THR, _ZERO_MIN = 0, 1, 2, 3
_CI_COLS, _CF_COLS = 7, 4


@jit
def exploration_threshold(n, scale, power):
    if n < 2:
        return 0.0
    return scale * np.log(n) ** power


@dataclass(frozen=True)
class ExplorationSchedule:
    """Forced-exploration threshold ``c(n) = scale * (log n) ** power``.

    The default ``sqrt(log n)`` grows slower than ``log n`` and faster than
    ``log log n``.
    """

    scale: float = 1.0
    power: float = 0.5

    def __post_init__(self):
        if self.scale < 0 or self.power < 0:
            raise ValueError("exploration scale and power must be nonnegative")

    def __call__(self, n: int) -> float:
        return float(exploration_threshold(int(n), float(self.scale), float(self.power)))


# --- leader election --------------------------------------------------------


@jit
def _leader(counts, means, previous, rng):
    K = counts.shape[0]
    nmax = counts.max()
    best = -np.inf
    for k in range(K):
        if counts[k] == nmax and means[k] > best:
            best = means[k]
    n_tied = 0
    keep_previous = False
    for k in range(K):
        if counts[k] == nmax and means[k] == best:
            n_tied += 1
            if k == previous:
                keep_previous = True
    if keep_previous:
        return previous
    pick = 0
    if n_tied > 1:
        pick = rng.integers(0, n_tied)
    for k in range(K):
        if counts[k] == nmax and means[k] == best:
            if pick == 0:
                return k
            pick -= 1
    return -1


def select_leader(counts, full_means, previous_leader=None, rng=None) -> int:
    """Arm with the most observations; ties go to the larger sample mean,
    then to ``previous_leader``, then to a uniform draw from ``rng``."""
    counts = np.asarray(counts, dtype=np.int64)
    means = np.asarray(full_means, dtype=float)
    if counts.shape != means.shape or counts.size == 0:
        raise ValueError("counts and means must be non-empty and of equal length")
    prev = -1 if previous_leader is None else int(previous_leader)
    rng = rng if rng is not None else np.random.default_rng()
    return int(_leader(counts, means, prev, rng))


# --- incremental window caches ----------------------------------------------


@jit
def _reset_cache(ci, cf, k, w):
    ci[k, _LEN] = w
    ci[k, _COV] = 0
    ci[k, _VALID] = 1
    ci[k, _LO] = -1
    ci[k, _HI] = -1
    ci[k, _ZERO] = -1
    ci[k, _ALWAYS] = -1
    cf[k, _MIN] = np.inf
    cf[k, _LO_THR] = np.inf
    cf[k, _HI_THR] = -np.inf
    cf[k, _ZERO_MIN] = np.inf


@jit
def _window_min(csum_l, n_l, w, ci, cf, k, stats):
    """Extend challenger ``k``'s cache to every length-``w`` window of the leader."""
    if ci[k, _VALID] == 0 or ci[k, _LEN] != w:
        _reset_cache(ci, cf, k, w)
    last = n_l - w + 1
    m = cf[k, _MIN]
    for t in range(ci[k, _COV] + 1, last + 1):
        v = prefix_window_mean(csum_l, t, t + w - 1)
        if v < m:
            m = v
    if last > ci[k, _COV]:
        stats[0] += last - ci[k, _COV]
        ci[k, _COV] = last
    cf[k, _MIN] = m
    return m


@jit
def _block_min(csum_l, n_l, w, ci, cf, k, stats):
    """As ``_window_min`` but over disjoint blocks starting at ``1 + u*w``."""
    if ci[k, _VALID] == 0 or ci[k, _LEN] != w:
        _reset_cache(ci, cf, k, w)
    blocks = n_l // w
    m = cf[k, _MIN]
    for u in range(ci[k, _COV], blocks):
        t = 1 + u * w
        v = prefix_window_mean(csum_l, t, t + w - 1)
        if v < m:
            m = v
    if blocks > ci[k, _COV]:
        stats[0] += blocks - ci[k, _COV]
        ci[k, _COV] = blocks
    cf[k, _MIN] = m
    return m


@jit
def _ratio(x, s):
    # x / s on the extended real line, with 0 / 0 taken as 0
    if s > 0.0:
        return x / s
    if x > 0.0:
        return np.inf
    if x < 0.0:
        return -np.inf
    return 0.0


@jit
def _t_holds(csum_l, csq_l, t, w, a, sd_a, m):
    wm = prefix_window_mean(csum_l, t, t + w - 1)
    ws = prefix_window_std(csum_l, csq_l, t, t + w - 1)
    return _ratio(a - m, sd_a) >= _ratio(wm - m, ws)


@jit
def _sstc_windows(csum_l, csq_l, n_l, w, a, sd_a, m, ci, cf, k, stats):
    """Studentized window test, assuming the challenger mean ``a`` is below ``m``.

    For fixed challenger statistics each window is satisfied on a half-line of
    leader means ``m`` (or on all or none of them), so the cache keeps only
    the extreme threshold of each kind plus the window attaining it. The
    answer is the exact per-window predicate evaluated at those witnesses.
    """
    if ci[k, _VALID] == 0 or ci[k, _LEN] != w:
        _reset_cache(ci, cf, k, w)
    last = n_l - w + 1
    for t in range(ci[k, _COV] + 1, last + 1):
        wm = prefix_window_mean(csum_l, t, t + w - 1)
        ws = prefix_window_std(csum_l, csq_l, t, t + w - 1)
        if ws == 0.0:
            # right side is -inf exactly when m > wm
            if wm < cf[k, _ZERO_MIN]:
                cf[k, _ZERO_MIN] = wm
                ci[k, _ZERO] = t
        elif sd_a > 0.0:
            c = 1.0 / sd_a - 1.0 / ws
            d = a / sd_a - wm / ws
            if c > 0.0:
                thr = d / c
                if thr > cf[k, _HI_THR]:
                    cf[k, _HI_THR] = thr
                    ci[k, _HI] = t
            elif c < 0.0:
                thr = d / c
                if thr < cf[k, _LO_THR]:
                    cf[k, _LO_THR] = thr
                    ci[k, _LO] = t
            elif d >= 0.0 and ci[k, _ALWAYS] < 0:
                ci[k, _ALWAYS] = t
        # sd_a == 0 with ws > 0: left side is -inf, never satisfied
    if last > ci[k, _COV]:
        stats[0] += last - ci[k, _COV]
        ci[k, _COV] = last
    for col in (_LO, _HI, _ZERO, _ALWAYS):
        t = ci[k, col]
        if t > 0 and _t_holds(csum_l, csq_l, t, w, a, sd_a, m):
            return True
    return False


@jit
def _challenge(variant, csum, csq, counts, z, k, c_n, ci, cf, stats):
    n_l = counts[z]
    n_k = counts[k]
    if n_k >= n_l:
        return False
    floor = c_n
    if variant == VARIANT_SSTC and floor < 2.0:
        floor = 2.0
    if n_k < floor:
        return True
    a = csum[k, n_k] / n_k
    if variant == VARIANT_SSMC:
        return a >= _window_min(csum[z], n_l, n_k, ci, cf, k, stats)
    if variant == VARIANT_SSMC_STAR:
        return a >= _block_min(csum[z], n_l, n_k, ci, cf, k, stats)
    m = csum[z, n_l] / n_l
    if a >= m:
        return True
    sd_a = prefix_window_std(csum[k], csq[k], 1, n_k)
    return _sstc_windows(csum[z], csq[z], n_l, n_k, a, sd_a, m, ci, cf, k, stats)


@jit
def subsample_round(variant, csum, csq, counts, c_n, state, ci, cf, rng, mask):
    """One round of SSMC / SSTC / SSMC*; writes the decision into ``mask``.

    ``state`` holds ``[leader of the previous round, window evaluations]``.
    Caches are rebuilt whenever the leader changes.
    """
    K = counts.shape[0]
    means = np.empty(K)
    for k in range(K):
        means[k] = csum[k, counts[k]] / counts[k]
    z = _leader(counts, means, state[0], rng)
    if z != state[0]:
        for k in range(K):
            ci[k, _VALID] = 0
        state[0] = z
    stats = state[1:]
    won = False
    for k in range(K):
        mask[k] = False
        if k != z and _challenge(variant, csum, csq, counts, z, k, c_n, ci, cf, stats):
            mask[k] = True
            won = True
    if not won:
        mask[z] = True
    return z


# --- stateless challenge API --------------------------------------------------


@dataclass
class WindowMinCache:
    """Running minimum of one challenger's window means over the leader's rewards."""

    window_length: int = 0
    windows_covered: int = 0
    running_min: float = np.inf
    valid: bool = False

    def invalidate(self) -> None:
        self.valid = False

    def _arrays(self):
        ci = np.zeros((1, _CI_COLS), dtype=np.int64)
        cf = np.full((1, _CF_COLS), np.inf)
        ci[0, _LEN], ci[0, _COV], ci[0, _VALID] = self.window_length, self.windows_covered, int(self.valid)
        cf[0, _MIN] = self.running_min
        return ci, cf

    def _load(self, ci, cf) -> None:
        self.window_length = int(ci[0, _LEN])
        self.windows_covered = int(ci[0, _COV])
        self.valid = bool(ci[0, _VALID])
        self.running_min = float(cf[0, _MIN])


def _pair(leader: ArmHistory, challenger: ArmHistory):
    if challenger.count > leader.count:
        raise ValueError("challenger has more observations than the leader")
    if challenger.count < 1:
        raise ValueError("challenger has no observations")
    bank = HistoryBank.from_rewards([leader.rewards, challenger.rewards])
    return bank.csum, bank.csq, bank.counts


def _stateless(variant, leader, challenger, c_n, cache=None):
    csum, csq, counts = _pair(leader, challenger)
    if cache is None:
        ci = np.zeros((2, _CI_COLS), dtype=np.int64)
        cf = np.zeros((2, _CF_COLS))
    else:
        ci1, cf1 = cache._arrays()
        ci = np.vstack([np.zeros((1, _CI_COLS), dtype=np.int64), ci1])
        cf = np.vstack([np.zeros((1, _CF_COLS)), cf1])
    stats = np.zeros(1, dtype=np.int64)
    won = bool(_challenge(variant, csum, csq, counts, 0, 1, float(c_n), ci, cf, stats))
    if cache is not None:
        cache._load(ci[1:], cf[1:])
    return won


def ssmc_challenge(leader: ArmHistory, challenger: ArmHistory, c_n: float,
                   cache: WindowMinCache | None = None) -> bool:
    """True when the challenger wins its SSMC challenge against the leader.

    Equal sample sizes lose, sample sizes below ``c_n`` win, otherwise the
    challenger wins when its mean is at least the smallest leader window mean
    of the same length. A supplied ``cache`` is advanced in place and is
    reset if the window length changed.
    """
    return _stateless(VARIANT_SSMC, leader, challenger, c_n, cache)


def sstc_challenge(leader: ArmHistory, challenger: ArmHistory, c_n: float) -> bool:
    return _stateless(VARIANT_SSTC, leader, challenger, c_n)


def ssmc_star_challenge(leader: ArmHistory, challenger: ArmHistory, c_n: float) -> bool:
    return _stateless(VARIANT_SSMC_STAR, leader, challenger, c_n)


# --- BESA -------------------------------------------------------------------


@jit
def _duel(y, csum, counts, a, b, perm, rng):
    """BESA duel between arms ``a`` and ``b``; returns the winner.

    ``perm[k, :counts[k]]`` is kept a permutation of ``0..counts[k]-1`` so a
    partial Fisher-Yates pass draws a uniform subsample without replacement.
    """
    if counts[a] > counts[b] or (counts[a] == counts[b] and a > b):
        big, small = a, b
    else:
        big, small = b, a
    n_s = counts[small]
    n_b = counts[big]
    if n_s == n_b:
        sub = csum[big, n_b] / n_b
    else:
        row = perm[big]
        total = 0.0
        for i in range(n_s):
            j = rng.integers(i, n_b)
            tmp = row[i]
            row[i] = row[j]
            row[j] = tmp
            total += y[big, row[i]]
        sub = total / n_s
    if csum[small, n_s] / n_s >= sub:
        return small
    return big


@jit
def besa_bracket(y, csum, counts, perm, rng):
    K = counts.shape[0]
    players = np.arange(K)
    if K > 2:
        for i in range(K - 1, 0, -1):
            j = rng.integers(0, i + 1)
            tmp = players[i]
            players[i] = players[j]
            players[j] = tmp
    m = K
    while m > 1:
        nxt = 0
        i = 0
        while i + 1 < m:
            players[nxt] = _duel(y, csum, counts, players[i], players[i + 1], perm, rng)
            nxt += 1
            i += 2
        if i < m:
            players[nxt] = players[i]
            nxt += 1
        m = nxt
    return players[0]


def _identity_perm(n_arms: int, capacity: int) -> np.ndarray:
    return np.tile(np.arange(capacity, dtype=np.int64), (n_arms, 1))


def besa_duel(larger: ArmHistory, smaller: ArmHistory, rng=None) -> ArmHistory:
    """Winner of one BESA duel.

    A uniform subsample of ``smaller.count`` rewards is drawn without
    replacement from ``larger``; ``smaller`` wins when its mean is at least
    the subsample mean.
    """
    if smaller.count > larger.count or smaller.count < 1:
        raise ValueError("need larger.count >= smaller.count >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    bank = HistoryBank.from_rewards([smaller.rewards, larger.rewards])
    perm = _identity_perm(2, bank.capacity)
    winner = _duel(bank.rewards, bank.csum, bank.counts, 0, 1, perm, rng)
    return smaller if winner == 0 else larger


def besa_round(bank: HistoryBank, rng=None, perm=None) -> PolicyDecision:
    """Single-elimination bracket of BESA duels over all arms (shuffled each call)."""
    if bank.counts.min() < 1:
        raise ValueError("every arm needs at least one observation")
    rng = rng if rng is not None else np.random.default_rng()
    if perm is None:
        perm = _identity_perm(bank.n_arms, bank.capacity)
    return PolicyDecision((int(besa_bracket(bank.rewards, bank.csum, bank.counts, perm, rng)),))


# --- policies -----------------------------------------------------------------


class _SubsamplePolicy(Policy):
    variant = VARIANT_SSMC

    def __init__(self, c_scale=1.0, c_power=0.5):
        self.c_scale = c_scale
        self.c_power = c_power

    @property
    def schedule(self) -> ExplorationSchedule:
        return ExplorationSchedule(self.c_scale, self.c_power)

    def reset(self, n_arms, horizon=None, rng=None):
        super().reset(n_arms, horizon, rng)
        self.schedule  # validates parameters
        self.state_ = np.array([-1, 0], dtype=np.int64)
        self.cache_i_ = np.zeros((n_arms, _CI_COLS), dtype=np.int64)
        self.cache_f_ = np.zeros((n_arms, _CF_COLS))
        self.mask_ = np.zeros(n_arms, dtype=np.bool_)
        return self

    @property
    def leader_(self) -> int:
        return int(self.state_[0])

    @property
    def window_evaluations_(self) -> int:
        return int(self.state_[1])

    def select(self, bank: HistoryBank) -> PolicyDecision:
        if bank.counts.min() < 1:
            raise ValueError("every arm must be sampled once before round 2")
        c_n = self.schedule(bank.total)
        subsample_round(self.variant, bank.csum, bank.csq, bank.counts, c_n, self.state_,
                        self.cache_i_, self.cache_f_, self.rng_, self.mask_)
        return PolicyDecision.from_mask(self.mask_)

    def kernel_spec(self, horizon):
        self.schedule
        return FAMILY_SUBSAMPLE, self.variant, np.array([self.c_scale, self.c_power], dtype=float)


class SSMC(_SubsamplePolicy):
    """Subsample-mean comparison."""

    name = "SSMC"
    variant = VARIANT_SSMC


class SSTC(_SubsamplePolicy):
    """Subsample-t comparison: studentized windows, for unequal unknown variances."""

    name = "SSTC"
    variant = VARIANT_SSTC


class SSMCStar(_SubsamplePolicy):
    """SSMC comparing against disjoint blocks of the leader's rewards only."""

    name = "SSMC*"
    variant = VARIANT_SSMC_STAR


def ssmc_round(policy: _SubsamplePolicy, bank: HistoryBank) -> PolicyDecision:
    return policy.select(bank)


class BESA(Policy):
    """Best empirical sampled average; ``initial_pulls=10`` gives BESAT."""

    name = "BESA"

    def __init__(self, initial_pulls=1):
        self.initial_pulls = initial_pulls

    def reset(self, n_arms, horizon=None, rng=None):
        super().reset(n_arms, horizon, rng)
        if int(self.initial_pulls) < 1:
            raise ValueError("initial_pulls must be at least 1")
        self.perm_ = None
        return self

    def select(self, bank: HistoryBank) -> PolicyDecision:
        if self.perm_ is None or self.perm_.shape[1] != bank.capacity:
            self.perm_ = _identity_perm(bank.n_arms, bank.capacity)
        return besa_round(bank, self.rng_, self.perm_)

    def kernel_spec(self, horizon):
        return FAMILY_BESA, 0, np.zeros(0)
