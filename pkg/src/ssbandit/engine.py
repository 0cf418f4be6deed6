"""Round drivers turning policy decisions into exactly ``N`` pulls.

Rewards are supplied up front as a ``(K, M)`` array whose row ``k`` is the
sequence arm ``k`` would emit, so a run is a deterministic function of that
array and the policy's random stream. Two drivers exist: a jitted one for
experiments and a Python one that goes through the :class:`Policy` objects.
Both consume the stream identically and must agree exactly.
"""
from __future__ import annotations

import numpy as np

from .baselines import index_select
from .core import FAMILY_BESA, FAMILY_SUBSAMPLE, HistoryBank, Policy, jit, prefix_record
from .subsample import _CF_COLS, _CI_COLS, besa_bracket, exploration_threshold, subsample_round

__all__ = ["run_counts", "run_counts_python", "truncate_decision"]


@jit
def truncate_decision(mask, keep, rng):
    """Keep a uniform random subset of ``keep`` arms from a decision mask.

    Used when the last round recommends more pulls than remain.
    """
    arms = np.flatnonzero(mask)
    m = arms.shape[0]
    if keep >= m:
        return
    for i in range(keep):
        j = rng.integers(i, m)
        tmp = arms[i]
        arms[i] = arms[j]
        arms[j] = tmp
    mask[:] = False
    for i in range(keep):
        mask[arms[i]] = True


@jit
def _apply(mask, rewards, y, csum, csq, counts):
    pulled = 0
    for k in range(mask.shape[0]):
        if mask[k]:
            prefix_record(y, csum, csq, counts, k, rewards[k, counts[k]])
            pulled += 1
    return pulled


@jit
def _drive(family, code, params, rewards, horizon, initial_pulls, rng):
    K = rewards.shape[0]
    cap = min(rewards.shape[1], horizon)
    y = np.zeros((K, cap))
    csum = np.zeros((K, cap + 1))
    csq = np.zeros((K, cap + 1))
    counts = np.zeros(K, dtype=np.int64)
    mask = np.zeros(K, dtype=np.bool_)
    state = np.array([-1, 0], dtype=np.int64)
    ci = np.zeros((K, _CI_COLS), dtype=np.int64)
    cf = np.zeros((K, _CF_COLS))
    perm = np.empty((K, cap), dtype=np.int64)
    if family == FAMILY_BESA:
        for k in range(K):
            for i in range(cap):
                perm[k, i] = i
    n = 0
    for _ in range(initial_pulls):
        if n >= horizon:
            break
        mask[:] = True
        truncate_decision(mask, horizon - n, rng)
        n += _apply(mask, rewards, y, csum, csq, counts)
    while n < horizon:
        if family == FAMILY_SUBSAMPLE:
            c_n = exploration_threshold(n, params[0], params[1])
            subsample_round(code, csum, csq, counts, c_n, state, ci, cf, rng, mask)
            truncate_decision(mask, horizon - n, rng)
        else:
            if family == FAMILY_BESA:
                arm = besa_bracket(y, csum, counts, perm, rng)
            else:
                arm = index_select(code, params, csum, csq, counts, rng)
            mask[:] = False
            mask[arm] = True
        n += _apply(mask, rewards, y, csum, csq, counts)
    return counts, state[1]


def _check_rewards(rewards: np.ndarray, horizon: int) -> np.ndarray:
    rewards = np.ascontiguousarray(rewards, dtype=float)
    if rewards.ndim != 2:
        raise ValueError("rewards must be a (K, M) array")
    K, M = rewards.shape
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if M < max(1, horizon - K + 1):
        raise ValueError("reward streams are shorter than the horizon requires")
    return rewards


def run_counts(policy: Policy, rewards: np.ndarray, horizon: int, rng: np.random.Generator):
    """Pull counts after ``horizon`` pulls, using the jitted driver."""
    rewards = _check_rewards(rewards, horizon)
    family, code, params = policy.kernel_spec(horizon)
    counts, _ = _drive(family, code, params, rewards, int(horizon), int(policy.initial_pulls), rng)
    return counts


def run_counts_python(policy: Policy, rewards: np.ndarray, horizon: int, rng: np.random.Generator,
                      trace: list | None = None):
    """Reference driver stepping ``policy.select`` round by round.

    When ``trace`` is a list, ``(n at round start, decision)`` is appended for
    every round after seeding.
    """
    rewards = _check_rewards(rewards, horizon)
    K = rewards.shape[0]
    bank = HistoryBank(K, min(rewards.shape[1], horizon))
    policy.reset(K, horizon, rng)
    mask = np.zeros(K, dtype=np.bool_)
    n = 0

    def pull(mask):
        for k in np.flatnonzero(mask):
            bank.record(k, rewards[k, bank.counts[k]])
        return int(mask.sum())

    for _ in range(int(policy.initial_pulls)):
        if n >= horizon:
            break
        mask[:] = True
        truncate_decision(mask, horizon - n, rng)
        n += pull(mask)
    while n < horizon:
        decision = policy.select(bank)
        if trace is not None:
            trace.append((n, decision))
        mask[:] = False
        mask[list(decision.arms)] = True
        truncate_decision(mask, horizon - n, rng)
        n += pull(mask)
    return bank.counts.copy()
