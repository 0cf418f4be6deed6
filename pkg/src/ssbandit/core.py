"""Shared data model: reward histories, decisions, regret and random streams."""
from __future__ import annotations

import hashlib
import inspect
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

__all__ = [
    "ArmHistory",
    "HistoryBank",
    "Policy",
    "PolicyDecision",
    "RegretRecord",
    "empirical_regret",
    "record_reward",
    "stream",
    "window_mean",
    "window_stddev",
]

jit = numba.njit(cache=True, nogil=True)


# --- jitted primitives on prefix arrays -------------------------------------
# ``csum[i]`` is the sum of the first ``i`` rewards (``csum[0] == 0``); window
# bounds ``t``/``u`` are 1-based and inclusive.


@jit
def prefix_window_mean(csum, t, u):
    return (csum[u] - csum[t - 1]) / (u - t + 1)


@jit
def prefix_window_std(csum, csq, t, u):
    w = u - t + 1
    s = csum[u] - csum[t - 1]
    var = (csq[u] - csq[t - 1] - s * s / w) / (w - 1)
    if var < 0.0:
        var = 0.0
    return np.sqrt(var)


@jit
def prefix_record(y, csum, csq, counts, k, value):
    i = counts[k]
    y[k, i] = value
    csum[k, i + 1] = csum[k, i] + value
    csq[k, i + 1] = csq[k, i] + value * value
    counts[k] = i + 1


class ArmHistory:
    """Reward sequence of one arm with prefix sums for O(1) window statistics.

    A history either owns its buffers (and grows them on demand) or is a row
    view into a :class:`HistoryBank`, in which case its capacity is fixed.
    """

    def __init__(self, rewards: Iterable[float] = (), capacity: int = 16):
        rewards = np.asarray(list(rewards), dtype=float)
        cap = max(int(capacity), len(rewards), 1)
        self._y = np.empty(cap)
        self._s = np.zeros(cap + 1)
        self._q = np.zeros(cap + 1)
        self._counts = np.zeros(1, dtype=np.int64)
        self._k = 0
        self._owned = True
        n = len(rewards)
        if n:
            self._y[:n] = rewards
            self._s[1 : n + 1] = np.cumsum(rewards)
            self._q[1 : n + 1] = np.cumsum(rewards * rewards)
            self._counts[0] = n

    @classmethod
    def _row(cls, bank: "HistoryBank", k: int) -> "ArmHistory":
        h = cls.__new__(cls)
        h._y, h._s, h._q = bank.rewards[k], bank.csum[k], bank.csq[k]
        h._counts, h._k, h._owned = bank.counts, k, False
        return h

    @property
    def count(self) -> int:
        return int(self._counts[self._k])

    def __len__(self) -> int:
        return self.count

    @property
    def rewards(self) -> np.ndarray:
        return self._y[: self.count]

    @property
    def prefix_sum(self) -> np.ndarray:
        """``prefix_sum[t-1]`` is the sum of the first ``t`` rewards."""
        return self._s[1 : self.count + 1]

    @property
    def prefix_sumsq(self) -> np.ndarray:
        return self._q[1 : self.count + 1]

    def record(self, y: float) -> "ArmHistory":
        n = self.count
        if n == len(self._y):
            if not self._owned:
                raise IndexError("bank-backed history is full")
            self._grow()
        y = float(y)
        self._y[n] = y
        self._s[n + 1] = self._s[n] + y
        self._q[n + 1] = self._q[n] + y * y
        self._counts[self._k] = n + 1
        return self

    def _grow(self) -> None:
        cap = 2 * len(self._y)
        y, s, q = np.empty(cap), np.zeros(cap + 1), np.zeros(cap + 1)
        n = self.count
        y[:n], s[: n + 1], q[: n + 1] = self._y[:n], self._s[: n + 1], self._q[: n + 1]
        self._y, self._s, self._q = y, s, q

    def mean(self) -> float:
        return self.window_mean(1, self.count)

    def stddev(self) -> float:
        return self.window_stddev(1, self.count)

    def window_mean(self, t: int, u: int) -> float:
        self._check_window(t, u)
        return float(prefix_window_mean(self._s, t, u))

    def window_stddev(self, t: int, u: int) -> float:
        self._check_window(t, u)
        if u == t:
            raise ValueError("window stddev needs at least two observations")
        return float(prefix_window_std(self._s, self._q, t, u))

    def _check_window(self, t: int, u: int) -> None:
        if not 1 <= t <= u <= self.count:
            raise IndexError(f"window {t}:{u} outside 1:{self.count}")

    def __repr__(self) -> str:
        return f"ArmHistory(count={self.count})"


def record_reward(history: ArmHistory, y: float) -> ArmHistory:
    return history.record(y)


def window_mean(history: ArmHistory, t: int, u: int) -> float:
    return history.window_mean(t, u)


def window_stddev(history: ArmHistory, t: int, u: int) -> float:
    return history.window_stddev(t, u)


class HistoryBank:
    """Histories of all ``K`` arms in contiguous ``(K, capacity)`` buffers.

    The jitted round functions read the raw buffers; ``bank[k]`` gives an
    :class:`ArmHistory` view of arm ``k``.
    """

    def __init__(self, n_arms: int, capacity: int):
        self.n_arms = int(n_arms)
        self.capacity = int(capacity)
        self.rewards = np.zeros((self.n_arms, self.capacity))
        self.csum = np.zeros((self.n_arms, self.capacity + 1))
        self.csq = np.zeros((self.n_arms, self.capacity + 1))
        self.counts = np.zeros(self.n_arms, dtype=np.int64)

    @classmethod
    def from_rewards(cls, rewards: Sequence[Sequence[float]], capacity: int | None = None):
        lengths = [len(r) for r in rewards]
        bank = cls(len(rewards), capacity or max(max(lengths, default=1), 1))
        for k, seq in enumerate(rewards):
            for y in seq:
                bank.record(k, y)
        return bank

    def record(self, k: int, y: float) -> None:
        if self.counts[k] >= self.capacity:
            raise IndexError(f"arm {k} history is full")
        prefix_record(self.rewards, self.csum, self.csq, self.counts, k, float(y))

    def means(self) -> np.ndarray:
        idx = np.arange(self.n_arms)
        n = np.maximum(self.counts, 1)
        return self.csum[idx, self.counts] / n

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __getitem__(self, k: int) -> ArmHistory:
        return ArmHistory._row(self, k)

    def __len__(self) -> int:
        return self.n_arms


@dataclass(frozen=True)
class PolicyDecision:
    """Non-empty set of arms to sample in the current round."""

    arms: tuple[int, ...]

    def __post_init__(self):
        arms = tuple(int(a) for a in self.arms)
        if not arms:
            raise ValueError("a decision must name at least one arm")
        if len(set(arms)) != len(arms):
            raise ValueError(f"duplicate arms in decision {arms}")
        if min(arms) < 0:
            raise ValueError(f"negative arm index in {arms}")
        object.__setattr__(self, "arms", tuple(sorted(arms)))

    @classmethod
    def from_mask(cls, mask) -> "PolicyDecision":
        return cls(tuple(np.flatnonzero(mask)))

    def __contains__(self, arm: int) -> bool:
        return arm in self.arms

    def __iter__(self):
        return iter(self.arms)

    def __len__(self) -> int:
        return len(self.arms)


def empirical_regret(realized_means: Sequence[float], pull_counts: Sequence[int]) -> float:
    """Realized regret ``sum_k (max_j mu_j - mu_k) * N_k`` of one run."""
    mu = np.asarray(realized_means, dtype=float)
    n = np.asarray(pull_counts)
    if mu.shape != n.shape:
        raise ValueError("means and counts must have the same length")
    if np.any(n < 0):
        raise ValueError("pull counts must be nonnegative")
    return float(np.sum((mu.max() - mu) * n))


@dataclass(frozen=True)
class RegretRecord:
    realized_means: tuple[float, ...]
    pull_counts: tuple[int, ...]
    empirical_regret: float
    seed_tag: tuple[int, int] = (0, 0)
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, means, counts, seed_tag=(0, 0), **meta) -> "RegretRecord":
        means = tuple(float(m) for m in means)
        counts = tuple(int(c) for c in counts)
        return cls(means, counts, empirical_regret(means, counts), tuple(seed_tag), meta)

    @property
    def horizon(self) -> int:
        return sum(self.pull_counts)


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


def stream(master_seed: int, replication: int, label: str) -> np.random.Generator:
    """Independent generator for ``(master_seed, replication, label)``.

    The same triple always yields the same draws, whatever process or worker
    count produced it.
    """
    if master_seed < 0 or replication < 0:
        raise ValueError("seed and replication index must be nonnegative")
    seq = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(replication), _label_key(label)])
    return np.random.Generator(np.random.PCG64(seq))


# Kernel families understood by the jitted replication driver.
FAMILY_SUBSAMPLE, FAMILY_BESA, FAMILY_INDEX = 0, 1, 2


class Policy:
    """Base class for allocation policies.

    Constructor arguments are the policy's parameters (``get_params`` reads
    them back by name). ``reset`` prepares per-run state; ``select`` returns
    the arms to sample given the current histories. ``kernel_spec`` describes
    the policy to the jitted driver as ``(family, code, float params)``.
    """

    name = "policy"
    initial_pulls = 1

    def get_params(self) -> dict:
        sig = inspect.signature(type(self).__init__)
        return {p: getattr(self, p) for p in sig.parameters if p != "self"}

    def clone(self) -> "Policy":
        return type(self)(**self.get_params())

    def reset(self, n_arms: int, horizon: int | None = None, rng: np.random.Generator | None = None):
        self.n_arms_ = int(n_arms)
        self.horizon_ = horizon
        self.rng_ = rng if rng is not None else np.random.default_rng()
        return self

    def select(self, bank: HistoryBank) -> PolicyDecision:
        raise NotImplementedError

    def kernel_spec(self, horizon: int) -> tuple[int, int, np.ndarray]:
        raise NotImplementedError

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
