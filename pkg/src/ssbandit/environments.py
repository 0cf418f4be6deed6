"""Reward models: i.i.d. families, finite Markov-modulated arms, arm samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import stats

from .core import jit
from .validation import check_positive, check_probability, check_stochastic_matrix

__all__ = [
    "Bernoulli",
    "DoubleExponential",
    "MarkovRewardModel",
    "Normal",
    "RandomGaussianMeans",
    "RewardModel",
    "TruncatedExponential",
    "TruncatedPoisson",
    "Uniform",
    "doeblin_margin",
    "markov_sample_path",
    "sample",
    "stationary_distribution",
    "true_mean",
]


class RewardModel:
    """An arm's reward distribution. Instances are immutable."""

    family = ""

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def params(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Bernoulli(RewardModel):
    p: float
    family = "bernoulli"

    def __post_init__(self):
        check_probability(self.p, "p")

    @property
    def mean(self):
        return float(self.p)

    @property
    def stddev(self):
        return math.sqrt(self.p * (1 - self.p))

    def sample(self, rng, size=None):
        return (rng.random(size) < self.p).astype(float) if size is not None else float(rng.random() < self.p)


@dataclass(frozen=True)
class Normal(RewardModel):
    mu: float
    sigma: float = 1.0
    family = "normal"

    def __post_init__(self):
        check_positive(self.sigma, "sigma")

    @property
    def mean(self):
        return float(self.mu)

    @property
    def stddev(self):
        return float(self.sigma)

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class DoubleExponential(RewardModel):
    """Laplace density ``exp(-|y - mu| / scale) / (2 scale)``, sampled by inverse CDF."""

    mu: float
    scale: float = 1.0
    family = "double_exponential"

    def __post_init__(self):
        check_positive(self.scale, "scale")

    @property
    def mean(self):
        return float(self.mu)

    @property
    def stddev(self):
        return math.sqrt(2.0) * self.scale

    def sample(self, rng, size=None):
        v = rng.random(size) - 0.5
        return self.mu - self.scale * np.sign(v) * np.log1p(-2.0 * np.abs(v))


@dataclass(frozen=True)
class TruncatedExponential(RewardModel):
    """Reward ``min(X / 10, 1)`` with ``X ~ Exp(rate)``."""

    rate: float
    family = "truncated_exponential"

    def __post_init__(self):
        check_positive(self.rate, "rate")

    @property
    def mean(self):
        # E min(X, 10) = (1 - exp(-10 rate)) / rate
        return -math.expm1(-10.0 * self.rate) / (10.0 * self.rate)

    def sample(self, rng, size=None):
        return np.minimum(rng.exponential(1.0 / self.rate, size) / 10.0, 1.0)


@dataclass(frozen=True)
class TruncatedPoisson(RewardModel):
    """Reward ``min(X / 10, 1)`` with ``X ~ Poisson(rate)``."""

    rate: float
    family = "truncated_poisson"

    def __post_init__(self):
        check_positive(self.rate, "rate")

    @cached_property
    def mean(self):
        x = np.arange(10)
        pmf = stats.poisson.pmf(x, self.rate)
        return float(np.sum(x / 10.0 * pmf) + stats.poisson.sf(9, self.rate))

    def sample(self, rng, size=None):
        return np.minimum(rng.poisson(self.rate, size) / 10.0, 1.0)


@dataclass(frozen=True)
class Uniform(RewardModel):
    low: float = 0.0
    high: float = 1.0
    family = "uniform"

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"need low < high, got {self.low}, {self.high}")

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    @property
    def stddev(self):
        return (self.high - self.low) / math.sqrt(12.0)

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size)


def sample(model: RewardModel, rng: np.random.Generator):
    return model.sample(rng)


def true_mean(model) -> float:
    return model.mean


# --- Markov-modulated rewards --------------------------------------------------


def doeblin_margin(transition_matrix) -> np.ndarray:
    """Column minima of the transition matrix: the largest minorizing measure."""
    return np.asarray(transition_matrix, dtype=float).min(axis=0)


def stationary_distribution(transition_matrix) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` by least squares on the stacked system."""
    P = check_stochastic_matrix(transition_matrix)
    S = P.shape[0]
    A = np.vstack([P.T - np.eye(S), np.ones((1, S))])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@jit
def _chain_path(cum, start, u):
    n = u.shape[0]
    path = np.empty(n, dtype=np.int64)
    s = start
    for i in range(n):
        if i > 0:
            row = cum[s]
            s = 0
            while s < row.shape[0] - 1 and u[i] >= row[s]:
                s += 1
        path[i] = s
    return path


@dataclass(frozen=True, eq=False)
class MarkovRewardModel:
    """Rewards emitted by a stationary finite Markov chain.

    Construction rejects matrices whose column minima sum to zero, i.e.
    chains without a uniform minorization (Doeblin) margin.
    """

    transition_matrix: np.ndarray
    emissions: tuple
    family = "markov"
    initial: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        P = check_stochastic_matrix(self.transition_matrix)
        if len(self.emissions) != P.shape[0]:
            raise ValueError("need one emission model per state")
        if doeblin_margin(P).sum() <= 0:
            raise ValueError("transition matrix has no Doeblin margin (column minima sum to 0)")
        object.__setattr__(self, "transition_matrix", P)
        object.__setattr__(self, "emissions", tuple(self.emissions))
        object.__setattr__(self, "initial", stationary_distribution(P))

    @property
    def state_count(self) -> int:
        return self.transition_matrix.shape[0]

    @property
    def margin(self) -> float:
        return float(doeblin_margin(self.transition_matrix).sum())

    @property
    def mean(self) -> float:
        return float(sum(p * e.mean for p, e in zip(self.initial, self.emissions)))

    def state_path(self, length: int, rng) -> np.ndarray:
        u = rng.random(length)
        start = int(np.searchsorted(np.cumsum(self.initial), u[0], side="right"))
        start = min(start, self.state_count - 1)
        return _chain_path(np.cumsum(self.transition_matrix, axis=1), start, u)

    def sample(self, rng, size=None):
        if size is None:
            return float(self.sample(rng, 1)[0])
        path = self.state_path(int(size), rng)
        out = np.empty(len(path))
        for s, emission in enumerate(self.emissions):
            where = path == s
            out[where] = emission.sample(rng, int(where.sum()))
        return out

    def params(self) -> dict:
        return {"transition_matrix": self.transition_matrix.tolist(),
                "emissions": [dict(family=e.family, **e.params()) for e in self.emissions]}


def markov_sample_path(model: MarkovRewardModel, length: int, rng) -> np.ndarray:
    if length < 1:
        raise ValueError("length must be at least 1")
    return model.sample(rng, length)


# --- per-replication arm samplers ------------------------------------------------


@dataclass(frozen=True)
class RandomGaussianMeans:
    """``n_arms`` arms with means drawn N(0, 1) afresh in every replication.

    ``family`` is ``"normal"`` (``scale`` is the common standard deviation) or
    ``"double_exponential"`` (``scale`` is the Laplace scale). With
    ``random_precision`` normal arms get ``sigma ** -2 ~ Exp(1)`` instead.
    """

    family: str = "normal"
    n_arms: int = 10
    scale: float = 1.0
    random_precision: bool = False

    def __post_init__(self):
        if self.family not in ("normal", "double_exponential"):
            raise ValueError(f"unsupported family {self.family!r}")
        if self.random_precision and self.family != "normal":
            raise ValueError("random_precision applies to normal arms only")
        if self.n_arms < 1:
            raise ValueError("n_arms must be positive")
        check_positive(self.scale, "scale")

    def draw(self, rng: np.random.Generator) -> list[RewardModel]:
        mu = rng.normal(0.0, 1.0, self.n_arms)
        if self.family == "double_exponential":
            return [DoubleExponential(float(m), self.scale) for m in mu]
        if self.random_precision:
            sigma = 1.0 / np.sqrt(rng.exponential(1.0, self.n_arms))
            return [Normal(float(m), float(s)) for m, s in zip(mu, sigma)]
        return [Normal(float(m), self.scale) for m in mu]


def draw_rewards(models: Sequence, length: int, rng: np.random.Generator) -> np.ndarray:
    """``(K, length)`` array; row ``k`` is the reward sequence of arm ``k``."""
    return np.vstack([np.asarray(m.sample(rng, length), dtype=float) for m in models])
