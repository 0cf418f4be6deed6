"""Classical comparison policies; each samples exactly one arm per step.

Deterministic argmax ties go to the smallest arm index.
"""
from __future__ import annotations

import numpy as np

from .core import FAMILY_INDEX, HistoryBank, Policy, PolicyDecision, jit, prefix_window_std

__all__ = [
    "Boltzmann",
    "EpsilonGreedy",
    "KLUCB",
    "Thompson",
    "UCB1",
    "UCB1Normal",
    "UCB1Tuned",
    "UCBAgrawal",
    "UCBLai",
    "bernoulli_kl",
    "boltzmann_probabilities",
    "boltzmann_step",
    "epsilon_greedy_step",
    "epsilon_schedule",
    "klucb_bernoulli_index",
    "klucb_exploration",
    "thompson_bernoulli_step",
    "ucb1_index",
    "ucb1_normal_step",
    "ucb1_tuned_index",
    "ucb_agrawal_index",
    "ucb_lai_index",
]

(CODE_UCB1, CODE_UCB1_TUNED, CODE_UCB1_NORMAL, CODE_AGRAWAL, CODE_LAI,
 CODE_KLUCB, CODE_EPSILON, CODE_BOLTZMANN, CODE_THOMPSON) = range(9)


# --- index formulas -------------------------------------------------------------


@jit
def ucb1_index(mean, n_k, n):
    return mean + np.sqrt(2.0 * np.log(n) / n_k)


@jit
def _clamped_logs(n):
    # log n + log log n + log log log n, each nested log floored at 0
    l1 = max(np.log(n), 0.0)
    l2 = max(np.log(l1), 0.0) if l1 > 0.0 else 0.0
    l3 = max(np.log(l2), 0.0) if l2 > 0.0 else 0.0
    return l1 + l2 + l3


@jit
def ucb_agrawal_index(mean, n_k, n):
    """Agrawal's index with ``b_n = log log log n``."""
    return mean + np.sqrt(2.0 * _clamped_logs(n) / n_k)


@jit
def ucb_lai_index(mean, n_k, n, horizon):
    """Lai's finite-horizon index ``mean + sqrt(2 log(N / n_k) / n_k)``.

    ``n`` (total observations) is accepted for signature symmetry; the
    exploration term depends on the arm's own sample size.
    """
    return mean + np.sqrt(2.0 * max(np.log(horizon / n_k), 0.0) / n_k)


@jit
def ucb1_tuned_index(mean, stddev, n_k, n):
    v = stddev * stddev + np.sqrt(2.0 * np.log(n) / n_k)
    return mean + np.sqrt(np.log(n) / n_k * min(0.25, v))


@jit
def bernoulli_kl(p, q):
    out = 0.0
    if p > 0.0:
        out += p * np.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * np.log((1.0 - p) / (1.0 - q))
    return out


@jit
def klucb_bernoulli_index(mean, n_k, n, f_n):
    """Largest ``q >= mean`` with ``n_k * kl(mean, q) <= f_n``, by bisection."""
    p = min(max(mean, 0.0), 1.0)
    if p >= 1.0:
        return 1.0
    if f_n <= 0.0:
        return p
    target = f_n / n_k
    lo, hi = p, 1.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if bernoulli_kl(p, mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


@jit
def klucb_exploration(n, n_k, plus):
    """``log n + 3 log(max(log n, 1))``, or ``log(n / n_k)`` for KL-UCB+."""
    if plus:
        return max(np.log(n / n_k), 0.0)
    return np.log(n) + 3.0 * np.log(max(np.log(n), 1.0))


@jit
def epsilon_schedule(n, c, multiplier):
    return min(1.0, multiplier * c / n)


# --- per-step selection ---------------------------------------------------------


@jit
def _argmax(values):
    best = 0
    for k in range(1, values.shape[0]):
        if values[k] > values[best]:
            best = k
    return best


@jit
def _means(csum, counts):
    K = counts.shape[0]
    out = np.empty(K)
    for k in range(K):
        out[k] = csum[k, counts[k]] / counts[k]
    return out


@jit
def _stddev(csum, csq, counts, k):
    if counts[k] < 2:
        return 0.0
    return prefix_window_std(csum[k], csq[k], 1, counts[k])


@jit
def _epsilon_greedy(means, n, c, multiplier, rng):
    eps = epsilon_schedule(n, c, multiplier)
    if rng.random() < eps:
        return rng.integers(0, means.shape[0])
    return _argmax(means)


@jit
def _boltzmann_probs(means, tau):
    z = means / tau
    z = np.exp(z - z.max())
    return z / z.sum()


@jit
def _boltzmann(means, tau, rng):
    p = _boltzmann_probs(means, tau)
    u = rng.random()
    acc = 0.0
    for k in range(p.shape[0] - 1):
        acc += p[k]
        if u < acc:
            return k
    return p.shape[0] - 1


@jit
def _thompson(successes, failures, rng):
    K = successes.shape[0]
    theta = np.empty(K)
    for k in range(K):
        theta[k] = rng.beta(1.0 + successes[k], 1.0 + failures[k])
    return _argmax(theta)


@jit
def _ucb1_normal(means, sds, counts, n):
    thr = 8.0 * np.log(n)
    forced = -1
    for k in range(counts.shape[0]):
        if counts[k] < thr and (forced < 0 or counts[k] < counts[forced]):
            forced = k
    if forced >= 0:
        return forced
    idx = means + 4.0 * sds * np.sqrt(np.log(n) / counts)
    return _argmax(idx)


@jit
def index_select(code, params, csum, csq, counts, rng):
    """Arm chosen by index policy ``code`` given the current histories."""
    K = counts.shape[0]
    n = counts.sum()
    means = _means(csum, counts)
    if code == CODE_EPSILON:
        return _epsilon_greedy(means, n, params[0], params[1], rng)
    if code == CODE_BOLTZMANN:
        return _boltzmann(means, params[0], rng)
    if code == CODE_THOMPSON:
        s = np.empty(K)
        f = np.empty(K)
        for k in range(K):
            s[k] = min(max(csum[k, counts[k]], 0.0), counts[k])
            f[k] = counts[k] - s[k]
        return _thompson(s, f, rng)
    if code == CODE_UCB1_NORMAL:
        sds = np.empty(K)
        for k in range(K):
            sds[k] = _stddev(csum, csq, counts, k)
        return _ucb1_normal(means, sds, counts, n)
    idx = np.empty(K)
    for k in range(K):
        if code == CODE_UCB1:
            idx[k] = ucb1_index(means[k], counts[k], n)
        elif code == CODE_UCB1_TUNED:
            idx[k] = ucb1_tuned_index(means[k], _stddev(csum, csq, counts, k), counts[k], n)
        elif code == CODE_AGRAWAL:
            idx[k] = ucb_agrawal_index(means[k], counts[k], n)
        elif code == CODE_LAI:
            idx[k] = ucb_lai_index(means[k], counts[k], n, params[0])
        else:
            f = klucb_exploration(n, counts[k], params[0] > 0.0)
            idx[k] = klucb_bernoulli_index(means[k], counts[k], n, f)
    return _argmax(idx)


# --- public step helpers --------------------------------------------------------


def ucb1_normal_step(bank: HistoryBank, n: int | None = None) -> int:
    """Forced pull of the least-sampled arm while any ``n_k < 8 log n``,
    otherwise the arm maximizing ``mean + 4 sd sqrt(log n / n_k)``."""
    n = bank.total if n is None else int(n)
    means = bank.means()
    sds = np.array([_stddev(bank.csum, bank.csq, bank.counts, k) for k in range(bank.n_arms)])
    return int(_ucb1_normal(means, sds, bank.counts, n))


def epsilon_greedy_step(means, n, rng, c=1.0, multiplier=3.0) -> int:
    return int(_epsilon_greedy(np.asarray(means, dtype=float), int(n), float(c), float(multiplier), rng))


def boltzmann_probabilities(means, tau) -> np.ndarray:
    if tau <= 0:
        raise ValueError("tau must be positive")
    return _boltzmann_probs(np.asarray(means, dtype=float), float(tau))


def boltzmann_step(means, tau, rng) -> int:
    if tau <= 0:
        raise ValueError("tau must be positive")
    return int(_boltzmann(np.asarray(means, dtype=float), float(tau), rng))


def thompson_bernoulli_step(successes, failures, rng) -> int:
    s = np.asarray(successes, dtype=float)
    f = np.asarray(failures, dtype=float)
    if np.any(s < 0) or np.any(f < 0):
        raise ValueError("success and failure counts must be nonnegative")
    return int(_thompson(s, f, rng))


# --- policies -------------------------------------------------------------------


class IndexPolicy(Policy):
    code = CODE_UCB1

    def _params(self, horizon) -> np.ndarray:
        return np.zeros(1)

    def select(self, bank: HistoryBank) -> PolicyDecision:
        params = self._params(self.horizon_)
        arm = index_select(self.code, params, bank.csum, bank.csq, bank.counts, self.rng_)
        return PolicyDecision((int(arm),))

    def kernel_spec(self, horizon):
        return FAMILY_INDEX, self.code, self._params(horizon)


class UCB1(IndexPolicy):
    name = "UCB1"
    code = CODE_UCB1

    def __init__(self):
        pass


class UCB1Tuned(IndexPolicy):
    name = "UCB1-tuned"
    code = CODE_UCB1_TUNED

    def __init__(self, initial_pulls=2):
        self.initial_pulls = initial_pulls


class UCB1Normal(IndexPolicy):
    name = "UCB1-Normal"
    code = CODE_UCB1_NORMAL

    def __init__(self, initial_pulls=2):
        self.initial_pulls = initial_pulls


class UCBAgrawal(IndexPolicy):
    name = "UCB-Agrawal"
    code = CODE_AGRAWAL

    def __init__(self):
        pass


class UCBLai(IndexPolicy):
    """Needs the horizon; taken from ``reset`` unless fixed here."""

    name = "UCB-Lai"
    code = CODE_LAI

    def __init__(self, horizon=None):
        self.horizon = horizon

    def _params(self, horizon):
        N = self.horizon if self.horizon is not None else horizon
        if N is None:
            raise ValueError("UCB-Lai needs a horizon")
        return np.array([float(N)])


class KLUCB(IndexPolicy):
    """Bernoulli KL-UCB; ``plus=True`` uses the ``log(n / n_k)`` exploration."""

    code = CODE_KLUCB

    def __init__(self, plus=False):
        self.plus = plus

    @property
    def name(self):
        return "KL-UCB+" if self.plus else "KL-UCB"

    def _params(self, horizon):
        return np.array([1.0 if self.plus else 0.0])


class EpsilonGreedy(IndexPolicy):
    """Explore with probability ``min(1, multiplier * c / n)``.

    ``multiplier=3`` is the ``3c/n`` schedule used for double-exponential
    rewards; ``multiplier = K / d**2`` recovers the general form.
    """

    name = "eps-greedy"
    code = CODE_EPSILON

    def __init__(self, c=1.0, multiplier=3.0):
        self.c = c
        self.multiplier = multiplier

    def _params(self, horizon):
        if self.c < 0 or self.multiplier < 0:
            raise ValueError("epsilon schedule parameters must be nonnegative")
        return np.array([float(self.c), float(self.multiplier)])


class Boltzmann(IndexPolicy):
    name = "Boltzmann"
    code = CODE_BOLTZMANN

    def __init__(self, tau=0.1):
        if not tau > 0:
            raise ValueError("tau must be positive")
        self.tau = tau

    def _params(self, horizon):
        return np.array([float(self.tau)])


class Thompson(IndexPolicy):
    """Beta(1, 1)-prior Thompson sampling for rewards in [0, 1]."""

    name = "Thompson"
    code = CODE_THOMPSON

    def __init__(self):
        pass
