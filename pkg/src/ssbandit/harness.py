"""Monte Carlo regret experiments.

A replication draws arm parameters (for sampled scenarios) from the
``"arm-params"`` stream, pre-draws each arm's reward sequence and runs one
policy for exactly ``N`` pulls. Arm draws are common to every policy in the
roster; reward and policy streams are keyed by the policy label, so they are
independent across policies unless ``common_rewards`` is set.
"""
from __future__ import annotations

import csv
import io
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import theory
from .core import Policy, RegretRecord, stream
from .engine import run_counts, run_counts_python
from .environments import Bernoulli, Normal, draw_rewards
from .validation import check_bin_edges

__all__ = [
    "ExperimentSummary",
    "Histogram",
    "PolicySummary",
    "Scenario",
    "efficiency_diagnostic",
    "format_table",
    "histogram",
    "lower_bound",
    "run_experiment",
    "run_replication",
    "write_csv",
]

NA = "NA"


@dataclass
class Scenario:
    """Arms, horizons, roster and seed of one experiment.

    ``arms`` is either a sequence of reward models or a sampler with
    ``n_arms`` and ``draw(rng)`` returning fresh models each replication.
    ``policies`` maps a label to a policy instance.
    """

    name: str
    arms: object
    horizons: tuple[int, ...]
    policies: dict[str, Policy]
    replications: int = 1000
    seed: int = 0
    bin_edges: tuple[float, ...] | None = None
    common_rewards: bool = False
    description: str = ""

    def __post_init__(self):
        if isinstance(self.horizons, (int, np.integer)):
            self.horizons = (int(self.horizons),)
        self.horizons = tuple(int(n) for n in self.horizons)
        if not self.horizons:
            raise ValueError("need at least one horizon")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if not self.policies:
            raise ValueError("the policy roster is empty")
        K = self.n_arms
        if K < 1:
            raise ValueError("need at least one arm")
        for n in self.horizons:
            if n < K:
                raise ValueError(f"horizon {n} is smaller than the number of arms {K}")
        for label, policy in self.policies.items():
            if not isinstance(policy, Policy):
                raise TypeError(f"policy {label!r} is not a Policy")
            policy.kernel_spec(self.horizons[0])  # validates parameters
        if self.bin_edges is not None:
            self.bin_edges = tuple(float(e) for e in check_bin_edges(self.bin_edges))

    @property
    def sampled(self) -> bool:
        return hasattr(self.arms, "draw")

    @property
    def n_arms(self) -> int:
        return int(self.arms.n_arms) if self.sampled else len(self.arms)

    def arm_models(self, replication: int) -> list:
        if self.sampled:
            return list(self.arms.draw(stream(self.seed, replication, "arm-params")))
        return list(self.arms)

    def with_(self, **changes) -> "Scenario":
        params = {f: getattr(self, f) for f in self.__dataclass_fields__}
        params.update(changes)
        return Scenario(**params)


def run_replication(scenario: Scenario, policy: Policy, replication: int, horizon: int | None = None,
                    label: str | None = None, engine: str = "numba") -> RegretRecord:
    """One exact-``N`` run of ``policy``; replaying the same arguments gives the same record."""
    N = scenario.horizons[0] if horizon is None else int(horizon)
    label = policy.name if label is None else label
    models = scenario.arm_models(replication)
    K = len(models)
    if N < K:
        raise ValueError("horizon smaller than the number of arms")
    reward_label = "rewards" if scenario.common_rewards else f"rewards/{label}"
    rewards = draw_rewards(models, N - K + 1, stream(scenario.seed, replication, reward_label))
    rng = stream(scenario.seed, replication, f"policy/{label}")
    if engine == "numba":
        counts = run_counts(policy, rewards, N, rng)
    elif engine == "python":
        counts = run_counts_python(policy.clone(), rewards, N, rng)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return RegretRecord.build([m.mean for m in models], counts, (scenario.seed, replication),
                              policy=label, horizon=N)


@dataclass(frozen=True)
class Histogram:
    """Counts over ``[e_i, e_{i+1})``, the last bin open; ``below`` values fell under ``e_0``."""

    edges: tuple[float, ...]
    counts: tuple[int, ...]
    worst: float
    below: int = 0

    @property
    def flagged(self) -> bool:
        return self.below > 0


def histogram(values: Sequence[float], edges: Sequence[float]) -> Histogram:
    e = check_bin_edges(edges)
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values to bin")
    idx = np.searchsorted(e, v, side="right") - 1
    below = int(np.sum(idx < 0))
    counts = np.bincount(np.clip(idx, 0, None), minlength=e.size)
    return Histogram(tuple(float(x) for x in e), tuple(int(c) for c in counts), float(v.max()), below)


@dataclass
class PolicySummary:
    label: str
    horizon: int
    regrets: np.ndarray
    counts: np.ndarray
    means: np.ndarray
    histogram: Histogram | None = None

    @property
    def replications(self) -> int:
        return int(self.regrets.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.regrets))

    @property
    def se(self) -> float | None:
        if self.regrets.size < 2:
            return None
        return float(np.std(self.regrets, ddof=1) / math.sqrt(self.regrets.size))

    @property
    def worst(self) -> float:
        return float(np.max(self.regrets))

    def count_ratios(self) -> np.ndarray:
        """Per-arm ``mean N_k / log N``."""
        return self.counts.mean(axis=0) / math.log(self.horizon)

    def proportion_below(self, x: float) -> float:
        return float(np.mean(self.regrets < x))


@dataclass
class ExperimentSummary:
    scenario: str
    horizon: int
    replications: int
    seed: int
    policies: dict[str, PolicySummary] = field(default_factory=dict)

    def __getitem__(self, label: str) -> PolicySummary:
        return self.policies[label]

    def rows(self) -> list[dict]:
        out = []
        for label, s in self.policies.items():
            row = {"scenario": self.scenario, "policy": label, "N": self.horizon, "J": self.replications,
                   "seed": self.seed, "mean_regret": s.mean, "se_regret": NA if s.se is None else s.se,
                   "worst_regret": s.worst}
            counts = s.histogram.counts if s.histogram is not None else (s.replications,)
            for i, c in enumerate(counts):
                row[f"bin_{i}"] = c
            out.append(row)
        return out


def _chunk(scenario, label, horizon, reps, engine):
    policy = scenario.policies[label]
    return [run_replication(scenario, policy, r, horizon, label, engine) for r in reps]


def run_experiment(scenario: Scenario, horizon: int | None = None, n_jobs: int = 1,
                   engine: str = "numba", policies: Sequence[str] | None = None) -> ExperimentSummary:
    """Run every replication of every (selected) policy and aggregate.

    Results are collected by replication index, so the summary does not
    depend on ``n_jobs`` or completion order.
    """
    N = scenario.horizons[0] if horizon is None else int(horizon)
    labels = list(scenario.policies) if policies is None else list(policies)
    for label in labels:
        if label not in scenario.policies:
            raise KeyError(f"policy {label!r} not in scenario {scenario.name!r}")
    J = scenario.replications
    reps = list(range(J))
    records: dict[str, list[RegretRecord]] = {}
    if n_jobs == 1:
        for label in labels:
            records[label] = _chunk(scenario, label, N, reps, engine)
    else:
        workers = n_jobs if n_jobs > 0 else multiprocessing.cpu_count()
        size = max(1, math.ceil(J / (4 * workers)))
        chunks = [reps[i:i + size] for i in range(0, J, size)]
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = {label: [pool.submit(_chunk, scenario, label, N, c, engine) for c in chunks]
                       for label in labels}
            for label in labels:
                records[label] = [r for f in futures[label] for r in f.result()]
    summary = ExperimentSummary(scenario.name, N, J, scenario.seed)
    for label in labels:
        recs = sorted(records[label], key=lambda r: r.seed_tag[1])
        regrets = np.array([r.empirical_regret for r in recs])
        hist = histogram(regrets, scenario.bin_edges) if scenario.bin_edges is not None else None
        summary.policies[label] = PolicySummary(
            label, N, regrets, np.array([r.pull_counts for r in recs]),
            np.array([r.realized_means for r in recs]), hist)
    return summary


# --- reporting ------------------------------------------------------------------


def write_csv(summaries: Sequence[ExperimentSummary], target) -> None:
    """CSV rows ``scenario, policy, N, J, seed, mean_regret, se_regret, worst_regret, bin_0, ...``.

    ``target`` is a path or a text stream. Rows with fewer histogram bins
    leave the missing cells empty.
    """
    rows = [row for s in summaries for row in s.rows()]
    n_bins = max(sum(k.startswith("bin_") for k in row) for row in rows) if rows else 1
    cols = ["scenario", "policy", "N", "J", "seed", "mean_regret", "se_regret", "worst_regret"]
    cols += [f"bin_{i}" for i in range(n_bins)]
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="") as fh:
            _write_rows(fh, cols, rows)
    else:
        _write_rows(target, cols, rows)


def _write_rows(fh, cols, rows):
    w = csv.DictWriter(fh, fieldnames=cols, restval="", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def _pm(s: PolicySummary) -> str:
    if s.se is None:
        return f"{s.mean:.4g}"
    digits = max(0, 1 - int(math.floor(math.log10(s.se)))) if s.se > 0 else 1
    return f"{s.mean:.{digits}f} ± {s.se:.{digits}f}"


def format_table(summaries: Sequence[ExperimentSummary]) -> str:
    """Plain-text regret table: one row per policy, one column per horizon.

    Histogram counts and the worst regret follow when bin edges were set.
    """
    if not summaries:
        return ""
    labels: list[str] = []
    for s in summaries:
        labels.extend(p for p in s.policies if p not in labels)
    head = ["policy"] + [f"N={s.horizon}" for s in summaries]
    body = [[p] + [(_pm(s.policies[p]) if p in s.policies else "-") for s in summaries] for p in labels]
    buf = io.StringIO()
    title = summaries[0].scenario
    buf.write(f"{title}  (J={summaries[0].replications}, seed={summaries[0].seed})\n")
    buf.write(_grid(head, body))
    for s in summaries:
        first = next(iter(s.policies.values()))
        if first.histogram is None:
            continue
        e = first.histogram.edges
        bins = [f"{_num(a)}-{_num(b)}" for a, b in zip(e, e[1:])] + [f"{_num(e[-1])}+"]
        rows = [[p] + [str(c) for c in ps.histogram.counts] + [f"{ps.worst:.0f}"] for p, ps in s.policies.items()]
        buf.write(f"\nregret histogram, N={s.horizon}\n")
        buf.write(_grid(["policy"] + bins + ["worst"], rows))
    return buf.getvalue()


def _num(x):
    return f"{x:g}"


def _grid(head, rows):
    widths = [max(len(str(r[i])) for r in [head] + rows) for i in range(len(head))]
    line = lambda r: "  ".join(str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
    out = [line(head), "  ".join("-" * w for w in widths)] + [line(r) for r in rows]
    return "\n".join(out) + "\n"


# --- theory hooks -----------------------------------------------------------------


def lower_bound(models: Sequence, horizon: int) -> theory.LowerBoundReport:
    """Asymptotic lower bound for fixed Bernoulli or normal arms.

    Equal-variance normal arms use the known-variance KL information;
    unequal variances use ``M(gap / sigma_k)``.
    """
    models = list(models)
    means = [m.mean for m in models]
    if all(isinstance(m, Bernoulli) for m in models):
        if any(not 0 < mu < 1 for mu in means):
            raise ValueError("Bernoulli means must lie strictly inside (0, 1)")
        return theory.lai_robbins_bound(means, theory.BernoulliFamily(), horizon)
    if all(isinstance(m, Normal) for m in models):
        sigmas = {m.sigma for m in models}
        if len(sigmas) == 1:
            return theory.lai_robbins_bound(means, theory.NormalFamily(sigmas.pop()), horizon)
        return theory.burnetas_katehakis_bound(means, [m.sigma for m in models], horizon)
    raise ValueError("lower bounds are available for Bernoulli and normal arms only")


def efficiency_diagnostic(scenario: Scenario, policy: str, horizons: Sequence[int],
                          replications: int | None = None, n_jobs: int = 1) -> list[dict]:
    """Mean ``N_k / log N`` per inferior arm next to the limit ``1 / D(f_k | f*)``."""
    if scenario.sampled:
        raise ValueError("efficiency diagnostics need fixed arms")
    J = scenario.replications if replications is None else replications
    report = lower_bound(scenario.arms, max(horizons))
    inferior = report.inferior_arms()
    rows = []
    if not inferior:
        return rows
    sc = scenario.with_(horizons=tuple(horizons), replications=J)
    for N in horizons:
        ratios = run_experiment(sc, N, n_jobs, policies=[policy])[policy].count_ratios()
        for k in inferior:
            rows.append({"N": int(N), "arm": k, "ratio": float(ratios[k]), "limit": report.limits[k]})
    return rows

