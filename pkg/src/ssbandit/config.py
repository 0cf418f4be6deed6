"""TOML scenario files and the policy/arm name registries.

Schema (unknown keys anywhere are an error)::

    name = "bernoulli-pair"          # required
    horizons = [1000, 10000]         # required, or a single integer
    replications = 1000
    seed = 0
    bin_edges = [0, 200, 400]        # optional histogram edges
    common_rewards = false
    description = ""

    [[arms]]                         # fixed arms, one table each ...
    family = "bernoulli"
    p = 0.9

    [sampler]                        # ... or arms drawn per replication
    family = "normal"                # or "double_exponential"
    n_arms = 10
    scale = 1.0
    random_precision = false

    [policies.SSMC]                  # label; "type" defaults to the label
    type = "SSMC"
    c_scale = 1.0

Arm families: bernoulli(p), normal(mu, sigma), double_exponential(mu, scale),
truncated_exponential(rate), truncated_poisson(rate), uniform(low, high),
markov(transition_matrix, emissions = [arm tables]).
"""
from __future__ import annotations

import inspect
import sys
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .baselines import KLUCB, UCB1, Boltzmann, EpsilonGreedy, Thompson, UCB1Normal, UCB1Tuned, UCBAgrawal, UCBLai
from .core import Policy
from .environments import (
    Bernoulli,
    DoubleExponential,
    MarkovRewardModel,
    Normal,
    RandomGaussianMeans,
    TruncatedExponential,
    TruncatedPoisson,
    Uniform,
)
from .harness import Scenario
from .subsample import BESA, SSMC, SSTC, SSMCStar

__all__ = ["ConfigError", "POLICY_TYPES", "load_scenario", "make_arm", "make_policy", "scenario_from_dict"]


class ConfigError(ValueError):
    pass


def _besat(initial_pulls=10):
    return BESA(initial_pulls=initial_pulls)


def _klucb_plus():
    return KLUCB(plus=True)


POLICY_TYPES = {
    "SSMC": SSMC,
    "SSTC": SSTC,
    "SSMC*": SSMCStar,
    "BESA": BESA,
    "BESAT": _besat,
    "UCB1": UCB1,
    "UCB1-tuned": UCB1Tuned,
    "UCB1-Normal": UCB1Normal,
    "UCB-Agrawal": UCBAgrawal,
    "UCB-Lai": UCBLai,
    "KL-UCB": KLUCB,
    "KL-UCB+": _klucb_plus,
    "Thompson": Thompson,
    "Boltzmann": Boltzmann,
    "eps-greedy": EpsilonGreedy,
}

ARM_FAMILIES = {
    "bernoulli": Bernoulli,
    "normal": Normal,
    "double_exponential": DoubleExponential,
    "truncated_exponential": TruncatedExponential,
    "truncated_poisson": TruncatedPoisson,
    "uniform": Uniform,
}

_TOP = {"name", "horizons", "replications", "seed", "bin_edges", "common_rewards", "description",
        "arms", "sampler", "policies"}


def _check_keys(table: Mapping, allowed, where: str):
    extra = set(table) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _call(factory, params: Mapping, where: str):
    allowed = [p for p in inspect.signature(factory).parameters if p != "self"]
    _check_keys(params, allowed, where)
    try:
        return factory(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def make_policy(kind: str, **params) -> Policy:
    if kind not in POLICY_TYPES:
        raise ConfigError(f"unknown policy type {kind!r}; choose from {', '.join(POLICY_TYPES)}")
    return _call(POLICY_TYPES[kind], params, f"policy {kind!r}")


def make_arm(spec: Mapping[str, Any]):
    spec = dict(spec)
    family = spec.pop("family", None)
    if family == "markov":
        _check_keys(spec, ["transition_matrix", "emissions"], "markov arm")
        emissions = [make_arm(e) for e in spec.get("emissions", [])]
        try:
            return MarkovRewardModel(spec.get("transition_matrix"), tuple(emissions))
        except ValueError as exc:
            raise ConfigError(f"markov arm: {exc}") from None
    if family not in ARM_FAMILIES:
        raise ConfigError(f"unknown arm family {family!r}")
    return _call(ARM_FAMILIES[family], spec, f"{family} arm")


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    _check_keys(data, _TOP, "scenario")
    for key in ("name", "horizons"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")
    if ("arms" in data) == ("sampler" in data):
        raise ConfigError("give exactly one of 'arms' and 'sampler'")
    if "arms" in data:
        arms = [make_arm(a) for a in data["arms"]]
    else:
        arms = _call(RandomGaussianMeans, data["sampler"], "sampler")
    policies = {}
    for label, spec in (data.get("policies") or {}).items():
        spec = dict(spec)
        policies[label] = make_policy(spec.pop("type", label), **spec)
    fields = {k: data[k] for k in ("replications", "seed", "bin_edges", "common_rewards", "description") if k in data}
    try:
        return Scenario(data["name"], arms, data["horizons"], policies, **fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_scenario(path) -> Scenario:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return scenario_from_dict(data)
