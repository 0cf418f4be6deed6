"""Named scenarios reproducing the published experiments at desk scale.

Default ``replications`` is 1000 (the published runs used 10000).
"""
from __future__ import annotations

from typing import Callable

from .baselines import KLUCB, UCB1, Boltzmann, EpsilonGreedy, Thompson, UCB1Normal, UCB1Tuned, UCBAgrawal
from .environments import (
    Bernoulli,
    MarkovRewardModel,
    Normal,
    RandomGaussianMeans,
    TruncatedExponential,
    TruncatedPoisson,
    Uniform,
)
from .harness import Scenario
from .subsample import BESA, SSMC, SSTC, SSMCStar

__all__ = ["PRESETS", "get_preset", "preset_names"]

DESK_J = 1000


def _table1():
    return Scenario(
        "table1", RandomGaussianMeans("normal", 10, 1.0), (1000, 10000),
        {"SSMC": SSMC(), "UCB1": UCB1(), "UCB-Agrawal": UCBAgrawal()}, DESK_J,
        description="10 unit-variance normal arms, mu_k ~ N(0,1) per replication")


def _table2():
    return Scenario(
        "table2", RandomGaussianMeans("normal", 10, random_precision=True), (1000, 10000),
        {"SSTC": SSTC(), "UCB1-tuned": UCB1Tuned(), "UCB1-Normal": UCB1Normal()}, DESK_J,
        description="10 normal arms, mu_k ~ N(0,1), sigma_k^-2 ~ Exp(1) per replication")


def _example3_fixed():
    arms = [Normal(1.8, 0.5), Normal(2.0, 0.7), Normal(1.5, 0.5), Normal(2.2, 0.3)]
    return Scenario("example3-fixed", arms, (1000, 10000), {"SSTC": SSTC()}, DESK_J,
                    description="4 normal arms with unequal variances")


def _table3_roster():
    roster = {"SSMC": SSMC(), "BESA": BESA(), "UCB1-tuned": UCB1Tuned()}
    for tau in (0.1, 0.2, 0.5, 1.0):
        roster[f"Boltzmann(tau={tau:g})"] = Boltzmann(tau)
    for c in (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        roster[f"eps-greedy(c={c:g})"] = EpsilonGreedy(c)
    return roster


def _table3(lam):
    def build():
        return Scenario(
            f"table3-lambda{lam}", RandomGaussianMeans("double_exponential", 10, float(lam)), (1000, 10000),
            _table3_roster(), DESK_J,
            description=f"10 double-exponential arms, scale {lam}, mu_k ~ N(0,1) per replication")
    return build


def _table4():
    return Scenario(
        "table4", RandomGaussianMeans("double_exponential", 10, 1.0), (1000,),
        {"SSMC": SSMC(), "BESA": BESA(), "UCB1-tuned": UCB1Tuned()}, DESK_J,
        bin_edges=(0, 200, 400, 600, 800, 1000, 1200),
        description="regret histogram, double-exponential arms, scale 1")


def _table5():
    return Scenario(
        "table5", RandomGaussianMeans("double_exponential", 10, 1.0), (10000,),
        {"SSMC": SSMC(), "BESA": BESA(), "UCB1-tuned": UCB1Tuned()}, DESK_J,
        bin_edges=(0, 1000, 2000, 3000, 4000, 5000, 10000),
        description="regret histogram, double-exponential arms, scale 1")


_TABLE6_ARMS = {
    1: [0.9, 0.8],
    2: [0.81, 0.8],
    3: [0.1, 0.05, 0.05, 0.05, 0.02, 0.02, 0.02, 0.01, 0.01, 0.01],
    4: [0.51] + [0.5] * 9,
}


def _table6(i):
    def build():
        roster = {"SSMC": SSMC(), "SSMC*": SSMCStar(), "BESA": BESA(), "KL-UCB": KLUCB(),
                  "KL-UCB+": KLUCB(plus=True), "Thompson": Thompson()}
        return Scenario(f"table6-scenario{i}", [Bernoulli(p) for p in _TABLE6_ARMS[i]], (20000,), roster,
                        DESK_J, description=f"Bernoulli arms {_TABLE6_ARMS[i]}")
    return build


def _table7_roster():
    return {"SSMC": SSMC(), "SSMC*": SSMCStar(), "BESA": BESA(), "BESAT": BESA(initial_pulls=10)}


def _table7_exp():
    arms = [TruncatedExponential(1.0 / k) for k in range(1, 6)]
    return Scenario("table7-trunc-exp", arms, (20000,), _table7_roster(), DESK_J,
                    description="min(X/10, 1), X ~ Exp(1/k), k = 1..5")


def _table7_poisson():
    arms = [TruncatedPoisson(0.5 + k / 3) for k in range(1, 7)]
    return Scenario("table7-trunc-poisson", arms, (20000,), _table7_roster(), DESK_J,
                    description="min(X/10, 1), X ~ Poisson(0.5 + k/3), k = 1..6")


def _example7():
    return Scenario("example7-uniform", [Uniform(0.2, 0.4), Uniform(0.0, 1.0)], (20000,),
                    {"SSTC": SSTC(), "SSMC": SSMC(), "Thompson": Thompson()}, DESK_J,
                    description="Uniform(0.2, 0.4) against Uniform(0, 1)")


def _markov():
    # both chains have column minima summing to 0.7 and 1.0
    good = MarkovRewardModel([[0.7, 0.3], [0.4, 0.6]], (Normal(1.0, 1.0), Normal(0.0, 1.0)))
    poor = MarkovRewardModel([[0.5, 0.5], [0.5, 0.5]], (Normal(0.5, 1.0), Normal(0.0, 1.0)))
    return Scenario("markov-doeblin", [good, poor], (1000, 10000, 100000),
                    {"SSMC": SSMC(), "SSTC": SSTC()}, 200,
                    description="two 2-state Markov-modulated normal arms, stationary means 4/7 and 1/4")


PRESETS: dict[str, Callable[[], Scenario]] = {
    "table1": _table1,
    "table2": _table2,
    "example3-fixed": _example3_fixed,
    "table3-lambda1": _table3(1),
    "table3-lambda2": _table3(2),
    "table3-lambda5": _table3(5),
    "table4": _table4,
    "table5": _table5,
    "table6-scenario1": _table6(1),
    "table6-scenario2": _table6(2),
    "table6-scenario3": _table6(3),
    "table6-scenario4": _table6(4),
    "table7-trunc-exp": _table7_exp,
    "table7-trunc-poisson": _table7_poisson,
    "example7-uniform": _example7,
    "markov-doeblin": _markov,
}


def preset_names() -> list[str]:
    return list(PRESETS)


def get_preset(name: str) -> Scenario:
    """A fresh scenario object for preset ``name``."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; available: {', '.join(PRESETS)}") from None
