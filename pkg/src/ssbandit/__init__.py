"""Subsample-comparison bandit policies, baselines and a regret harness."""
from .baselines import (
    KLUCB,
    UCB1,
    Boltzmann,
    EpsilonGreedy,
    Thompson,
    UCB1Normal,
    UCB1Tuned,
    UCBAgrawal,
    UCBLai,
)
from .core import ArmHistory, HistoryBank, Policy, PolicyDecision, RegretRecord, empirical_regret, stream
from .subsample import BESA, SSMC, SSTC, ExplorationSchedule, SSMCStar

__version__ = "0.1.0"

__all__ = [
    "ArmHistory",
    "BESA",
    "Boltzmann",
    "EpsilonGreedy",
    "ExplorationSchedule",
    "HistoryBank",
    "KLUCB",
    "Policy",
    "PolicyDecision",
    "RegretRecord",
    "SSMC",
    "SSMCStar",
    "SSTC",
    "Thompson",
    "UCB1",
    "UCB1Normal",
    "UCB1Tuned",
    "UCBAgrawal",
    "UCBLai",
    "empirical_regret",
    "stream",
]
