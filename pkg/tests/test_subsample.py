import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from ssbandit import BESA, SSMC, SSTC, SSMCStar
from ssbandit.core import ArmHistory, HistoryBank, stream
from ssbandit.engine import run_counts, run_counts_python
from ssbandit.subsample import (
    ExplorationSchedule,
    WindowMinCache,
    besa_duel,
    besa_round,
    select_leader,
    ssmc_challenge,
    ssmc_round,
    ssmc_star_challenge,
    sstc_challenge,
)

CHALLENGES = {"SSMC": ssmc_challenge, "SSTC": sstc_challenge, "SSMC*": ssmc_star_challenge}


# --- exploration schedule --------------------------------------------------------


def test_schedule_default():
    c = ExplorationSchedule()
    assert c(1) == 0.0
    assert c(2) == pytest.approx(math.sqrt(math.log(2)))
    assert c(math.ceil(math.exp(4))) >= 2.0 > c(math.floor(math.exp(4)))
    values = [c(n) for n in range(1, 2000)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_schedule_rejects_negative_parameters():
    with pytest.raises(ValueError):
        ExplorationSchedule(scale=-1)


# --- leader election ---------------------------------------------------------------


def test_leader_unique_max_count():
    assert select_leader([3, 5, 4], [9.0, 0.0, 9.0]) == 1


def test_leader_tie_goes_to_larger_mean():
    assert select_leader([4, 4], [0.5, 0.7]) == 1


def test_leader_tie_goes_to_previous_leader():
    assert select_leader([4, 4], [0.6, 0.6], previous_leader=0) == 0
    assert select_leader([4, 4], [0.6, 0.6], previous_leader=1) == 1


def test_leader_random_tie_is_uniform_and_reproducible():
    picks = [select_leader([2, 2, 2], [1.0, 1.0, 1.0], rng=np.random.default_rng(s)) for s in range(3000)]
    freq = np.bincount(picks, minlength=3) / 3000
    assert np.all(np.abs(freq - 1 / 3) < 4 * math.sqrt(2 / 9 / 3000))
    again = [select_leader([2, 2, 2], [1.0, 1.0, 1.0], rng=np.random.default_rng(s)) for s in range(3000)]
    assert picks == again


def test_leader_previous_outside_tie_set_is_ignored():
    assert select_leader([5, 5, 2], [0.1, 0.3, 0.9], previous_leader=2) == 1


# --- SSMC challenge ---------------------------------------------------------------


def test_equal_sizes_lose():
    leader = ArmHistory([0, 0, 0, 0, 0])
    challenger = ArmHistory([9, 9, 9, 9, 9])
    for fn in CHALLENGES.values():
        assert fn(leader, challenger, 0.0) is False


def test_small_challenger_wins_automatically():
    leader = ArmHistory([5.0] * 10)
    for fn in CHALLENGES.values():
        assert fn(leader, ArmHistory([-5.0]), 2.5) is True


def test_ssmc_tie_counts_as_win():
    assert ssmc_challenge(ArmHistory([5, 1, 1, 5]), ArmHistory([1, 1]), 0.0) is True
    assert ssmc_challenge(ArmHistory([5, 1, 1, 5]), ArmHistory([0.5, 1]), 0.0) is False


def test_window_min_cache_tracks_brute_force(rng):
    leader = ArmHistory(rng.normal(0, 1, 5))
    challenger = ArmHistory([10.0, 10.0, 10.0])
    cache = WindowMinCache()
    for _ in range(40):
        ssmc_challenge(leader, challenger, 0.0, cache)
        y = list(leader.rewards)
        assert cache.valid and cache.window_length == 3
        assert cache.windows_covered == len(y) - 2
        assert cache.running_min == pytest.approx(min(oracles.mean(w) for w in oracles.windows(y, 3)))
        leader.record(rng.normal())


def test_window_min_cache_resets_on_new_length(rng):
    leader = ArmHistory(rng.normal(0, 1, 20))
    cache = WindowMinCache()
    ssmc_challenge(leader, ArmHistory([0.0, 0.0, 0.0]), 0.0, cache)
    ssmc_challenge(leader, ArmHistory([0.0, 0.0, 0.0, 0.0]), 0.0, cache)
    y = list(leader.rewards)
    assert cache.window_length == 4 and cache.windows_covered == 17
    assert cache.running_min == pytest.approx(min(oracles.mean(w) for w in oracles.windows(y, 4)))


def test_challenger_larger_than_leader_rejected():
    with pytest.raises(ValueError):
        ssmc_challenge(ArmHistory([1.0]), ArmHistory([1.0, 2.0]), 0.0)


# --- SSTC ---------------------------------------------------------------------------


def test_sstc_mean_comparison_wins_regardless_of_windows():
    leader = ArmHistory([1.5, 1.5, 1.4, 1.6, 1.5, 1.5, 1.5, 1.5])
    assert sstc_challenge(leader, ArmHistory([2.0, 1.9, 2.1]), 0.0) is True


def test_sstc_hand_built_matches_window_oracle():
    leader = [3.0, 1.0, 2.5, 4.0, 0.5, 3.5]
    challenger = [1.0, 2.0, 1.5]
    expected = oracles.challenge("SSTC", leader, challenger, 0.0)
    assert sstc_challenge(ArmHistory(leader), ArmHistory(challenger), 0.0) is expected
    # the studentized windows by hand: m = 2.4167, challenger t = (1.5 - m) / 0.5
    m = sum(leader) / 6
    lhs = (1.5 - m) / 0.5
    rhs = [(oracles.mean(w) - m) / oracles.sd(w) for w in oracles.windows(leader, 3)]
    assert expected is any(lhs >= r for r in rhs)


def test_sstc_single_observation_challenger_always_wins():
    leader = ArmHistory([10.0] * 30)
    assert sstc_challenge(leader, ArmHistory([-10.0]), 0.0) is True


def test_sstc_zero_variance_conventions():
    # challenger constant below m, some leader window constant below m: -inf >= -inf
    leader = ArmHistory([0.0, 0.0, 5.0, 5.0, 5.0, 5.0])
    assert sstc_challenge(leader, ArmHistory([1.0, 1.0]), 0.0) is True
    # constant challenger below m, every leader window dispersed: -inf never wins
    leader = ArmHistory([0.0, 6.0, 0.0, 6.0, 0.0, 6.0])
    assert sstc_challenge(leader, ArmHistory([1.0, 1.0]), 0.0) is False
    # dispersed challenger vs a constant window above m: +inf on the right
    # m = 7.5; windows (9,9) give +inf, (9,0) gives -0.47, challenger -9.9
    leader = ArmHistory([9.0, 9.0, 9.0, 9.0, 9.0, 0.0])
    assert oracles.challenge("SSTC", list(leader.rewards), [0.0, 1.0], 0.0) is False
    assert sstc_challenge(leader, ArmHistory([0.0, 1.0]), 0.0) is False


# --- SSMC* ------------------------------------------------------------------------


def test_ssmc_star_examples():
    assert ssmc_star_challenge(ArmHistory([5, 1, 1, 5]), ArmHistory([1.0, 1.0]), 0.0) is False
    assert ssmc_star_challenge(ArmHistory([1, 5, 5, 5]), ArmHistory([2.0, 2.0]), 0.0) is False
    assert ssmc_challenge(ArmHistory([5, 1, 1, 5]), ArmHistory([1.0, 1.0]), 0.0) is True


def test_ssmc_star_ignores_trailing_partial_block():
    # blocks of 2 over 5 rewards: (4,4), (4,4); the trailing 0 is never compared
    assert ssmc_star_challenge(ArmHistory([4, 4, 4, 4, 0]), ArmHistory([1.0, 1.0]), 0.0) is False


# --- cache versus brute force ---------------------------------------------------------


kinds = st.sampled_from(["normal", "bernoulli", "ties"])


@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.data(), kinds, st.sampled_from(list(CHALLENGES)))
def test_challenge_equals_brute_force(seed, n_l, data, kind, variant):
    n_k = data.draw(st.integers(1, n_l))
    c_n = data.draw(st.sampled_from([0.0, 1.5, 2.5]))
    leader, challenger = oracles.windowed_leader_rewards(np.random.default_rng(seed), n_l, n_k, kind)
    got = CHALLENGES[variant](ArmHistory(leader), ArmHistory(challenger), c_n)
    assert got is oracles.challenge(variant, leader, challenger, c_n)


@pytest.mark.parametrize("variant,policy", [("SSMC", SSMC), ("SSTC", SSTC), ("SSMC*", SSMCStar)])
@pytest.mark.parametrize("kind", ["normal", "bernoulli", "ties"])
def test_cached_runs_equal_brute_force_runs(variant, policy, kind):
    K, N = 3, 300
    for rep in range(3):
        g = np.random.default_rng(rep)
        if kind == "normal":
            rewards = g.normal([[0.3], [0.0], [0.2]], [[1.0], [0.5], [2.0]], (K, N))
        elif kind == "bernoulli":
            rewards = (g.random((K, N)) < [[0.6], [0.5], [0.55]]).astype(float)
        else:
            rewards = g.integers(0, 3, (K, N)).astype(float)
        a = run_counts(policy(), rewards, N, stream(1, rep, "p"))
        b = run_counts_python(oracles.BruteSubsample(variant), rewards, N, stream(1, rep, "p"))
        assert a.tolist() == b.tolist()


# --- round behaviour ------------------------------------------------------------------


def _policy_on(bank, policy):
    policy.reset(bank.n_arms, None, np.random.default_rng(0))
    return policy


def test_round_identical_equal_histories_samples_leader():
    bank = HistoryBank.from_rewards([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]], capacity=10)
    p = _policy_on(bank, SSMC())
    d = ssmc_round(p, bank)
    assert d.arms == (p.leader_,)


def test_round_both_small_challengers_sampled():
    bank = HistoryBank.from_rewards([[0.0] * 40, [5.0], [5.0, 5.0]], capacity=50)
    p = _policy_on(bank, SSMC())
    assert ssmc_round(p, bank).arms == (1, 2)
    assert p.leader_ == 0


@pytest.mark.parametrize("policy", [SSMC, SSTC, SSMCStar])
def test_round_count_bound_and_equal_count_rule(policy):
    g = np.random.default_rng(3)
    for K in (2, 3, 5):
        rewards = g.normal(0, 1, (K, 400)) + np.linspace(0, 0.5, K)[:, None]
        p = policy().reset(K, None, np.random.default_rng(K))
        bank = HistoryBank(K, 400)
        for k in range(K):
            bank.record(k, rewards[k, 0])
        r = 2
        while bank.total < 300:
            n = bank.total
            assert K + (r - 2) <= n <= K + (K - 1) * (r - 2)
            counts = bank.counts.copy()
            d = p.select(bank)
            z = p.leader_
            assert counts[z] == counts.max()
            for k in d:
                assert k == z or counts[k] < counts[z]
            for k in d:
                bank.record(k, rewards[k, bank.counts[k]])
            r += 1


@pytest.mark.parametrize("policy,per_round", [(SSMC, 1), (SSTC, 1), (SSMCStar, 1)])
def test_amortized_window_evaluations(policy, per_round):
    g = np.random.default_rng(0)
    K, W = 4, 300
    bank = HistoryBank(K, 1000)
    for v in g.normal(1.0, 0.1, 200):
        bank.record(0, v)
    for k in range(1, K):
        for v in g.normal(0.0, 0.1, 12):
            bank.record(k, v)
    p = policy().reset(K, None, np.random.default_rng(0))
    assert p.select(bank).arms == (0,)
    start = p.window_evaluations_
    for _ in range(W):
        bank.record(0, g.normal(1.0, 0.1))
        assert p.select(bank).arms == (0,)
    assert p.window_evaluations_ - start <= (K - 1) * W * per_round


def test_leader_change_rebuilds_caches():
    bank = HistoryBank.from_rewards([[0.0] * 10, [1.0] * 9], capacity=30)
    p = _policy_on(bank, SSMC())
    p.select(bank)
    assert p.leader_ == 0
    bank.record(1, 1.0)
    bank.record(1, 1.0)
    d = p.select(bank)
    assert p.leader_ == 1 and d.arms == (1,)


# --- affine invariance -------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(3, 30), st.data(),
       st.floats(0.01, 100), st.floats(-100, 100), st.sampled_from(list(CHALLENGES)))
def test_challenges_affine_invariant(seed, n_l, data, a, b, variant):
    n_k = data.draw(st.integers(2, n_l))
    g = np.random.default_rng(seed)
    leader, challenger = g.normal(0, 1, n_l), g.normal(0, 1, n_k)
    fn = CHALLENGES[variant]
    base = fn(ArmHistory(leader), ArmHistory(challenger), 0.0)
    # skip states within rounding distance of a tie
    lw = [np.mean(leader[t:t + n_k]) for t in range(n_l - n_k + 1)]
    assume(min(abs(np.mean(challenger) - w) for w in lw) > 1e-9)
    assume(abs(np.mean(challenger) - np.mean(leader)) > 1e-9)
    assert fn(ArmHistory(a * leader + b), ArmHistory(a * challenger + b), 0.0) is base


@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.data(), st.floats(0.01, 100), st.floats(-100, 100))
def test_besa_and_leader_affine_invariant(seed, n_s, data, a, b):
    n_b = data.draw(st.integers(n_s, 15))
    g = np.random.default_rng(seed)
    big, small = g.normal(0, 1, n_b), g.normal(0, 1, n_s)
    w1 = besa_duel(ArmHistory(big), ArmHistory(small), np.random.default_rng(seed))
    w2 = besa_duel(ArmHistory(a * big + b), ArmHistory(a * small + b), np.random.default_rng(seed))
    assert (w1.count == n_s and n_s != n_b) == (w2.count == n_s and n_s != n_b)
    assert np.allclose(a * w1.rewards + b, w2.rewards)
    counts = g.integers(1, 4, 5)
    means = g.normal(0, 1, 5)
    assert select_leader(counts, means, rng=np.random.default_rng(seed)) == \
        select_leader(counts, a * means + b, rng=np.random.default_rng(seed))


# --- BESA ---------------------------------------------------------------------------------


def test_besa_equal_counts_tie_goes_to_challenger():
    small, big = ArmHistory([1.0, 2.0]), ArmHistory([2.0, 1.0])
    assert besa_duel(big, small, np.random.default_rng(0)) is small
    assert besa_duel(ArmHistory([1.0, 2.01]), small, np.random.default_rng(0)).rewards[1] == 2.01


def test_besa_dominance():
    small, big = ArmHistory([1.0] * 3), ArmHistory([0.0] * 9)
    assert all(besa_duel(big, small, np.random.default_rng(s)) is small for s in range(50))


def test_besa_subsample_probability_half():
    big, small = ArmHistory([0.0, 1.0]), ArmHistory([0.4])
    wins = sum(besa_duel(big, small, np.random.default_rng(s)) is small for s in range(4000))
    assert abs(wins / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000)


def test_besa_subsample_is_without_replacement():
    # larger = [0, 0, 1, 1], subsample of 2; smaller mean 0.5 wins unless both 1s drawn (p = 1/6)
    big, small = ArmHistory([0.0, 0.0, 1.0, 1.0]), ArmHistory([0.4, 0.6])
    wins = sum(besa_duel(big, small, np.random.default_rng(s)) is small for s in range(6000))
    assert abs(wins / 6000 - 5 / 6) < 4 * math.sqrt(5 / 36 / 6000)


def test_besa_round_dominant_arm_and_reproducibility():
    g = np.random.default_rng(1)
    rows = [g.random(6), g.random(4) + 5.0, g.random(5), g.random(3)]
    bank = HistoryBank.from_rewards(rows, capacity=10)
    assert all(besa_round(bank, np.random.default_rng(s)).arms == (1,) for s in range(30))
    bank3 = HistoryBank.from_rewards(rows[:3], capacity=10)
    a = [besa_round(bank3, np.random.default_rng(s)).arms for s in range(20)]
    b = [besa_round(bank3, np.random.default_rng(s)).arms for s in range(20)]
    assert a == b


def test_besa_two_arms_is_a_single_duel():
    bank = HistoryBank.from_rewards([[0.0, 1.0], [0.4]], capacity=4)
    for s in range(20):
        d = besa_round(bank, np.random.default_rng(s))
        w = besa_duel(bank[0], bank[1], np.random.default_rng(s))
        assert d.arms == ((1,) if w.count == 1 else (0,))


def test_besa_rejects_bad_warm_start():
    with pytest.raises(ValueError):
        BESA(initial_pulls=0).reset(2)
