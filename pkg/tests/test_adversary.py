import numpy as np
import pytest

import qotm.protocol
from qotm import adversary
from qotm.adversary import (
    AttackStats,
    bounded_key_attack,
    breidbart_attack,
    breidbart_rate,
    exhaust_attack_n1,
    make_toy_ma,
    naive_reuse_attack,
    naive_reuse_rate,
    rewind_attack,
)
from qotm.protocol import make_rng

TRIALS = 30000


def within_sigma(stats: AttackStats, target: float, sigmas: float = 3.0) -> bool:
    return abs(stats.rate - target) <= sigmas * max(stats.stderr, 1e-9)


def test_attack_stats_fields():
    s = AttackStats(1000, 250)
    assert s.rate == 0.25
    assert abs(s.stderr - np.sqrt(0.25 * 0.75 / 1000)) < 1e-12
    with pytest.raises(ValueError):
        AttackStats(10, 11)


@pytest.mark.parametrize("n,expected", [(1, 0.75), (2, 0.5625), (8, 0.75**8)])
def test_naive_reuse_rates(n, expected):
    stats = naive_reuse_attack(n, 0, 1, TRIALS, make_rng(100 + n))
    assert within_sigma(stats, expected)


def test_naive_reuse_rejects_n_zero():
    with pytest.raises(ValueError):
        naive_reuse_attack(0, 0, 1, 10, make_rng(0))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_breidbart_rates(n):
    stats = breidbart_attack(n, 0, 1, TRIALS, make_rng(200 + n))
    assert within_sigma(stats, breidbart_rate(n))


def test_breidbart_analytic_values():
    assert abs(breidbart_rate(1) - 0.85355339) < 1e-8
    assert abs(breidbart_rate(2) - 0.72855339) < 1e-8
    assert abs(breidbart_rate(4) - 0.53079004) < 1e-8


def test_exhaust_n1_always_succeeds():
    for s0, s1 in [(0, 1), (1, 1)]:
        stats = exhaust_attack_n1(s0, s1, 2000, make_rng(7))
        assert stats.rate == 1.0


def test_exhaust_n1_uses_three_queries_per_trial(monkeypatch):
    calls = {"n": 0}
    orig = qotm.protocol.token_response

    def counting(tok, q):
        calls["n"] += 1
        return orig(tok, q)

    monkeypatch.setattr(adversary.protocol, "token_response", counting)
    trials = 137
    exhaust_attack_n1(0, 1, trials, make_rng(8))
    assert calls["n"] == 3 * trials


def test_no_two_query_attack_beats_the_optimum_at_n1():
    # solved two-query cheating probability at one key qubit
    optimum = (1 + 2**-0.5) / 2
    for fn, seed in [(naive_reuse_attack, 31), (breidbart_attack, 32)]:
        stats = fn(1, 0, 1, TRIALS, make_rng(seed))
        assert stats.rate <= optimum + 3 * stats.stderr


def test_make_toy_ma_structure():
    rng = make_rng(9)
    inst = make_toy_ma(3, 4, 2, 0, 1, rng)
    assert inst.delta0 == 4 and inst.delta1 == 2
    np.testing.assert_allclose(inst.u1 @ inst.u1.T.conj(), np.eye(8), atol=1e-10)
    counts = np.bincount(inst.f, minlength=3)
    assert counts[0] == 4 and counts[1] == 2 and counts[2] == 2
    for y in inst.k0:
        assert abs(abs(inst.psi[y]) ** 2 - 1 / 4) < 1e-12
    # honest extraction of either bit succeeds with certainty
    for u, keys in [(inst.u0, inst.k0), (inst.u1, inst.k1)]:
        out = u @ inst.psi
        support = np.flatnonzero(np.abs(out) > 1e-12)
        assert set(support).issubset(set(keys))
        assert abs(np.linalg.norm(out) - 1) < 1e-12


def test_make_toy_ma_single_key_supports():
    inst = make_toy_ma(2, 1, 1, 1, 0, make_rng(10))
    out0 = inst.u0 @ inst.psi
    out1 = inst.u1 @ inst.psi
    assert abs(abs(out0[inst.k0[0]]) - 1) < 1e-12
    assert abs(abs(out1[inst.k1[0]]) - 1) < 1e-12


def test_make_toy_ma_infeasible_sizes():
    with pytest.raises(ValueError):
        make_toy_ma(2, 3, 2, 0, 1, make_rng(0))
    with pytest.raises(ValueError):
        make_toy_ma(1, 0, 1, 0, 1, make_rng(0))


def test_bounded_key_attack_exact_when_delta_one():
    inst = make_toy_ma(2, 1, 1, 0, 1, make_rng(11))
    stats = bounded_key_attack(inst, 2000, make_rng(12))
    assert stats.rate == 1.0


@pytest.mark.parametrize("n,d", [(3, 2), (4, 4)])
def test_bounded_key_attack_beats_inverse_delta_squared(n, d):
    inst = make_toy_ma(n, d, d, 0, 1, make_rng(40 + n))
    stats = bounded_key_attack(inst, TRIALS, make_rng(50 + n))
    assert stats.rate >= 1 / d**2 - 3 * stats.stderr


def test_rewind_attack_is_deterministic_and_restores_state():
    rng = make_rng(77)
    for i in range(100):
        s0, s1 = int(rng.integers(2)), int(rng.integers(2))
        inst = make_toy_ma(3, 2, 2, s0, s1, rng)
        got0, got1, fidelity = rewind_attack(inst, rng)
        assert (got0, got1) == (s0, s1)
        assert fidelity > 1 - 1e-10


def test_rewind_attack_zero_bits():
    inst = make_toy_ma(2, 2, 2, 0, 0, make_rng(78))
    got0, got1, fidelity = rewind_attack(inst, make_rng(79))
    assert (got0, got1) == (0, 0) and fidelity > 1 - 1e-10


def test_oracle_is_self_inverse():
    inst = make_toy_ma(2, 1, 1, 0, 1, make_rng(80))
    oracle = adversary.ReversibleOtmOracle(inst.f)
    rng = np.random.default_rng(0)
    state = rng.standard_normal(4 * 4)
    state /= np.linalg.norm(state)
    twice = oracle.apply(oracle.apply(state, 2, ans_width=2), 2, ans_width=2)
    np.testing.assert_allclose(twice, state, atol=1e-12)
