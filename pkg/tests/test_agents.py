import copy
import json
import math

import numpy as np
import pytest

from adaptivecs.agents import (
    AcOselmAgent,
    OsQNetAgent,
    ReplayBuffer,
    exp_schedule,
)
from adaptivecs.elm import OselmRegressor
from adaptivecs.numerics import make_rng

STATE = np.full(4, 0.5)


def rng_state(agent):
    return json.dumps(agent._rng.bit_generator.state, sort_keys=True)


# --------------------------------------------------------------- schedules


def test_exp_schedule_values():
    assert exp_schedule(0, 1.0, 0.01, 2000.0) == 1.0
    assert abs(exp_schedule(2000, 1.0, 0.01, 2000.0) - math.exp(-1)) < 1e-12
    assert exp_schedule(10**7, 1.0, 0.01, 2000.0) == 0.01
    assert exp_schedule(0, 0.3, 0.01, 500.0) == 0.3


def test_replay_buffer_roundtrip():
    buf = ReplayBuffer()
    buf.add([1.0, 2.0], 0.5, 0.9)
    buf.add([3.0, 4.0], [0.7], 0.1, next_state=[5.0, 6.0])
    assert len(buf) == 2
    s, a, r, nxt = buf.items()[0]
    assert a.shape == (1,)
    assert nxt is None
    assert buf.items()[1][3] is not None
    buf.clear()
    assert len(buf) == 0


# ------------------------------------------------------------------- qnet


def test_default_action_grid():
    ag = OsQNetAgent()
    assert np.allclose(ag.actions_, np.arange(0.1, 1.01, 0.1))


def test_action_grid_sorted_and_validated():
    ag = OsQNetAgent(actions=[0.9, 0.1, 0.5])
    assert np.array_equal(ag.actions_, [0.1, 0.5, 0.9])
    with pytest.raises(ValueError):
        OsQNetAgent(actions=[])
    with pytest.raises(ValueError):
        OsQNetAgent(actions=[0.2, 0.2, 0.4])
    with pytest.raises(ValueError):
        OsQNetAgent(actions=[0.0, 0.5])
    with pytest.raises(ValueError):
        OsQNetAgent(actions=[0.5, 1.1])


def test_untrained_qnet_still_scores():
    ag = OsQNetAgent(hidden_dim=30, random_state=0)
    ag.init_params(4)
    q = ag.q_values(STATE)
    assert q.shape == (10,)
    assert np.isfinite(q).all()


def test_greedy_tie_breaks_to_lowest_ratio():
    ag = OsQNetAgent(hidden_dim=20, random_state=0)
    ag.init_params(4)
    ag.qnet_.beta_ = np.zeros_like(ag.qnet_.beta_)  # all Q identical
    assert ag.greedy_action(STATE) == 0.1
    assert ag.select(STATE, explore=False) == 0.1


def test_select_without_explore_spends_no_randomness():
    ag = OsQNetAgent(hidden_dim=20, random_state=3)
    ag.init_params(4)
    before = rng_state(ag)
    for _ in range(5):
        ag.select(STATE, explore=False)
        ag.predict(STATE[None, :])
    assert rng_state(ag) == before
    ag.select(STATE, explore=True)  # t=0 -> epsilon=1, draws for sure
    assert rng_state(ag) != before


def test_full_exploration_covers_grid():
    ag = OsQNetAgent(hidden_dim=20, random_state=1, explore_start=1.0,
                     explore_decay=1e12)
    ag.init_params(4)
    seen = {ag.select(STATE) for _ in range(600)}
    assert seen == set(np.round(np.arange(0.1, 1.01, 0.1), 10))


def test_epsilon_anneals_with_observations():
    ag = OsQNetAgent(hidden_dim=20, random_state=0, explore_decay=50.0)
    ag.init_params(4)
    e0 = ag.exploration_scale()
    for _ in range(100):
        ag.observe(STATE, 0.5, 1.0)
    assert ag.t_ == 100
    assert ag.exploration_scale() == pytest.approx(math.exp(-2.0))
    assert ag.exploration_scale() < e0


def test_update_fires_every_period_and_clears_buffer():
    ag = OsQNetAgent(hidden_dim=15, update_period=4, random_state=0)
    for i in range(3):
        ag.observe(STATE, 0.5, 0.1 * i)
    assert len(ag.buffer_) == 3
    assert ag.n_updates_ == 0
    ag.observe(STATE, 0.6, 0.3)
    assert len(ag.buffer_) == 0
    assert ag.n_updates_ == 1
    for i in range(4):
        ag.observe(STATE, 0.5, 0.0)
    assert ag.n_updates_ == 2


def test_first_update_solves_ridge_on_buffered_rows():
    period = 6
    ag = OsQNetAgent(hidden_dim=12, ridge=1e-3, update_period=period,
                     random_state=5)
    rng = make_rng(8)
    rows, targets = [], []
    for i in range(period):
        s = rng.uniform(size=4)
        a = float(ag.actions_[i % 10])
        r = float(rng.uniform())
        if i == 0:
            ag.init_params(4)
        rows.append(np.concatenate([s, [a]]))
        targets.append(r)
        ag.observe(s, a, r)
    H = ag.qnet_.hidden(np.vstack(rows))
    oracle = np.linalg.solve(H.T @ H + 1e-3 * np.eye(12),
                             H.T @ np.asarray(targets)[:, None])
    assert np.allclose(ag.qnet_.beta_, oracle, atol=1e-10)


def test_bootstrap_target_stored_at_observe_time():
    ag = OsQNetAgent(hidden_dim=20, gamma=0.5, update_period=100,
                     random_state=2)
    ag.init_params(4)
    s_next = np.full(4, 0.25)
    expected = 0.7 + 0.5 * float(np.max(ag.q_values(s_next)))
    ag.observe(STATE, 0.4, 0.7, next_state=s_next)
    assert ag.buffer_.items()[0][2] == pytest.approx(expected, abs=1e-12)


def test_gamma_zero_ignores_next_state():
    ag = OsQNetAgent(hidden_dim=20, gamma=0.0, update_period=100,
                     random_state=2)
    ag.observe(STATE, 0.4, 0.7, next_state=np.full(4, 0.25))
    assert ag.buffer_.items()[0][2] == 0.7


def test_state_dim_mismatch_rejected():
    ag = OsQNetAgent(hidden_dim=10, random_state=0)
    ag.init_params(4)
    with pytest.raises(ValueError):
        ag.q_value(np.ones(5), 0.5)
    with pytest.raises(ValueError):
        ag.observe(np.ones(5), 0.5, 0.0)


def test_qnet_learns_reward_ranking_on_bandit():
    # score-shaped bandit: cubic ratio penalty plus an error cliff below 0.5
    def reward(a):
        return 1.0 - a**3 - 1.5 * max(0.0, 0.5 - a) * 0.8

    grid = np.round(np.arange(0.1, 1.01, 0.1), 10)
    uniform_mean = np.mean([reward(a) for a in grid])
    corr_ok = beat_ok = 0
    for seed in range(10):
        ag = OsQNetAgent(hidden_dim=80, ridge=1e-2, random_state=seed,
                         explore_decay=200.0)
        for _ in range(600):
            a = ag.select(STATE)
            ag.observe(STATE, a, reward(a))
        q = ag.q_values(STATE)
        r = np.array([reward(a) for a in grid])
        corr_ok += np.corrcoef(q, r)[0, 1] > 0.5
        beat_ok += reward(ag.greedy_action(STATE)) > uniform_mean
    assert corr_ok >= 8
    assert beat_ok >= 8


def test_qnet_checkpoint_roundtrip_continues_identically():
    ag = OsQNetAgent(hidden_dim=12, update_period=5, random_state=9)
    rng = make_rng(3)
    transitions = [(rng.uniform(size=4), float(ag.actions_[int(rng.integers(10))]),
                    float(rng.uniform())) for _ in range(15)]
    for s, a, r in transitions[:10]:
        ag.observe(s, a, r)
    clone = OsQNetAgent.from_checkpoint(ag.to_checkpoint())
    assert clone.t_ == ag.t_
    batch = np.vstack([s for s, _, _ in transitions])
    assert np.array_equal(clone.predict(batch), ag.predict(batch))
    for s, a, r in transitions[10:]:
        ag.observe(s, a, r)
        clone.observe(s, a, r)
    assert np.allclose(clone.qnet_.beta_, ag.qnet_.beta_, atol=1e-15)


def test_qnet_checkpoint_requires_init():
    with pytest.raises(ValueError):
        OsQNetAgent().to_checkpoint()
    with pytest.raises(ValueError):
        OsQNetAgent.from_checkpoint({"kind": "ac_agent"})


# ------------------------------------------------------------ actor-critic


def test_actor_output_in_unit_interval():
    ag = AcOselmAgent(hidden_dim=20, actor_hidden_dim=15, random_state=0)
    ag.init_params(6)
    for seed in range(20):
        s = make_rng(seed).uniform(size=6)
        mu = ag.actor_forward(s)
        assert mu.shape == (1,)
        assert 0.0 < mu[0] < 1.0


def test_select_clamps_to_action_bounds():
    ag = AcOselmAgent(hidden_dim=20, actor_hidden_dim=15, random_state=1,
                      explore_start=50.0, explore_decay=1e12)
    ag.init_params(4)
    actions = [ag.select(STATE) for _ in range(200)]
    assert min(actions) >= 0.01
    assert max(actions) <= 1.0
    assert min(actions) == 0.01  # huge noise pins some draws at the bounds
    assert max(actions) == 1.0


def test_ac_select_without_explore_spends_no_randomness():
    ag = AcOselmAgent(hidden_dim=20, actor_hidden_dim=15, random_state=4)
    ag.init_params(4)
    before = rng_state(ag)
    a1 = ag.select(STATE, explore=False)
    a2 = ag.select(STATE, explore=False)
    ag.predict(STATE[None, :])
    assert rng_state(ag) == before
    assert a1 == a2 == float(ag._clip_action(ag.actor_forward(STATE))[0])


def test_exploration_noise_perturbs_action():
    ag = AcOselmAgent(hidden_dim=20, actor_hidden_dim=15, random_state=4)
    ag.init_params(4)
    greedy = ag.select(STATE, explore=False)
    noisy = [ag.select(STATE) for _ in range(20)]
    assert any(abs(a - greedy) > 1e-6 for a in noisy)


def test_dpg_gradient_matches_finite_differences():
    # central differences on Q(s, mu(s)) as a function of each actor output
    # weight, everything else frozen
    worst = 0.0
    for seed in range(20):
        rng = make_rng(seed)
        d = int(rng.integers(2, 11))
        ag = AcOselmAgent(hidden_dim=int(rng.integers(5, 21)),
                          actor_hidden_dim=int(rng.integers(5, 21)),
                          action_dim=int(rng.integers(1, 4)),
                          random_state=seed)
        ag.init_params(d)
        # spread critic weights so the gradient is not vanishingly small
        ag.critic_.beta_ = rng.standard_normal(ag.critic_.beta_.shape)
        s = rng.uniform(-1.0, 1.0, size=d)
        grad = ag.dpg_gradient(s)

        def q_of_beta(beta):
            ag.actor_beta_ = beta
            return ag.critic_forward(s, ag.actor_forward(s))

        base = ag.actor_beta_.copy()
        fd = np.zeros_like(base)
        h = 1e-5
        for i in range(base.shape[0]):
            for j in range(base.shape[1]):
                up, dn = base.copy(), base.copy()
                up[i, j] += h
                dn[i, j] -= h
                fd[i, j] = (q_of_beta(up) - q_of_beta(dn)) / (2 * h)
        ag.actor_beta_ = base
        denom = max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, np.linalg.norm(grad - fd) / denom)
    assert worst < 1e-6


def test_update_order_critic_then_actor_step():
    # replay the tenth observation by hand: the critic fits the buffered
    # rows first, then the actor weights move by lr times the mean gradient
    # evaluated under the updated critic
    period = 10
    ag = AcOselmAgent(hidden_dim=15, actor_hidden_dim=12, actor_lr=0.05,
                      update_period=period, random_state=7)
    rng = make_rng(1)
    fed = []
    for i in range(period - 1):
        s = rng.uniform(size=4)
        a = ag.select(s)
        ag.observe(s, a, float(rng.uniform()))
        fed.append((s, a, ag.buffer_.items()[-1][2]))
    s_last = rng.uniform(size=4)
    a_last = ag.select(s_last)
    r_last = float(rng.uniform())

    snap = AcOselmAgent.from_checkpoint(ag.to_checkpoint())
    rows = [np.concatenate([s, [a]]) for s, a, _ in fed]
    rows.append(np.concatenate([s_last, [a_last]]))
    y = np.array([t for _, _, t in fed] + [r_last])
    snap.critic_.fit(np.vstack(rows), y)  # first update = initialization
    grads = np.mean(
        [snap.dpg_gradient(r[:4]) for r in rows], axis=0)
    expected_beta = snap.actor_beta_ + 0.05 * grads

    ag.observe(s_last, a_last, r_last)
    assert ag.n_updates_ == 1
    assert np.allclose(ag.critic_.beta_, snap.critic_.beta_, atol=1e-12)
    assert np.allclose(ag.actor_beta_, expected_beta, atol=1e-12)


def test_ac_bootstrap_uses_policy_action_value():
    ag = AcOselmAgent(hidden_dim=20, actor_hidden_dim=15, gamma=0.9,
                      update_period=100, random_state=3)
    ag.init_params(4)
    s_next = np.full(4, 0.1)
    expected = 0.2 + 0.9 * ag.critic_forward(s_next, ag.actor_forward(s_next))
    ag.observe(STATE, 0.5, 0.2, next_state=s_next)
    assert ag.buffer_.items()[0][2] == pytest.approx(expected, abs=1e-12)


def test_ac_descends_toward_displaced_optimum():
    # cliff at 0.3 puts the optimum well below the initial policy output
    def reward(a):
        return 1.0 - a**3 - 1.5 * max(0.0, 0.3 - a) * 0.8

    improved = 0
    for seed in range(10):
        ag = AcOselmAgent(hidden_dim=80, actor_hidden_dim=40, ridge=1e-2,
                          random_state=seed, explore_decay=200.0)
        ag.init_params(4)
        mu0 = float(ag.actor_forward(STATE)[0])
        for _ in range(600):
            a = ag.select(STATE)
            ag.observe(STATE, a, reward(a))
        mu = float(ag.actor_forward(STATE)[0])
        improved += reward(mu) > reward(mu0) + 0.02
    assert improved >= 8


def test_ac_checkpoint_roundtrip_continues_identically():
    ag = AcOselmAgent(hidden_dim=12, actor_hidden_dim=10, update_period=5,
                      random_state=6)
    rng = make_rng(2)
    for _ in range(10):
        s = rng.uniform(size=4)
        ag.observe(s, ag.select(s), float(rng.uniform()))
    clone = AcOselmAgent.from_checkpoint(ag.to_checkpoint())
    batch = rng.uniform(size=(8, 4))
    assert np.array_equal(clone.predict(batch), ag.predict(batch))
    for _ in range(5):
        s = rng.uniform(size=4)
        a = float(ag.actor_forward(s)[0])
        ag.observe(s, a, 0.5)
        clone.observe(s, a, 0.5)
    assert np.allclose(clone.actor_beta_, ag.actor_beta_, atol=1e-15)
    assert np.allclose(clone.critic_.beta_, ag.critic_.beta_, atol=1e-15)


def test_ac_checkpoint_requires_init():
    with pytest.raises(ValueError):
        AcOselmAgent().to_checkpoint()
    with pytest.raises(ValueError):
        AcOselmAgent.from_checkpoint({"kind": "qnet_agent"})


def test_multidimensional_action_agent():
    ag = AcOselmAgent(hidden_dim=15, actor_hidden_dim=10, action_dim=3,
                      update_period=4, random_state=0)
    ag.init_params(5)
    s = np.linspace(0, 1, 5)
    a = ag.select(s)
    assert a.shape == (3,)
    out = ag.predict(np.vstack([s, s]))
    assert out.shape == (2, 3)
    for _ in range(4):
        ag.observe(s, ag.select(s), 0.3)
    assert ag.n_updates_ == 1
