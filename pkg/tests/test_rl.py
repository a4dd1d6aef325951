import numpy as np
import pytest

from netsiege.errors import ContractViolation, TrainingAborted
from netsiege.rl import (
    MLP,
    AdamState,
    Batch,
    MLPArch,
    PolicyParams,
    PPOAgent,
    RLConfig,
    RolloutBuffer,
    adam_step,
    buffer_batch,
    forward,
    gae_advantages,
    masked_log_softmax,
    ppo_loss,
    ppo_update,
    select_action,
)


def tiny_policy(obs_dim=4, action_dim=3, hidden=(5,), seed=0) -> PolicyParams:
    rng = np.random.default_rng(seed)
    return PolicyParams.init(obs_dim, action_dim, hidden, rng)


def random_batch(params: PolicyParams, batch_size=12, seed=1, ratio_shift=0.0) -> Batch:
    """Batch whose behavior log-probs come from the given params, optionally
    shifted so the ratios differ from one."""
    rng = np.random.default_rng(seed)
    obs_dim = params.actor.arch.input_dim
    action_dim = params.actor.arch.output_dim
    obs = rng.normal(size=(batch_size, obs_dim))
    masks = np.ones((batch_size, action_dim), dtype=bool)
    for i in range(batch_size):
        off = rng.integers(action_dim)
        if masks[i].sum() > 1:
            masks[i, off] = False
    logits, _ = params.actor.forward(obs)
    logp, probs = masked_log_softmax(logits, masks)
    actions = np.array(
        [np.flatnonzero(masks[i])[rng.integers(masks[i].sum())] for i in range(batch_size)]
    )
    logp_old = logp[np.arange(batch_size), actions] - ratio_shift
    return Batch(
        observations=obs,
        masks=masks,
        actions=actions,
        log_probs_old=logp_old,
        advantages=rng.normal(size=batch_size),
        returns=rng.normal(size=batch_size),
    )


class TestForward:
    def test_zero_weights_give_uniform_distribution_over_valid(self):
        params = tiny_policy(action_dim=5)
        for w in params.actor.weights:
            w[...] = 0.0
        mask = np.array([True, True, False, True, False])
        probs, _ = forward(params, np.ones(4), mask)
        assert probs[2] == 0.0 and probs[4] == 0.0
        np.testing.assert_allclose(probs[mask], 1 / 3, atol=1e-12)

    def test_single_valid_action_gets_probability_one(self):
        params = tiny_policy()
        mask = np.array([False, True, False])
        probs, _ = forward(params, np.zeros(4), mask)
        assert probs[1] == 1.0

    def test_against_hand_computed_matrix_oracle(self):
        arch_a = MLPArch(input_dim=2, hidden=(3,), output_dim=2)
        w1 = np.array([[0.1, -0.2, 0.3], [0.4, 0.5, -0.6]])
        b1 = np.array([0.01, -0.02, 0.03])
        w2 = np.array([[1.0, -1.0], [0.5, 0.25], [-0.75, 0.1]])
        b2 = np.array([0.2, -0.1])
        actor = MLP(arch_a, [w1.copy(), w2.copy()], [b1.copy(), b2.copy()])
        critic = MLP(
            MLPArch(input_dim=2, hidden=(3,), output_dim=1),
            [w1.copy(), np.array([[0.3], [-0.2], [0.9]])],
            [b1.copy(), np.array([0.05])],
        )
        params = PolicyParams(actor=actor, critic=critic)
        x = np.array([0.7, -1.3])

        h = np.tanh(x @ w1 + b1)
        logits = h @ w2 + b2
        expected_probs = np.exp(logits) / np.exp(logits).sum()
        expected_value = float(h @ np.array([0.3, -0.2, 0.9]) + 0.05)

        probs, value = forward(params, x, np.ones(2, dtype=bool))
        np.testing.assert_allclose(probs, expected_probs, atol=1e-9)
        assert value == pytest.approx(expected_value, abs=1e-9)

    def test_width_mismatch_rejected(self):
        params = tiny_policy(obs_dim=4)
        with pytest.raises(ContractViolation):
            forward(params, np.zeros(5), np.ones(3, dtype=bool))

    def test_all_invalid_mask_rejected(self):
        params = tiny_policy()
        with pytest.raises(ContractViolation):
            forward(params, np.zeros(4), np.zeros(3, dtype=bool))


class TestGAE:
    @staticmethod
    def brute_force(rewards, values, dones, gamma, lam, bootstrap=0.0):
        """Independent double-loop discounted sum of TD residuals."""
        T = len(rewards)
        deltas = np.zeros(T)
        for t in range(T):
            next_v = bootstrap if t == T - 1 else values[t + 1]
            deltas[t] = rewards[t] + gamma * next_v * (1 - dones[t]) - values[t]
        adv = np.zeros(T)
        for t in range(T):
            acc = 0.0
            coef = 1.0
            for k in range(t, T):
                acc += coef * deltas[k]
                if dones[k]:
                    break
                coef *= gamma * lam
            adv[t] = acc
        return adv, adv + values

    def test_gamma_zero_collapses_to_td_error(self):
        r = np.array([1.0, 2.0, 3.0])
        v = np.array([0.5, 0.25, 0.1])
        d = np.array([0.0, 0.0, 1.0])
        adv, _ = gae_advantages(r, v, d, gamma=0.0, lam=0.9)
        np.testing.assert_allclose(adv, r - v, atol=1e-12)

    def test_single_step_episode(self):
        adv, ret = gae_advantages([2.0], [0.7], [1.0], 0.99, 0.95)
        assert adv[0] == pytest.approx(2.0 - 0.7)
        assert ret[0] == pytest.approx(2.0)

    def test_matches_brute_force_on_random_traces(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            T = int(rng.integers(1, 40))
            r = rng.normal(size=T)
            v = rng.normal(size=T)
            d = (rng.random(T) < 0.15).astype(float)
            d[-1] = 1.0
            adv, ret = gae_advantages(r, v, d, 0.99, 0.95)
            adv_bf, ret_bf = self.brute_force(r, v, d, 0.99, 0.95)
            np.testing.assert_allclose(adv, adv_bf, atol=1e-10)
            np.testing.assert_allclose(ret, ret_bf, atol=1e-10)

    def test_bootstrap_value_enters_last_delta(self):
        adv, _ = gae_advantages([1.0], [0.0], [0.0], gamma=0.5, lam=0.9, bootstrap_value=2.0)
        assert adv[0] == pytest.approx(1.0 + 0.5 * 2.0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ContractViolation):
            gae_advantages([1.0, 2.0], [0.0], [0.0], 0.9, 0.9)


class TestPPOLoss:
    def test_ratio_one_fixed_point_equals_minus_mean_advantage(self):
        params = tiny_policy()
        batch = random_batch(params, ratio_shift=0.0)
        loss, _, _ = ppo_loss(params, batch, clip_epsilon=0.2, value_coef=0.0,
                              entropy_coef=0.0)
        assert loss == pytest.approx(-np.mean(batch.advantages), abs=1e-9)

    def test_clip_saturation_zeroes_the_policy_gradient(self):
        params = tiny_policy()
        batch = random_batch(params, ratio_shift=np.log(1.5))  # rho = 1.5 > 1.2
        batch = Batch(
            observations=batch.observations,
            masks=batch.masks,
            actions=batch.actions,
            log_probs_old=batch.log_probs_old,
            advantages=np.ones_like(batch.advantages),
            returns=batch.returns,
        )
        _, actor_grads, _ = ppo_loss(params, batch, clip_epsilon=0.2, value_coef=0.0,
                                     entropy_coef=0.0)
        for g in actor_grads:
            np.testing.assert_array_equal(g, np.zeros_like(g))

    @pytest.mark.parametrize("obs_dim,hidden,action_dim", [(2, (3,), 2), (5, (6,), 4)])
    def test_gradients_match_central_finite_differences(self, obs_dim, hidden, action_dim):
        params = tiny_policy(obs_dim=obs_dim, hidden=hidden, action_dim=action_dim, seed=7)
        assert params.n_params <= 200
        batch = random_batch(params, batch_size=8, seed=11)
        # nudge away from the behavior params, staying inside the clip band
        nudge = np.random.default_rng(13).normal(scale=1e-3, size=params.n_params)
        params.set_flat(params.get_flat() + nudge)

        loss, actor_grads, critic_grads = ppo_loss(params, batch)
        analytic = np.concatenate(
            [g.ravel() for g in actor_grads] + [g.ravel() for g in critic_grads]
        )

        theta0 = params.get_flat()
        h = 1e-5
        fd = np.zeros_like(theta0)
        for i in range(theta0.size):
            for sign, slot in ((1.0, 0), (-1.0, 1)):
                theta = theta0.copy()
                theta[i] += sign * h
                params.set_flat(theta)
                val, _, _ = ppo_loss(params, batch)
                fd[i] += sign * val
        fd /= 2 * h
        params.set_flat(theta0)

        rel = np.abs(analytic - fd) / np.maximum(1e-6, np.maximum(np.abs(analytic), np.abs(fd)))
        assert rel.max() < 1e-4

    def test_empty_batch_rejected(self):
        params = tiny_policy()
        empty = Batch(
            observations=np.zeros((0, 4)),
            masks=np.ones((0, 3), dtype=bool),
            actions=np.zeros(0, dtype=np.int64),
            log_probs_old=np.zeros(0),
            advantages=np.zeros(0),
            returns=np.zeros(0),
        )
        with pytest.raises(ContractViolation):
            ppo_loss(params, empty)

    def test_loss_decreases_on_fixed_synthetic_batch(self):
        params = tiny_policy(seed=21)
        batch = random_batch(params, batch_size=16, seed=22)
        adam_actor = AdamState.init(params.actor.param_arrays(), lr=3e-3)
        adam_critic = AdamState.init(params.critic.param_arrays(), lr=5e-3)
        first, *_ = ppo_loss(params, batch)
        for _ in range(100):
            _, ga, gc = ppo_loss(params, batch)
            adam_step(adam_actor, params.actor.param_arrays(), ga)
            adam_step(adam_critic, params.critic.param_arrays(), gc)
        last, *_ = ppo_loss(params, batch)
        assert last < first


class TestAdam:
    def test_zero_gradients_leave_parameters_unchanged(self):
        params = tiny_policy()
        arrays = params.actor.param_arrays()
        before = [a.copy() for a in arrays]
        adam = AdamState.init(arrays, lr=0.1)
        adam_step(adam, arrays, [np.zeros_like(a) for a in arrays])
        for a, b in zip(arrays, before):
            np.testing.assert_array_equal(a, b)

    def test_first_step_magnitude_is_the_learning_rate(self):
        theta = [np.array([0.0])]
        adam = AdamState.init(theta, lr=3e-4)
        adam_step(adam, theta, [np.array([1.0])])
        assert abs(abs(theta[0][0]) - 3e-4) < 1e-6

    def test_defaults_match_standard_recipe(self):
        cfg = RLConfig()
        assert (cfg.actor_lr, cfg.critic_lr, cfg.batch_size) == (0.0003, 0.0005, 64)

    def test_non_finite_gradient_rejected(self):
        theta = [np.array([0.0])]
        adam = AdamState.init(theta, lr=1e-3)
        with pytest.raises(TrainingAborted):
            adam_step(adam, theta, [np.array([np.nan])])


class TestBufferAndUpdate:
    def test_stored_log_probs_match_recomputation(self):
        params = tiny_policy(obs_dim=6, action_dim=4, seed=2)
        agent = PPOAgent.__new__(PPOAgent)
        agent.cfg = RLConfig()
        agent.params = params
        agent.buffer = RolloutBuffer()
        agent._pending = None
        rng = np.random.default_rng(31)
        for _ in range(25):
            obs = rng.normal(size=6)
            mask = np.ones(4, dtype=bool)
            mask[rng.integers(4)] = False
            agent.act(obs, mask, rng)
            agent.record(reward=rng.normal(), done=False)
        for i in range(len(agent.buffer)):
            logits, _ = params.actor.forward(agent.buffer.observations[i])
            logp, _ = masked_log_softmax(logits, agent.buffer.masks[i][None, :])
            assert agent.buffer.log_probs[i] == pytest.approx(
                logp[0, agent.buffer.actions[i]], abs=1e-9
            )

    def test_update_requires_advantages_and_clears_buffer(self):
        rng = np.random.default_rng(0)
        agent = PPOAgent(obs_dim=5, action_dim=3, cfg=RLConfig(batch_size=8), rng=rng)
        with pytest.raises(ContractViolation):
            ppo_update(agent.params, agent.adam_actor, agent.adam_critic, agent.buffer,
                       agent.cfg, rng)
        for t in range(20):
            obs = rng.normal(size=5)
            agent.act(obs, np.ones(3, dtype=bool), rng)
            agent.record(reward=rng.normal(), done=(t == 19))
        agent.update(rng)
        assert len(agent.buffer) == 0

    def test_sampling_determinism(self):
        params = tiny_policy()
        picks_a = [select_action(params, np.ones(4) * 0.3, np.ones(3, dtype=bool),
                                 np.random.default_rng(5))[0] for _ in range(20)]
        picks_b = [select_action(params, np.ones(4) * 0.3, np.ones(3, dtype=bool),
                                 np.random.default_rng(5))[0] for _ in range(20)]
        assert picks_a == picks_b

    def test_greedy_takes_the_argmax(self):
        params = tiny_policy()
        probs, _ = forward(params, np.ones(4), np.ones(3, dtype=bool))
        action, _, _ = select_action(params, np.ones(4), np.ones(3, dtype=bool), greedy=True)
        assert action == int(np.argmax(probs))
