"""Hierarchical PPO defender: a manager commits to one sub-policy per interval.

The manager is itself a small actor-critic whose action space is the set of
sub-policy indices.  Every ``interval`` timesteps of an episode it looks at
the current defender observation and commits to one sub-policy, which then
produces the actual environment actions until the next boundary.  The manager
learns from interval-level transitions (boundary observation, chosen index,
undiscounted sum of rewards across the interval); each sub-policy learns by
PPO on exactly the steps where it was active, with segments truncated at
interval boundaries and bootstrapped from its own critic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netsiege.errors import ContractViolation, InvalidConfigError
from netsiege.rl import (
    AdamState,
    PolicyParams,
    RLConfig,
    RolloutBuffer,
    gae_advantages,
    ppo_update,
    select_action,
)


@dataclass(frozen=True)
class HippoConfig:
    """Interval length and number of specialist sub-policies."""

    interval: int = 10
    sub_policy_count: int = 2

    def __post_init__(self):
        if self.interval < 1:
            raise InvalidConfigError("interval must be >= 1")
        if self.sub_policy_count < 1:
            raise InvalidConfigError("sub_policy_count must be >= 1")


@dataclass
class _Segment:
    """A contiguous run of one sub-policy's steps within an episode."""

    buffer: RolloutBuffer
    bootstrap_value: float = 0.0


class HippoAgent:
    """Hierarchical policy plus its optimizer state and rollout storage.

    The manager draws its selections from a private RNG stream so that, with
    a single sub-policy, the actions consumed from the caller's stream match
    a flat PPO agent exactly.
    """

    def __init__(
        self,
        obs_dim: int,
        action_dim: int,
        cfg: RLConfig,
        hippo_cfg: HippoConfig,
        rng: np.random.Generator,
        sub_head_bias: np.ndarray | None = None,
    ):
        self.cfg = cfg
        self.hippo_cfg = hippo_cfg
        self.manager = PolicyParams.init(obs_dim, hippo_cfg.sub_policy_count, cfg.hidden, rng)
        self.sub_policies = [
            PolicyParams.init(obs_dim, action_dim, cfg.hidden, rng, sub_head_bias)
            for _ in range(hippo_cfg.sub_policy_count)
        ]
        self.adam_manager_actor = AdamState.init(self.manager.actor.param_arrays(), cfg.actor_lr)
        self.adam_manager_critic = AdamState.init(self.manager.critic.param_arrays(), cfg.critic_lr)
        self.adam_sub_actor = [
            AdamState.init(p.actor.param_arrays(), cfg.actor_lr) for p in self.sub_policies
        ]
        self.adam_sub_critic = [
            AdamState.init(p.critic.param_arrays(), cfg.critic_lr) for p in self.sub_policies
        ]
        self.manager_rng = np.random.default_rng(int(rng.integers(2**63)))
        self._episode_manager_rng: np.random.Generator | None = None

        self.active_index: int | None = None
        self.steps_since_selection = 0
        self.manager_buffer = RolloutBuffer()
        self.segments: list[list[_Segment]] = [[] for _ in range(hippo_cfg.sub_policy_count)]
        self._pending_manager: tuple | None = None
        self._pending_step: tuple | None = None
        self._interval_reward = 0.0
        self._open_segment: _Segment | None = None

    @property
    def obs_dim(self) -> int:
        return self.manager.actor.arch.input_dim

    @property
    def action_dim(self) -> int:
        return self.sub_policies[0].actor.arch.output_dim

    # -- episode flow --------------------------------------------------------

    def reset_episode(self, manager_rng: np.random.Generator | None = None) -> None:
        """Start a fresh episode; optionally pin this episode's manager
        stream (evaluation passes one so matchup cells stay seed-isolated)."""
        if self._pending_manager is not None or self._pending_step is not None:
            raise ContractViolation("previous episode was not closed before reset")
        self.active_index = None
        self.steps_since_selection = 0
        self._interval_reward = 0.0
        self._open_segment = None
        self._episode_manager_rng = manager_rng

    def manager_select(self, obs: np.ndarray, greedy: bool = False) -> int:
        """Commit to a sub-policy at an interval boundary."""
        if self.steps_since_selection % self.hippo_cfg.interval != 0:
            raise ContractViolation("manager_select called mid-interval")
        full_mask = np.ones(self.hippo_cfg.sub_policy_count, dtype=bool)
        rng = getattr(self, "_episode_manager_rng", None) or self.manager_rng
        index, logp, value = select_action(self.manager, obs, full_mask, rng, greedy=greedy)
        self._pending_manager = (obs, full_mask, index, logp, value)
        self.active_index = index
        return index

    def _close_interval(self, done: bool) -> None:
        if self._pending_manager is None:
            return
        obs, mask, index, logp, value = self._pending_manager
        self.manager_buffer.add(obs, mask, index, logp, value, self._interval_reward, done)
        self._pending_manager = None
        self._interval_reward = 0.0

    def _close_segment(self, next_obs: np.ndarray | None) -> None:
        """Finish the active sub-policy's segment; bootstrap from its own
        critic when the episode continues past the boundary."""
        if self._open_segment is None:
            return
        if next_obs is not None:
            value, _ = self.sub_policies[self.active_index].critic.forward(next_obs)
            self._open_segment.bootstrap_value = float(value[0, 0])
        self._open_segment = None

    def act(
        self,
        obs: np.ndarray,
        mask: np.ndarray,
        rng: np.random.Generator | None,
        greedy: bool = False,
        collect: bool = True,
    ) -> int:
        at_boundary = self.steps_since_selection % self.hippo_cfg.interval == 0
        if at_boundary:
            if collect:
                self._close_interval(done=False)
                self._close_segment(next_obs=obs)
            self.steps_since_selection = 0
            self.manager_select(obs, greedy=greedy)
        if self.active_index is None:
            raise ContractViolation("act called before any manager selection")
        action, logp, value = select_action(
            self.sub_policies[self.active_index], obs, mask, rng, greedy
        )
        if collect:
            if self._open_segment is None:
                self._open_segment = _Segment(buffer=RolloutBuffer())
                self.segments[self.active_index].append(self._open_segment)
            self._pending_step = (obs, mask, action, logp, value)
        self.steps_since_selection += 1
        return action

    def record(self, reward: float, done: bool) -> None:
        if self._pending_step is None:
            raise ContractViolation("record called without a pending action")
        obs, mask, action, logp, value = self._pending_step
        self._open_segment.buffer.add(obs, mask, action, logp, value, reward, done)
        self._pending_step = None
        self._interval_reward += reward
        if done:
            self._close_interval(done=True)
            self._close_segment(next_obs=None)
            self.active_index = None

    # -- learning ------------------------------------------------------------

    def update(self, rng: np.random.Generator) -> dict:
        """One manager update plus one update per sub-policy that acted."""
        if self._pending_manager is not None or self._pending_step is not None:
            raise ContractViolation("update called with an unfinished step or interval")
        stats: dict = {}
        if len(self.manager_buffer) > 0:
            self.manager_buffer.compute_advantages(self.cfg.gamma, self.cfg.gae_lambda)
            stats["manager"] = ppo_update(
                self.manager,
                self.adam_manager_actor,
                self.adam_manager_critic,
                self.manager_buffer,
                self.cfg,
                rng,
            )
        for i, segs in enumerate(self.segments):
            if not segs:
                continue
            combined = RolloutBuffer()
            adv_parts, ret_parts = [], []
            for seg in segs:
                b = seg.buffer
                adv, ret = gae_advantages(
                    np.array(b.rewards),
                    np.array(b.values),
                    np.array(b.dones, dtype=np.float64),
                    self.cfg.gamma,
                    self.cfg.gae_lambda,
                    bootstrap_value=seg.bootstrap_value,
                )
                adv_parts.append(adv)
                ret_parts.append(ret)
                for j in range(len(b)):
                    combined.add(
                        b.observations[j],
                        b.masks[j],
                        b.actions[j],
                        b.log_probs[j],
                        b.values[j],
                        b.rewards[j],
                        b.dones[j],
                    )
            combined.advantages = np.concatenate(adv_parts)
            combined.returns = np.concatenate(ret_parts)
            stats[f"sub{i}"] = ppo_update(
                self.sub_policies[i],
                self.adam_sub_actor[i],
                self.adam_sub_critic[i],
                combined,
                self.cfg,
                rng,
            )
            self.segments[i] = []
        return stats
