"""Minimal actor-critic machinery on numpy.

Feed-forward policy and value networks with hand-written backprop, masked
categorical sampling, generalized advantage estimation, the clipped-surrogate
policy loss, and bias-corrected Adam.  Everything is float64 and every source
of randomness is an explicitly passed ``numpy.random.Generator``, so rollouts
and updates replay bit-identically under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from netsiege.errors import ContractViolation, InvalidConfigError, TrainingAborted


@dataclass(frozen=True)
class MLPArch:
    """Layer widths and activation of one feed-forward network."""

    input_dim: int
    hidden: tuple[int, ...]
    output_dim: int
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation != "tanh":
            raise InvalidConfigError(f"unsupported activation {self.activation!r}")
        if self.input_dim < 1 or self.output_dim < 1 or any(h < 1 for h in self.hidden):
            raise InvalidConfigError("all layer widths must be >= 1")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden, self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


class MLP:
    """Fully-connected net with tanh hidden layers and a linear head."""

    def __init__(self, arch: MLPArch, weights: list[np.ndarray], biases: list[np.ndarray]):
        self.arch = arch
        self.weights = weights
        self.biases = biases

    @classmethod
    def init(cls, arch: MLPArch, rng: np.random.Generator, head_scale: float = 1.0) -> "MLP":
        """Glorot-uniform init; ``head_scale`` shrinks the output layer so a
        fresh policy starts near uniform."""
        weights, biases = [], []
        n_layers = len(arch.layer_dims)
        for i, (fan_in, fan_out) in enumerate(arch.layer_dims):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            if i == n_layers - 1:
                w *= head_scale
            weights.append(w)
            biases.append(np.zeros(fan_out))
        return cls(arch, weights, biases)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def param_arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def get_flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.param_arrays()])

    def set_flat(self, flat: np.ndarray) -> None:
        pos = 0
        for a in self.param_arrays():
            a[...] = flat[pos : pos + a.size].reshape(a.shape)
            pos += a.size
        if pos != flat.size:
            raise ContractViolation(f"flat vector has {flat.size} entries, net needs {pos}")

    def copy(self) -> "MLP":
        return MLP(self.arch, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        """Batch forward pass; returns output and the cache backward needs."""
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.arch.input_dim:
            raise ContractViolation(
                f"observation width {x.shape[1]} does not match input_dim {self.arch.input_dim}"
            )
        cache = []
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            a = z if i == last else np.tanh(z)
            cache.append((h, a))
            h = a
        return h, cache

    def backward(self, cache: list, dout: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Gradients of a scalar loss given d(loss)/d(output)."""
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        d = dout
        for i in range(len(self.weights) - 1, -1, -1):
            h_in, _ = cache[i]
            grads_w[i] = h_in.T @ d
            grads_b[i] = d.sum(axis=0)
            if i > 0:
                _, a_prev = cache[i - 1]
                d = (d @ self.weights[i].T) * (1.0 - a_prev**2)
        return grads_w, grads_b

    def grad_arrays(self, grads_w, grads_b) -> list[np.ndarray]:
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.extend([gw, gb])
        return out


@dataclass
class PolicyParams:
    """One agent's parameters: actor (action logits) and critic (value)."""

    actor: MLP
    critic: MLP

    @classmethod
    def init(
        cls,
        obs_dim: int,
        action_dim: int,
        hidden: tuple[int, ...],
        rng: np.random.Generator,
        actor_head_bias: np.ndarray | None = None,
    ) -> "PolicyParams":
        """``actor_head_bias`` seeds the output-layer biases, shaping the
        initial action distribution without constraining what is learnable."""
        actor = MLP.init(MLPArch(obs_dim, hidden, action_dim), rng, head_scale=0.01)
        if actor_head_bias is not None:
            if actor_head_bias.shape != (action_dim,):
                raise ContractViolation("actor_head_bias must match the action dimension")
            actor.biases[-1][...] = actor_head_bias
        critic = MLP.init(MLPArch(obs_dim, hidden, 1), rng)
        return cls(actor=actor, critic=critic)

    def copy(self) -> "PolicyParams":
        return PolicyParams(actor=self.actor.copy(), critic=self.critic.copy())

    def get_flat(self) -> np.ndarray:
        return np.concatenate([self.actor.get_flat(), self.critic.get_flat()])

    def set_flat(self, flat: np.ndarray) -> None:
        na = self.actor.n_params
        self.actor.set_flat(flat[:na])
        self.critic.set_flat(flat[na:])

    @property
    def n_params(self) -> int:
        return self.actor.n_params + self.critic.n_params


def masked_log_softmax(logits: np.ndarray, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Log-probabilities and probabilities restricted to valid actions.

    Invalid entries come back with probability exactly 0 (log-prob -inf).
    """
    if logits.ndim == 1:
        logits, masks = logits[None, :], masks[None, :]
    if not masks.any(axis=1).all():
        raise ContractViolation("at least one action must be valid per row")
    neg = np.where(masks, logits, -np.inf)
    mx = np.max(neg, axis=1, keepdims=True)
    ex = np.exp(neg - mx)
    denom = ex.sum(axis=1, keepdims=True)
    probs = ex / denom
    with np.errstate(divide="ignore"):
        logp = np.where(masks, neg - (mx + np.log(denom)), -np.inf)
    return logp, probs


def forward(
    params: PolicyParams, observation: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, float]:
    """Action distribution over valid actions plus the value estimate."""
    logits, _ = params.actor.forward(observation)
    _, probs = masked_log_softmax(logits[0], mask)
    value, _ = params.critic.forward(observation)
    return probs[0], float(value[0, 0])


def select_action(
    params: PolicyParams,
    observation: np.ndarray,
    mask: np.ndarray,
    rng: np.random.Generator | None = None,
    greedy: bool = False,
) -> tuple[int, float, float]:
    """Sample (or argmax) an action index; returns (index, log_prob, value)."""
    logits, _ = params.actor.forward(observation)
    logp, probs = masked_log_softmax(logits[0], mask)
    value, _ = params.critic.forward(observation)
    valid = np.flatnonzero(mask)
    if greedy:
        action = int(valid[np.argmax(probs[0, valid])])
    else:
        if rng is None:
            raise ContractViolation("sampling requires an rng")
        cum = np.cumsum(probs[0, valid])
        u = rng.random() * cum[-1]
        action = int(valid[min(np.searchsorted(cum, u, side="right"), len(valid) - 1)])
    return action, float(logp[0, action]), float(value[0, 0])


# ---------------------------------------------------------------------------
# Advantage estimation
# ---------------------------------------------------------------------------

def gae_advantages(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    gamma: float,
    lam: float,
    bootstrap_value: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation over one rollout.

    ``bootstrap_value`` stands in for the value of the state after the last
    transition when the rollout was truncated rather than terminated.
    Returns (advantages, returns) with returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if not (len(rewards) == len(values) == len(dones)):
        raise ContractViolation("rewards, values, dones must have equal lengths")
    T = len(rewards)
    advantages = np.zeros(T)
    gae = 0.0
    for t in range(T - 1, -1, -1):
        next_value = bootstrap_value if t == T - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        gae = delta + gamma * lam * nonterminal * gae
        advantages[t] = gae
    return advantages, advantages + values


# ---------------------------------------------------------------------------
# Rollout storage
# ---------------------------------------------------------------------------

class RolloutBuffer:
    """Ordered transitions from one or more episodes of acting."""

    def __init__(self):
        self.observations: list[np.ndarray] = []
        self.masks: list[np.ndarray] = []
        self.actions: list[int] = []
        self.log_probs: list[float] = []
        self.rewards: list[float] = []
        self.values: list[float] = []
        self.dones: list[bool] = []
        self.advantages: np.ndarray | None = None
        self.returns: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.actions)

    def add(self, obs, mask, action, log_prob, value, reward, done) -> None:
        self.observations.append(np.asarray(obs, dtype=np.float64))
        self.masks.append(np.asarray(mask, dtype=bool))
        self.actions.append(int(action))
        self.log_probs.append(float(log_prob))
        self.values.append(float(value))
        self.rewards.append(float(reward))
        self.dones.append(bool(done))

    def compute_advantages(self, gamma: float, lam: float, bootstrap_value: float = 0.0) -> None:
        self.advantages, self.returns = gae_advantages(
            np.array(self.rewards),
            np.array(self.values),
            np.array(self.dones, dtype=np.float64),
            gamma,
            lam,
            bootstrap_value,
        )

    def clear(self) -> None:
        self.__init__()


@dataclass(frozen=True)
class Batch:
    observations: np.ndarray
    masks: np.ndarray
    actions: np.ndarray
    log_probs_old: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray


def buffer_batch(buffer: RolloutBuffer, indices: np.ndarray | None = None) -> Batch:
    if buffer.advantages is None:
        raise ContractViolation("compute_advantages must run before batching")
    idx = np.arange(len(buffer)) if indices is None else indices
    return Batch(
        observations=np.stack([buffer.observations[i] for i in idx]),
        masks=np.stack([buffer.masks[i] for i in idx]),
        actions=np.array([buffer.actions[i] for i in idx], dtype=np.int64),
        log_probs_old=np.array([buffer.log_probs[i] for i in idx]),
        advantages=buffer.advantages[idx],
        returns=buffer.returns[idx],
    )


# ---------------------------------------------------------------------------
# PPO loss with analytic gradients
# ---------------------------------------------------------------------------

def ppo_loss(
    params: PolicyParams,
    batch: Batch,
    clip_epsilon: float = 0.2,
    value_coef: float = 0.5,
    entropy_coef: float = 0.01,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Clipped-surrogate loss and its gradients.

    loss = -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A))
           + value_coef * 0.5 * mean((V - R)^2)
           - entropy_coef * mean(H)

    Returns (loss, actor gradient arrays, critic gradient arrays) where the
    gradient lists interleave [dW0, db0, dW1, db1, ...].
    """
    B = len(batch.actions)
    if B == 0:
        raise ContractViolation("ppo_loss needs a non-empty batch")

    logits, actor_cache = params.actor.forward(batch.observations)
    logp_all, probs = masked_log_softmax(logits, batch.masks)
    rows = np.arange(B)
    logp_new = logp_all[rows, batch.actions]

    ratio = np.exp(logp_new - batch.log_probs_old)
    adv = batch.advantages
    surr1 = ratio * adv
    surr2 = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * adv
    policy_loss = -np.mean(np.minimum(surr1, surr2))

    # Gradient flows only where the unclipped branch is the active minimum.
    take = surr1 <= surr2
    dlogp = np.where(take, -adv * ratio, 0.0) / B

    onehot = np.zeros_like(probs)
    onehot[rows, batch.actions] = 1.0
    dlogits = dlogp[:, None] * (onehot - probs)

    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(probs > 0.0, probs * logp_all, 0.0)
    entropy = -plogp.sum(axis=1)
    # d(-entropy_coef * mean(H))/dlogits
    ent_inner = np.where(probs > 0.0, logp_all + entropy[:, None], 0.0)
    dlogits += (entropy_coef / B) * probs * ent_inner
    dlogits = np.where(batch.masks, dlogits, 0.0)

    values, critic_cache = params.critic.forward(batch.observations)
    v = values[:, 0]
    err = v - batch.returns
    value_loss = 0.5 * np.mean(err**2)
    dvalues = (value_coef * err / B)[:, None]

    loss = float(policy_loss + value_coef * value_loss - entropy_coef * np.mean(entropy))

    agw, agb = params.actor.backward(actor_cache, dlogits)
    cgw, cgb = params.critic.backward(critic_cache, dvalues)
    return loss, params.actor.grad_arrays(agw, agb), params.critic.grad_arrays(cgw, cgb)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """First/second moment accumulators for one network's parameter arrays."""

    lr: float
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, arrays: list[np.ndarray], lr: float) -> "AdamState":
        return cls(
            lr=lr,
            m=[np.zeros_like(a) for a in arrays],
            v=[np.zeros_like(a) for a in arrays],
        )


def adam_step(state: AdamState, arrays: list[np.ndarray], grads: list[np.ndarray]) -> AdamState:
    """One bias-corrected Adam update, applied in place to ``arrays``."""
    if len(arrays) != len(state.m) or len(grads) != len(arrays):
        raise ContractViolation("parameter/gradient shapes do not match Adam state")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise TrainingAborted("non-finite gradient; update rejected")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        if a.shape != g.shape:
            raise ContractViolation("gradient shape mismatch")
        m[...] = state.beta1 * m + (1.0 - state.beta1) * g
        v[...] = state.beta2 * v + (1.0 - state.beta2) * g**2
        m_hat = m / bc1
        v_hat = v / bc2
        a -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


# ---------------------------------------------------------------------------
# Agent
# ---------------------------------------------------------------------------

@dataclass
class RLConfig:
    """PPO hyperparameters; defaults follow the project's standard recipe.

    ``execute_logit_bias`` is the initial log-preference applied to the
    attacker's episode-ending action: starting it negative keeps early
    exploration inside multi-step campaigns instead of collapsing onto an
    immediate cash-out, which the objective rewards would never correct.
    ``restore_logit_bias`` plays the same role for the defender's node
    restores, the action its win condition runs through.
    """

    actor_lr: float = 3e-4
    critic_lr: float = 5e-4
    batch_size: int = 64
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    update_epochs: int = 4
    hidden: tuple[int, ...] = (64, 64)
    normalize_advantages: bool = True
    hippo_interval: int = 10
    execute_logit_bias: float = -2.0
    restore_logit_bias: float = 0.0

    def __post_init__(self):
        if isinstance(self.hidden, list):
            self.hidden = tuple(self.hidden)
        if self.batch_size < 1 or self.update_epochs < 1 or self.hippo_interval < 1:
            raise InvalidConfigError("batch_size, update_epochs, hippo_interval must be >= 1")


def normalized_advantages(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


def ppo_update(
    params: PolicyParams,
    adam_actor: AdamState,
    adam_critic: AdamState,
    buffer: RolloutBuffer,
    cfg: RLConfig,
    rng: np.random.Generator,
) -> dict:
    """Run the PPO epochs over one rollout buffer and clear it.

    Advantages must already be computed; they are normalized across the whole
    buffer before minibatching.
    """
    if len(buffer) == 0:
        raise ContractViolation("cannot update from an empty buffer")
    if buffer.advantages is None:
        raise ContractViolation("compute_advantages must run before ppo_update")
    # A single-sample buffer would normalize its advantage to zero; keep it raw.
    if cfg.normalize_advantages and len(buffer) >= 2:
        buffer.advantages = normalized_advantages(buffer.advantages)

    T = len(buffer)
    losses = []
    for _ in range(cfg.update_epochs):
        perm = rng.permutation(T)
        for start in range(0, T, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            batch = buffer_batch(buffer, idx)
            loss, actor_grads, critic_grads = ppo_loss(
                params, batch, cfg.clip_epsilon, cfg.value_coef, cfg.entropy_coef
            )
            if not np.isfinite(loss):
                raise TrainingAborted("non-finite loss", {"loss": loss})
            adam_step(adam_actor, params.actor.param_arrays(), actor_grads)
            adam_step(adam_critic, params.critic.param_arrays(), critic_grads)
            losses.append(loss)
    buffer.clear()
    return {"mean_loss": float(np.mean(losses)), "n_minibatches": len(losses)}


class PPOAgent:
    """Flat PPO agent: policy parameters, Adam state, and a rollout buffer."""

    def __init__(
        self,
        obs_dim: int,
        action_dim: int,
        cfg: RLConfig,
        rng: np.random.Generator,
        actor_head_bias: np.ndarray | None = None,
    ):
        self.cfg = cfg
        self.params = PolicyParams.init(obs_dim, action_dim, cfg.hidden, rng, actor_head_bias)
        self.adam_actor = AdamState.init(self.params.actor.param_arrays(), cfg.actor_lr)
        self.adam_critic = AdamState.init(self.params.critic.param_arrays(), cfg.critic_lr)
        self.buffer = RolloutBuffer()
        self._pending: tuple | None = None

    @property
    def obs_dim(self) -> int:
        return self.params.actor.arch.input_dim

    @property
    def action_dim(self) -> int:
        return self.params.actor.arch.output_dim

    def act(
        self,
        obs: np.ndarray,
        mask: np.ndarray,
        rng: np.random.Generator | None,
        greedy: bool = False,
        collect: bool = True,
    ) -> int:
        action, logp, value = select_action(self.params, obs, mask, rng, greedy)
        if collect:
            self._pending = (obs, mask, action, logp, value)
        return action

    def record(self, reward: float, done: bool) -> None:
        """Attach the reward/done outcome to the action just taken."""
        if self._pending is None:
            raise ContractViolation("record called without a pending action")
        obs, mask, action, logp, value = self._pending
        self.buffer.add(obs, mask, action, logp, value, reward, done)
        self._pending = None

    def update(self, rng: np.random.Generator) -> dict:
        self.buffer.compute_advantages(self.cfg.gamma, self.cfg.gae_lambda)
        return ppo_update(
            self.params, self.adam_actor, self.adam_critic, self.buffer, self.cfg, rng
        )
