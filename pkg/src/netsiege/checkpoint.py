"""Versioned agent checkpoints with bit-exact round-tripping.

A checkpoint is a single ``.npz`` holding every parameter and Adam-moment
array plus one JSON metadata entry (architecture, optimizer scalars, agent
kind, and caller-supplied fields such as the attacker type or node count).
Saving the same agent twice produces identical bytes, which the training
determinism guarantees rely on.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from netsiege.errors import CheckpointError
from netsiege.hippo import HippoAgent, HippoConfig
from netsiege.rl import MLP, AdamState, MLPArch, PolicyParams, PPOAgent, RLConfig

FORMAT_NAME = "netsiege-checkpoint"
FORMAT_VERSION = 1


def _arch_meta(mlp: MLP) -> dict:
    return {
        "input_dim": mlp.arch.input_dim,
        "hidden": list(mlp.arch.hidden),
        "output_dim": mlp.arch.output_dim,
        "activation": mlp.arch.activation,
    }


def _adam_meta(adam: AdamState) -> dict:
    return {
        "lr": adam.lr,
        "t": adam.t,
        "beta1": adam.beta1,
        "beta2": adam.beta2,
        "eps": adam.eps,
    }


def _pack_mlp(arrays: dict, prefix: str, mlp: MLP) -> None:
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        arrays[f"{prefix}_w{layer}"] = w
        arrays[f"{prefix}_b{layer}"] = b


def _pack_adam(arrays: dict, prefix: str, adam: AdamState) -> None:
    for j, (m, v) in enumerate(zip(adam.m, adam.v)):
        arrays[f"{prefix}_m{j}"] = m
        arrays[f"{prefix}_v{j}"] = v


def _unpack_mlp(data, prefix: str, arch_meta: dict) -> MLP:
    arch = MLPArch(
        input_dim=int(arch_meta["input_dim"]),
        hidden=tuple(int(h) for h in arch_meta["hidden"]),
        output_dim=int(arch_meta["output_dim"]),
        activation=arch_meta["activation"],
    )
    weights, biases = [], []
    for layer, (fan_in, fan_out) in enumerate(arch.layer_dims):
        try:
            w = data[f"{prefix}_w{layer}"]
            b = data[f"{prefix}_b{layer}"]
        except KeyError as exc:
            raise CheckpointError(f"missing array {exc} in checkpoint") from exc
        if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise CheckpointError(
                f"array shapes for {prefix} layer {layer} do not match the declared architecture"
            )
        weights.append(w.astype(np.float64))
        biases.append(b.astype(np.float64))
    return MLP(arch, weights, biases)


def _unpack_adam(data, prefix: str, adam_meta: dict, arrays: list[np.ndarray]) -> AdamState:
    m, v = [], []
    for j, a in enumerate(arrays):
        gm = data[f"{prefix}_m{j}"]
        gv = data[f"{prefix}_v{j}"]
        if gm.shape != a.shape or gv.shape != a.shape:
            raise CheckpointError(f"Adam moment shapes for {prefix} do not match parameters")
        m.append(gm.astype(np.float64))
        v.append(gv.astype(np.float64))
    return AdamState(
        lr=float(adam_meta["lr"]),
        m=m,
        v=v,
        t=int(adam_meta["t"]),
        beta1=float(adam_meta["beta1"]),
        beta2=float(adam_meta["beta2"]),
        eps=float(adam_meta["eps"]),
    )


def _policy_meta(params: PolicyParams) -> dict:
    return {"actor": _arch_meta(params.actor), "critic": _arch_meta(params.critic)}


def _pack_policy(arrays: dict, prefix: str, params: PolicyParams) -> None:
    _pack_mlp(arrays, f"{prefix}_actor", params.actor)
    _pack_mlp(arrays, f"{prefix}_critic", params.critic)


def _unpack_policy(data, prefix: str, meta: dict) -> PolicyParams:
    return PolicyParams(
        actor=_unpack_mlp(data, f"{prefix}_actor", meta["actor"]),
        critic=_unpack_mlp(data, f"{prefix}_critic", meta["critic"]),
    )


def save_agent(path, agent: PPOAgent | HippoAgent, extra_meta: dict | None = None) -> None:
    """Write a PPO or hierarchical agent to ``path`` (npz container)."""
    if not isinstance(agent, (PPOAgent, HippoAgent)):
        raise CheckpointError(f"cannot checkpoint object of type {type(agent).__name__}")
    arrays: dict[str, np.ndarray] = {}
    meta: dict = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "rl_config": dataclasses.asdict(agent.cfg),
        "extra": extra_meta or {},
        "obs_dim": agent.obs_dim,
        "action_dim": agent.action_dim,
    }
    if isinstance(agent, PPOAgent):
        meta["kind"] = "ppo"
        meta["policy"] = _policy_meta(agent.params)
        meta["adam_actor"] = _adam_meta(agent.adam_actor)
        meta["adam_critic"] = _adam_meta(agent.adam_critic)
        _pack_policy(arrays, "policy", agent.params)
        _pack_adam(arrays, "adam_actor", agent.adam_actor)
        _pack_adam(arrays, "adam_critic", agent.adam_critic)
    elif isinstance(agent, HippoAgent):
        meta["kind"] = "hippo"
        meta["hippo_config"] = dataclasses.asdict(agent.hippo_cfg)
        meta["manager"] = _policy_meta(agent.manager)
        meta["adam_manager_actor"] = _adam_meta(agent.adam_manager_actor)
        meta["adam_manager_critic"] = _adam_meta(agent.adam_manager_critic)
        meta["manager_rng_state"] = agent.manager_rng.bit_generator.state
        meta["subs"] = [_policy_meta(p) for p in agent.sub_policies]
        meta["adam_sub_actor"] = [_adam_meta(a) for a in agent.adam_sub_actor]
        meta["adam_sub_critic"] = [_adam_meta(a) for a in agent.adam_sub_critic]
        _pack_policy(arrays, "manager", agent.manager)
        _pack_adam(arrays, "adam_manager_actor", agent.adam_manager_actor)
        _pack_adam(arrays, "adam_manager_critic", agent.adam_manager_critic)
        for i, sub in enumerate(agent.sub_policies):
            _pack_policy(arrays, f"sub{i}", sub)
            _pack_adam(arrays, f"adam_sub{i}_actor", agent.adam_sub_actor[i])
            _pack_adam(arrays, f"adam_sub{i}_critic", agent.adam_sub_critic[i])
    else:
        raise CheckpointError(f"cannot checkpoint object of type {type(agent).__name__}")

    arrays["__meta__"] = np.frombuffer(
        json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8
    )
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_agent(path) -> tuple[PPOAgent | HippoAgent, dict]:
    """Reconstruct an agent from :func:`save_agent` output.

    Returns (agent, extra_meta).  Raises :class:`CheckpointError` on format,
    version, or architecture mismatches.
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        data = np.load(path)
    except Exception as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if "__meta__" not in data:
        raise CheckpointError(f"{path} is not a netsiege checkpoint (missing metadata)")
    meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
    if meta.get("format") != FORMAT_NAME:
        raise CheckpointError(f"{path}: unknown checkpoint format {meta.get('format')!r}")
    if meta.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {meta.get('version')!r}")

    cfg = RLConfig(**meta["rl_config"])
    kind = meta.get("kind")
    if kind == "ppo":
        agent = PPOAgent.__new__(PPOAgent)
        agent.cfg = cfg
        agent.params = _unpack_policy(data, "policy", meta["policy"])
        agent.adam_actor = _unpack_adam(
            data, "adam_actor", meta["adam_actor"], agent.params.actor.param_arrays()
        )
        agent.adam_critic = _unpack_adam(
            data, "adam_critic", meta["adam_critic"], agent.params.critic.param_arrays()
        )
        from netsiege.rl import RolloutBuffer

        agent.buffer = RolloutBuffer()
        agent._pending = None
        return agent, meta["extra"]
    if kind == "hippo":
        hcfg = HippoConfig(**meta["hippo_config"])
        agent = HippoAgent.__new__(HippoAgent)
        agent.cfg = cfg
        agent.hippo_cfg = hcfg
        agent.manager = _unpack_policy(data, "manager", meta["manager"])
        agent.adam_manager_actor = _unpack_adam(
            data, "adam_manager_actor", meta["adam_manager_actor"],
            agent.manager.actor.param_arrays(),
        )
        agent.adam_manager_critic = _unpack_adam(
            data, "adam_manager_critic", meta["adam_manager_critic"],
            agent.manager.critic.param_arrays(),
        )
        agent.sub_policies = [
            _unpack_policy(data, f"sub{i}", m) for i, m in enumerate(meta["subs"])
        ]
        agent.adam_sub_actor = [
            _unpack_adam(data, f"adam_sub{i}_actor", m, agent.sub_policies[i].actor.param_arrays())
            for i, m in enumerate(meta["adam_sub_actor"])
        ]
        agent.adam_sub_critic = [
            _unpack_adam(
                data, f"adam_sub{i}_critic", m, agent.sub_policies[i].critic.param_arrays()
            )
            for i, m in enumerate(meta["adam_sub_critic"])
        ]
        agent.manager_rng = np.random.default_rng()
        agent.manager_rng.bit_generator.state = meta["manager_rng_state"]
        agent._episode_manager_rng = None
        from netsiege.rl import RolloutBuffer

        agent.manager_buffer = RolloutBuffer()
        agent.segments = [[] for _ in range(hcfg.sub_policy_count)]
        agent.active_index = None
        agent.steps_since_selection = 0
        agent._pending_manager = None
        agent._pending_step = None
        agent._interval_reward = 0.0
        agent._open_segment = None
        return agent, meta["extra"]
    raise CheckpointError(f"{path}: unknown agent kind {kind!r}")
