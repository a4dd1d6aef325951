"""Self-play training for the four regimes, with logging and curve smoothing.

One epoch = one full episode of self-play on a freshly generated topology,
followed by a PPO (or hierarchical) update for the defender and for whichever
attacker was active.  Multi-type regimes keep two independent attacker
learners and draw the active one uniformly each epoch; the inactive learner's
parameters are untouched that epoch.

All randomness is derived from a single integer seed through named
``SeedSequence`` spawns, so a rerun with the same seed reproduces the draw
sequence, every episode trace, and the final checkpoints bit for bit.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from netsiege.checkpoint import save_agent
from netsiege.errors import ContractViolation, InvalidConfigError, TrainingAborted
from netsiege.game import (
    AttackerKind,
    DefenderTypeParams,
    GameConfig,
    GraphParams,
    Winner,
    attacker_action_count,
    attacker_action_from_index,
    attacker_action_mask,
    attacker_observation_dim,
    defender_action_count,
    defender_action_from_index,
    defender_action_mask,
    defender_observation_dim,
    init_episode,
    observe_attacker,
    quiet_defender_observation,
    step,
    trace_record,
)
from netsiege.hippo import HippoAgent, HippoConfig
from netsiege.rl import PPOAgent, RLConfig

TRAINING_LOG_HEADER = "epoch,regime,active_attacker,defender_reward,attacker_reward,episode_length,winner"


class TrainingRegime(str, enum.Enum):
    RANSOMWARE_ONLY = "ransomware"
    APT_ONLY = "apt"
    ALTERNATING = "alternating"
    HIERARCHICAL = "hierarchical"


MULTI_TYPE_REGIMES = frozenset({TrainingRegime.ALTERNATING, TrainingRegime.HIERARCHICAL})


def select_active_attacker(regime: TrainingRegime, rng: np.random.Generator) -> AttackerKind:
    """Uniform draw of this epoch's opponent; multi-type regimes only."""
    if regime not in MULTI_TYPE_REGIMES:
        raise ContractViolation(f"regime {regime.value} has a single fixed attacker")
    return AttackerKind.RANSOMWARE if rng.integers(2) == 0 else AttackerKind.APT


def attacker_draw_stream(seed: int) -> np.random.Generator:
    """The exact RNG stream :func:`run_training` uses for opponent draws."""
    draw_ss, _, _ = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(draw_ss)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    regime: str
    active_attacker: str
    defender_reward: float
    attacker_reward: float
    episode_length: int
    winner: str

    def csv_row(self) -> str:
        return (
            f"{self.epoch},{self.regime},{self.active_attacker},"
            f"{self.defender_reward!r},{self.attacker_reward!r},"
            f"{self.episode_length},{self.winner}"
        )


@dataclass
class TrainingRun:
    """Everything a training run produced, in memory."""

    regime: TrainingRegime
    seed: int
    records: list[EpochRecord]
    draw_counts: dict[str, int]
    defender: PPOAgent | HippoAgent
    attackers: dict[AttackerKind, PPOAgent]
    checkpoint_files: list[str] = field(default_factory=list)
    out_dir: str | None = None

    def defender_rewards(self) -> np.ndarray:
        return np.array([r.defender_reward for r in self.records])

    def log_text(self) -> str:
        lines = [TRAINING_LOG_HEADER]
        lines.extend(r.csv_row() for r in self.records)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EpisodeResult:
    defender_reward: float
    attacker_reward: float
    length: int
    winner: Winner


def play_episode(
    defender,
    attacker,
    attacker_kind: AttackerKind,
    game_config: GameConfig,
    defender_params: DefenderTypeParams,
    graph_params: GraphParams,
    env_rng: np.random.Generator,
    attacker_rng: np.random.Generator,
    defender_rng: np.random.Generator,
    collect: bool = True,
    greedy: bool = False,
    trace_fh=None,
    manager_rng: np.random.Generator | None = None,
) -> EpisodeResult:
    """Run one full episode; optionally collect transitions into the agents'
    buffers and/or write a line-delimited trace."""
    state = init_episode(game_config, defender_params, graph_params, env_rng, attacker_kind)
    n = state.graph.n_nodes
    att_obs = observe_attacker(state).to_vector()
    def_obs = quiet_defender_observation(state).to_vector()
    if hasattr(defender, "reset_episode"):
        defender.reset_episode(manager_rng)

    total_def = 0.0
    total_att = 0.0
    while not state.done:
        att_mask = attacker_action_mask(state)
        def_mask = defender_action_mask(state)
        att_idx = attacker.act(att_obs, att_mask, attacker_rng, greedy=greedy, collect=collect)
        def_idx = defender.act(def_obs, def_mask, defender_rng, greedy=greedy, collect=collect)
        attacker_action = attacker_action_from_index(att_idx, n)
        defender_action = defender_action_from_index(def_idx, n)
        result = step(state, attacker_action, defender_action, env_rng)
        if collect:
            attacker.record(result.attacker_reward, result.done)
            defender.record(result.defender_reward, result.done)
        if trace_fh is not None:
            trace_fh.write(
                json.dumps(
                    trace_record(state.timestep - 1, attacker_action, defender_action, result),
                    sort_keys=True,
                )
                + "\n"
            )
        total_def += result.defender_reward
        total_att += result.attacker_reward
        att_obs = result.attacker_obs.to_vector()
        def_obs = result.defender_obs.to_vector()

    return EpisodeResult(
        defender_reward=total_def,
        attacker_reward=total_att,
        length=state.timestep,
        winner=state.winner,
    )


def _make_defender(
    regime: TrainingRegime,
    n_nodes: int,
    rl_config: RLConfig,
    hippo_config: HippoConfig | None,
    rng: np.random.Generator,
):
    obs_dim = defender_observation_dim(n_nodes)
    act_dim = defender_action_count(n_nodes)
    bias = defender_head_bias(n_nodes, rl_config)
    if regime is TrainingRegime.HIERARCHICAL:
        hcfg = hippo_config or HippoConfig(interval=rl_config.hippo_interval, sub_policy_count=2)
        return HippoAgent(obs_dim, act_dim, rl_config, hcfg, rng, sub_head_bias=bias)
    return PPOAgent(obs_dim, act_dim, rl_config, rng, actor_head_bias=bias)


def _regime_attacker_kinds(regime: TrainingRegime) -> list[AttackerKind]:
    if regime is TrainingRegime.RANSOMWARE_ONLY:
        return [AttackerKind.RANSOMWARE]
    if regime is TrainingRegime.APT_ONLY:
        return [AttackerKind.APT]
    return [AttackerKind.RANSOMWARE, AttackerKind.APT]


def attacker_head_bias(n_nodes: int, rl_config: RLConfig) -> np.ndarray:
    """Initial actor-head biases for attacker learners: start the
    episode-ending action unattractive so exploration reaches deep states."""
    bias = np.zeros(attacker_action_count(n_nodes))
    bias[-1] = rl_config.execute_logit_bias
    return bias


def defender_head_bias(n_nodes: int, rl_config: RLConfig) -> np.ndarray:
    """Initial actor-head biases for the defender: tilt exploration toward
    node restores, the action its win condition runs through."""
    bias = np.zeros(defender_action_count(n_nodes))
    bias[2 * n_nodes : 3 * n_nodes] = rl_config.restore_logit_bias
    return bias


def run_training(
    regime: TrainingRegime,
    game_config: GameConfig,
    defender_params: DefenderTypeParams,
    rl_config: RLConfig,
    graph_params: GraphParams,
    epochs: int,
    seed: int,
    out_dir: str | Path | None = None,
    checkpoint_every: int = 100,
    hippo_config: HippoConfig | None = None,
) -> TrainingRun:
    """Train defender and attacker(s) by self-play for ``epochs`` episodes.

    If ``out_dir`` is given, writes the CSV log, a JSON manifest, periodic
    defender checkpoints, a best-so-far defender checkpoint (by trailing-100
    mean reward), and final checkpoints for every agent.
    """
    if epochs < 1:
        raise InvalidConfigError("epochs must be >= 1")

    root = np.random.SeedSequence(seed)
    draw_ss, init_ss, epoch_root = root.spawn(3)
    draw_rng = np.random.default_rng(draw_ss)
    init_rng = np.random.default_rng(init_ss)
    epoch_seqs = epoch_root.spawn(epochs)

    n_nodes = graph_params.n_nodes
    defender = _make_defender(regime, n_nodes, rl_config, hippo_config, init_rng)
    kinds = _regime_attacker_kinds(regime)
    attackers = {
        kind: PPOAgent(
            attacker_observation_dim(n_nodes),
            attacker_action_count(n_nodes),
            rl_config,
            init_rng,
            actor_head_bias=attacker_head_bias(n_nodes, rl_config),
        )
        for kind in kinds
    }

    out_path = Path(out_dir) if out_dir is not None else None
    log_fh = None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        log_fh = open(out_path / "training_log.csv", "w", encoding="utf-8")
        log_fh.write(TRAINING_LOG_HEADER + "\n")

    records: list[EpochRecord] = []
    draw_counts = {kind.value: 0 for kind in kinds}
    checkpoint_files: list[str] = []
    best_mean = -np.inf

    try:
        for epoch in range(epochs):
            if regime in MULTI_TYPE_REGIMES:
                active = select_active_attacker(regime, draw_rng)
            else:
                active = kinds[0]
            draw_counts[active.value] += 1

            env_ss, att_act_ss, def_act_ss, att_upd_ss, def_upd_ss = epoch_seqs[epoch].spawn(5)
            try:
                episode = play_episode(
                    defender,
                    attackers[active],
                    active,
                    game_config,
                    defender_params,
                    graph_params,
                    np.random.default_rng(env_ss),
                    np.random.default_rng(att_act_ss),
                    np.random.default_rng(def_act_ss),
                    collect=True,
                )
                defender.update(np.random.default_rng(def_upd_ss))
                attackers[active].update(np.random.default_rng(att_upd_ss))
            except TrainingAborted as exc:
                exc.diagnostics.update({"epoch": epoch, "regime": regime.value})
                if out_path is not None:
                    with open(out_path / "abort_diagnostics.json", "w", encoding="utf-8") as fh:
                        json.dump(exc.diagnostics, fh, sort_keys=True, indent=2, default=str)
                raise

            record = EpochRecord(
                epoch=epoch,
                regime=regime.value,
                active_attacker=active.value,
                defender_reward=episode.defender_reward,
                attacker_reward=episode.attacker_reward,
                episode_length=episode.length,
                winner=episode.winner.value,
            )
            records.append(record)
            if log_fh is not None:
                log_fh.write(record.csv_row() + "\n")

            if out_path is not None:
                trailing = np.mean([r.defender_reward for r in records[-100:]])
                if trailing >= best_mean:
                    best_mean = trailing
                    save_agent(
                        out_path / "defender_best.npz",
                        defender,
                        _agent_meta("defender", regime, n_nodes, seed, epoch + 1),
                    )
                if (epoch + 1) % checkpoint_every == 0:
                    name = f"defender_epoch{epoch + 1:05d}.npz"
                    save_agent(
                        out_path / name,
                        defender,
                        _agent_meta("defender", regime, n_nodes, seed, epoch + 1),
                    )
                    checkpoint_files.append(name)
    finally:
        if log_fh is not None:
            log_fh.close()

    if out_path is not None:
        save_agent(
            out_path / "defender_final.npz",
            defender,
            _agent_meta("defender", regime, n_nodes, seed, epochs),
        )
        checkpoint_files.extend(["defender_final.npz", "defender_best.npz"])
        for kind, agent in attackers.items():
            name = f"attacker_{kind.value}_final.npz"
            save_agent(
                out_path / name,
                agent,
                _agent_meta(f"attacker_{kind.value}", regime, n_nodes, seed, epochs),
            )
            checkpoint_files.append(name)
        manifest = {
            "regime": regime.value,
            "seed": seed,
            "epochs": epochs,
            "draw_counts": draw_counts,
            "checkpoints": sorted(set(checkpoint_files)),
            "n_nodes": n_nodes,
            "edge_density": graph_params.edge_density,
            "trailing_mean_defender_reward": float(
                np.mean([r.defender_reward for r in records[-100:]])
            ),
            "game_config": _jsonable_game_config(game_config),
            "defender_params": {
                "detection_rate": defender_params.detection_rate,
                "false_positive_rate": defender_params.false_positive_rate,
                "archetype": defender_params.archetype.value,
            },
            "rl_config": _jsonable_rl_config(rl_config),
        }
        with open(out_path / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)

    return TrainingRun(
        regime=regime,
        seed=seed,
        records=records,
        draw_counts=draw_counts,
        defender=defender,
        attackers=attackers,
        checkpoint_files=sorted(set(checkpoint_files)),
        out_dir=str(out_path) if out_path is not None else None,
    )


def _agent_meta(role: str, regime: TrainingRegime, n_nodes: int, seed: int, epoch: int) -> dict:
    return {
        "role": role,
        "regime": regime.value,
        "n_nodes": n_nodes,
        "seed": seed,
        "epoch": epoch,
    }


def _jsonable_game_config(cfg: GameConfig) -> dict:
    return {
        "max_timesteps": cfg.max_timesteps,
        "defender_win_reward": cfg.defender_win_reward,
        "ransomware_threshold": cfg.ransomware_threshold,
        "attacker_action_costs": {k.value: v for k, v in cfg.attacker_action_costs.items()},
        "defender_action_costs": {k.value: v for k, v in cfg.defender_action_costs.items()},
        "ransomware_node_value": cfg.ransomware_node_value,
        "apt_exfil_value": cfg.apt_exfil_value,
        "zero_day_budget": cfg.zero_day_budget,
        "reduce_vuln_decrement": cfg.reduce_vuln_decrement,
        "scan_reveal_probability": cfg.scan_reveal_probability,
    }


def _jsonable_rl_config(cfg: RLConfig) -> dict:
    import dataclasses

    d = dataclasses.asdict(cfg)
    d["hidden"] = list(d["hidden"])
    return d


def smooth_curve(values, order: int = 5) -> np.ndarray:
    """Least-squares polynomial fit of the given order, evaluated pointwise.

    The raw series is untouched; callers typically plot both.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise InvalidConfigError("smooth_curve expects a 1-D series")
    if len(values) <= order:
        raise InvalidConfigError(
            f"series of length {len(values)} cannot support an order-{order} fit"
        )
    x = np.arange(len(values), dtype=np.float64)
    poly = np.polynomial.Polynomial.fit(x, values, deg=order)
    return poly(x)
