"""Evaluation harness and robust score statistics.

Matchups replay trained (or scripted) policies with learning switched off on
freshly generated topologies, then summarize the defender's episode utilities
with the mean, the interquartile mean, the win rate, and a density-normalized
score histogram.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from netsiege.checkpoint import load_agent
from netsiege.errors import CheckpointError, ContractViolation, InvalidConfigError
from netsiege.game import (
    AttackerKind,
    DefenderTypeParams,
    GameConfig,
    GraphParams,
    Winner,
    attacker_observation_dim,
    defender_observation_dim,
)
from netsiege.training import play_episode

MATRIX_CSV_HEADER = "defender,attacker_type,mean,iqm,win_rate,n_episodes"


def iqm(scores) -> float:
    """Interquartile mean with fractional trimming.

    Each tail sheds exactly a quarter of the total sample weight; with counts
    not divisible by four the boundary samples count fractionally.  Computed
    by expanding every sample to weight 4 and trimming n whole entries per
    tail, which realizes the fractional convention in integer arithmetic.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ContractViolation("iqm of an empty score list")
    s = np.sort(scores)
    n = s.size
    expanded = np.repeat(s, 4)
    return float(np.mean(expanded[n : 3 * n]))


def win_rate(win_flags) -> float:
    """Fraction of episodes the defender won (eliminations only)."""
    flags = np.asarray(win_flags, dtype=bool)
    if flags.size == 0:
        raise ContractViolation("win_rate of an empty flag list")
    return float(np.mean(flags))


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray

    def total_mass(self) -> float:
        widths = np.diff(self.bin_edges)
        return float(np.sum(self.densities * widths))


def score_distribution(scores, bin_count: int = 30) -> Histogram:
    """Equal-width probability-density histogram spanning [min, max].

    A degenerate sample (all scores equal) gets one unit-width bin of
    density 1.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ContractViolation("score_distribution of an empty score list")
    if bin_count < 1:
        raise InvalidConfigError("bin_count must be >= 1")
    lo, hi = float(np.min(scores)), float(np.max(scores))
    if lo == hi:
        return Histogram(
            bin_edges=np.array([lo - 0.5, lo + 0.5]),
            densities=np.array([1.0]),
        )
    densities, edges = np.histogram(scores, bins=bin_count, range=(lo, hi), density=True)
    return Histogram(bin_edges=edges, densities=densities)


@dataclass
class EvalReport:
    """Statistics of one defender-vs-attacker matchup."""

    defender_label: str
    attacker_type: str
    scores: list[float]
    win_flags: list[bool]
    episode_lengths: list[int]
    mean: float
    iqm: float
    win_rate: float
    histogram: Histogram
    seed: int
    n_episodes: int

    def to_dict(self) -> dict:
        return {
            "defender_label": self.defender_label,
            "attacker_type": self.attacker_type,
            "scores": self.scores,
            "win_flags": [bool(w) for w in self.win_flags],
            "episode_lengths": self.episode_lengths,
            "mean": self.mean,
            "iqm": self.iqm,
            "win_rate": self.win_rate,
            "histogram": {
                "bin_edges": self.histogram.bin_edges.tolist(),
                "densities": self.histogram.densities.tolist(),
            },
            "seed": self.seed,
            "n_episodes": self.n_episodes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _resolve_agent(agent_or_path, expected_obs_dim: int, what: str):
    """Accept a live policy object or a checkpoint path; validate widths."""
    if isinstance(agent_or_path, (str, Path)):
        agent, _ = load_agent(agent_or_path)
    else:
        agent = agent_or_path
    obs_dim = getattr(agent, "obs_dim", None)
    if obs_dim is not None and obs_dim != expected_obs_dim:
        raise CheckpointError(
            f"{what} expects observation width {expected_obs_dim}, "
            f"checkpoint provides {obs_dim} (wrong node count?)"
        )
    return agent


def evaluate_matchup(
    defender,
    attacker,
    attacker_kind: AttackerKind,
    n_episodes: int,
    graph_params: GraphParams,
    seed: int,
    game_config: GameConfig | None = None,
    defender_params: DefenderTypeParams | None = None,
    sample: bool = True,
    defender_label: str = "defender",
    bin_count: int = 30,
) -> EvalReport:
    """Play ``n_episodes`` with learning off and summarize defender scores.

    ``sample=True`` draws actions from the policy distributions (matching
    training-time behavior); ``sample=False`` plays greedily.  Checkpoint
    paths are accepted in place of live agents.
    """
    if n_episodes < 1:
        raise InvalidConfigError("n_episodes must be >= 1")
    game_config = game_config or GameConfig()
    defender_params = defender_params or DefenderTypeParams()
    attacker_kind = AttackerKind(attacker_kind)

    defender = _resolve_agent(
        defender, defender_observation_dim(graph_params.n_nodes), "defender"
    )
    attacker = _resolve_agent(
        attacker, attacker_observation_dim(graph_params.n_nodes), "attacker"
    )

    episode_seqs = np.random.SeedSequence(seed).spawn(n_episodes)
    scores: list[float] = []
    wins: list[bool] = []
    lengths: list[int] = []
    for ep_seq in episode_seqs:
        env_ss, att_ss, def_ss, mgr_ss = ep_seq.spawn(4)
        result = play_episode(
            defender,
            attacker,
            attacker_kind,
            game_config,
            defender_params,
            graph_params,
            np.random.default_rng(env_ss),
            np.random.default_rng(att_ss),
            np.random.default_rng(def_ss),
            collect=False,
            greedy=not sample,
            manager_rng=np.random.default_rng(mgr_ss),
        )
        scores.append(result.defender_reward)
        wins.append(result.winner is Winner.DEFENDER)
        lengths.append(result.length)

    return EvalReport(
        defender_label=defender_label,
        attacker_type=attacker_kind.value,
        scores=scores,
        win_flags=wins,
        episode_lengths=lengths,
        mean=float(np.mean(scores)),
        iqm=iqm(scores),
        win_rate=win_rate(wins),
        histogram=score_distribution(scores, bin_count),
        seed=seed,
        n_episodes=n_episodes,
    )


@dataclass
class CrossEvalResult:
    """Full defender x attacker-type matrix plus per-defender averages."""

    reports: dict[tuple[str, str], EvalReport]
    errors: dict[tuple[str, str], str]
    defender_labels: list[str]
    attacker_types: list[str]

    def defender_average(self, label: str) -> float:
        row = [
            self.reports[(label, at)].mean
            for at in self.attacker_types
            if (label, at) in self.reports
        ]
        return float(np.mean(row))

    def matrix_csv(self) -> str:
        lines = [MATRIX_CSV_HEADER]
        for label in self.defender_labels:
            for at in self.attacker_types:
                rep = self.reports.get((label, at))
                if rep is None:
                    lines.append(f"{label},{at},error,error,error,0")
                else:
                    lines.append(
                        f"{label},{at},{rep.mean!r},{rep.iqm!r},{rep.win_rate!r},{rep.n_episodes}"
                    )
        return "\n".join(lines) + "\n"


def matchup_cell_seeds(seed: int, n_cells: int) -> list[int]:
    """Per-cell seeds in row-major (defender, attacker) order, fixed up front
    so cells stay independent of execution order (or parallelism)."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n_cells)]


def cross_evaluate(
    defenders: list[tuple[str, object]],
    attackers: dict[AttackerKind, object],
    n_episodes: int,
    graph_params: GraphParams,
    seed: int,
    game_config: GameConfig | None = None,
    defender_params: DefenderTypeParams | None = None,
    sample: bool = True,
    bin_count: int = 30,
) -> CrossEvalResult:
    """Evaluate every defender against every attacker type.

    A failing cell is recorded as an error without aborting the rest of the
    matrix.
    """
    if not defenders or not attackers:
        raise InvalidConfigError("need at least one defender and one attacker type")
    attacker_kinds = list(attackers.keys())
    cell_seeds = matchup_cell_seeds(seed, len(defenders) * len(attacker_kinds))
    reports: dict[tuple[str, str], EvalReport] = {}
    errors: dict[tuple[str, str], str] = {}
    i = 0
    for label, defender in defenders:
        for kind in attacker_kinds:
            cell_seed = cell_seeds[i]
            i += 1
            try:
                reports[(label, kind.value)] = evaluate_matchup(
                    defender,
                    attackers[kind],
                    kind,
                    n_episodes,
                    graph_params,
                    cell_seed,
                    game_config,
                    defender_params,
                    sample=sample,
                    defender_label=label,
                    bin_count=bin_count,
                )
            except Exception as exc:  # keep the rest of the matrix alive
                errors[(label, kind.value)] = f"{type(exc).__name__}: {exc}"
    return CrossEvalResult(
        reports=reports,
        errors=errors,
        defender_labels=[label for label, _ in defenders],
        attacker_types=[k.value for k in attacker_kinds],
    )
