"""Run configuration: one JSON document covering game, RL, training, eval.

Defaults reproduce the standard experiment settings (balanced detector with
p=0.6/q=0.1, actor/critic learning rates 3e-4/5e-4, batch 64, 3500 training
epochs, 50-node evaluation networks at 0.6 edge density, 500-step episodes
with a 5000 win reward).  Every field can be overridden from a file or from
CLI flags; flags win.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from netsiege.errors import InvalidConfigError
from netsiege.game import (
    Archetype,
    AttackerVerb,
    DefenderTypeParams,
    DefenderVerb,
    GameConfig,
    GraphParams,
)
from netsiege.hippo import HippoConfig
from netsiege.rl import RLConfig


@dataclass
class TrainingSection:
    regime: str = "alternating"
    epochs: int = 3500
    seed: int = 0
    checkpoint_every: int = 100
    n_nodes: int = 50
    edge_density: float = 0.6
    vuln_range: tuple[float, float] = (0.2, 0.8)

    def graph_params(self) -> GraphParams:
        return GraphParams(self.n_nodes, self.edge_density, tuple(self.vuln_range))


@dataclass
class EvalSection:
    episodes: int = 500
    bins: int = 30
    n_nodes: int = 50
    edge_density: float = 0.6
    vuln_range: tuple[float, float] = (0.2, 0.8)
    sample: bool = True

    def graph_params(self) -> GraphParams:
        return GraphParams(self.n_nodes, self.edge_density, tuple(self.vuln_range))


@dataclass
class RunConfig:
    game: GameConfig = field(default_factory=GameConfig)
    defender: DefenderTypeParams = field(default_factory=DefenderTypeParams)
    rl: RLConfig = field(default_factory=RLConfig)
    hippo: HippoConfig = field(default_factory=HippoConfig)
    training: TrainingSection = field(default_factory=TrainingSection)
    eval: EvalSection = field(default_factory=EvalSection)
    output_dir: str = "runs"

    def to_dict(self) -> dict:
        return {
            "game": game_config_to_dict(self.game),
            "defender": defender_params_to_dict(self.defender),
            "rl": rl_config_to_dict(self.rl),
            "hippo": dataclasses.asdict(self.hippo),
            "training": _section_to_dict(self.training),
            "eval": _section_to_dict(self.eval),
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"game", "defender", "rl", "hippo", "training", "eval", "output_dir"}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown config sections: {sorted(unknown)}")
        cfg = cls()
        if "game" in data:
            cfg.game = game_config_from_dict(data["game"])
        if "defender" in data:
            cfg.defender = defender_params_from_dict(data["defender"])
        if "rl" in data:
            cfg.rl = rl_config_from_dict(data["rl"])
        if "hippo" in data:
            cfg.hippo = HippoConfig(**data["hippo"])
        if "training" in data:
            cfg.training = _section_from_dict(TrainingSection, data["training"])
        if "eval" in data:
            cfg.eval = _section_from_dict(EvalSection, data["eval"])
        if "output_dir" in data:
            cfg.output_dir = str(data["output_dir"])
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"malformed config file {path}: {exc}") from exc
        return cls.from_dict(data)


def _section_to_dict(section) -> dict:
    d = dataclasses.asdict(section)
    if "vuln_range" in d:
        d["vuln_range"] = list(d["vuln_range"])
    return d


def _section_from_dict(cls, data: dict):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise InvalidConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    kwargs = dict(data)
    if "vuln_range" in kwargs:
        kwargs["vuln_range"] = tuple(kwargs["vuln_range"])
    return cls(**kwargs)


def game_config_to_dict(cfg: GameConfig) -> dict:
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


def game_config_from_dict(data: dict) -> GameConfig:
    kwargs = dict(data)
    if "attacker_action_costs" in kwargs:
        kwargs["attacker_action_costs"] = {
            AttackerVerb(k): float(v) for k, v in kwargs["attacker_action_costs"].items()
        }
    if "defender_action_costs" in kwargs:
        kwargs["defender_action_costs"] = {
            DefenderVerb(k): float(v) for k, v in kwargs["defender_action_costs"].items()
        }
    try:
        return GameConfig(**kwargs)
    except TypeError as exc:
        raise InvalidConfigError(f"bad game config: {exc}") from exc


def defender_params_to_dict(params: DefenderTypeParams) -> dict:
    return {
        "detection_rate": params.detection_rate,
        "false_positive_rate": params.false_positive_rate,
        "archetype": params.archetype.value,
    }


def defender_params_from_dict(data: dict) -> DefenderTypeParams:
    kwargs = dict(data)
    if "archetype" in kwargs:
        kwargs["archetype"] = Archetype(kwargs["archetype"])
    try:
        return DefenderTypeParams(**kwargs)
    except TypeError as exc:
        raise InvalidConfigError(f"bad defender params: {exc}") from exc


def rl_config_to_dict(cfg: RLConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["hidden"] = list(d["hidden"])
    return d


def rl_config_from_dict(data: dict) -> RLConfig:
    kwargs = dict(data)
    if "hidden" in kwargs:
        kwargs["hidden"] = tuple(kwargs["hidden"])
    try:
        return RLConfig(**kwargs)
    except TypeError as exc:
        raise InvalidConfigError(f"bad rl config: {exc}") from exc
