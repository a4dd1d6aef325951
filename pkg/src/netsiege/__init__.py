"""netsiege: a network attack-defense game and self-play RL laboratory.

The package simulates a two-player game on a randomly generated computer
network.  An attacker (ransomware- or APT-style) tries to compromise nodes
while a defender, seeing only noisy alerts, tries to eliminate the intrusion.
Both sides are trained with PPO in self-play; the defender can optionally use
a hierarchical policy that commits to one specialist sub-policy per interval.

Public API is re-exported from the submodules below; see README.md for a tour.
"""

from netsiege.netgraph import (
    NetworkGraph,
    NodeState,
    compromised_fraction,
    generate_network,
    isolate,
    reconnect,
)
from netsiege.game import (
    AttackerAction,
    AttackerKind,
    DefenderAction,
    DefenderTypeParams,
    GameConfig,
    GameState,
    GraphParams,
    Winner,
    defender_utility,
    init_episode,
    step,
)
from netsiege.rl import PPOAgent, RLConfig, gae_advantages, ppo_loss
from netsiege.hippo import HippoAgent, HippoConfig
from netsiege.training import TrainingRegime, run_training, smooth_curve
from netsiege.evaluation import cross_evaluate, evaluate_matchup, iqm, win_rate

__version__ = "0.1.0"

__all__ = [
    "NetworkGraph",
    "NodeState",
    "generate_network",
    "isolate",
    "reconnect",
    "compromised_fraction",
    "AttackerAction",
    "AttackerKind",
    "DefenderAction",
    "DefenderTypeParams",
    "GameConfig",
    "GameState",
    "GraphParams",
    "Winner",
    "init_episode",
    "step",
    "defender_utility",
    "PPOAgent",
    "RLConfig",
    "gae_advantages",
    "ppo_loss",
    "HippoAgent",
    "HippoConfig",
    "TrainingRegime",
    "run_training",
    "smooth_curve",
    "evaluate_matchup",
    "cross_evaluate",
    "iqm",
    "win_rate",
    "__version__",
]
