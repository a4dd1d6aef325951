"""The partially observable attack-defense game.

Each timestep both players commit a compound action: the defender's action
is applied first, then the attacker's.  The attacker sees the true compromise
state; the defender sees only per-node alerts generated by a noisy detector
(true positives with probability ``p`` on the node the attacker touched,
false positives with probability ``q`` elsewhere, optionally sharpened by a
Scan).  The episode ends when the attacker executes its objective, when the
defender eliminates every compromised node, or at the timestep limit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from netsiege.errors import ContractViolation, InvalidConfigError, InvalidTargetError
from netsiege.netgraph import (
    NetworkGraph,
    accessible_ids,
    compromised_fraction,
    generate_network,
    isolate,
    reconnect,
)


class AttackerKind(str, enum.Enum):
    RANSOMWARE = "ransomware"
    APT = "apt"


class Winner(str, enum.Enum):
    NONE = "none"
    ATTACKER = "attacker"
    DEFENDER = "defender"
    TIMEOUT = "timeout"


class AttackerVerb(str, enum.Enum):
    BASIC_ATTACK = "basic_attack"
    ZERO_DAY = "zero_day"
    MOVE = "move"
    DO_NOTHING = "do_nothing"
    EXECUTE = "execute"


class DefenderVerb(str, enum.Enum):
    REDUCE_VULNERABILITY = "reduce_vulnerability"
    MAKE_NODE_SAFE = "make_node_safe"
    RESTORE_NODE = "restore_node"
    SCAN = "scan"
    ISOLATE = "isolate"
    RECONNECT = "reconnect"
    DO_NOTHING = "do_nothing"


ATTACKER_TARGETED_VERBS = frozenset(
    {AttackerVerb.BASIC_ATTACK, AttackerVerb.ZERO_DAY, AttackerVerb.MOVE}
)
DEFENDER_TARGETED_VERBS = frozenset(
    {
        DefenderVerb.REDUCE_VULNERABILITY,
        DefenderVerb.MAKE_NODE_SAFE,
        DefenderVerb.RESTORE_NODE,
        DefenderVerb.ISOLATE,
        DefenderVerb.RECONNECT,
    }
)


@dataclass(frozen=True)
class AttackerAction:
    verb: AttackerVerb
    target: int | None = None

    def __post_init__(self):
        needs_target = self.verb in ATTACKER_TARGETED_VERBS
        if needs_target and self.target is None:
            raise InvalidTargetError(f"{self.verb.value} requires a target node")
        if not needs_target and self.target is not None:
            raise InvalidTargetError(f"{self.verb.value} takes no target")


@dataclass(frozen=True)
class DefenderAction:
    verb: DefenderVerb
    target: int | None = None

    def __post_init__(self):
        needs_target = self.verb in DEFENDER_TARGETED_VERBS
        if needs_target and self.target is None:
            raise InvalidTargetError(f"{self.verb.value} requires a target node")
        if not needs_target and self.target is not None:
            raise InvalidTargetError(f"{self.verb.value} takes no target")


def _default_attacker_costs() -> dict[AttackerVerb, float]:
    return {
        AttackerVerb.BASIC_ATTACK: 1.0,
        AttackerVerb.ZERO_DAY: 5.0,
        AttackerVerb.MOVE: 1.0,
        AttackerVerb.DO_NOTHING: 0.0,
        AttackerVerb.EXECUTE: 0.0,
    }


def _default_defender_costs() -> dict[DefenderVerb, float]:
    return {
        DefenderVerb.REDUCE_VULNERABILITY: 2.0,
        DefenderVerb.MAKE_NODE_SAFE: 5.0,
        DefenderVerb.RESTORE_NODE: 10.0,
        DefenderVerb.SCAN: 1.0,
        DefenderVerb.ISOLATE: 5.0,
        DefenderVerb.RECONNECT: 2.0,
        DefenderVerb.DO_NOTHING: 0.0,
    }


@dataclass
class GameConfig:
    """Episode-level rules: costs, payoffs, thresholds, limits.

    ``defender_win_reward`` is coupled to the cost table: it must equal the
    highest defender action cost times ``max_timesteps`` (so a defender that
    burns the most expensive action every step of a lost episode scores the
    exact negative of a win).  Leave it ``None`` to derive it.
    """

    max_timesteps: int = 500
    defender_win_reward: float | None = None
    ransomware_threshold: float = 0.8
    attacker_action_costs: dict[AttackerVerb, float] = field(
        default_factory=_default_attacker_costs
    )
    defender_action_costs: dict[DefenderVerb, float] = field(
        default_factory=_default_defender_costs
    )
    ransomware_node_value: float = 100.0
    apt_exfil_value: float = 5000.0
    zero_day_budget: int = 3
    reduce_vuln_decrement: float = 0.2
    scan_reveal_probability: float | None = None  # None: use the detection rate p

    def __post_init__(self):
        if self.max_timesteps < 1:
            raise InvalidConfigError("max_timesteps must be >= 1")
        if not (0.0 <= self.ransomware_threshold <= 1.0):
            raise InvalidConfigError("ransomware_threshold must be in [0, 1]")
        if any(c < 0 for c in self.attacker_action_costs.values()):
            raise InvalidConfigError("attacker action costs must be nonnegative")
        if any(c < 0 for c in self.defender_action_costs.values()):
            raise InvalidConfigError("defender action costs must be nonnegative")
        if self.zero_day_budget < 0:
            raise InvalidConfigError("zero_day_budget must be >= 0")
        if self.scan_reveal_probability is not None and not (
            0.0 <= self.scan_reveal_probability <= 1.0
        ):
            raise InvalidConfigError("scan_reveal_probability must be in [0, 1]")
        derived = self.max_defender_cost() * self.max_timesteps
        if self.defender_win_reward is None:
            self.defender_win_reward = derived
        elif self.defender_win_reward != derived:
            raise InvalidConfigError(
                f"defender_win_reward {self.defender_win_reward} inconsistent with "
                f"max defender cost x max_timesteps = {derived}"
            )

    def max_defender_cost(self) -> float:
        return max(self.defender_action_costs.values())


class Archetype(str, enum.Enum):
    CAUTIOUS = "cautious"
    BALANCED = "balanced"
    CONSTRAINED = "constrained"
    CUSTOM = "custom"


# Open (p_lo, p_hi, q_lo, q_hi) bands per named archetype.
ARCHETYPE_BANDS: dict[Archetype, tuple[float, float, float, float]] = {
    Archetype.CAUTIOUS: (0.7, 1.0, 0.2, 0.3),
    Archetype.BALANCED: (0.5, 0.7, 0.1, 0.2),
    Archetype.CONSTRAINED: (0.3, 0.5, 0.0, 0.1),
}


@dataclass
class DefenderTypeParams:
    """Detection quality of the defending organization.

    ``detection_rate`` (p) is the chance the node the attacker touched this
    timestep raises an alert; ``false_positive_rate`` (q) is the chance any
    other node raises one anyway.  The action-cost table lives on
    :class:`GameConfig` and is shared with the rest of the episode rules.
    The default (p=0.6, q=0.1) sits on the boundary of the balanced band,
    so it carries the ``CUSTOM`` label.
    """

    detection_rate: float = 0.6
    false_positive_rate: float = 0.1
    archetype: Archetype = Archetype.CUSTOM

    def __post_init__(self):
        if not (0.0 <= self.detection_rate <= 1.0):
            raise InvalidConfigError("detection_rate must be in [0, 1]")
        if not (0.0 <= self.false_positive_rate <= 1.0):
            raise InvalidConfigError("false_positive_rate must be in [0, 1]")
        band = ARCHETYPE_BANDS.get(self.archetype)
        if band is not None:
            p_lo, p_hi, q_lo, q_hi = band
            if not (p_lo < self.detection_rate < p_hi and q_lo < self.false_positive_rate < q_hi):
                raise InvalidConfigError(
                    f"archetype {self.archetype.value} requires p in ({p_lo}, {p_hi}) "
                    f"and q in ({q_lo}, {q_hi}); got p={self.detection_rate}, "
                    f"q={self.false_positive_rate}"
                )

    @classmethod
    def from_archetype(cls, archetype: Archetype, rng: np.random.Generator) -> "DefenderTypeParams":
        """Sample p and q uniformly from a named archetype's band."""
        if archetype not in ARCHETYPE_BANDS:
            raise InvalidConfigError(f"{archetype} has no sampling band")
        p_lo, p_hi, q_lo, q_hi = ARCHETYPE_BANDS[archetype]
        return cls(
            detection_rate=float(rng.uniform(p_lo, p_hi)),
            false_positive_rate=float(rng.uniform(q_lo, q_hi)),
            archetype=archetype,
        )


@dataclass(frozen=True)
class GraphParams:
    """Topology generation knobs for a fresh episode."""

    n_nodes: int = 50
    edge_density: float = 0.6
    vuln_range: tuple[float, float] = (0.2, 0.8)


@dataclass
class GameState:
    """Full mutable episode state; one instance per episode."""

    graph: NetworkGraph
    config: GameConfig
    defender_params: DefenderTypeParams
    attacker_kind: AttackerKind
    entry_node: int
    timestep: int = 0
    attacker_cost_accum: float = 0.0
    defender_cost_accum: float = 0.0
    zero_days_remaining: int = 0
    ever_compromised: bool = False
    executed: bool = False
    scan_pending: bool = False
    done: bool = False
    winner: Winner = Winner.NONE


@dataclass(frozen=True)
class AttackerOutcome:
    """What an attacker action did: its cost, whether a compromise landed,
    and whether the action was rejected as invalid (no-op, zero cost)."""

    cost: float
    succeeded: bool = False
    invalid: bool = False


# ---------------------------------------------------------------------------
# Observations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttackerObservation:
    """True state as the attacker sees it; never includes alert flags."""

    compromised: np.ndarray
    accessible: np.ndarray
    vulnerability: np.ndarray
    high_value: np.ndarray
    isolated: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                self.compromised.astype(np.float64),
                self.accessible.astype(np.float64),
                self.vulnerability.astype(np.float64),
                self.high_value.astype(np.float64),
                self.isolated.astype(np.float64),
            ]
        )


@dataclass(frozen=True)
class DefenderObservation:
    """Noisy view for the defender; never includes true compromise flags."""

    alerts: np.ndarray
    vulnerability: np.ndarray
    isolated: np.ndarray
    high_value: np.ndarray
    timestep_fraction: float

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                self.alerts.astype(np.float64),
                self.vulnerability.astype(np.float64),
                self.isolated.astype(np.float64),
                self.high_value.astype(np.float64),
                np.array([self.timestep_fraction], dtype=np.float64),
            ]
        )


def attacker_observation_dim(n_nodes: int) -> int:
    return 5 * n_nodes


def defender_observation_dim(n_nodes: int) -> int:
    return 4 * n_nodes + 1


def observe_attacker(state: GameState) -> AttackerObservation:
    g = state.graph
    frontier = accessible_ids(g)
    return AttackerObservation(
        compromised=np.array([n.compromised for n in g.nodes], dtype=bool),
        accessible=np.array([n.id in frontier for n in g.nodes], dtype=bool),
        vulnerability=np.array([n.vulnerability for n in g.nodes], dtype=np.float64),
        high_value=np.array([n.is_high_value for n in g.nodes], dtype=bool),
        isolated=np.array([n.isolated for n in g.nodes], dtype=bool),
    )


def observe_defender(
    state: GameState,
    attacker_action: AttackerAction | None,
    rng: np.random.Generator,
) -> DefenderObservation:
    """Generate this timestep's noisy alert vector and defender view.

    The node the attacker targeted alerts with probability p; every other
    node alerts with probability q.  If a scan is pending (the defender
    played Scan this timestep), each node's alert is replaced by its true
    compromise flag with the scan-reveal probability.  Alert flags are
    written back onto the nodes.
    """
    g = state.graph
    n = g.n_nodes
    p = state.defender_params.detection_rate
    q = state.defender_params.false_positive_rate
    target = None
    if attacker_action is not None and attacker_action.verb in ATTACKER_TARGETED_VERBS:
        target = attacker_action.target

    thresholds = np.full(n, q, dtype=np.float64)
    if target is not None:
        thresholds[target] = p
    alerts = rng.random(n) < thresholds

    if state.scan_pending:
        reveal_p = state.config.scan_reveal_probability
        if reveal_p is None:
            reveal_p = p
        revealed = rng.random(n) < reveal_p
        truth = np.array([node.compromised for node in g.nodes], dtype=bool)
        alerts = np.where(revealed, truth, alerts)

    for node, flag in zip(g.nodes, alerts):
        node.alert = bool(flag)

    return DefenderObservation(
        alerts=alerts,
        vulnerability=np.array([node.vulnerability for node in g.nodes], dtype=np.float64),
        isolated=np.array([node.isolated for node in g.nodes], dtype=bool),
        high_value=np.array([node.is_high_value for node in g.nodes], dtype=bool),
        timestep_fraction=state.timestep / state.config.max_timesteps,
    )


def quiet_defender_observation(state: GameState) -> DefenderObservation:
    """Defender view with the current stored alert flags (used at episode
    start, before any attacker activity)."""
    g = state.graph
    return DefenderObservation(
        alerts=np.array([n.alert for n in g.nodes], dtype=bool),
        vulnerability=np.array([n.vulnerability for n in g.nodes], dtype=np.float64),
        isolated=np.array([n.isolated for n in g.nodes], dtype=bool),
        high_value=np.array([n.is_high_value for n in g.nodes], dtype=bool),
        timestep_fraction=state.timestep / state.config.max_timesteps,
    )


# ---------------------------------------------------------------------------
# Action space indexing and validity masks
# ---------------------------------------------------------------------------
# Attacker layout: [BasicAttack x n | ZeroDay x n | Move x n | DoNothing | Execute]
# Defender layout: [ReduceVuln x n | MakeSafe x n | Restore x n | Isolate x n
#                   | Reconnect x n | Scan | DoNothing]

def attacker_action_count(n_nodes: int) -> int:
    return 3 * n_nodes + 2


def defender_action_count(n_nodes: int) -> int:
    return 5 * n_nodes + 2


def attacker_action_from_index(index: int, n_nodes: int) -> AttackerAction:
    if 0 <= index < n_nodes:
        return AttackerAction(AttackerVerb.BASIC_ATTACK, index)
    if n_nodes <= index < 2 * n_nodes:
        return AttackerAction(AttackerVerb.ZERO_DAY, index - n_nodes)
    if 2 * n_nodes <= index < 3 * n_nodes:
        return AttackerAction(AttackerVerb.MOVE, index - 2 * n_nodes)
    if index == 3 * n_nodes:
        return AttackerAction(AttackerVerb.DO_NOTHING)
    if index == 3 * n_nodes + 1:
        return AttackerAction(AttackerVerb.EXECUTE)
    raise InvalidTargetError(f"attacker action index {index} out of range")


def defender_action_from_index(index: int, n_nodes: int) -> DefenderAction:
    verbs = [
        DefenderVerb.REDUCE_VULNERABILITY,
        DefenderVerb.MAKE_NODE_SAFE,
        DefenderVerb.RESTORE_NODE,
        DefenderVerb.ISOLATE,
        DefenderVerb.RECONNECT,
    ]
    block, offset = divmod(index, n_nodes)
    if 0 <= block < 5:
        return DefenderAction(verbs[block], offset)
    if index == 5 * n_nodes:
        return DefenderAction(DefenderVerb.SCAN)
    if index == 5 * n_nodes + 1:
        return DefenderAction(DefenderVerb.DO_NOTHING)
    raise InvalidTargetError(f"defender action index {index} out of range")


def attacker_action_mask(state: GameState) -> np.ndarray:
    """Boolean validity mask over the attacker action space.

    Attacks require a target adjacent to a compromised node that is not yet
    compromised itself; zero-days additionally need budget; Move requires an
    accessible destination.  DoNothing and Execute are always available.
    """
    g = state.graph
    n = g.n_nodes
    frontier = accessible_ids(g)
    attackable = np.array(
        [node.id in frontier and not node.compromised for node in g.nodes], dtype=bool
    )
    mask = np.zeros(attacker_action_count(n), dtype=bool)
    mask[0:n] = attackable
    if state.zero_days_remaining > 0:
        mask[n : 2 * n] = attackable
    mask[2 * n : 3 * n] = attackable
    mask[3 * n] = True
    mask[3 * n + 1] = True
    return mask


def defender_action_mask(state: GameState) -> np.ndarray:
    """All defender actions are well-defined on every node."""
    return np.ones(defender_action_count(state.graph.n_nodes), dtype=bool)


# ---------------------------------------------------------------------------
# Episode lifecycle
# ---------------------------------------------------------------------------

def init_episode(
    config: GameConfig,
    defender_params: DefenderTypeParams,
    graph_params: GraphParams,
    rng: np.random.Generator,
    attacker_kind: AttackerKind = AttackerKind.RANSOMWARE,
    graph: NetworkGraph | None = None,
) -> GameState:
    """Start a fresh episode: new topology, one compromised entry node.

    The entry foothold is drawn uniformly from the non-high-value nodes.
    Pass ``graph`` to reuse a fixed topology (a private copy is taken).
    """
    if graph is None:
        graph = generate_network(
            graph_params.n_nodes, graph_params.edge_density, graph_params.vuln_range, rng
        )
    else:
        graph = graph.copy()
    if graph.n_nodes < 2:
        raise InvalidConfigError("episodes need at least 2 nodes (entry plus high-value)")
    hv = graph.high_value_id()
    candidates = [node.id for node in graph.nodes if node.id != hv]
    entry = int(candidates[rng.integers(len(candidates))])
    graph.nodes[entry].compromised = True
    return GameState(
        graph=graph,
        config=config,
        defender_params=defender_params,
        attacker_kind=attacker_kind,
        entry_node=entry,
        zero_days_remaining=config.zero_day_budget,
        ever_compromised=True,
    )


def apply_attacker_action(
    state: GameState, action: AttackerAction, rng: np.random.Generator
) -> AttackerOutcome:
    """Apply one attacker action; returns its cost/success/invalid outcome.

    A zero-day with no budget left degrades to a flagged no-op; targeting a
    node that is not adjacent to any compromised node raises.
    """
    g = state.graph
    cost = state.config.attacker_action_costs[action.verb]

    if action.verb in ATTACKER_TARGETED_VERBS:
        g.check_node(action.target)
        if action.target not in accessible_ids(g):
            raise InvalidTargetError(
                f"node {action.target} is not adjacent to any compromised node"
            )

    succeeded = False
    if action.verb is AttackerVerb.BASIC_ATTACK:
        node = g.nodes[action.target]
        if rng.random() < node.vulnerability:
            node.compromised = True
            state.ever_compromised = True
            succeeded = True
    elif action.verb is AttackerVerb.ZERO_DAY:
        if state.zero_days_remaining <= 0:
            return AttackerOutcome(cost=0.0, succeeded=False, invalid=True)
        state.zero_days_remaining -= 1
        g.nodes[action.target].compromised = True
        state.ever_compromised = True
        succeeded = True
    elif action.verb is AttackerVerb.MOVE:
        # Repositioning inside the frontier; no state change beyond cost.
        pass
    elif action.verb is AttackerVerb.EXECUTE:
        state.executed = True
    # DO_NOTHING: nothing.

    state.attacker_cost_accum += cost
    return AttackerOutcome(cost=cost, succeeded=succeeded)


def apply_defender_action(
    state: GameState, action: DefenderAction, rng: np.random.Generator
) -> float:
    """Apply one defender action and return its cost."""
    g = state.graph
    if action.verb in DEFENDER_TARGETED_VERBS:
        g.check_node(action.target)

    if action.verb is DefenderVerb.REDUCE_VULNERABILITY:
        node = g.nodes[action.target]
        node.vulnerability = max(0.0, node.vulnerability - state.config.reduce_vuln_decrement)
    elif action.verb is DefenderVerb.MAKE_NODE_SAFE:
        g.nodes[action.target].vulnerability = 0.01
    elif action.verb is DefenderVerb.RESTORE_NODE:
        node = g.nodes[action.target]
        node.compromised = False
        node.vulnerability = node.initial_vulnerability
    elif action.verb is DefenderVerb.SCAN:
        state.scan_pending = True
    elif action.verb is DefenderVerb.ISOLATE:
        isolate(g, action.target)
    elif action.verb is DefenderVerb.RECONNECT:
        reconnect(g, action.target)
    # DO_NOTHING: nothing.

    cost = state.config.defender_action_costs[action.verb]
    state.defender_cost_accum += cost
    return cost


def _objective_met(kind: AttackerKind, state: GameState) -> bool:
    if kind is AttackerKind.RANSOMWARE:
        return compromised_fraction(state.graph) >= state.config.ransomware_threshold
    hv = state.graph.high_value_id()
    return state.graph.nodes[hv].compromised


def attacker_reward(kind: AttackerKind, state: GameState) -> float:
    """Objective payoff at episode end (costs are accounted separately).

    Pays only when the episode ended through Execute: the ransomware type
    collects per compromised node once it holds at least the threshold
    fraction; the APT type collects its exfiltration value if the high-value
    node is compromised.  Timeout and elimination pay zero.
    """
    if not state.done:
        raise ContractViolation("attacker_reward is defined at episode end only")
    if not state.executed:
        return 0.0
    if kind is AttackerKind.RANSOMWARE:
        if compromised_fraction(state.graph) >= state.config.ransomware_threshold:
            n_comp = sum(1 for node in state.graph.nodes if node.compromised)
            return n_comp * state.config.ransomware_node_value
        return 0.0
    if _objective_met(AttackerKind.APT, state):
        return state.config.apt_exfil_value
    return 0.0


def defender_utility(winner: Winner, total_cost: float, win_reward: float = 5000.0) -> float:
    """Episode utility: the win reward if the defender eliminated the
    attacker, zero otherwise, minus all action costs."""
    r = win_reward if winner is Winner.DEFENDER else 0.0
    return r - total_cost


def defender_episode_utility(state: GameState) -> float:
    if not state.done:
        raise ContractViolation("defender utility is defined at episode end only")
    return defender_utility(
        state.winner, state.defender_cost_accum, state.config.defender_win_reward
    )


@dataclass(frozen=True)
class StepResult:
    attacker_obs: AttackerObservation
    defender_obs: DefenderObservation
    attacker_outcome: AttackerOutcome
    defender_cost: float
    attacker_reward: float
    defender_reward: float
    done: bool
    winner: Winner


def step(
    state: GameState,
    attacker_action: AttackerAction,
    defender_action: DefenderAction,
    rng: np.random.Generator,
) -> StepResult:
    """Advance one compound timestep (defender first, then attacker).

    An attacker action invalidated by the defender's move this very step
    (for example its target was just cut off) degrades to a flagged no-op
    instead of raising.  Step rewards are pure action costs plus terminal
    payoffs, so summing them over an episode reproduces each side's utility.
    """
    if state.done:
        raise ContractViolation("step called on a finished episode")

    defender_cost = apply_defender_action(state, defender_action, rng)

    try:
        outcome = apply_attacker_action(state, attacker_action, rng)
    except InvalidTargetError:
        outcome = AttackerOutcome(cost=0.0, succeeded=False, invalid=True)

    state.timestep += 1

    none_compromised = all(not node.compromised for node in state.graph.nodes)
    if state.ever_compromised and none_compromised:
        state.winner = Winner.DEFENDER
    elif state.executed:
        state.winner = (
            Winner.ATTACKER if _objective_met(state.attacker_kind, state) else Winner.TIMEOUT
        )
    elif state.timestep >= state.config.max_timesteps:
        state.winner = Winner.TIMEOUT
    if state.winner is not Winner.NONE:
        state.done = True

    attacker_step_reward = -outcome.cost
    defender_step_reward = -defender_cost
    if state.done:
        attacker_step_reward += attacker_reward(state.attacker_kind, state)
        if state.winner is Winner.DEFENDER:
            defender_step_reward += state.config.defender_win_reward

    defender_obs = observe_defender(state, attacker_action, rng)
    state.scan_pending = False
    attacker_obs = observe_attacker(state)

    return StepResult(
        attacker_obs=attacker_obs,
        defender_obs=defender_obs,
        attacker_outcome=outcome,
        defender_cost=defender_cost,
        attacker_reward=attacker_step_reward,
        defender_reward=defender_step_reward,
        done=state.done,
        winner=state.winner,
    )


def trace_record(
    t: int,
    attacker_action: AttackerAction,
    defender_action: DefenderAction,
    result: StepResult,
) -> dict:
    """One line-delimited log record for an episode trace."""
    return {
        "t": t,
        "attacker_verb": attacker_action.verb.value,
        "attacker_target": attacker_action.target,
        "defender_verb": defender_action.verb.value,
        "defender_target": defender_action.target,
        "attack_succeeded": result.attacker_outcome.succeeded,
        "attacker_invalid": result.attacker_outcome.invalid,
        "attacker_cost": result.attacker_outcome.cost,
        "defender_cost": result.defender_cost,
        "alerts": [int(a) for a in result.defender_obs.alerts],
        "done": result.done,
        "winner": result.winner.value,
    }
