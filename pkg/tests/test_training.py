import numpy as np
import pytest

from netsiege.errors import ContractViolation, InvalidConfigError
from netsiege.game import AttackerKind, DefenderTypeParams, GameConfig, GraphParams
from netsiege.rl import RLConfig
from netsiege.training import (
    TRAINING_LOG_HEADER,
    TrainingRegime,
    attacker_draw_stream,
    run_training,
    select_active_attacker,
    smooth_curve,
)

DESK_GAME = GameConfig(max_timesteps=60)
DESK_GRAPH = GraphParams(n_nodes=8, edge_density=0.7)
DESK_RL = RLConfig()


def desk_run(regime, epochs, seed, **kwargs):
    return run_training(
        regime, DESK_GAME, DefenderTypeParams(), DESK_RL, DESK_GRAPH,
        epochs=epochs, seed=seed, **kwargs,
    )


class TestSelectActiveAttacker:
    def test_single_type_regime_rejected(self):
        with pytest.raises(ContractViolation):
            select_active_attacker(TrainingRegime.RANSOMWARE_ONLY, np.random.default_rng(0))

    def test_draws_are_near_uniform(self):
        rng = np.random.default_rng(123)
        draws = [select_active_attacker(TrainingRegime.ALTERNATING, rng)
                 for _ in range(10000)]
        freq = sum(d is AttackerKind.RANSOMWARE for d in draws) / 10000
        assert freq == pytest.approx(0.5, abs=0.02)

    def test_seeded_sequence_reproducible(self):
        a = [select_active_attacker(TrainingRegime.HIERARCHICAL, np.random.default_rng(5))
             for _ in range(1)]
        b = [select_active_attacker(TrainingRegime.HIERARCHICAL, np.random.default_rng(5))
             for _ in range(1)]
        assert a == b

    def test_only_two_kinds_ever_returned(self):
        rng = np.random.default_rng(9)
        kinds = {select_active_attacker(TrainingRegime.ALTERNATING, rng) for _ in range(200)}
        assert kinds <= {AttackerKind.RANSOMWARE, AttackerKind.APT}


class TestRunTraining:
    def test_single_type_draw_counts(self):
        run = desk_run(TrainingRegime.RANSOMWARE_ONLY, epochs=10, seed=0)
        assert run.draw_counts == {"ransomware": 10}
        assert all(r.active_attacker == "ransomware" for r in run.records)
        assert len(run.records) == 10

    def test_multi_type_draws_sum_to_epochs(self):
        run = desk_run(TrainingRegime.ALTERNATING, epochs=12, seed=1)
        assert sum(run.draw_counts.values()) == 12
        assert set(run.draw_counts) == {"ransomware", "apt"}

    def test_inactive_attacker_untouched_in_one_epoch(self):
        run = desk_run(TrainingRegime.ALTERNATING, epochs=1, seed=3)
        drawn = [k for k, v in run.draw_counts.items() if v == 1][0]
        idle = [k for k in ("ransomware", "apt") if k != drawn][0]
        assert run.attackers[AttackerKind(drawn)].adam_actor.t > 0
        assert run.attackers[AttackerKind(idle)].adam_actor.t == 0

    def test_training_is_deterministic(self):
        a = desk_run(TrainingRegime.ALTERNATING, epochs=6, seed=11)
        b = desk_run(TrainingRegime.ALTERNATING, epochs=6, seed=11)
        assert a.log_text() == b.log_text()
        np.testing.assert_array_equal(
            a.defender.params.get_flat(), b.defender.params.get_flat()
        )
        for kind in a.attackers:
            np.testing.assert_array_equal(
                a.attackers[kind].params.get_flat(), b.attackers[kind].params.get_flat()
            )

    def test_hierarchical_regime_uses_hippo_defender(self):
        from netsiege.hippo import HippoAgent

        run = desk_run(TrainingRegime.HIERARCHICAL, epochs=4, seed=2)
        assert isinstance(run.defender, HippoAgent)
        assert len(run.defender.sub_policies) == 2

    def test_draw_stream_matches_run_counts(self):
        run = desk_run(TrainingRegime.ALTERNATING, epochs=30, seed=21)
        rng = attacker_draw_stream(21)
        expected = [select_active_attacker(TrainingRegime.ALTERNATING, rng)
                    for _ in range(30)]
        assert run.draw_counts["ransomware"] == sum(
            k is AttackerKind.RANSOMWARE for k in expected
        )
        drawn_seq = [r.active_attacker for r in run.records]
        assert drawn_seq == [k.value for k in expected]

    def test_epoch_validation(self):
        with pytest.raises(InvalidConfigError):
            desk_run(TrainingRegime.APT_ONLY, epochs=0, seed=0)

    def test_out_dir_artifacts_and_reproducibility(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        desk_run(TrainingRegime.ALTERNATING, epochs=5, seed=8, out_dir=out_a,
                 checkpoint_every=2)
        desk_run(TrainingRegime.ALTERNATING, epochs=5, seed=8, out_dir=out_b,
                 checkpoint_every=2)
        log_a = (out_a / "training_log.csv").read_bytes()
        assert log_a.startswith(TRAINING_LOG_HEADER.encode())
        assert log_a == (out_b / "training_log.csv").read_bytes()
        for name in ("manifest.json", "defender_final.npz", "defender_best.npz",
                     "attacker_ransomware_final.npz", "attacker_apt_final.npz",
                     "defender_epoch00002.npz", "defender_epoch00004.npz"):
            assert (out_a / name).exists(), name
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
        import json

        manifest = json.loads((out_a / "manifest.json").read_text())
        assert manifest["seed"] == 8
        assert sum(manifest["draw_counts"].values()) == 5


class TestSmoothCurve:
    def test_constant_series_reproduced(self):
        out = smooth_curve(np.full(40, 3.25), order=5)
        np.testing.assert_allclose(out, 3.25, atol=1e-9)

    def test_low_degree_polynomial_reproduced_exactly(self):
        x = np.arange(60, dtype=float)
        y = 2.0 - 0.3 * x + 0.01 * x**2
        out = smooth_curve(y, order=5)
        # independent oracle: solve the normal equations on a scaled domain
        xs = (x - x.mean()) / (x.max() - x.min())
        V = np.vander(xs, 6, increasing=True)
        coef, *_ = np.linalg.lstsq(V, y, rcond=None)
        expected = V @ coef
        np.testing.assert_allclose(out, expected, atol=1e-6)
        np.testing.assert_allclose(out, y, atol=1e-6)

    def test_default_order_is_five(self):
        import inspect

        assert inspect.signature(smooth_curve).parameters["order"].default == 5

    def test_degenerate_length_rejected(self):
        with pytest.raises(InvalidConfigError):
            smooth_curve(np.arange(5), order=5)
