import math

import numpy as np
import pytest

import adafm.boosting as boosting
from adafm import (
    BoostConfig,
    BoostingError,
    EnsembleModel,
    Measure,
    PerUserPerformance,
    TrainConfig,
    compute_alpha,
    run_adafm,
    save_model,
    update_weights,
)
from datagen import planted_dataset


class TestComputeAlpha:
    def test_useless_component_gets_near_zero(self):
        eps = 1e-6
        alpha = compute_alpha(np.array([0.5, 0.5]), {0: 0.0, 1: 0.0}, eps)
        expected = 0.5 * math.log((1 + eps) / (1 - eps))
        assert alpha == pytest.approx(expected, rel=1e-9)
        assert alpha == pytest.approx(eps, rel=1e-3)

    def test_direct_formula(self):
        alpha = compute_alpha(np.array([0.5, 0.5]), {0: 0.5, 1: 0.5})
        assert alpha == pytest.approx(0.5 * math.log(3), abs=1e-12)

    def test_perfect_component_is_clamped_finite(self):
        eps = 1e-6
        alpha = compute_alpha(np.array([1.0]), {0: 1.0}, eps)
        # 1 - (1 - eps) loses a few trailing bits, hence the loose tolerance
        assert alpha == pytest.approx(0.5 * math.log((2 - eps) / eps), rel=1e-6)
        assert math.isfinite(alpha)

    def test_invariant_to_weight_rescaling(self):
        e = {0: 0.3, 1: 0.9, 2: 0.6}
        a = compute_alpha(np.array([0.2, 0.3, 0.5]), e)
        b = compute_alpha(7.0 * np.array([0.2, 0.3, 0.5]), e)
        assert a == pytest.approx(b, rel=1e-12)

    def test_dominating_component_gets_larger_alpha(self):
        weights = np.array([0.25, 0.25, 0.5])
        low = {0: 0.4, 1: 0.6, 2: 0.5}
        high = {0: 0.4, 1: 0.7, 2: 0.5}
        assert compute_alpha(weights, high) > compute_alpha(weights, low)

    def test_skips_undefined_users(self):
        # weight on an undefined user drops out of both sums
        a = compute_alpha(np.array([0.5, 0.25, 0.25]), {1: 0.8, 2: 0.4})
        b = compute_alpha(np.array([0.0, 0.5, 0.5]), {1: 0.8, 2: 0.4})
        assert a == pytest.approx(b, rel=1e-12)

    def test_no_defined_users_raises(self):
        with pytest.raises(BoostingError):
            compute_alpha(np.array([1.0]), {})


class TestUpdateWeights:
    def test_equal_accuracy_gives_uniform(self):
        p = update_weights({0: 0.7, 1: 0.7, 2: 0.7}, 3)
        assert np.allclose(p, 1 / 3, atol=1e-15)

    def test_direct_softmax(self):
        p = update_weights({0: 0.0, 1: 1.0}, 2)
        assert p[0] == pytest.approx(0.7311, abs=1e-4)
        assert p[1] == pytest.approx(0.2689, abs=1e-4)

    def test_sums_to_one(self):
        gen = np.random.default_rng(0)
        for _ in range(20):
            e = {a: float(gen.random()) for a in range(10)}
            p = update_weights(e, 10)
            assert abs(p.sum() - 1.0) < 1e-12

    def test_hard_users_gain_weight(self):
        gen = np.random.default_rng(1)
        e = {a: float(gen.random()) for a in range(8)}
        p = update_weights(e, 8)
        for a in range(8):
            for b in range(8):
                if e[a] < e[b]:
                    assert p[a] > p[b]

    def test_undefined_users_get_zero(self):
        p = update_weights({1: 0.5}, 3)
        assert p[0] == 0.0 and p[2] == 0.0 and p[1] == 1.0

    def test_empty_raises(self):
        with pytest.raises(BoostingError):
            update_weights({}, 4)


def _desk_config(rounds=2, iters=800, seed=3, **kw):
    return BoostConfig(
        rounds=rounds,
        train=TrainConfig(eta=0.1, gamma=0.005, max_iter=iters, k=2, seed=seed),
        measure=Measure("auc"),
        eval_negatives=30,
        **kw,
    )


class TestRunAdafm:
    def test_single_round(self, tiny_ds):
        model = run_adafm(tiny_ds, _desk_config(rounds=1))
        assert model.n_components == 1
        alpha, _ = model.components[0]
        assert alpha > 0

    def test_merged_rank_additivity(self):
        ds = planted_dataset(40, 30, rank=3, seed=0, per_user=6)
        model = run_adafm(ds, _desk_config(rounds=4, iters=600))
        assert model.n_components == 4
        assert model.merged().k == 8

    def test_deterministic_model_file(self, tmp_path, tiny_ds):
        paths = []
        for name in ("a.txt", "b.txt"):
            model = run_adafm(tiny_ds, _desk_config())
            p = tmp_path / name
            save_model(model, p)
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]

    def test_round_records_and_weight_validity(self):
        ds = planted_dataset(30, 25, rank=2, seed=1, per_user=5)
        records = []
        run_adafm(ds, _desk_config(rounds=3, iters=400), on_round=records.append)
        assert [r.round for r in records] == [1, 2, 3]
        for r in records:
            assert r.alpha > 0
            assert np.all(r.weights >= 0)
            assert abs(r.weights.sum() - 1.0) < 1e-9
            row = r.csv_row()
            assert row.startswith(f"{r.round},")

    def test_alpha_rejection_retries_with_fresh_seed(self, tiny_ds, monkeypatch):
        calls = []
        real = boosting.compute_alpha

        def flaky(weights, per_user_e, e_clamp=1e-6):
            calls.append(1)
            if len(calls) <= 2:
                return -1.0
            return real(weights, per_user_e, e_clamp)

        monkeypatch.setattr(boosting, "compute_alpha", flaky)
        model = run_adafm(tiny_ds, _desk_config(rounds=1, iters=100))
        assert model.n_components == 1
        assert len(calls) == 3  # two rejected attempts, then an accepted one

    def test_all_rounds_rejected_raises(self, tiny_ds, monkeypatch):
        monkeypatch.setattr(boosting, "compute_alpha", lambda *a, **k: -1.0)
        with pytest.raises(BoostingError):
            run_adafm(tiny_ds, _desk_config(rounds=2, iters=100))

    def test_stops_with_partial_ensemble(self, tiny_ds, monkeypatch):
        real = boosting.compute_alpha
        state = {"round_one_done": False}

        def gate(weights, per_user_e, e_clamp=1e-6):
            if not state["round_one_done"]:
                state["round_one_done"] = True
                return real(weights, per_user_e, e_clamp)
            return -1.0

        monkeypatch.setattr(boosting, "compute_alpha", gate)
        model = run_adafm(tiny_ds, _desk_config(rounds=4, iters=100))
        assert model.n_components == 1

    def test_patience_early_stop(self, tiny_ds, monkeypatch):
        constant = PerUserPerformance({a: 0.6 for a in range(tiny_ds.n_users)}, Measure("auc"))

        def stub_eval(score_fn, ds, measure, weights=None, **kw):
            from adafm.metrics import EvalResult

            return EvalResult(0.6, constant, tiny_ds.n_users, 0)

        monkeypatch.setattr(boosting, "evaluate_model", stub_eval)
        model = run_adafm(
            tiny_ds,
            _desk_config(rounds=6, iters=50, patience=1),
            holdout=tiny_ds,
        )
        # round 1 sets the best; round 2 fails to improve -> stop
        assert model.n_components == 2

    def test_pointwise_dispatch(self, tiny_ds):
        cfg = BoostConfig(
            rounds=2,
            train=TrainConfig(
                eta=0.1, gamma=0.0, max_iter=300, k=2, seed=5, objective="pointwise"
            ),
            measure=Measure("auc"),
            eval_negatives=20,
        )
        model = run_adafm(tiny_ds, cfg)
        assert model.n_components == 2

    def test_training_aggregate_mostly_non_decreasing(self):
        ds = planted_dataset(120, 60, rank=4, seed=7, per_user=10)
        # the update scales the loss term by p_a/n ~ 1/n^2, so eta carries n^2
        eta = 0.05 * ds.n_users**2
        records = []
        cfg = BoostConfig(
            rounds=6,
            train=TrainConfig(eta=eta, gamma=0.0, max_iter=2000, k=2, seed=11),
            measure=Measure("auc"),
            eval_negatives=60,
        )
        run_adafm(ds, cfg, on_round=records.append)
        es = [r.ensemble_train_e for r in records]
        ups = sum(1 for a, b in zip(es, es[1:]) if b >= a - 1e-12)
        assert ups >= 0.8 * (len(es) - 1)


class TestBoostConfigValidation:
    def test_bad_values(self):
        tc = TrainConfig(eta=0.1)
        with pytest.raises(ValueError):
            BoostConfig(rounds=0, train=tc)
        with pytest.raises(ValueError):
            BoostConfig(rounds=1, train=tc, e_clamp=0.0)
        with pytest.raises(ValueError):
            BoostConfig(rounds=1, train=tc, e_clamp=0.5)
        with pytest.raises(ValueError):
            BoostConfig(rounds=1, train=tc, patience=0)
        with pytest.raises(ValueError):
            BoostConfig(rounds=1, train=tc, eval_negatives=-1)
