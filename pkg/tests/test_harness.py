"""Experiment orchestration: seeding, run equivalences, emitted files."""

import json

import numpy as np
import pytest

from cmmsim.harness import (
    ExperimentConfig,
    emit_fusion_log,
    emit_series,
    resolve_scenario,
    run_and_emit,
    run_experiment,
    run_trial,
    substream,
    trial_mean_rmse,
    trial_seed,
)
from cmmsim.metrics import MetricsRecord
from cmmsim.particle_filter import FilterConfig


def small_filter(**kw):
    base = dict(particles=120, diffusion_sigma=0.2, noise_sigma=1.0, softness=0.5, init_sigma=5.0)
    base.update(kw)
    return FilterConfig(**base)


class TestSeeding:
    def test_substream_reproducible(self):
        a = substream(7, 3, 5, 2).random(4)
        b = substream(7, 3, 5, 2).random(4)
        np.testing.assert_array_equal(a, b)

    def test_substream_slots_independent(self):
        base = substream(7, 3, 5, 2).random(4)
        for other in [(8, 3, 5, 2), (7, 4, 5, 2), (7, 3, 6, 2), (7, 3, 5, 3)]:
            assert (substream(*other).random(4) != base).any()

    def test_trial_seeds_distinct(self):
        seeds = [trial_seed(1234, k) for k in range(20)]
        assert len(set(seeds)) == 20


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ExperimentConfig(steps=0)
        with pytest.raises(ValueError):
            ExperimentConfig(trials=0)
        with pytest.raises(ValueError):
            ExperimentConfig(seed=-1)
        with pytest.raises(ValueError):
            ExperimentConfig(mode="peer_to_peer")
        with pytest.raises(ValueError):
            ExperimentConfig(policy="bogus")

    def test_defaults_parse(self):
        cfg = ExperimentConfig()
        assert cfg.scenario == "four_vehicle"
        assert cfg.mode == "decentralized"


class TestRunEquivalences:
    def test_deterministic_repeat(self):
        cfg = ExperimentConfig(steps=10, trials=2, filter=small_filter())
        one = run_experiment(cfg)
        two = run_experiment(cfg)
        for a, b in zip(one, two):
            np.testing.assert_array_equal(a.estimates, b.estimates)
            np.testing.assert_array_equal(a.truth, b.truth)
            assert a.events == b.events

    def test_trials_differ(self):
        cfg = ExperimentConfig(steps=10, trials=2, filter=small_filter())
        one, two = run_experiment(cfg)
        assert (one.estimates != two.estimates).any()

    def test_single_vehicle_centralized_equals_identity(self):
        # With one vehicle there is nothing to fuse or pool: the pooled
        # filter and the lone decentralized filter consume the same
        # substreams, so the trajectories must match bit for bit.
        base = dict(scenario="single_vehicle", steps=15, trials=1, filter=small_filter())
        cent = run_experiment(ExperimentConfig(mode="centralized", policy="identity", **base))
        dec = run_experiment(ExperimentConfig(mode="decentralized", policy="identity", **base))
        np.testing.assert_array_equal(cent[0].estimates, dec[0].estimates)
        np.testing.assert_array_equal(cent[0].truth, dec[0].truth)

    def test_centralized_variance_is_zero(self):
        cfg = ExperimentConfig(mode="centralized", steps=8, trials=1, filter=small_filter())
        (res,) = run_experiment(cfg)
        assert all(r.variance == 0.0 for r in res.records)

    def test_identity_policy_produces_no_fusion_rows(self):
        cfg = ExperimentConfig(policy="identity", steps=5, trials=1, filter=small_filter())
        (res,) = run_experiment(cfg)
        assert res.fusion_rows == []

    def test_fusion_budgets_sum_to_capacity(self):
        cfg = ExperimentConfig(policy="max_degree", steps=4, trials=1, filter=small_filter())
        (res,) = run_experiment(cfg)
        assert res.fusion_rows
        totals = {}
        for t, node, _, count in res.fusion_rows:
            totals[(t, node)] = totals.get((t, node), 0) + count
        assert set(totals.values()) == {120}

    def test_estimates_shape_and_records(self):
        cfg = ExperimentConfig(steps=6, trials=1, filter=small_filter())
        (res,) = run_experiment(cfg)
        assert res.estimates.shape == (6, 4, 2)
        assert res.truth.shape == (6, 2)
        assert [r.t for r in res.records] == list(range(1, 7))


class TestEvents:
    def test_divergence_logged_and_run_continues(self):
        # A huge initial offset on a single road is unobservable along the
        # road, so the error stays far beyond the cap.
        cfg = ExperimentConfig(
            scenario="single_vehicle",
            steps=5,
            trials=1,
            seed=7,
            init_offset_sigma=500.0,
            filter=small_filter(),
        )
        (res,) = run_experiment(cfg)
        assert any(e[0] == "diverged" for e in res.events)
        assert len(res.records) == 5

    def test_degenerate_recovery_keeps_run_alive(self):
        # Hard constraint plus a lateral offset far beyond the corridor
        # kills every hypothesis at t=1; the filter must reset to uniform
        # weights, log the event, and keep producing records.
        cfg = ExperimentConfig(
            scenario="single_vehicle",
            steps=4,
            trials=1,
            seed=11,
            init_offset_sigma=40.0,
            filter=small_filter(softness=0.0, noise_sigma=0.0, init_sigma=1.0),
        )
        (res,) = run_experiment(cfg)
        assert any(e[0] == "degenerate" for e in res.events)
        assert len(res.records) == 4
        assert np.isfinite(res.estimates).all()


class TestEmit:
    def test_series_round_trip(self, tmp_path):
        cfg = ExperimentConfig(steps=5, trials=1, filter=small_filter())
        (res,) = run_experiment(cfg)
        path = tmp_path / "series.csv"
        emit_series(res.records, path)
        lines = path.read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header[:4] == ["t", "rmse", "variance", "mean_bias_sq"]
        assert header[4:] == [f"err_node_{i}" for i in range(4)]
        for line, rec in zip(lines[1:], res.records):
            cells = line.split(",")
            assert int(cells[0]) == rec.t
            assert float(cells[1]) == rec.rmse
            assert float(cells[2]) == rec.variance
            assert float(cells[3]) == rec.mean_bias_sq
            assert tuple(float(c) for c in cells[4:]) == rec.per_node_error

    def test_series_rejects_broken_identity(self, tmp_path):
        bad = MetricsRecord(1, 5.0, 9.0, 15.0, (5.0,))
        with pytest.raises(ValueError):
            emit_series([bad], tmp_path / "bad.csv")

    def test_series_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_series([], tmp_path / "empty.csv")

    def test_fusion_log_format(self, tmp_path):
        path = tmp_path / "fusion.csv"
        emit_fusion_log([(1, 0, 1, 60), (1, 0, 0, 60)], path)
        assert path.read_text() == "t,node,source,count\n1,0,1,60\n1,0,0,60\n"

    def test_run_and_emit_writes_files(self, tmp_path):
        cfg = ExperimentConfig(steps=5, trials=2, filter=small_filter())
        summary = run_and_emit(cfg, tmp_path / "out")
        for k in range(2):
            assert (tmp_path / "out" / f"metrics_trial{k}.csv").exists()
            assert (tmp_path / "out" / f"fusion_trial{k}.csv").exists()
        on_disk = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert on_disk == summary
        assert on_disk["nodes"] == 4
        assert set(on_disk["events"]) == {"degenerate", "diverged", "shortfall"}

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        cfg = ExperimentConfig(steps=5, trials=1, filter=small_filter())
        run_and_emit(cfg, tmp_path / "a")
        run_and_emit(cfg, tmp_path / "b")
        for name in ("metrics_trial0.csv", "fusion_trial0.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestAggregation:
    def test_trial_mean_rmse_averages_steady_state(self):
        cfg = ExperimentConfig(steps=6, trials=2, filter=small_filter())
        results = run_experiment(cfg)
        expected = np.mean(
            [np.mean([r.rmse for r in res.records[3:]]) for res in results]
        )
        assert trial_mean_rmse(results) == pytest.approx(float(expected))

    def test_resolve_scenario_builtin(self):
        scn = resolve_scenario(ExperimentConfig())
        assert scn.n == 4

    def test_run_trial_modes(self):
        cfg = ExperimentConfig(steps=3, trials=1, filter=small_filter())
        scn = resolve_scenario(cfg)
        dec = run_trial(cfg, scn, 99)
        cent = run_trial(
            ExperimentConfig(mode="centralized", steps=3, trials=1, filter=small_filter()),
            scn,
            99,
        )
        assert dec.estimates.shape == cent.estimates.shape
        np.testing.assert_array_equal(dec.truth, cent.truth)
