import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qss import schemes
from qss.phasedist import fraction_to_phase, phase_to_fraction, qc_pmf
from qss.rng import RandomStream

phases = st.floats(min_value=0.0, max_value=0.5)

ALL_CONFIGS = [
    schemes.McConfig(n_shot=32),
    schemes.PeaConfig(T=64),
    schemes.BpeaConfig(T=32, n_shot=4),
    schemes.AbpeaConfig(T=64, alpha=0.8, n_min=3, n_max=8),
    schemes.MlaeConfig(t=4, n_shot=16),
    schemes.QcoinConfig(t=4, n_shot=16),
]


class TestConfigValidation:
    def test_counts_must_be_positive(self):
        with pytest.raises(ValueError):
            schemes.McConfig(n_shot=0)
        with pytest.raises(ValueError):
            schemes.MlaeConfig(t=3, n_shot=-1)

    def test_grid_sizes_power_of_two(self):
        with pytest.raises(ValueError):
            schemes.PeaConfig(T=100)

    def test_abpea_bounds(self):
        with pytest.raises(ValueError):
            schemes.AbpeaConfig(T=64, alpha=0.8, n_min=5, n_max=3)
        with pytest.raises(ValueError):
            schemes.AbpeaConfig(T=64, alpha=1.5, n_min=3, n_max=8)

    def test_qcoin_mass_open_interval(self):
        with pytest.raises(ValueError):
            schemes.QcoinConfig(t=3, n_shot=8, mass=1.0)


class TestEstimateRecord:
    def test_rejects_inconsistent_pair(self):
        with pytest.raises(ValueError):
            schemes.EstimateRecord(
                phase_estimate=0.25, fraction_estimate=0.9, queries=1, shots=1
            )

    def test_rejects_negative_costs(self):
        with pytest.raises(ValueError):
            schemes.EstimateRecord(
                phase_estimate=0.0, fraction_estimate=0.0, queries=-1, shots=0
            )


class TestMonteCarlo:
    def test_zero_phase_is_deterministic(self):
        for stream in range(5):
            rec = schemes.estimate_mc(
                0.0, schemes.McConfig(n_shot=64), RandomStream(9, stream)
            )
            assert rec.fraction_estimate == 0.0

    def test_half_phase_is_deterministic(self):
        for stream in range(5):
            rec = schemes.estimate_mc(
                0.5, schemes.McConfig(n_shot=64), RandomStream(9, stream)
            )
            assert rec.fraction_estimate == 1.0

    def test_mean_near_truth(self):
        # binomial mean, 3 sigma band (spec states the looser 0.005)
        phis = np.full(10_000, 0.25)
        res = schemes.run_batch(phis, schemes.McConfig(n_shot=1024), seed=4)
        assert abs(res.fraction.mean() - 0.5) < 0.005

    def test_cost_accounting(self):
        rec = schemes.estimate_mc(0.3, schemes.McConfig(n_shot=77), RandomStream(1))
        assert rec.queries == 77 and rec.shots == 77


class TestPea:
    def test_query_count_fig7_configuration(self):
        rec = schemes.estimate_qft_pea(0.2, schemes.PeaConfig(T=2048), RandomStream(0))
        assert rec.queries == 2047 and rec.shots == 1

    def test_on_grid_collapse(self):
        for stream in range(10):
            rec = schemes.estimate_qft_pea(
                3 / 16, schemes.PeaConfig(T=16), RandomStream(5, stream)
            )
            assert rec.phase_estimate == 3 / 16

    def test_draw_matches_inverse_cdf_of_table(self):
        # independent inverse-CDF reconstruction from the analytic table
        u = RandomStream(7, 3).uniforms(1)[0]
        cdf = np.cumsum(qc_pmf(0.1, 8).mass)
        expected = int(np.searchsorted(cdf, u, side="right")) / 8
        rec = schemes.estimate_qft_pea(0.1, schemes.PeaConfig(T=8), RandomStream(7, 3))
        assert rec.phase_estimate == expected == 0.125


class TestBpea:
    def test_query_count_fig4_configuration(self):
        rec = schemes.estimate_qft_bpea(
            0.3, schemes.BpeaConfig(T=256, n_shot=4), RandomStream(2)
        )
        assert rec.queries == 1020 and rec.shots == 4

    def test_on_grid_collapse(self):
        rec = schemes.estimate_qft_bpea(
            5 / 32, schemes.BpeaConfig(T=32, n_shot=6), RandomStream(8, 1)
        )
        assert rec.phase_estimate == 5 / 32

    def test_batch_path_equals_reference_bayes_argmax(self):
        # reconstruct the n_shot counting draws from the stream and feed
        # them through the reference estimator
        from qss.phasedist import bayes_argmax, qc_pmf

        T, n_shot, phi = 64, 5, 0.187
        seed, stream = 13, 21
        u = RandomStream(seed, stream).uniforms(n_shot)
        cdf = np.cumsum(qc_pmf(phi, T).mass)
        samples = [
            min(int(np.searchsorted(cdf, x, side="right")), T // 2) / T for x in u
        ]
        expected = bayes_argmax(samples, T)
        rec = schemes.estimate_qft_bpea(
            phi, schemes.BpeaConfig(T=T, n_shot=n_shot), RandomStream(seed, stream)
        )
        assert rec.phase_estimate == expected

    def test_beats_single_shot_pea_on_mae(self):
        # paired simulation at phi = 0.3, T = 32
        phis = np.full(10_000, 0.3)
        bpea = schemes.run_batch(
            phis, schemes.BpeaConfig(T=32, n_shot=8), seed=3, threads=2
        )
        pea = schemes.run_batch(phis, schemes.PeaConfig(T=32), seed=3, threads=2)
        mae_bpea = np.abs(bpea.fraction - phase_to_fraction(0.3)).mean()
        mae_pea = np.abs(pea.fraction - phase_to_fraction(0.3)).mean()
        assert mae_bpea < mae_pea


class TestAbpea:
    CFG = schemes.AbpeaConfig(T=512, alpha=0.8, n_min=3, n_max=8)

    def test_on_grid_terminates_at_n_min(self):
        rec = schemes.estimate_qft_abpea(8 / 512, self.CFG, RandomStream(6, 2))
        assert rec.shots == 3
        assert rec.phase_estimate == 8 / 512
        assert rec.queries == 3 * 511

    def test_smallest_case_window_trace(self):
        # alpha=0.8, n_min=3: window length floor(2.4) = 2, so any two of the
        # three initial samples within 2/T stop the loop at shots = 3.
        # On-grid phases make all samples equal, the smallest such trace.
        cfg = schemes.AbpeaConfig(T=16, alpha=0.8, n_min=3, n_max=8)
        rec = schemes.estimate_qft_abpea(0.25, cfg, RandomStream(3, 4))
        assert rec.shots == 3

    def test_shots_stay_in_declared_range(self):
        phis = np.random.default_rng(0).random(500) * 0.5
        res = schemes.run_batch(phis, self.CFG, seed=11)
        assert np.all((res.shots >= 3) & (res.shots <= 8))
        assert np.array_equal(res.queries, res.shots * 511)

    def test_mean_queries_within_budget_envelope(self):
        phis = np.random.default_rng(1).random(2000) * 0.5
        res = schemes.run_batch(phis, self.CFG, seed=12, threads=2)
        assert 3 * 511 <= res.queries.mean() <= 8 * 511


class TestMlae:
    def test_zero_phase_estimates_zero(self):
        rec = schemes.estimate_mlae(
            0.0, schemes.MlaeConfig(t=6, n_shot=64), RandomStream(4, 9)
        )
        assert rec.phase_estimate == 0.0

    def test_query_count_schedule(self):
        rec = schemes.estimate_mlae(
            0.2, schemes.MlaeConfig(t=6, n_shot=64), RandomStream(4)
        )
        assert rec.queries == 64 * (0 + 1 + 2 + 4 + 8 + 16) == 1984
        assert rec.shots == 64 * 6

    def test_beats_mc_at_equal_queries(self):
        # t=3, n_shot=200 -> 600 queries; paired against MC with 600 shots
        phis = np.full(1000, 0.2)
        mlae = schemes.run_batch(
            phis, schemes.MlaeConfig(t=3, n_shot=200), seed=6, threads=2
        )
        assert int(mlae.queries[0]) == 600
        mc = schemes.run_batch(phis, schemes.McConfig(n_shot=600), seed=6, threads=2)
        truth = phase_to_fraction(0.2)
        assert np.abs(mlae.fraction - truth).mean() < np.abs(mc.fraction - truth).mean()


class TestQcoin:
    def test_zero_phase_estimates_zero(self):
        rec = schemes.estimate_qcoin(
            0.0, schemes.QcoinConfig(t=5, n_shot=64), RandomStream(10, 3)
        )
        assert rec.phase_estimate == 0.0

    def test_query_count_schedule(self):
        rec = schemes.estimate_qcoin(
            0.2, schemes.QcoinConfig(t=5, n_shot=64), RandomStream(10)
        )
        assert rec.queries == 64 * (0 + 1 + 2 + 4 + 8 + 16) == 1984
        assert rec.shots == 64 * 6

    def test_estimate_lands_near_truth(self):
        phis = np.full(200, 0.17)
        res = schemes.run_batch(phis, schemes.QcoinConfig(t=5, n_shot=64), seed=2)
        assert np.abs(res.phase - 0.17).mean() < 0.01


class TestDeterminismAndRanges:
    @pytest.mark.parametrize("cfg", ALL_CONFIGS, ids=lambda c: c.name)
    def test_identical_inputs_identical_records(self, cfg):
        a = schemes.run_batch(np.array([0.21, 0.09]), cfg, seed=33, stream_start=5)
        b = schemes.run_batch(np.array([0.21, 0.09]), cfg, seed=33, stream_start=5)
        for field in ("phase", "fraction", "queries", "shots"):
            assert np.array_equal(getattr(a, field), getattr(b, field))

    @pytest.mark.parametrize("cfg", ALL_CONFIGS, ids=lambda c: c.name)
    def test_thread_count_does_not_change_results(self, cfg):
        phis = np.random.default_rng(7).random(schemes.CHUNK + 3) * 0.5
        serial = schemes.run_batch(phis, cfg, seed=1, threads=1)
        threaded = schemes.run_batch(phis, cfg, seed=1, threads=4)
        assert np.array_equal(serial.phase, threaded.phase)
        assert np.array_equal(serial.shots, threaded.shots)

    @settings(max_examples=30, deadline=None)
    @given(phi=phases, stream=st.integers(min_value=0, max_value=2**63))
    def test_estimates_stay_in_range(self, phi, stream):
        for cfg in ALL_CONFIGS:
            res = schemes.run_batch(
                np.array([phi]), cfg, seed=77, stream_start=stream
            )
            rec = res.record(0)
            assert 0.0 <= rec.phase_estimate <= 0.5
            assert 0.0 <= rec.fraction_estimate <= 1.0
            assert abs(
                rec.fraction_estimate - phase_to_fraction(rec.phase_estimate)
            ) <= 1e-12

    def test_fraction_space_workload_round_trips(self):
        # harness-style usage: truths in fraction space map in and out
        truths = np.random.default_rng(2).random(64)
        res = schemes.run_batch(
            fraction_to_phase(truths), schemes.PeaConfig(T=128), seed=3
        )
        assert np.all(np.abs(res.fraction - truths) <= 1.0)


def test_stream_budget_covers_consumption():
    assert schemes.stream_budget(schemes.McConfig(10)) == 10
    assert schemes.stream_budget(schemes.PeaConfig(8)) == 1
    assert schemes.stream_budget(schemes.BpeaConfig(8, 5)) == 5
    assert schemes.stream_budget(schemes.AbpeaConfig(8, 0.5, 2, 9)) == 9
    assert schemes.stream_budget(schemes.MlaeConfig(4, 3)) == 12
    assert schemes.stream_budget(schemes.QcoinConfig(4, 3)) == 15
