import csv
import io
import json
from fractions import Fraction

import pytest

from qkdlab.adversary import GaoAttack, InterceptResend
from qkdlab.analysis import (
    CSV_COLUMNS,
    compute_metrics,
    exact_intercept_observation_distribution,
    exact_next_round_error,
    monte_carlo,
    report_to_csv,
    report_to_json,
)
from qkdlab.protocol import ProtocolConfig, announce_subsequence, run_session


def session_for(dim, key, adversary=None, seed=0):
    config = ProtocolConfig(dim=dim, num_rounds=len(key), key=key, rng_seed=seed)
    return run_session(config, adversary), config


class TestComputeMetrics:
    def test_honest_baseline(self):
        session, config = session_for(3, (0, 1, 2, 0))
        metrics = compute_metrics(session, config.key)
        assert metrics.qber_overall == 0
        assert metrics.qber_by_round == (0, 0, 0, 0)
        assert not metrics.detection_triggered
        assert metrics.eve_known_fraction == 0
        assert metrics.eve_candidate_count == 3

    def test_gao_zero_qber(self):
        session, config = session_for(5, (4, 0, 2, 1, 3), GaoAttack())
        metrics = compute_metrics(session, config.key)
        assert metrics.qber_overall == 0

    def test_known_fraction_counted_from_transcript(self):
        key = (1, 0, 2, 1, 2, 0, 0, 1, 2)
        session, config = session_for(3, key, GaoAttack())
        announce_subsequence(session, [3])
        metrics = compute_metrics(session, config.key)
        observed = {obs.round_index for obs in session.eve_observations}
        expected = Fraction(1 + len(observed), 9)
        assert metrics.eve_known_fraction == expected == Fraction(5, 9)
        assert metrics.eve_candidate_count == 1

    def test_unresolved_candidates_stay_d(self):
        key = (1, 0, 2, 1, 2)
        session, config = session_for(3, key, GaoAttack())
        metrics = compute_metrics(session, config.key)
        assert metrics.eve_known_fraction == 0
        assert metrics.eve_candidate_count == 3

    def test_announced_rounds_leave_qber_denominator(self):
        key = (1, 0, 2, 1)
        session, config = session_for(3, key)
        announce_subsequence(session, [1, 2])
        metrics = compute_metrics(session, config.key)
        # 2 usable rounds remain, both correct
        assert metrics.qber_overall == 0

    def test_detection_flag(self):
        # seed chosen so the intercepted round-2 outcome differs from the key
        for seed in range(40):
            session, config = session_for(3, (1, 2, 0), InterceptResend(), seed=seed)
            announce_subsequence(session, [2])
            metrics = compute_metrics(session, config.key)
            if session.rounds[1].bob_outcome != config.key[1]:
                assert metrics.detection_triggered
                break
        else:
            pytest.fail("no seed produced a round-2 error in 40 tries")

    def test_length_mismatch_rejected(self):
        session, _ = session_for(3, (1, 2))
        with pytest.raises(ValueError):
            compute_metrics(session, (1, 2, 0))

    def test_metrics_are_recomputable(self):
        session, config = session_for(3, (1, 0, 2, 1, 2), GaoAttack())
        announce_subsequence(session, [3])
        first = compute_metrics(session, config.key)
        second = compute_metrics(session, config.key)
        assert first == second


class TestExactNextRoundError:
    @pytest.mark.parametrize("dim", (2, 3, 5))
    @pytest.mark.parametrize("attack_round", (1, 2))
    def test_matches_closed_form(self, dim, attack_round):
        assert exact_next_round_error(dim, attack_round) == Fraction(dim - 1, dim)

    def test_explicit_key_does_not_matter(self):
        for key in ((0, 0, 0), (2, 1, 0), (1, 1, 1)):
            assert exact_next_round_error(3, 2, key=key) == Fraction(2, 3)

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            exact_next_round_error(4, 1)
        with pytest.raises(ValueError):
            exact_next_round_error(11, 1)
        with pytest.raises(ValueError):
            exact_next_round_error(3, 6)


class TestObservationDistribution:
    def test_uniform_and_key_independent(self):
        dists = [
            exact_intercept_observation_distribution(3, 1, (q, 0))
            for q in range(3)
        ]
        uniform = {v: Fraction(1, 3) for v in range(3)}
        assert all(d == uniform for d in dists)

    def test_second_round_attack_also_uniform(self):
        for q in range(3):
            dist = exact_intercept_observation_distribution(3, 2, (1, q))
            assert dist == {v: Fraction(1, 3) for v in range(3)}

    def test_total_variation_zero(self):
        base = exact_intercept_observation_distribution(5, 1, (0,))
        for q in range(1, 5):
            other = exact_intercept_observation_distribution(5, 1, (q,))
            tv = sum(abs(base[v] - other[v]) for v in range(5)) / 2
            assert tv == 0


class TestMonteCarlo:
    def test_gao_always_zero(self):
        config = ProtocolConfig(dim=3, num_rounds=4, key=(0,) * 4, rng_seed=0)
        report = monte_carlo(config, GaoAttack(), 60, seed=5)
        assert report.mean_qber == 0
        assert report.all_trials_zero_qber
        assert report.detection_rate == 0
        assert report.strategy == "gao"

    def test_honest_zero(self):
        config = ProtocolConfig(dim=3, num_rounds=3, key=(0,) * 3, rng_seed=0)
        report = monte_carlo(config, None, 40, seed=6)
        assert report.mean_qber == 0
        assert report.strategy == "none"

    def test_intercept_next_round_rate_within_3_sigma(self):
        trials = 800
        config = ProtocolConfig(dim=3, num_rounds=2, key=(0, 0), rng_seed=0)
        report = monte_carlo(config, InterceptResend({1}), trials, seed=7)
        p = 2 / 3
        sigma3 = 3 * (p * (1 - p) / trials) ** 0.5
        assert abs(report.round_error_rates[1] - p) < sigma3
        assert report.round_error_rates[0] == 0  # round 1 undisturbed

    def test_reproducible(self):
        config = ProtocolConfig(dim=3, num_rounds=3, key=(0,) * 3, rng_seed=0)
        a = monte_carlo(config, InterceptResend(), 50, seed=8)
        b = monte_carlo(config, InterceptResend(), 50, seed=8)
        assert a == b

    def test_announced_sessions_feed_inference(self):
        config = ProtocolConfig(dim=3, num_rounds=5, key=(0,) * 5, rng_seed=0)
        report = monte_carlo(config, GaoAttack(), 30, seed=9, announce=[3])
        assert report.mean_eve_known_fraction == pytest.approx(3 / 5)

    def test_announce_policy_odd(self):
        config = ProtocolConfig(dim=3, num_rounds=4, key=(0,) * 4, rng_seed=0)
        report = monte_carlo(config, GaoAttack(), 10, seed=10, announce="odd")
        assert report.mean_eve_known_fraction == pytest.approx(2 / 4)

    def test_trials_must_be_positive(self):
        config = ProtocolConfig(dim=3, num_rounds=2, key=(0, 0), rng_seed=0)
        with pytest.raises(ValueError):
            monte_carlo(config, None, 0, seed=0)


class TestReports:
    def make_report(self):
        config = ProtocolConfig(dim=3, num_rounds=3, key=(0,) * 3, rng_seed=0)
        return monte_carlo(config, InterceptResend(), 25, seed=11)

    def test_json_round_trip(self):
        report = self.make_report()
        rows = json.loads(report_to_json([report]))
        assert rows[0]["strategy"] == "intercept"
        assert rows[0]["trials"] == 25
        assert len(rows[0]["round_error_rates"]) == 3

    def test_csv_columns(self):
        report = self.make_report()
        reader = csv.DictReader(io.StringIO(report_to_csv([report])))
        assert tuple(reader.fieldnames) == CSV_COLUMNS
        row = next(reader)
        assert row["strategy"] == "intercept"
        assert row["dim"] == "3"
        assert len(row["round_error_rates"].split(";")) == 3
