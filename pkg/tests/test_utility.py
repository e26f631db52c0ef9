import json

import numpy as np
import pytest

from permuswap import (
    ContingencyTable,
    PsaParams,
    mape,
    run_psa,
    tabulate,
    utility_experiment,
)
from permuswap.dataset import DomainMismatchError
from permuswap.synth import StratumSpec, synthesize
from permuswap.utility import (
    FiveNumberSummary,
    _summarize,
    utility_json,
    utility_rows,
    write_utility_csv,
)

from conftest import make_dataset


def table(counts):
    return ContingencyTable(np.asarray(counts, dtype=np.int64))


class TestMape:
    def test_identical_tables(self):
        t = table([[[2, 1], [0, 3]]])
        assert mape(t, t) == 0.0

    def test_hand_computed_example(self):
        true = table([[[2, 2], [2, 2]]])
        swapped = table([[[1, 3], [3, 1]]])
        assert mape(true, swapped) == pytest.approx(0.5)

    def test_zero_true_cells_excluded(self):
        true = table([[[4, 0], [0, 0]]])
        swapped = table([[[2, 1], [1, 0]]])
        # only the single positive true cell enters the average
        assert mape(true, swapped) == pytest.approx(0.5)

    def test_all_zero_cells_rejected(self):
        true = table([[[0, 0], [0, 0]]])
        with pytest.raises(ValueError):
            mape(true, true)

    def test_domain_mismatch_rejected(self):
        with pytest.raises(DomainMismatchError):
            mape(table([[[1]]]), table([[[1, 0]]]))

    def test_invariant_margins_always_zero(self):
        x = synthesize([StratumSpec(9), StratumSpec(6)], 3, 4, seed=4)
        base = tabulate(x)
        for seed in range(10):
            out = run_psa(x, PsaParams(0.7, seed=seed))
            assert mape(base, out, margin="swap") == 0.0  # n_mh. untouched
            assert mape(base, out, margin="hold") == 0.0  # n_m.s untouched

    def test_unknown_margin_rejected(self):
        t = table([[[1, 0], [0, 1]]])
        with pytest.raises(ValueError):
            mape(t, t, margin="diagonal")


class TestSummary:
    def test_median_of_halves_even_count(self):
        s = _summarize([1.0, 2.0, 3.0, 4.0])
        assert s == FiveNumberSummary(1.0, 1.5, 2.5, 3.5, 4.0, 2.5)

    def test_median_of_halves_odd_count(self):
        s = _summarize([1.0, 2.0, 3.0, 4.0, 5.0])
        # middle value excluded from both halves
        assert s.q1 == 1.5
        assert s.q3 == 4.5
        assert s.median == 3.0

    def test_single_value(self):
        s = _summarize([2.0])
        assert s.q1 == s.median == s.q3 == 2.0


class TestExperiment:
    def test_rate_zero_gives_all_zero(self):
        x = synthesize([StratumSpec(8)], 2, 3, seed=1)
        (report,) = utility_experiment(x, rates=[0.0], reps=5, seed=7)
        assert report.mape_values == (0.0,) * 5
        assert report.summary.mean == 0.0

    def test_reproducible(self):
        x = synthesize([StratumSpec(12), StratumSpec(9)], 3, 3, seed=2)
        a = utility_experiment(x, rates=[0.05, 0.5], reps=8, seed=11)
        b = utility_experiment(x, rates=[0.05, 0.5], reps=8, seed=11)
        assert a == b

    def test_rates_are_decoupled(self):
        """Prepending a rate must not change later rates' draws."""
        x = synthesize([StratumSpec(10)], 3, 3, seed=3)
        solo = utility_experiment(x, rates=[0.5], reps=6, seed=5)[0]
        # the same rate at the same rate-index gives the same values
        again = utility_experiment(x, rates=[0.5, 0.1], reps=6, seed=5)[0]
        assert solo.mape_values == again.mape_values

    def test_replication_count_validated(self):
        x = synthesize([StratumSpec(4)], 2, 2, seed=0)
        with pytest.raises(ValueError):
            utility_experiment(x, rates=[0.1], reps=0, seed=0)

    def test_metadata_records_conventions(self):
        x = synthesize([StratumSpec(6)], 2, 2, seed=0)
        (report,) = utility_experiment(x, rates=[0.3], reps=3, seed=1)
        assert "zero" in report.metadata["zero_cells"]
        assert "halves" in report.metadata["quartiles"]

    def test_monotone_trend_small(self):
        """Heavier swapping hurts the two-way tabulation more, in the
        bulk of seeds (the full 100-trial version is in acceptance)."""
        x = synthesize([StratumSpec(30), StratumSpec(30)], 5, 5, seed=17)
        wins = 0
        for trial in range(20):
            low, high = utility_experiment(x, rates=[0.01, 0.5], reps=10, seed=trial)
            wins += high.summary.mean > low.summary.mean
        assert wins >= 19


class TestEmission:
    def test_long_format_rows(self):
        x = synthesize([StratumSpec(6)], 2, 2, seed=0)
        reports = utility_experiment(x, rates=[0.2, 0.4], reps=3, seed=1)
        rows = utility_rows(reports)
        assert len(rows) == 6
        assert rows[0][0] == 0.2 and rows[-1][0] == 0.4

    def test_csv_and_json(self, tmp_path):
        x = synthesize([StratumSpec(6)], 2, 2, seed=0)
        reports = utility_experiment(x, rates=[0.2], reps=2, seed=1)
        path = tmp_path / "utility.csv"
        write_utility_csv(reports, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "rate,rep,mape"
        assert len(lines) == 3
        payload = json.loads(utility_json(reports))
        assert payload[0]["rate"] == 0.2
        assert payload[0]["replications"] == 2
