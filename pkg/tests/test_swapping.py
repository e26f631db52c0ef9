import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permuswap import (
    Permutation,
    PsaParams,
    apply_permutation,
    exact_psa_distribution,
    max_stratum_b,
    run_psa,
    run_psa_details,
    same_universe,
    sample_derangement,
    select_records,
    stratum_permutation_prob,
    swap_invariants,
    tabulate,
    to_exact_rate,
)
from permuswap.budget import derangement_count
from permuswap.synth import StratumSpec, synthesize

from conftest import make_dataset


def three_sigma_band(count, total, prob):
    sigma = math.sqrt(total * prob * (1 - prob))
    return abs(count - total * prob) <= 3 * sigma


class TestExactRate:
    def test_float_reads_as_decimal(self):
        assert to_exact_rate(0.1) == Fraction(1, 10)
        assert to_exact_rate(0.5) == Fraction(1, 2)

    def test_fraction_and_string_pass_through(self):
        assert to_exact_rate(Fraction(1, 3)) == Fraction(1, 3)
        assert to_exact_rate("1/3") == Fraction(1, 3)


class TestPermutation:
    def test_bijection_required(self):
        with pytest.raises(ValueError):
            Permutation((0, 0, 1))

    def test_derange_count(self):
        assert Permutation((1, 0, 2)).derange_count == 2
        assert Permutation.identity(4).derange_count == 0

    def test_apply_moves_swap_values_only(self):
        x = make_dataset([(0, 0, 0), (0, 1, 1)], (1, 2, 2))
        y = apply_permutation(Permutation((1, 0)), x)
        assert [tuple(r) for r in y.records] == [(0, 0, 1), (0, 1, 0)]

    def test_apply_length_mismatch(self):
        x = make_dataset([(0, 0, 0)], (1, 2, 2))
        with pytest.raises(ValueError):
            apply_permutation(Permutation((0, 1)), x)


class TestSelectRecords:
    def test_p_zero_selects_nothing_without_retries(self):
        rng = np.random.default_rng(0)
        result = select_records(5, 0.0, rng)
        assert result.indices == ()
        assert result.retries == 0

    def test_p_one_selects_everything(self):
        rng = np.random.default_rng(0)
        result = select_records(3, 1.0, rng)
        assert result.indices == (0, 1, 2)
        assert result.retries == 0

    def test_stratum_of_one_rejected(self):
        with pytest.raises(ValueError):
            select_records(1, 0.5, np.random.default_rng(0))

    def test_never_exactly_one_selected(self):
        rng = np.random.default_rng(42)
        for _ in range(2000):
            assert len(select_records(4, 0.3, rng).indices) != 1

    def test_conditional_law_frequencies(self):
        """Accepted subsets follow p^|S| (1-p)^(n-|S|) normalized over
        sizes != 1, within 3-sigma binomial bands."""
        n, p, trials = 4, 0.3, 40_000
        rng = np.random.default_rng(2024)
        counts = Counter(
            select_records(n, p, rng).indices for _ in range(trials)
        )
        norm = 1.0 - n * p * (1 - p) ** (n - 1)
        for size in (0, 2, 3, 4):
            for subset in itertools.combinations(range(n), size):
                prob = p**size * (1 - p) ** (n - size) / norm
                assert three_sigma_band(counts[subset], trials, prob), subset


class TestSampleDerangement:
    def test_empty_selection_is_identity(self):
        assert sample_derangement(0, np.random.default_rng(0)) == ()

    def test_single_record_is_contract_violation(self):
        with pytest.raises(ValueError):
            sample_derangement(1, np.random.default_rng(0))

    def test_pair_always_transposes(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            assert sample_derangement(2, rng) == (1, 0)

    def test_no_fixed_points_ever(self):
        rng = np.random.default_rng(7)
        for k in (2, 3, 4, 5, 6):
            for _ in range(300):
                perm = sample_derangement(k, rng)
                assert all(perm[i] != i for i in range(k))
                assert sorted(perm) == list(range(k))

    def test_three_cycles_equally_likely(self):
        rng = np.random.default_rng(11)
        trials = 4000
        counts = Counter(sample_derangement(3, rng) for _ in range(trials))
        assert set(counts) == {(1, 2, 0), (2, 0, 1)}
        for key in counts:
            assert three_sigma_band(counts[key], trials, 0.5), counts


class TestStratumPermutationProb:
    def test_identity_two_records_half(self):
        assert stratum_permutation_prob(0, 2, Fraction(1, 2)) == Fraction(1, 2)

    def test_transposition_two_records_half(self):
        assert stratum_permutation_prob(2, 2, Fraction(1, 2)) == Fraction(1, 2)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(7, 10)])
    def test_normalizes_over_all_permutations(self, n, p):
        total = Fraction(0)
        for k in range(n + 1):
            if k == 1:
                continue
            count = math.comb(n, k) * derangement_count(k)
            total += count * stratum_permutation_prob(k, n, p)
        assert total == 1

    def test_derange_count_one_rejected(self):
        with pytest.raises(ValueError):
            stratum_permutation_prob(1, 3, Fraction(1, 2))

    def test_endpoint_rates_rejected(self):
        with pytest.raises(ValueError):
            stratum_permutation_prob(0, 2, 0)


class TestRunPsa:
    def test_p_zero_is_identity(self):
        x = synthesize([StratumSpec(6), StratumSpec(4)], 3, 3, seed=3)
        assert run_psa(x, PsaParams(0.0, seed=9)) == tabulate(x)

    def test_deterministic_given_seed(self):
        x = synthesize([StratumSpec(8)], 2, 4, seed=1)
        a = run_psa(x, PsaParams(0.4, seed=123))
        b = run_psa(x, PsaParams(0.4, seed=123))
        assert a == b
        assert a.canonical_string() == b.canonical_string()

    def test_different_seeds_reach_different_tables(self):
        x = synthesize([StratumSpec(10)], 4, 4, seed=1)
        tables = {run_psa(x, PsaParams(0.8, seed=s)).canonical_key() for s in range(30)}
        assert len(tables) > 1

    def test_invariants_and_size_preserved(self):
        x = synthesize([StratumSpec(7), StratumSpec(5), StratumSpec(1)], 3, 4, seed=2)
        inv = swap_invariants(x)
        for seed in range(40):
            out = run_psa(x, PsaParams(0.6, seed=seed))
            assert out.total == len(x.records)
            assert swap_invariants(out) == inv
            assert same_universe(x, out)

    def test_small_strata_untouched(self):
        x = make_dataset([(0, 0, 0), (1, 1, 1), (1, 0, 1)], (2, 2, 2))
        # stratum 0 has one record; its cell can never change
        for seed in range(20):
            out = run_psa(x, PsaParams(1.0, seed=seed))
            assert out.counts[0, 0, 0] == 1

    def test_sampled_permutation_never_deranges_one(self):
        x = synthesize([StratumSpec(5), StratumSpec(3)], 2, 3, seed=8)
        for seed in range(200):
            run = run_psa_details(x, PsaParams(0.35, seed=seed))
            assert run.permutation.derange_count != 1

    def test_rates_reported(self):
        x = synthesize([StratumSpec(40)], 4, 4, seed=5)
        run = run_psa_details(x, PsaParams(1.0, seed=0))
        assert run.raw_selection_rate == 1.0
        assert 0.0 <= run.effective_swap_rate <= 1.0
        assert run.selected_count == 40

    @given(st.integers(0, 2**63 - 1))
    @settings(max_examples=25, deadline=None)
    def test_output_count_matches_input_count(self, seed):
        x = make_dataset(
            [(0, 0, 0), (0, 1, 1), (0, 1, 0), (1, 0, 1), (1, 1, 0)], (2, 2, 2)
        )
        assert run_psa(x, PsaParams(0.5, seed=seed)).total == 5


class TestDistributionalCorrectness:
    def test_two_record_pair_fifty_fifty(self, two_record_pair):
        """At p = 1/2 the two-record stratum keeps or swaps its table
        with probability 1/2 each; 1e5 runs must sit inside 3-sigma."""
        x, swapped = two_record_pair
        keep = tabulate(x).canonical_key()
        swap = tabulate(swapped).canonical_key()
        trials = 100_000
        counts = Counter(
            run_psa(x, PsaParams(0.5, seed=seed)).canonical_key()
            for seed in range(trials)
        )
        assert set(counts) == {keep, swap}
        assert three_sigma_band(counts[keep], trials, 0.5)

    def test_three_record_frequencies_match_oracle(self):
        x = make_dataset([(0, 0, 0), (0, 1, 1), (0, 0, 1)], (1, 2, 2))
        p = Fraction(1, 3)
        oracle = exact_psa_distribution(x, p)
        trials = 20_000
        counts = Counter(
            run_psa(x, PsaParams(float(p), seed=seed)).canonical_key()
            for seed in range(trials)
        )
        assert set(counts) <= set(oracle.probs)
        for key, prob in oracle.probs.items():
            assert three_sigma_band(counts[key], trials, float(prob)), key

    def test_record_order_does_not_change_the_law(self):
        x = make_dataset(
            [(0, 0, 0), (0, 1, 1), (0, 0, 1), (1, 0, 0), (1, 1, 1)], (2, 2, 2)
        )
        shuffled = x.reordered([4, 2, 0, 3, 1])
        p = Fraction(2, 5)
        assert exact_psa_distribution(x, p).probs == exact_psa_distribution(
            shuffled, p
        ).probs


def test_stratum_bound_zero_means_identity_distribution():
    x = make_dataset([(0, 0, 0)] * 3 + [(1, 1, 1)], (2, 2, 2))
    assert max_stratum_b(x) == 0
    for seed in range(10):
        assert run_psa(x, PsaParams(0.9, seed=seed)) == tabulate(x)
