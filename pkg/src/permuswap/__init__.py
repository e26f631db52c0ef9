"""Permutation swapping for categorical microdata.

A stratified swapper that permutes the swap values of randomly selected
records inside each match stratum, leaving the match-by-hold and
match-by-swap margins untouched; the closed-form privacy-loss budget it
satisfies within the universe of datasets sharing those margins; an
exact brute-force verifier of that guarantee on small instances; the
zCDP accounting used to compare against the 2020 Census releases; and
utility metrics for the damage swapping does to two-way tabulations.
"""

from .budget import (
    BudgetResult,
    ZcdpBudget,
    census2020_report,
    compose_zcdp,
    derangement_count,
    group_privacy_doubled,
    load_census_zcdp_rows,
    load_counterfactual_rows,
    log_derangement_ratio,
    min_budget,
    optimality_gap_f,
    psa_budget,
    psa_lower_bounds,
    swap_rates_for_budget,
    zcdp_to_approx_dp,
)
from .dataset import (
    ContingencyTable,
    Dataset,
    DatasetSchema,
    Domain,
    DomainMismatchError,
    Record,
    SwapInvariants,
    dataset_from_table,
    hamming_distance,
    l1_distance,
    max_stratum_b,
    same_universe,
    swap_invariants,
    tabulate,
)
from .exact import (
    DpVerdict,
    EnumerationBudgetError,
    ExactDistribution,
    UniverseMismatchError,
    connecting_permutation,
    dp_sweep,
    enumerate_universe,
    exact_psa_distribution,
    max_probability_ratio,
    measured_optimal_epsilon,
    min_connecting_derangement,
    mult_distance,
    verify_dp,
)
from .ingest import (
    LoadError,
    RoleAssignment,
    cross_classify,
    load_dataset,
    load_roles,
    read_csv_columns,
    write_dataset_csv,
)
from .swapping import (
    Permutation,
    PsaParams,
    apply_permutation,
    run_psa,
    run_psa_details,
    sample_derangement,
    select_records,
    stratum_permutation_prob,
    to_exact_rate,
)
from .synth import StratumSpec, synthesize
from .utility import UtilityReport, mape, utility_experiment

__version__ = "0.1.0"

__all__ = [
    "BudgetResult",
    "ZcdpBudget",
    "census2020_report",
    "compose_zcdp",
    "derangement_count",
    "group_privacy_doubled",
    "load_census_zcdp_rows",
    "load_counterfactual_rows",
    "log_derangement_ratio",
    "min_budget",
    "optimality_gap_f",
    "psa_budget",
    "psa_lower_bounds",
    "swap_rates_for_budget",
    "zcdp_to_approx_dp",
    "ContingencyTable",
    "Dataset",
    "DatasetSchema",
    "Domain",
    "DomainMismatchError",
    "Record",
    "SwapInvariants",
    "dataset_from_table",
    "hamming_distance",
    "l1_distance",
    "max_stratum_b",
    "same_universe",
    "swap_invariants",
    "tabulate",
    "DpVerdict",
    "EnumerationBudgetError",
    "ExactDistribution",
    "UniverseMismatchError",
    "connecting_permutation",
    "dp_sweep",
    "enumerate_universe",
    "exact_psa_distribution",
    "max_probability_ratio",
    "measured_optimal_epsilon",
    "min_connecting_derangement",
    "mult_distance",
    "verify_dp",
    "LoadError",
    "RoleAssignment",
    "cross_classify",
    "load_dataset",
    "load_roles",
    "read_csv_columns",
    "write_dataset_csv",
    "Permutation",
    "PsaParams",
    "apply_permutation",
    "run_psa",
    "run_psa_details",
    "sample_derangement",
    "select_records",
    "stratum_permutation_prob",
    "to_exact_rate",
    "StratumSpec",
    "synthesize",
    "UtilityReport",
    "mape",
    "utility_experiment",
]
