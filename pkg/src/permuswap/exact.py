"""Exact brute-force verification of the swapper's guarantee.

On desk-size instances the swapper's full output distribution can be
enumerated in exact rational arithmetic: per stratum, every permutation
has a closed-form probability (see
:func:`permuswap.swapping.stratum_permutation_prob`), strata are
independent, and the output table is a deterministic function of the
composite permutation.  Logarithms are the only real-valued step and
are applied after all exact comparisons.

With the exact distributions in hand, the Lipschitz condition

    |ln P_x(T = t) - ln P_x'(T = t)|  <=  epsilon * d_Ham(x, x')

is checked table by table for every same-universe pair; the sup over
events of a finite discrete pair of distributions is attained on an
atom, so the multiplicative distance reduces to the max over atoms.

Enumeration is guarded: the oracle refuses to report a verdict on a
partially explored space and raises instead.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .budget import (
    BudgetResult,
    derangement_count,
    log_derangement_ratio,
    psa_budget,
)
from .dataset import (
    ContingencyTable,
    Dataset,
    Domain,
    Record,
    SwapInvariants,
    dataset_from_table,
    hamming_distance,
    max_stratum_b,
    same_universe,
    stratum_indices,
    swap_invariants,
    tabulate,
)
from .swapping import (
    Permutation,
    RateLike,
    apply_permutation,
    stratum_permutation_prob,
    to_exact_rate,
)

__all__ = [
    "EnumerationBudgetError",
    "UniverseMismatchError",
    "ExactDistribution",
    "DpVerdict",
    "exact_psa_distribution",
    "enumerate_universe",
    "mult_distance",
    "max_probability_ratio",
    "verify_dp",
    "measured_optimal_epsilon",
    "connecting_permutation",
    "min_connecting_derangement",
    "odds_bound_applies",
    "ratio_bound_applies",
    "applicable_lower_bounds",
    "invariant_stratum_bound",
    "enumerate_small_datasets",
    "UniverseCheck",
    "SweepReport",
    "dp_sweep",
    "universe_report",
    "UniverseReport",
    "DEFAULT_ENUMERATION_BUDGET",
    "LOG_SLACK",
]

DEFAULT_ENUMERATION_BUDGET = 10_000_000
# slack for the single real-valued step (the final logarithm)
LOG_SLACK = 1e-12


class EnumerationBudgetError(RuntimeError):
    """The instance is too large for exhaustive exact enumeration."""


class UniverseMismatchError(ValueError):
    """The guarantee is only stated within a universe; the pair given
    does not share its invariants."""


@dataclass(frozen=True)
class ExactDistribution:
    """Exact output law of the swapper on one input dataset.

    Keys are canonical table serializations (row-major flattened count
    tuples over ``domain``); values are exact rational probabilities
    summing to exactly one.
    """

    domain: Domain
    probs: Mapping[tuple[int, ...], Fraction]

    def __post_init__(self) -> None:
        probs = dict(self.probs)
        if any(v <= 0 for v in probs.values()):
            raise ValueError("probabilities must be positive rationals")
        if sum(probs.values()) != 1:
            raise ValueError("probabilities must sum to exactly one")
        object.__setattr__(self, "probs", probs)

    def support(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(self.probs))

    def tables(self) -> tuple[ContingencyTable, ...]:
        return tuple(self.table_for(key) for key in self.support())

    def table_for(self, key: tuple[int, ...]) -> ContingencyTable:
        arr = np.asarray(key, dtype=np.int64).reshape(self.domain.shape)
        return ContingencyTable(arr)

    def prob_of(self, table: ContingencyTable) -> Fraction:
        return self.probs.get(table.canonical_key(), Fraction(0))


def _stratum_hs_distribution(
    records_m: Sequence[Record], domain: Domain, rate: Fraction
) -> dict[tuple[int, ...], Fraction]:
    """Output law of one stratum as flattened H x S count tuples."""
    n = len(records_m)
    hx, sx = domain.hold, domain.swap
    holds = [r.h for r in records_m]
    swaps = [r.s for r in records_m]

    def table_key(perm: Sequence[int]) -> tuple[int, ...]:
        cells = [0] * (hx * sx)
        for i in range(n):
            cells[holds[i] * sx + swaps[perm[i]]] += 1
        return tuple(cells)

    result: dict[tuple[int, ...], Fraction] = {}
    if rate == 0:
        result[table_key(range(n))] = Fraction(1)
        return result
    if rate == 1:
        weight = Fraction(1, derangement_count(n))
        for perm in itertools.permutations(range(n)):
            if any(perm[i] == i for i in range(n)):
                continue
            key = table_key(perm)
            result[key] = result.get(key, Fraction(0)) + weight
        return result
    weights: dict[int, Fraction] = {}
    for perm in itertools.permutations(range(n)):
        k = sum(1 for i in range(n) if perm[i] != i)
        if k not in weights:
            weights[k] = stratum_permutation_prob(k, n, rate)
        key = table_key(perm)
        result[key] = result.get(key, Fraction(0)) + weights[k]
    return result


def exact_psa_distribution(
    x: Dataset,
    p: RateLike,
    max_permutations: int = DEFAULT_ENUMERATION_BUDGET,
) -> ExactDistribution:
    """Enumerate the swapper's exact output distribution on x.

    The rate is taken as an exact rational.  The endpoints are handled
    by their degenerate selection laws: p = 0 releases the input table
    with probability one, p = 1 applies a uniform derangement of each
    whole stratum of size >= 2.
    """
    rate = to_exact_rate(p)
    if not 0 <= rate <= 1:
        raise ValueError("rate must lie in [0, 1]")
    domain = x.domain
    groups = stratum_indices(x)
    active = [(m, idx) for m, idx in sorted(groups.items()) if len(idx) >= 2]

    total = 1
    for _, idx in active:
        n = len(idx)
        if rate == 1:
            total *= derangement_count(n)
        elif rate != 0:
            total *= math.factorial(n)
        if total > max_permutations:
            raise EnumerationBudgetError(
                f"{total} composite permutations exceed the budget of {max_permutations}"
            )

    base = np.zeros(domain.shape, dtype=np.int64)
    active_set = {m for m, _ in active}
    for rec in x.records:
        if rec.m not in active_set:
            base[rec.m, rec.h, rec.s] += 1
    base_flat = [int(c) for c in base.ravel()]

    stratum_dists = [
        _stratum_hs_distribution([x.records[i] for i in idx], domain, rate)
        for _, idx in active
    ]
    hx, sx = domain.hold, domain.swap
    probs: dict[tuple[int, ...], Fraction] = {}
    for combo in itertools.product(*(d.items() for d in stratum_dists)):
        flat = list(base_flat)
        prob = Fraction(1)
        for (m, _), (skey, weight) in zip(active, combo):
            prob *= weight
            offset = m * hx * sx
            for c, cnt in enumerate(skey):
                flat[offset + c] += cnt
        key = tuple(flat)
        probs[key] = probs.get(key, Fraction(0)) + prob
    return ExactDistribution(domain, probs)


def _tables_with_margins(
    row_sums: Sequence[int], col_sums: Sequence[int], max_tables: int
) -> list[tuple[int, ...]]:
    """All non-negative integer H x S tables with the given margins."""
    hx, sx = len(row_sums), len(col_sums)
    if sum(row_sums) != sum(col_sums):
        return []
    grid = [0] * (hx * sx)
    col_rem = list(col_sums)
    results: list[tuple[int, ...]] = []

    def fill_row(h: int) -> None:
        if h == hx:
            results.append(tuple(grid))
            if len(results) > max_tables:
                raise EnumerationBudgetError(
                    f"margin-constrained tables exceed the budget of {max_tables}"
                )
            return

        def fill_cell(s: int, remaining: int) -> None:
            if s == sx - 1:
                if remaining <= col_rem[s]:
                    grid[h * sx + s] = remaining
                    col_rem[s] -= remaining
                    fill_row(h + 1)
                    col_rem[s] += remaining
                    grid[h * sx + s] = 0
                return
            for v in range(min(remaining, col_rem[s]) + 1):
                grid[h * sx + s] = v
                col_rem[s] -= v
                fill_cell(s + 1, remaining - v)
                col_rem[s] += v
                grid[h * sx + s] = 0

        if sx == 0:
            if row_sums[h] == 0:
                fill_row(h + 1)
            return
        fill_cell(0, row_sums[h])

    fill_row(0)
    return results


def enumerate_universe(
    x: Union[Dataset, ContingencyTable],
    max_tables: int = DEFAULT_ENUMERATION_BUDGET,
) -> tuple[ContingencyTable, ...]:
    """All tables over the same domain sharing x's released margins.

    Strata are independent under fixed margins, so the universe is the
    per-stratum cross product of margin-constrained H x S tables.
    """
    inv = swap_invariants(x)
    table = x if isinstance(x, ContingencyTable) else tabulate(x)
    domain = table.domain
    per_stratum: list[list[tuple[int, ...]]] = []
    total = 1
    for m in range(domain.match):
        options = _tables_with_margins(
            [int(v) for v in inv.mh[m]], [int(v) for v in inv.ms[m]], max_tables
        )
        total *= len(options)
        if total > max_tables:
            raise EnumerationBudgetError(
                f"universe size exceeds the budget of {max_tables}"
            )
        per_stratum.append(options)

    tables = []
    for combo in itertools.product(*per_stratum):
        counts = np.zeros(domain.shape, dtype=np.int64)
        for m, flat in enumerate(combo):
            counts[m] = np.asarray(flat, dtype=np.int64).reshape(
                domain.hold, domain.swap
            )
        tables.append(ContingencyTable(counts))
    return tuple(sorted(tables, key=lambda t: t.canonical_key()))


def max_probability_ratio(
    p_dist: ExactDistribution, q_dist: ExactDistribution
) -> Union[tuple[Fraction, tuple[int, ...]], None]:
    """Largest atom-wise probability ratio (both directions), exact.

    Returns None when the supports differ (the distance is infinite);
    otherwise the ratio >= 1 and an atom attaining it.
    """
    if p_dist.domain != q_dist.domain:
        raise ValueError("distributions live over different domains")
    if set(p_dist.probs) != set(q_dist.probs):
        return None
    best: Fraction = Fraction(1)
    witness = next(iter(p_dist.probs))
    for key, pv in p_dist.probs.items():
        qv = q_dist.probs[key]
        ratio = pv / qv if pv >= qv else qv / pv
        if ratio > best:
            best, witness = ratio, key
    return best, witness


def mult_distance(
    p_dist: ExactDistribution, q_dist: ExactDistribution
) -> float:
    """Multiplicative distance sup_E |ln P(E)/Q(E)|.

    For finite discrete distributions the sup over events is attained
    on an atom, so this is the log of the largest atom-wise ratio;
    infinite when the supports differ.
    """
    hit = max_probability_ratio(p_dist, q_dist)
    if hit is None:
        return math.inf
    ratio, _ = hit
    return math.log(ratio.numerator) - math.log(ratio.denominator)


@dataclass(frozen=True)
class DpVerdict:
    """Outcome of checking one same-universe pair against a budget.

    ``measured`` is the multiplicative distance per unit of Hamming
    distance; ``bound`` the budget it must not exceed.  The comparison
    allows 1e-12 of slack for the final logarithm only; the underlying
    ratios are exact.
    """

    measured: float
    bound: float
    witness: Union[tuple[Dataset, Dataset, Union[ContingencyTable, None]], None]
    passed: bool


def verify_dp(
    x: Dataset,
    x_prime: Dataset,
    p: RateLike,
    budget: BudgetResult,
    max_permutations: int = DEFAULT_ENUMERATION_BUDGET,
) -> DpVerdict:
    """Check the Lipschitz condition for one pair at one rate."""
    rate = to_exact_rate(p)
    if not 0 < rate < 1:
        raise ValueError("verification needs 0 < p < 1")
    if not same_universe(x, x_prime):
        raise UniverseMismatchError(
            "pair does not share invariants; the guarantee does not apply"
        )
    d_ham = hamming_distance(x, x_prime)
    if d_ham == 0:
        return DpVerdict(0.0, budget.epsilon, (x, x_prime, None), True)
    p_dist = exact_psa_distribution(x, rate, max_permutations)
    q_dist = exact_psa_distribution(x_prime, rate, max_permutations)
    hit = max_probability_ratio(p_dist, q_dist)
    if hit is None:
        return DpVerdict(math.inf, budget.epsilon, (x, x_prime, None), False)
    ratio, key = hit
    measured = (math.log(ratio.numerator) - math.log(ratio.denominator)) / d_ham
    witness_table = p_dist.table_for(key)
    passed = measured <= budget.epsilon + LOG_SLACK
    return DpVerdict(measured, budget.epsilon, (x, x_prime, witness_table), passed)


def measured_optimal_epsilon(
    universe: Sequence[ContingencyTable],
    p: RateLike,
    max_permutations: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    """The exact pointwise-optimal budget of one universe at rate p:
    the max over pairs of multiplicative distance per unit Hamming."""
    tables = list(universe)
    if len(tables) <= 1:
        return 0.0
    rate = to_exact_rate(p)
    dists = [
        exact_psa_distribution(dataset_from_table(t), rate, max_permutations)
        for t in tables
    ]
    best = 0.0
    for i in range(len(tables)):
        for j in range(i + 1, len(tables)):
            d_ham = hamming_distance(tables[i], tables[j])
            if d_ham == 0:
                continue
            value = mult_distance(dists[i], dists[j]) / d_ham
            best = max(best, value)
            if math.isinf(best):
                return best
    return best


# ---------------------------------------------------------------------------
# connecting permutations


def connecting_permutation(x: Dataset, x_prime: Dataset) -> Permutation:
    """A permutation deranging exactly d_Ham(x, x') records that maps
    x's table onto x'`s.

    Construction: within each stratum, restrict to the multiset
    difference, then repeatedly find cells (h1,s1) and (h2,s2) carrying
    surplus with a deficit at (h2,s1) and swap the two implicated
    records; each step shrinks the l1 gap by 2 or 4.
    """
    if not same_universe(x, x_prime):
        raise UniverseMismatchError("pair does not share invariants")
    if len(x.records) != len(x_prime.records):
        raise ValueError("datasets must have equal record counts")
    n = len(x.records)
    mapping = list(range(n))
    by_stratum_prime: dict[int, list[Record]] = {}
    for rec in x_prime.records:
        by_stratum_prime.setdefault(rec.m, []).append(rec)

    for m, idx in stratum_indices(x).items():
        records_here = [x.records[i] for i in idx]
        records_there = by_stratum_prime.get(m, [])
        # per-cell surpluses: tracked positions in x and targets in x'
        count_here: dict[tuple[int, int], int] = {}
        for rec in records_here:
            count_here[(rec.h, rec.s)] = count_here.get((rec.h, rec.s), 0) + 1
        count_there: dict[tuple[int, int], int] = {}
        for rec in records_there:
            count_there[(rec.h, rec.s)] = count_there.get((rec.h, rec.s), 0) + 1
        surplus = {
            cell: count_here.get(cell, 0) - count_there.get(cell, 0)
            for cell in set(count_here) | set(count_there)
        }
        tracked: list[int] = []
        budget_per_cell = {c: v for c, v in surplus.items() if v > 0}
        for i in idx:
            rec = x.records[i]
            cell = (rec.h, rec.s)
            if budget_per_cell.get(cell, 0) > 0:
                budget_per_cell[cell] -= 1
                tracked.append(i)
        current = {i: x.records[i].s for i in tracked}

        def gap() -> dict[tuple[int, int], int]:
            counts: dict[tuple[int, int], int] = dict()
            for i in tracked:
                cell = (x.records[i].h, current[i])
                counts[cell] = counts.get(cell, 0) + 1
            out = {}
            for cell in set(counts) | {c for c, v in surplus.items() if v < 0}:
                out[cell] = counts.get(cell, 0) - max(-surplus.get(cell, 0), 0)
            return out

        a = gap()
        while any(v != 0 for v in a.values()):
            (h1, s1) = next(c for c, v in a.items() if v > 0)
            h2 = next(h for (h, s), v in a.items() if s == s1 and v < 0)
            s2 = next(s for (h, s), v in a.items() if h == h2 and v > 0)
            i = next(
                i for i in tracked if x.records[i].h == h1 and current[i] == s1
            )
            j = next(
                j for j in tracked if x.records[j].h == h2 and current[j] == s2
            )
            current[i], current[j] = current[j], current[i]
            mapping[i], mapping[j] = mapping[j], mapping[i]
            a = gap()
    return Permutation(tuple(mapping))


def min_connecting_derangement(
    x: Dataset, x_prime: Dataset, max_records: int = 8
) -> Union[int, None]:
    """Brute-force minimum derangement count over all permutations g
    with C(g(x)) = C(x'); None when no permutation connects the pair.

    Independent of :func:`connecting_permutation`; used to cross-check
    it on small instances.
    """
    n = len(x.records)
    if n != len(x_prime.records):
        return None
    if n > max_records:
        raise EnumerationBudgetError(f"brute force is capped at {max_records} records")
    target = tabulate(x_prime)
    best: Union[int, None] = None
    for raw in itertools.permutations(range(n)):
        perm = Permutation(raw)
        if tabulate(apply_permutation(perm, x)) == target:
            k = perm.derange_count
            if best is None or k < best:
                best = k
    return best


# ---------------------------------------------------------------------------
# lower-bound witness structure


def invariant_stratum_bound(inv: SwapInvariants) -> int:
    """The stratum bound b computed from margins alone.

    A stratum holds two differing records iff its margins are not
    concentrated on a single (h, s) cell; every member of a universe
    therefore shares the same b.
    """
    best = 0
    sizes = inv.stratum_sizes
    for m in range(inv.mh.shape[0]):
        n_m = int(sizes[m])
        if n_m < 2:
            continue
        concentrated = (
            int(inv.mh[m].max(initial=0)) == n_m
            and int(inv.ms[m].max(initial=0)) == n_m
        )
        if not concentrated:
            best = max(best, n_m)
    return best


def odds_bound_applies(inv: SwapInvariants) -> bool:
    """Universe structure forcing a budget of at least ln(o): some
    stratum of size >= 2 whose margins are all 0 or 1 (no vacuous
    permutations exist there)."""
    sizes = inv.stratum_sizes
    for m in range(inv.mh.shape[0]):
        if sizes[m] >= 2 and inv.mh[m].max(initial=0) <= 1 and inv.ms[m].max(initial=0) <= 1:
            return True
    return False


def ratio_bound_applies(inv: SwapInvariants) -> bool:
    """Universe structure forcing ln(d(b)/d(b-2))/2 - ln(o): a stratum
    realizing b with two singleton hold rows and two singleton swap
    columns, and (beyond b = 2) margins small enough (<= b/2 - 1) that a
    full-stratum derangement can move every record's cell."""
    b = invariant_stratum_bound(inv)
    if b < 2 or b == 3:
        return False
    sizes = inv.stratum_sizes
    for m in range(inv.mh.shape[0]):
        if int(sizes[m]) != b:
            continue
        mh, ms = inv.mh[m], inv.ms[m]
        if int((mh == 1).sum()) < 2 or int((ms == 1).sum()) < 2:
            continue
        if b == 2:
            return True
        if mh.max(initial=0) <= b / 2 - 1 and ms.max(initial=0) <= b / 2 - 1:
            return True
    return False


def applicable_lower_bounds(inv: SwapInvariants, p: float) -> list[tuple[float, str]]:
    """Lower bounds whose witness structure this universe exhibits."""
    bounds: list[tuple[float, str]] = []
    if p in (0.0, 1.0):
        if invariant_stratum_bound(inv) > 0:
            bounds.append((math.inf, "degenerate-rate"))
        return bounds
    log_o = math.log(p) - math.log1p(-p)
    if odds_bound_applies(inv):
        bounds.append((log_o, "selection-odds"))
    if ratio_bound_applies(inv):
        b = invariant_stratum_bound(inv)
        bounds.append(
            (0.5 * log_derangement_ratio(b) - log_o, "derangement-ratio")
        )
    return bounds


# ---------------------------------------------------------------------------
# the exhaustive sweep


def enumerate_small_datasets(domain: Domain, max_records: int) -> list[Dataset]:
    """Every dataset with at most max_records records over the domain,
    deduplicated up to record order (one canonical representative per
    multiset)."""
    domain = Domain(*domain)
    cells = [
        Record(m, h, s)
        for m in range(domain.match)
        for h in range(domain.hold)
        for s in range(domain.swap)
    ]
    datasets = []
    for n in range(max_records + 1):
        for combo in itertools.combinations_with_replacement(cells, n):
            datasets.append(Dataset(tuple(combo), domain))
    return datasets


@dataclass(frozen=True)
class UniverseCheck:
    """Summary of one universe across the swept rates."""

    b: int
    size: int
    measured: dict[float, float]
    budget: dict[float, float]


@dataclass(frozen=True)
class SweepReport:
    domain: Domain
    max_records: int
    p_values: tuple[Fraction, ...]
    universe_count: int
    dataset_count: int
    pair_checks: int
    connecting_checks: int
    failures: tuple[str, ...]
    universes: tuple[UniverseCheck, ...]

    @property
    def all_pass(self) -> bool:
        return not self.failures


def dp_sweep(
    domain: Domain = Domain(2, 2, 2),
    max_records: int = 4,
    p_values: Sequence[RateLike] = (
        Fraction(1, 10),
        Fraction(3, 10),
        Fraction(1, 2),
        Fraction(7, 10),
        Fraction(9, 10),
    ),
    check_connecting: bool = True,
    max_permutations: int = DEFAULT_ENUMERATION_BUDGET,
) -> SweepReport:
    """Exhaustive verification over every small dataset and universe.

    For each universe and each rate: every ordered pair satisfies the
    Lipschitz condition at the universe's budget; every exact
    distribution sums to one and (for interior rates) has the whole
    universe as support; the universe's pointwise-optimal budget sits
    between the applicable lower bounds and the closed-form budget.
    Optionally each same-universe pair is also connected by an explicit
    permutation deranging exactly d_Ham records, cross-checked against
    brute-force search.
    """
    rates = tuple(to_exact_rate(p) for p in p_values)
    datasets = enumerate_small_datasets(domain, max_records)
    groups: dict[SwapInvariants, list[Dataset]] = {}
    for d in datasets:
        groups.setdefault(swap_invariants(d), []).append(d)

    failures: list[str] = []
    universes: list[UniverseCheck] = []
    pair_checks = 0
    connecting_checks = 0

    for inv, members in groups.items():
        b = max_stratum_b(members[0])
        if invariant_stratum_bound(inv) != b:
            failures.append(f"b mismatch between dataset and margins for {inv}")
        universe_keys = {tabulate(d).canonical_key() for d in members}
        measured_by_p: dict[float, float] = {}
        budget_by_p: dict[float, float] = {}
        for rate in rates:
            budget = psa_budget(float(rate), b)
            dists = [
                exact_psa_distribution(d, rate, max_permutations) for d in members
            ]
            for d, dist in zip(members, dists):
                if set(dist.probs) != universe_keys:
                    failures.append(
                        f"support differs from universe at p={rate} for "
                        f"{tabulate(d).canonical_string()}"
                    )
            measured = 0.0
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    d_ham = hamming_distance(members[i], members[j])
                    if d_ham == 0:
                        continue
                    pair_checks += 1
                    value = mult_distance(dists[i], dists[j]) / d_ham
                    measured = max(measured, value)
                    if value > budget.epsilon + LOG_SLACK:
                        failures.append(
                            f"budget exceeded at p={rate}: measured {value} > "
                            f"{budget.epsilon} for pair "
                            f"{tabulate(members[i]).canonical_string()} vs "
                            f"{tabulate(members[j]).canonical_string()}"
                        )
            measured_by_p[float(rate)] = measured
            budget_by_p[float(rate)] = budget.epsilon
            for bound, condition in applicable_lower_bounds(inv, float(rate)):
                if measured < bound - LOG_SLACK:
                    failures.append(
                        f"lower bound violated at p={rate}: measured {measured} < "
                        f"{bound} ({condition}) in universe of "
                        f"{tabulate(members[0]).canonical_string()}"
                    )
        if check_connecting:
            for i in range(len(members)):
                for j in range(len(members)):
                    if i == j:
                        continue
                    connecting_checks += 1
                    d_ham = hamming_distance(members[i], members[j])
                    rho = connecting_permutation(members[i], members[j])
                    moved = tabulate(apply_permutation(rho, members[i]))
                    if moved != tabulate(members[j]):
                        failures.append(
                            f"connecting permutation misses the target for pair "
                            f"({i},{j}) in universe of "
                            f"{tabulate(members[0]).canonical_string()}"
                        )
                    if rho.derange_count != d_ham:
                        failures.append(
                            f"connecting permutation deranges {rho.derange_count} "
                            f"records, expected {d_ham}"
                        )
                    brute = min_connecting_derangement(members[i], members[j])
                    if brute != d_ham:
                        failures.append(
                            f"brute-force minimum {brute} disagrees with d_Ham {d_ham}"
                        )
        universes.append(
            UniverseCheck(b=b, size=len(members), measured=measured_by_p, budget=budget_by_p)
        )

    return SweepReport(
        domain=Domain(*domain),
        max_records=max_records,
        p_values=rates,
        universe_count=len(groups),
        dataset_count=len(datasets),
        pair_checks=pair_checks,
        connecting_checks=connecting_checks,
        failures=tuple(failures),
        universes=tuple(universes),
    )


@dataclass(frozen=True)
class UniverseReport:
    """Per-rate summary of one realized universe, for reporting."""

    b: int
    universe_size: int
    p: float
    budget_epsilon: float
    measured_optimal: float
    passed: bool
    expected_infinite: bool


def universe_report(
    x: Dataset,
    p_values: Sequence[RateLike],
    max_permutations: int = DEFAULT_ENUMERATION_BUDGET,
) -> list[UniverseReport]:
    """Measure one dataset's universe at each rate against the budget.

    At the endpoint rates an infinite measurement is the expected
    outcome (the budget is infinite there too); rows carry a flag so
    reports can mark them rather than fail."""
    universe = enumerate_universe(x, max_permutations)
    b = max_stratum_b(x)
    rows = []
    for p in p_values:
        rate = to_exact_rate(p)
        budget = psa_budget(float(rate), b)
        measured = measured_optimal_epsilon(universe, rate, max_permutations)
        endpoint = rate in (0, 1)
        passed = measured <= budget.epsilon + LOG_SLACK
        rows.append(
            UniverseReport(
                b=b,
                universe_size=len(universe),
                p=float(rate),
                budget_epsilon=budget.epsilon,
                measured_optimal=measured,
                passed=passed,
                expected_infinite=endpoint and b > 0,
            )
        )
    return rows
