"""Verify the guarantee by hand on a desk-size instance.

The smallest interesting case: two records in one stratum that differ
in both non-match values.  The universe has exactly two tables, the
swapper's output law on each input is a two-point distribution with
exact rational probabilities, and the worst-case log-ratio per unit of
Hamming distance lands exactly on |ln odds|, comfortably inside the
closed-form budget ln(b+1) - ln(odds).
"""

from fractions import Fraction

from permuswap import (
    Dataset,
    Domain,
    Record,
    connecting_permutation,
    enumerate_universe,
    exact_psa_distribution,
    hamming_distance,
    measured_optimal_epsilon,
    mult_distance,
    psa_budget,
    verify_dp,
)


def show_distribution(label, dist):
    print(f"  law of the output given {label}:")
    for key in dist.support():
        print(f"    table {key}: probability {dist.probs[key]}")


def main():
    x = Dataset((Record(0, 0, 0), Record(0, 1, 1)), Domain(1, 2, 2))
    y = Dataset((Record(0, 0, 1), Record(0, 1, 0)), Domain(1, 2, 2))
    print("records of x:", [tuple(r) for r in x.records])
    print("records of y:", [tuple(r) for r in y.records])
    print("Hamming distance:", hamming_distance(x, y))
    universe = enumerate_universe(x)
    print(f"their universe holds {len(universe)} tables\n")

    for p in (Fraction(1, 3), Fraction(1, 2)):
        print(f"rate p = {p}:")
        px = exact_psa_distribution(x, p)
        py = exact_psa_distribution(y, p)
        show_distribution("x", px)
        show_distribution("y", py)
        dist = mult_distance(px, py)
        budget = psa_budget(float(p), 2)
        verdict = verify_dp(x, y, p, budget)
        print(f"  multiplicative distance = {dist:.6f}")
        print(
            f"  per-record measurement {verdict.measured:.6f} "
            f"<= budget {verdict.bound:.6f}: {verdict.passed}"
        )
        optimal = measured_optimal_epsilon(universe, p)
        print(f"  pointwise-optimal budget of the universe: {optimal:.6f}\n")

    rho = connecting_permutation(x, y)
    print(
        f"connecting permutation {rho.mapping} deranges {rho.derange_count} "
        "records, exactly the Hamming distance"
    )

    print("\nendpoints break the guarantee (as they must):")
    for p in (0, 1):
        measured = measured_optimal_epsilon(universe, p)
        print(f"  p = {p}: measured optimal budget = {measured}")


if __name__ == "__main__":
    main()
