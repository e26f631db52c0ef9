"""Recompute the 2020 Census privacy-loss accounting.

Loads the shipped constants file, converts each product's rho^2 budget
to an approximate-DP epsilon at delta = 1e-10, composes the stages, and
prints the counterfactual swapping schemes side by side.  Published
epsilons that disagree with the conversion of the rounded rho^2 are
flagged with their deviation.
"""

from permuswap.budget import census2020_report


def main():
    report = census2020_report()
    print(f"conversions at delta = {report.delta:g}\n")
    header = f"{'label':<16}{'rho^2':>10}{'epsilon':>12}{'published':>12}{'dev':>9}"
    print(header)
    print("-" * len(header))
    rows = list(report.products) + list(report.noise_stage_totals)
    rows += [report.topdown_total, report.overall]
    for row in rows:
        pub = "-" if row.published_epsilon is None else f"{row.published_epsilon:.2f}"
        dev = "-" if row.deviation is None else f"{row.deviation:+.3f}"
        print(
            f"{row.label:<16}{row.rho_squared:>10.3f}{row.epsilon:>12.4f}"
            f"{pub:>12}{dev:>9}"
        )

    print(
        f"\na unit contributing two records sees rho^2 = "
        f"{report.group_privacy_rho_squared:.3f} "
        f"(epsilon >= {report.group_privacy_epsilon:.2f})"
    )

    print("\ncounterfactual swapping schemes (total budget for all products):")
    for cf in report.counterfactual:
        eps = ", ".join(
            f"p={rate:g}: {value:.2f}" for rate, value in sorted(cf.epsilon_by_rate.items())
        )
        print(f"  {cf.match_vars} / {cf.swap_vars} (b = {cf.b:,}): {eps}")

    print()
    for note in report.notes:
        print(f"note: {note}")


if __name__ == "__main__":
    main()
