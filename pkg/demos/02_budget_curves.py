"""Budget against swap rate, for a range of stratum bounds.

Each bound b yields a U-shaped curve: the budget falls as the rate
climbs toward sqrt(b+1)/(sqrt(b+1)+1), bottoms out at ln(b+1)/2, and
then the selection odds take over and push it back up.  Every budget
above the minimum is therefore attainable by exactly two rates, one of
them usually very close to 1.

Writes curve data to budget_curves.csv and, when matplotlib is
available, a plot to budget_curves.png.
"""

from permuswap import min_budget, psa_budget, swap_rates_for_budget

BOUNDS = [2, 10, 1000, 10**6]
GRID = [i / 200 for i in range(1, 200)]


def main():
    rows = []
    for b in BOUNDS:
        for p in GRID:
            rows.append((b, p, psa_budget(p, b).epsilon, "curve"))
        eps_min, p_min = min_budget(b)
        rows.append((b, p_min, eps_min, "minimum"))
        print(f"b = {b:>9,}: minimum budget {eps_min:.4f} at rate {p_min:.4f}")

    with open("budget_curves.csv", "w", encoding="utf-8") as fh:
        fh.write("b,p,epsilon,kind\n")
        for b, p, eps, kind in rows:
            fh.write(f"{b},{p:.6f},{eps:.6f},{kind}\n")
    print("\nwrote budget_curves.csv")

    eps_min, _ = min_budget(10)
    for target in (eps_min + 0.5, 3.0):
        low, high = swap_rates_for_budget(target, 10)
        print(
            f"budget {target:.3f} at b = 10 is achieved at rates "
            f"{low:.4f} and {high:.4f}"
        )

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the plot")
        return
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for b in BOUNDS:
        curve = [(p, e) for bb, p, e, kind in rows if bb == b and kind == "curve"]
        ax.plot(*zip(*curve), label=f"b = {b:,}")
        marker = next(
            (p, e) for bb, p, e, kind in rows if bb == b and kind == "minimum"
        )
        ax.plot(*marker, marker="D", mfc="white", mec="black", ms=7)
    ax.set_xlabel("swap rate p")
    ax.set_ylabel("budget")
    ax.legend()
    fig.tight_layout()
    fig.savefig("budget_curves.png", dpi=120)
    print("wrote budget_curves.png")


if __name__ == "__main__":
    main()
