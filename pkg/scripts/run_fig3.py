"""Correlation of the weak user against its serving beam across all angles.

Writes results/fig3.csv and prints where the correlation peaks and dips.
"""

from pathlib import Path

from hbnoma.results import emit_results
from hbnoma.runner import sweep_fig3


def main():
    out_dir = Path(__file__).resolve().parent.parent / "results"
    out_dir.mkdir(exist_ok=True)
    sweep = sweep_fig3(step_deg=0.5, seed=1)
    path = emit_results(sweep, "csv", out_dir / "fig3.csv")
    print(f"wrote {path}")
    rows = sweep.rows
    peak = max(rows, key=lambda r: r[1])
    print(f"correlation peaks at {peak[0]:g} deg (rho = {peak[1]:.6f})")
    minima = sorted(
        (rows[i][1], rows[i][0])
        for i in range(1, len(rows) - 1)
        if rows[i][1] < rows[i - 1][1] and rows[i][1] < rows[i + 1][1]
    )[:2]
    for rho, aod in minima:
        print(f"deep fade near {aod:g} deg (rho = {rho:.6f})")


if __name__ == "__main__":
    main()
