"""Run the benchmark suite on a coarse table and compare controllers.

Four fixed operating points are each driven by three controllers: the
table-scheduled consensus law, a fixed-gain consensus baseline, and a
linear-feedback baseline.  The suite reports settling times and a verdict
on whether scheduling beats the fixed gains everywhere.

The table here is a coarse 5x5x5 grid so the whole demo stays under a
minute; the production grid is finer and picks slightly better cells.

    python demos/05_benchmark_suite.py
"""

import pathlib
import time

from caccsim.gaintable import AxisGrid, BuildConfig, CandidateSets, build_table
from caccsim.harness import (
    format_suite_summary,
    run_suite,
    write_comparison_csv,
)

cfg = BuildConfig()

axes = AxisGrid(
    dr=[-90.0, -45.0, 0.0, 45.0, 90.0],
    vi=[2.0, 10.0, 18.0, 26.0, 34.0],
    vj=[2.0, 10.0, 18.0, 26.0, 34.0],
)
candidates = CandidateSets(gammas=[float(g) for g in range(1, 11)], ks=[0.1])

start = time.perf_counter()
table = build_table(axes, candidates, cfg)
print(f"coarse table built in {time.perf_counter() - start:.1f} s "
      f"({int(table.valid_mask().sum())}/{table.k_cells.size} cells valid)")

start = time.perf_counter()
result = run_suite(table, cfg)
print(f"suite ran in {time.perf_counter() - start:.1f} s")
print()
print(format_suite_summary(result))

# Machine-readable copy of the comparison for spreadsheets or plotting.
out_dir = pathlib.Path(__file__).with_name("out")
out_dir.mkdir(exist_ok=True)
write_comparison_csv(out_dir / "comparison.csv", result.reports)
print(f"comparison written to {out_dir / 'comparison.csv'}")
