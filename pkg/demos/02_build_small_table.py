"""Build a coarse gain table and look at what the selector chose.

The production grid has thousands of cells and takes a minute or two.
This demo shrinks the axes to a 3x3x3 grid so the build finishes in a few
seconds, then prints the chosen speed-error weight (gamma) for every cell
and saves the table next to this script.

    python demos/02_build_small_table.py
"""

import pathlib
import time

from caccsim.gaintable import (
    AxisGrid,
    BuildConfig,
    CandidateSets,
    build_table,
    save_table,
)

# Coarse operating grid: initial delayed gap, follower speed, leader speed.
axes = AxisGrid(
    dr=[-40.0, 0.0, 40.0],
    vi=[8.0, 18.0, 28.0],
    vj=[8.0, 18.0, 28.0],
)

# Candidate gains tried in every cell.  The position weight stays fixed;
# only the speed-error weight gamma is swept.
candidates = CandidateSets(gammas=[1.0, 2.0, 4.0, 6.0, 8.0, 10.0], ks=[0.1])

cfg = BuildConfig()

start = time.perf_counter()
table = build_table(axes, candidates, cfg)
elapsed = time.perf_counter() - start

valid = int(table.valid_mask().sum())
print(f"built {table.k_cells.size} cells in {elapsed:.1f} s ({valid} valid)")
print()

# One block per initial-gap value; rows are follower speeds, columns leader
# speeds.  A dot marks a cell where no candidate survived.
for i1, dr in enumerate(axes.dr):
    print(f"gamma per cell at dr={dr:+.0f} m (rows vi, cols vj):")
    header = "        " + "".join(f"{vj:6.0f}" for vj in axes.vj)
    print(header)
    for i2, vi in enumerate(axes.vi):
        row = [f"vi={vi:3.0f}"]
        for i3 in range(len(axes.vj)):
            pair = table.cell(i1, i2, i3)
            row.append(f"{pair.gamma:6.0f}" if pair.valid else "     .")
        print(" ".join(row))
    print()

out = pathlib.Path(__file__).with_name("small_table.txt")
save_table(table, out)
print(f"saved to {out}")
