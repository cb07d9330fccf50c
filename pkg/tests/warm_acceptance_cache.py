"""Materialize the heavy acceptance cells into artifacts/acceptance.

Run as ``python3 tests/warm_acceptance_cache.py [group ...]`` where groups
are any of c11, c12, c13, c14, c15 (default: all, cheapest first).  Safe to
interrupt and re-run: completed cells are reused via their manifest hash.
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import helpers_acceptance as acc

GROUPS = {
    "c12": acc.c12_cells,
    "c14": acc.c14_cells,
    "c11": acc.c11_cells,
    "c13": acc.c13_cells,
    "c15": acc.c15_cells,
}


def main(argv):
    names = argv or ["c12", "c14", "c11", "c13", "c15"]
    for name in names:
        cells = GROUPS[name]()
        print(f"== {name}: {len(cells)} cells ==", flush=True)
        for cell in cells:
            label = acc.cell_dir_name(cell)
            t0 = time.time()
            acc.run_cell(cell)
            print(f"  {label}: {time.time() - t0:.1f} s", flush=True)


if __name__ == "__main__":
    main(sys.argv[1:])
