"""Write the (k, n) occupancy grid to CSV and print a coarse view of it.

Usage: ``python3 demos/heatmap_data.py [out.csv]``.
"""
import csv
import sys

from entswitch.analytic import heatmap_grid


def main(path="heatmap.csv"):
    rows = heatmap_grid()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "n", "expected_qubits", "log10_expected_qubits"])
        for r in rows:
            w.writerow([r.k, r.n, repr(r.expected_qubits), repr(r.log10_expected_qubits)])
    print(f"wrote {len(rows)} rows to {path}")
    lookup = {(r.k, r.n): r.expected_qubits for r in rows}
    ns = (2, 5, 10, 20, 50, 99)
    print("    k " + "".join(f"{'n=' + str(n):>10}" for n in ns))
    for k in (10, 25, 50, 100):
        cells = "".join(f"{lookup[(k, n)]:10.3f}" if (k, n) in lookup else f"{'':>10}" for n in ns)
        print(f"{k:>5} {cells}")


if __name__ == "__main__":
    main(*sys.argv[1:])
