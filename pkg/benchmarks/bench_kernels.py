"""Compare the compiled and pure-Python kernel backends.

Times the three hot kernels (PELT recursion, BinSeg best split, energy
statistic scan) and the full detectors on random series, and checks that both
backends agree on every output.

    python benchmarks/bench_kernels.py --sizes 60 156 400 --repeat 5
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from qcpd import kernels
from qcpd.cpd import RBFCost, _prefix2d, detect_binseg, detect_ecp, detect_pelt, sq_distances


def _series(n: int, d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    regime = np.arange(n) * 4 // n
    return rng.normal(size=(4, d))[regime] * 3 + rng.normal(size=(n, d))


def _cases(x: np.ndarray):
    c = RBFCost().fit(x)
    P = _prefix2d(np.sqrt(sq_distances(x)))
    n = x.shape[0]
    return {
        "pelt": lambda k: k.pelt(c.diag_, c.gram_, 1.0, 2)[0],
        "best_split": lambda k: k.best_split(c.diag_, c.gram_, 0, n, 2)[:2],
        "energy_best": lambda k: k.energy_best(P, 0, n, 5)[:2],
        "detect_pelt": lambda k: detect_pelt(x, pen=1.0),
        "detect_binseg": lambda k: detect_binseg(x, n_bkps=3),
        "detect_ecp(R=19)": lambda k: detect_ecp(x, permutations=19, seed=0),
    }


def run(sizes, dims: int, repeat: int) -> list[dict]:
    backends = kernels.available()
    rows = []
    for n in sizes:
        x = _series(n, dims, seed=n)
        for name, fn in _cases(x).items():
            row = {"n": n, "d": dims, "case": name}
            outputs = {}
            for b in backends:
                with kernels.using(b):
                    k = kernels.impl()
                    outputs[b] = fn(k)
                    row[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=repeat))
            row["agree"] = len({repr(v) for v in outputs.values()}) == 1
            if "cython" in row:
                row["speedup"] = row["python"] / row["cython"]
            rows.append(row)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[60, 156, 400])
    ap.add_argument("--dims", type=int, default=34)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args(argv)
    if "cython" not in kernels.available():
        print("compiled backend not built; timing the Python backend only", file=sys.stderr)
    rows = run(args.sizes, args.dims, args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'n':>5} {'case':<18} {'python s':>10} {'cython s':>10} {'speedup':>8} agree")
        for r in rows:
            cy = f"{r['cython']:10.4f}" if "cython" in r else f"{'-':>10}"
            sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8}"
            print(f"{r['n']:>5} {r['case']:<18} {r['python']:10.4f} {cy} {sp} {r['agree']}")
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
