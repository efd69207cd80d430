"""Time the hot kernels with numba and with the numpy fallback.

Each backend runs in a fresh interpreter because the backend is fixed at
import time by ``HARDY_DISABLE_NUMBA``.

    python3 benchmarks/bench_kernels.py --cells 4000 --repeat 5
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from hardy import _kernels
from hardy.core import Exponents
from hardy.instance import build_continuous_hardy, discretize
from hardy.operator import assemble_kernel
from hardy.sharpness import estimate_min_C

cells, repeat = int(sys.argv[1]), int(sys.argv[2])
e = Exponents(1.5, 1.5)
inst = discretize(build_continuous_hardy(1.5, 1e-3, 1e3, cells), 1)
kernel = assemble_kernel(inst, e)
rng = np.random.default_rng(0)
x = rng.random(kernel.col_w.size)
y = rng.random(kernel.row_w.size)

t0 = time.perf_counter()
estimate_min_C(inst, e, max_iter=3, restarts=1)
first = time.perf_counter() - t0

def best(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

out = {
    "backend": _kernels.BACKEND,
    "first_call_s": first,
    "matvec_s": best(lambda: kernel.matvec(x)),
    "rmatvec_s": best(lambda: kernel.rmatvec(y)),
    "estimate_min_C_s": best(lambda: estimate_min_C(inst, e)),
}
print(json.dumps(out))
"""


def run(disable: bool, cells: int, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("HARDY_DISABLE_NUMBA", None)
    if disable:
        env["HARDY_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", CHILD, str(cells), str(repeat)],
                          env=env, capture_output=True, text=True)
    if proc.returncode:
        sys.exit(f"benchmark child failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rows = [run(False, args.cells, args.repeat), run(True, args.cells, args.repeat)]
    keys = ["first_call_s", "matvec_s", "rmatvec_s", "estimate_min_C_s"]
    print(f"{'backend':<8}" + "".join(f"{k:>18}" for k in keys))
    for r in rows:
        print(f"{r['backend']:<8}" + "".join(f"{r[k]:>18.5f}" for k in keys))


if __name__ == "__main__":
    main()
