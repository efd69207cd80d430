import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hardy import _kernels

SCRIPT = """
import json, numpy as np
from hardy import _kernels
from hardy.core import Exponents
from hardy.instance import build_continuous_hardy, discretize
from hardy.operator import assemble_kernel
inst = discretize(build_continuous_hardy(1.5, 1e-2, 1e2, 300), 1)
k = assemble_kernel(inst, Exponents(1.5, 1.5))
u, r, it, conv = _kernels.power_iterate(k.col_w, k.cut, k.row_w, np.ones(inst.size),
                                        1.5, 1.5, 500, 1e-10)
print(json.dumps({"backend": _kernels.BACKEND, "ratio": r, "iters": it}))
"""


def run_backend(disabled):
    env = dict(os.environ)
    if disabled:
        env["HARDY_DISABLE_NUMBA"] = "1"
    else:
        env.pop("HARDY_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, check=True,
                         capture_output=True, text=True).stdout
    return json.loads(out.strip().splitlines()[-1])


def test_backends_agree():
    pytest.importorskip("numba")
    fast, slow = run_backend(False), run_backend(True)
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    assert fast["ratio"] == pytest.approx(slow["ratio"], rel=1e-10)


def test_loop_and_vector_matvec_agree():
    rng = np.random.default_rng(0)
    n, m = 40, 55
    col_w = rng.random(n)
    row_w = rng.random(m)
    cut = np.sort(rng.integers(0, n + 1, size=m)).astype(np.int64)
    u, v = rng.random(n), rng.random(m)
    assert np.allclose(_kernels.matvec_numpy(col_w, cut, row_w, u),
                       _kernels.matvec_loop(col_w, cut, row_w, u), rtol=1e-13)
    assert np.allclose(_kernels.rmatvec_numpy(col_w, cut, row_w, v),
                       _kernels.rmatvec_loop(col_w, cut, row_w, v), rtol=1e-13)


def test_power_iteration_rank_one():
    u, r, it, conv = _kernels.power_iterate(np.array([1.0]), np.array([1], dtype=np.int64),
                                            np.array([1.0]), np.array([1.0]), 2.0, 2.0, 50, 1e-12)
    assert r == pytest.approx(1.0) and conv
