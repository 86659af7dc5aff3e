import importlib
import os
import subprocess
import sys

import numpy as np

from spinxbar import kernels


def test_backends_are_interchangeable():
    args = dict(e=np.array([0.0, 0.0, 1.0]), n=np.array([0.0, 0.0, 1.0]), wk=6.4e10, wd=0.0, alpha=0.008, wj=1e10)
    outs = []
    for run in (kernels.llgs_run, kernels.python_llgs_run):
        m = np.array([0.01745, 0.0, 0.99985])
        m /= np.linalg.norm(m)
        res = run(m, args["e"], args["n"], args["wk"], args["wd"], args["alpha"], args["wj"], np.array([0.0, 0.0, -1.0]), 1e-12, 3000, 0.9, False)
        outs.append((m.copy(), res))
    np.testing.assert_allclose(outs[0][0], outs[1][0], atol=1e-12)
    assert outs[0][1][1] == outs[1][1][1]


def test_pure_python_switch():
    env = dict(os.environ, SPINXBAR_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from spinxbar import kernels; print(kernels.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


def test_compiled_extension_selected_when_built():
    spec = importlib.util.find_spec("spinxbar._kernels")
    if spec is not None and os.environ.get("SPINXBAR_PURE_PYTHON") is None:
        assert kernels.BACKEND == "cython"
