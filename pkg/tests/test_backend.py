import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from friedrichs import _backend, _kernels_py
from friedrichs.model import make_model
from friedrichs.stieltjes import SheetTag, _pair_table, log_minus_z

compiled = pytest.importorskip("friedrichs._kernels_c")


def test_compiled_backend_selected():
    assert _backend.BACKEND == "cython"


def test_env_forces_python_fallback():
    env = dict(os.environ, FRIEDRICHS_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import friedrichs; print(friedrichs.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


poles = st.tuples(st.floats(-3, 3), st.floats(0.2, 3), st.sampled_from([1, -1]))


@given(st.lists(poles, min_size=1, max_size=3), st.integers(2, 4),
       st.floats(-5, 5), st.floats(-4, 4))
def test_backends_agree(pole_list, order, x, y):
    terms = [(complex(px, s * py), order, [[1.0 + 0.1 * i]]) for i, (px, py, s) in enumerate(pole_list)]
    spec = make_model([1.0], terms, 1.0)
    p, j, q, k, _ = _pair_table(spec)
    z = np.array([complex(x, y if abs(y) > 1e-3 else 0.5)])
    if np.min(np.abs(spec.pole_set - z[0])) < 1e-3:
        return
    lz = log_minus_z(z, SheetTag.PLUS)
    a = _kernels_py.cauchy_pairs(z, lz, p, j, q, k)
    b = compiled.cauchy_pairs(z, lz, p, j, q, k)
    scale = np.maximum(np.abs(a), 1.0)
    assert np.all(np.abs(a - b) <= 1e-11 * scale)
