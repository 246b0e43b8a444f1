import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spvqe import _kernels_py, kernels
from spvqe.circuit import CompiledObservables
from spvqe.pauli import QubitOperator

compiled = pytest.importorskip("spvqe._kernels")


def random_observables(rng, n, count=2):
    ops = []
    for _ in range(count):
        words = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(5)]
        ops.append(QubitOperator({w: rng.normal() for w in words}, n))
    return CompiledObservables(ops)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@given(st.integers(1, 6), st.integers(0, 3), st.integers(0, 2 ** 31 - 1))
def test_backends_agree(n, depth, seed):
    rng = np.random.default_rng(seed)
    params = rng.uniform(-np.pi, np.pi, n * (depth + 1))
    psi_c = compiled.prepare_state(n, depth, params)
    psi_p = _kernels_py.prepare_state(n, depth, params)
    np.testing.assert_allclose(psi_c, psi_p, atol=1e-14)
    obs = random_observables(rng, n)
    args = (obs.xm, obs.zm, obs.w, obs.offsets)
    np.testing.assert_allclose(compiled.observable_values(psi_c, *args),
                               _kernels_py.observable_values(psi_p, *args), atol=1e-13)
    np.testing.assert_allclose(compiled.shift_gradients(n, depth, params, *args),
                               _kernels_py.shift_gradients(n, depth, params, *args), atol=1e-13)
    signs = rng.choice([-1.0, 0.0, 1.0], obs.xm.size)
    np.testing.assert_allclose(compiled.term_values(psi_c, obs.xm, obs.zm, signs),
                               _kernels_py.term_values(psi_p, obs.xm, obs.zm, signs), atol=1e-13)


def test_pure_python_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("SPVQE_PURE_PYTHON", "1")
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("SPVQE_PURE_PYTHON")
        importlib.reload(kernels)
