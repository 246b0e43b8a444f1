import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spvqe.circuit import ExactEstimator, build_ansatz
from spvqe.errors import OptimizationError, StructuralError
from spvqe.optimizers import (
    OptimizerConfig,
    PenaltyStructure,
    _reconstructed_cost,
    cg_minimize,
    fit_sinusoids,
    nft_minimize,
)
from spvqe.pauli import QubitOperator, to_matrix


def quad(a, b):
    return (lambda x: float(0.5 * x @ a @ x - b @ x)), (lambda x: a @ x - b)


class TestCG:
    def test_bowl(self):
        tr = cg_minimize(lambda x: float(x @ x), lambda x: 2 * x, np.ones(2), OptimizerConfig(max_iterations=50))
        assert tr.best_value < 1e-10
        assert tr.iterations <= 50

    def test_shifted_parabola(self):
        tr = cg_minimize(lambda x: float((x[0] - 3) ** 2), lambda x: 2 * (x - 3), np.zeros(1), OptimizerConfig())
        assert tr.best_params[0] == pytest.approx(3, abs=1e-6)

    @given(st.integers(2, 6), st.integers(0, 2 ** 31 - 1))
    def test_convex_quadratic_within_dimension(self, n, seed):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(n, n))
        a = m @ m.T + n * np.eye(n)
        b = rng.normal(size=n)
        f, g = quad(a, b)
        tr = cg_minimize(f, g, np.zeros(n), OptimizerConfig(max_iterations=n, gradient_tolerance=1e-8))
        np.testing.assert_allclose(tr.best_params, np.linalg.solve(a, b), atol=1e-8)

    def test_vqe_diagonal(self):
        ham = QubitOperator({"ZI": 0.4, "IZ": -0.7, "ZZ": 0.2, "II": 0.1})
        exact = np.linalg.eigvalsh(to_matrix(ham))[0]
        est = ExactEstimator(build_ansatz(2, 1), [ham])
        tr = cg_minimize(lambda x: est.values(x)[0], lambda x: est.gradients(x)[0],
                         np.full(4, 0.3), OptimizerConfig())
        assert tr.best_value == pytest.approx(exact, abs=1e-8)

    def test_history_monotone_and_best(self):
        f, g = quad(np.diag([1.0, 10.0]), np.array([1.0, 1.0]))
        x0 = np.array([5.0, -5.0])
        tr = cg_minimize(f, g, x0, OptimizerConfig())
        values = [v for _, v in tr.history]
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert tr.best_value == min(values) <= f(x0)

    def test_non_finite(self):
        with pytest.raises(OptimizationError) as info:
            cg_minimize(lambda x: float("nan") if x[0] < 0.5 else float(x[0] ** 2),
                        lambda x: 2 * x, np.ones(1), OptimizerConfig())
        np.testing.assert_array_equal(info.value.last_params, np.ones(1))
        assert info.value.last_value == 1.0

    def test_deterministic(self):
        f, g = quad(np.diag([1.0, 3.0, 7.0]), np.ones(3))
        a = cg_minimize(f, g, np.ones(3), OptimizerConfig())
        b = cg_minimize(f, g, np.ones(3), OptimizerConfig())
        assert np.array_equal(a.best_params, b.best_params) and a.history == b.history

    def test_config_validation(self):
        for bad in (dict(method="BFGS"), dict(max_iterations=0), dict(gradient_tolerance=0)):
            with pytest.raises(StructuralError):
                OptimizerConfig(**bad)


class TestNFT:
    def test_pure_vqe_one_sweep(self):
        evals = lambda x: np.array([0.3 + 0.8 * np.cos(x[0] - 0.4)])  # noqa: E731
        tr = nft_minimize(evals, PenaltyStructure(), np.array([0.0]), OptimizerConfig(method="NFT", sweeps=1))
        assert tr.best_value == pytest.approx(-0.5, abs=1e-12)
        assert abs(np.cos(tr.best_params[0] - 0.4) + 1) < 1e-12

    def test_penalty_only(self):
        evals = lambda x: np.array([0.0, np.cos(x[0])])  # noqa: E731
        tr = nft_minimize(evals, PenaltyStructure((1.0,), (0.0,)), np.array([0.3]),
                          OptimizerConfig(method="NFT", sweeps=1))
        assert tr.best_value == pytest.approx(0.0, abs=1e-14)
        assert abs(tr.best_params[0]) == pytest.approx(np.pi / 2, abs=1e-7)

    def test_matches_grid_oracle(self, h2):
        ansatz = build_ansatz(2, 1)
        est = ExactEstimator(ansatz, [h2.hamiltonian, h2.number])
        structure = PenaltyStructure((0.7,), (1.0,))
        x0 = np.array([0.2, -0.4, 1.1, 0.5])
        tr = nft_minimize(est.values, structure, x0, OptimizerConfig(method="NFT", max_iterations=1))
        # dense oracle over the same single-parameter slice
        grid = np.linspace(-np.pi, np.pi, 200001)
        best = np.inf
        for t in grid[::50]:
            x = x0.copy()
            x[0] = t
            best = min(best, structure.cost(est.values(x)))
        fine = grid[np.abs(grid - tr.best_params[0]) < 1e-3]
        for t in fine:
            x = x0.copy()
            x[0] = t
            best = min(best, structure.cost(est.values(x)))
        assert tr.best_value == pytest.approx(best, abs=1e-7)

    def test_non_sinusoidal_rejected(self):
        evals = lambda x: np.array([np.cos(2 * x[0])])  # noqa: E731
        with pytest.raises(StructuralError):
            nft_minimize(evals, PenaltyStructure(), np.array([0.3]), OptimizerConfig(method="NFT"))

    def test_fit_check_can_be_disabled(self):
        evals = lambda x: np.array([np.cos(2 * x[0])])  # noqa: E731
        cfg = OptimizerConfig(method="NFT", sweeps=1, fit_tolerance=None)
        nft_minimize(evals, PenaltyStructure(), np.array([0.3]), cfg)

    @given(st.integers(0, 2 ** 31 - 1))
    def test_updates_never_increase_reconstruction(self, seed):
        rng = np.random.default_rng(seed)
        v0, vp, vm = rng.normal(size=(3, 3))
        a, p, q = fit_sinusoids(v0, vp, vm)
        structure = PenaltyStructure(tuple(rng.uniform(0, 5, 2)), tuple(rng.normal(size=2)))
        f0 = _reconstructed_cost(a, p, q, structure, np.zeros(1))[0][0]
        ansatz_like = lambda x: a + p * np.cos(x[0]) + q * np.sin(x[0])  # noqa: E731
        tr = nft_minimize(ansatz_like, structure, np.zeros(1), OptimizerConfig(method="NFT", sweeps=1))
        assert tr.best_value <= f0 + 1e-10

    def test_history_and_determinism(self, h2):
        est = ExactEstimator(build_ansatz(2, 2), [h2.hamiltonian, h2.number])
        structure = PenaltyStructure((2.0,), (1.0,))
        cfg = OptimizerConfig(method="NFT", sweeps=3, shuffle=True, seed=4)
        x0 = np.linspace(-1, 1, 6)
        a = nft_minimize(est.values, structure, x0, cfg)
        b = nft_minimize(est.values, structure, x0, cfg)
        assert a.history == b.history
        values = [v for _, v in a.history]
        assert all(y <= x + 1e-10 for x, y in zip(values, values[1:]))
        assert a.best_value == pytest.approx(min(values))

    def test_fit_sinusoids_exact(self):
        phi = np.array([0.0, 2 * np.pi / 3, -2 * np.pi / 3])
        vals = 0.2 + 0.5 * np.cos(phi) - 0.3 * np.sin(phi)
        np.testing.assert_allclose(fit_sinusoids(*vals), (0.2, 0.5, -0.3), atol=1e-15)
