"""Classical minimizers for (penalized) VQE costs.

``cg_minimize`` is nonlinear conjugate gradient (Polak-Ribiere, restarted
when beta < 0) with an Armijo backtracking line search.

``nft_minimize`` is the Nakanishi-Fujii-Todo sequential method extended to
penalized costs. A single expectation value is ``a + b cos(theta_k - c)`` in
any one Ry angle, but the squared penalty makes the total cost a degree-2
trigonometric polynomial. The optimizer therefore fits every component
(energy and each constraint observable) from three evaluations and rebuilds
the cost from those fits before minimizing over the angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import OptimizationError, StructuralError

ARMIJO_C = 1e-4
BACKTRACK = 0.5
INITIAL_STEP = 1.0
MAX_BACKTRACKS = 60
MAX_REFINEMENTS = 4
NFT_GRID = 1024
NFT_PHASE = 2.0 * np.pi / 3.0
NFT_FIT_TOL = 1e-8


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimizer settings.

    ``max_iterations`` counts CG iterations, or single-angle updates for NFT.
    ``fit_tolerance=None`` disables the NFT sinusoid residual check (needed
    with shot noise).
    """

    method: str = "CG"
    max_iterations: int = 200
    gradient_tolerance: float = 1e-8
    sweeps: int = 20
    seed: int = 0
    shuffle: bool = False
    fit_tolerance: float | None = NFT_FIT_TOL

    def __post_init__(self):
        if self.method not in ("CG", "NFT"):
            raise StructuralError(f"unknown optimizer {self.method!r}")
        if self.max_iterations < 1:
            raise StructuralError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0:
            raise StructuralError("gradient_tolerance must be > 0")
        if self.sweeps < 1:
            raise StructuralError("sweeps must be >= 1")

    def with_iterations(self, max_iterations: int) -> "OptimizerConfig":
        return OptimizerConfig(
            self.method, max_iterations, self.gradient_tolerance,
            max(1, self.sweeps), self.seed, self.shuffle, self.fit_tolerance,
        )


@dataclass
class OptimizationTrace:
    best_params: np.ndarray
    best_value: float
    evaluations: int = 0
    gradient_evaluations: int = 0
    iterations: int = 0
    converged: bool = False
    history: list[tuple[int, float]] = field(default_factory=list)


class _Counted:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


def _finite_or_raise(value, what, x_good, f_good):
    if not np.all(np.isfinite(value)):
        raise OptimizationError(
            f"non-finite {what}", last_params=None if x_good is None else x_good.copy(),
            last_value=f_good,
        )


def _interpolate(slope, f0, step, f_step):
    """Minimizer of the parabola through f(0), f'(0) and f(step), or None."""
    curvature = f_step - f0 - slope * step
    if curvature <= 0:
        return None
    return -slope * step * step / (2.0 * curvature)


def _line_search(value_fn, x, f, g, d):
    """Armijo backtracking from step 1, refined by quadratic interpolation.

    Every accepted step satisfies the Armijo condition. Interpolated probes
    (from f(0), f'(0) and the best trial so far) are tried while they keep
    lowering the value, so quadratics are solved exactly and stiff valleys
    do not leave conjugate directions badly scaled.
    """
    slope = float(g @ d)

    def probe(step):
        value = float(value_fn(x + step * d))
        _finite_or_raise(value, "objective value", x, f)
        return value

    def armijo(step, f_step):
        return f_step <= f + ARMIJO_C * step * slope

    step = INITIAL_STEP
    f_step = probe(step)
    best = (step, f_step) if armijo(step, f_step) else None
    trial = (step, f_step)
    for _ in range(MAX_REFINEMENTS):
        alpha = _interpolate(slope, f, *trial)
        if alpha is None or not 1e-14 < alpha < 1e3 or alpha == trial[0]:
            break
        if best is not None and abs(alpha - best[0]) <= 1e-3 * best[0]:
            break
        f_alpha = probe(alpha)
        if not armijo(alpha, f_alpha) or (best is not None and f_alpha >= best[1]):
            break
        best = trial = (alpha, f_alpha)
    if best is not None:
        return best
    for _ in range(MAX_BACKTRACKS):
        step *= BACKTRACK
        f_step = probe(step)
        if armijo(step, f_step):
            return step, f_step
    return None, None


def cg_minimize(value_fn: Callable, gradient_fn: Callable, x0, cfg: OptimizerConfig) -> OptimizationTrace:
    value_fn = _Counted(value_fn)
    gradient_fn = _Counted(gradient_fn)
    x = np.array(x0, dtype=np.float64)
    f = float(value_fn(x))
    _finite_or_raise(f, "objective value at x0", None, None)
    g = np.asarray(gradient_fn(x), dtype=np.float64)
    _finite_or_raise(g, "gradient at x0", x, f)
    d = -g
    history = [(0, f)]
    converged = False
    it = 0
    while it < cfg.max_iterations:
        if np.linalg.norm(g) <= cfg.gradient_tolerance:
            converged = True
            break
        if g @ d >= 0:
            d = -g
        step, f_new = _line_search(value_fn, x, f, g, d)
        if step is None:
            if np.array_equal(d, -g):
                break  # no descent possible along steepest descent
            d = -g
            continue
        it += 1
        x_new = x + step * d
        g_new = np.asarray(gradient_fn(x_new), dtype=np.float64)
        _finite_or_raise(g_new, "gradient", x, f)
        beta = float(g_new @ (g_new - g)) / float(g @ g)
        d = -g_new + max(beta, 0.0) * d
        x, f, g = x_new, f_new, g_new
        history.append((it, f))
    else:
        converged = bool(np.linalg.norm(g) <= cfg.gradient_tolerance)
    return OptimizationTrace(
        best_params=x, best_value=f, evaluations=value_fn.calls,
        gradient_evaluations=gradient_fn.calls, iterations=it,
        converged=converged, history=history,
    )


@dataclass(frozen=True)
class PenaltyStructure:
    """Cost ``components[0] + sum_i mus[i] * (components[1 + i] - targets[i])**2``."""

    mus: tuple[float, ...] = ()
    targets: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.mus) != len(self.targets):
            raise StructuralError("mus and targets differ in length")

    def cost(self, components) -> float:
        components = np.asarray(components)
        if not self.mus:
            return float(components[0])
        resid = components[1:] - np.asarray(self.targets)
        return float(components[0] + np.sum(np.asarray(self.mus) * resid * resid))


def fit_sinusoids(v0, v_plus, v_minus):
    """Coefficients of ``a + p cos(phi) + q sin(phi)`` through phi = 0, +2pi/3, -2pi/3."""
    v0, v_plus, v_minus = (np.asarray(v, dtype=np.float64) for v in (v0, v_plus, v_minus))
    a = (v0 + v_plus + v_minus) / 3.0
    p = (2.0 * v0 - v_plus - v_minus) / 3.0
    q = (v_plus - v_minus) / math.sqrt(3.0)
    return a, p, q


def _reconstructed_cost(a, p, q, structure, phi):
    """Cost and its first two derivatives at offsets ``phi`` (array)."""
    c, s = np.cos(phi), np.sin(phi)
    comp = a[:, None] + p[:, None] * c + q[:, None] * s
    d1 = -p[:, None] * s + q[:, None] * c
    d2 = -(comp - a[:, None])
    f = comp[0].copy()
    f1 = d1[0].copy()
    f2 = d2[0].copy()
    for i, (mu, target) in enumerate(zip(structure.mus, structure.targets)):
        r = comp[i + 1] - target
        f += mu * r * r
        f1 += 2.0 * mu * r * d1[i + 1]
        f2 += 2.0 * mu * (d1[i + 1] ** 2 + r * d2[i + 1])
    return f, f1, f2


def _wrap(theta):
    return (theta + np.pi) % (2.0 * np.pi) - np.pi


def nft_minimize(component_evals: Callable, structure: PenaltyStructure, x0,
                 cfg: OptimizerConfig) -> OptimizationTrace:
    """Sequential single-angle minimization with penalty-aware reconstruction.

    ``component_evals(params)`` returns ``[E, A_1, ..., A_m]``.
    """
    evals = _Counted(component_evals)
    x = np.array(x0, dtype=np.float64)
    n = x.shape[0]
    cur = np.asarray(evals(x), dtype=np.float64)
    if cur.shape != (1 + len(structure.mus),):
        raise StructuralError("component_evals must return [E, A_1, ..., A_m]")
    _finite_or_raise(cur, "components at x0", None, None)
    f_cur = structure.cost(cur)
    history = [(0, f_cur)]
    best_x, best_f = x.copy(), f_cur
    rng = np.random.default_rng(cfg.seed)
    grid_abs = -np.pi + 2.0 * np.pi * np.arange(NFT_GRID) / NFT_GRID
    updates = 0
    done = False
    for _sweep in range(cfg.sweeps):
        order = rng.permutation(n) if cfg.shuffle else range(n)
        for k in order:
            if updates >= cfg.max_iterations:
                done = True
                break
            theta = x[k]
            x[k] = theta + NFT_PHASE
            v_plus = np.asarray(evals(x), dtype=np.float64)
            x[k] = theta - NFT_PHASE
            v_minus = np.asarray(evals(x), dtype=np.float64)
            x[k] = theta
            _finite_or_raise(v_plus, "components", x, f_cur)
            _finite_or_raise(v_minus, "components", x, f_cur)
            a, p, q = fit_sinusoids(cur, v_plus, v_minus)

            f0 = _reconstructed_cost(a, p, q, structure, np.zeros(1))[0][0]
            grid = grid_abs - theta
            fg, _, _ = _reconstructed_cost(a, p, q, structure, grid)
            phi = grid[int(np.argmin(fg))]
            f_phi = fg.min()
            # one Newton polish
            _, f1, f2 = _reconstructed_cost(a, p, q, structure, np.array([phi]))
            if f2[0] > 0:
                cand = phi - f1[0] / f2[0]
                f_cand = _reconstructed_cost(a, p, q, structure, np.array([cand]))[0][0]
                if f_cand < f_phi:
                    phi, f_phi = cand, f_cand
            if f_phi > f0:
                phi, f_phi = 0.0, f0

            predicted = a + p * math.cos(phi) + q * math.sin(phi)
            x[k] = _wrap(theta + phi) if phi != 0.0 else theta
            cur = np.asarray(evals(x), dtype=np.float64)
            _finite_or_raise(cur, "components", x, f_cur)
            if cfg.fit_tolerance is not None:
                resid = float(np.max(np.abs(cur - predicted)))
                if resid > cfg.fit_tolerance:
                    raise StructuralError(
                        f"sinusoid fit residual {resid:.3g} for parameter {k}: "
                        "components are not sinusoidal in a single angle"
                    )
            f_cur = structure.cost(cur)
            updates += 1
            history.append((updates, f_cur))
            if f_cur < best_f:
                best_x, best_f = x.copy(), f_cur
        if done:
            break
    return OptimizationTrace(
        best_params=best_x, best_value=best_f, evaluations=evals.calls,
        iterations=updates, converged=False, history=history,
    )
