"""Classical optimizers for the variational loop.

Two drivers: simultaneous-perturbation stochastic approximation (SPSA) with
the standard gain schedules, and a bounded limited-memory quasi-Newton method
(scipy L-BFGS-B) fed central finite-difference gradients.  Both record an
evaluation trace and are deterministic given their seed and inputs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize


class NonFiniteObjectiveError(RuntimeError):
    """The objective returned inf/nan; carries the iteration index."""

    def __init__(self, value: float, iteration: int):
        super().__init__(f"non-finite objective value {value} at iteration {iteration}")
        self.iteration = iteration


@dataclass
class OptimizerTrace:
    """Objective evaluations, one row per recorded evaluation."""

    iterations: list = field(default_factory=list)
    values: list = field(default_factory=list)
    parameters: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)

    def record(self, iteration: int, value: float, params: np.ndarray, t: float):
        self.iterations.append(int(iteration))
        self.values.append(float(value))
        self.parameters.append(np.array(params, dtype=float))
        self.wall_times.append(float(t))

    def best(self) -> tuple[float, np.ndarray]:
        i = int(np.argmin(self.values))
        return self.values[i], self.parameters[i]

    def best_so_far(self) -> list[float]:
        """Running minimum of the objective series."""
        out, best = [], math.inf
        for v in self.values:
            best = min(best, v)
            out.append(best)
        return out

    def to_csv(self, include_parameters: bool = False) -> str:
        header = "iteration,objective"
        if include_parameters:
            width = len(self.parameters[0]) if self.parameters else 0
            header += "," + ",".join(f"p{i}" for i in range(width))
        rows = [header]
        for i, (it, v) in enumerate(zip(self.iterations, self.values)):
            row = f"{it},{v!r}"
            if include_parameters:
                row += "," + ",".join(repr(float(p)) for p in self.parameters[i])
            rows.append(row)
        return "\n".join(rows) + "\n"


def _checked(f, x, iteration):
    v = float(f(np.asarray(x, dtype=float)))
    if not math.isfinite(v):
        raise NonFiniteObjectiveError(v, iteration)
    return v


def spsa(
    f,
    x0,
    iterations: int = 100,
    a: float | None = None,
    c: float = 0.1,
    A: float | None = None,
    alpha: float = 0.602,
    gamma: float = 0.101,
    seed: int = 0,
) -> tuple[np.ndarray, OptimizerTrace]:
    """SPSA with Rademacher perturbations and gain sequences
    a_k = a / (k + 1 + A)^alpha, c_k = c / (k + 1)^gamma.

    When ``a`` is None it is calibrated from 10 probe gradient estimates so
    the first update step has magnitude about 0.1 per component (the probes
    are not recorded in the trace).  Returns the best parameters seen across
    all recorded evaluations, not the final iterate.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if c <= 0:
        raise ValueError("perturbation scale c must be positive")
    x = np.array(x0, dtype=float)
    rng = np.random.default_rng(seed)
    if A is None:
        A = iterations / 10.0

    if a is None:
        magnitudes = []
        for _ in range(10):
            delta = rng.choice((-1.0, 1.0), size=x.shape)
            df = _checked(f, x + c * delta, 0) - _checked(f, x - c * delta, 0)
            magnitudes.append(abs(df) / (2.0 * c))
        mean_mag = float(np.mean(magnitudes))
        a = 0.1 * (1.0 + A) ** alpha / mean_mag if mean_mag > 1e-12 else 0.1

    trace = OptimizerTrace()
    start = time.perf_counter()
    for k in range(iterations):
        ak = a / (k + 1.0 + A) ** alpha
        ck = c / (k + 1.0) ** gamma
        delta = rng.choice((-1.0, 1.0), size=x.shape)
        x_plus, x_minus = x + ck * delta, x - ck * delta
        f_plus = _checked(f, x_plus, k)
        trace.record(k, f_plus, x_plus, time.perf_counter() - start)
        f_minus = _checked(f, x_minus, k)
        trace.record(k, f_minus, x_minus, time.perf_counter() - start)
        grad = (f_plus - f_minus) / (2.0 * ck) * delta
        x = x - ak * grad
    _, best_params = trace.best()
    return best_params, trace


def bounded_quasi_newton(
    f,
    x0,
    bounds,
    grad_step: float = 1e-6,
    conv_tol: float = 1e-8,
    max_iter: int = 500,
) -> tuple[np.ndarray, OptimizerTrace]:
    """L-BFGS-B with box projection and central finite-difference gradients.

    Terminates when the projected-gradient infinity norm or the relative
    objective change drops below ``conv_tol``.
    """
    x0 = np.array(x0, dtype=float)
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    if lo.shape != x0.shape:
        raise ValueError("bounds length does not match parameter count")
    if (x0 < lo - 1e-12).any() or (x0 > hi + 1e-12).any():
        raise ValueError("initial point violates the bounds")

    trace = OptimizerTrace()
    start = time.perf_counter()
    state = {"k": 0, "last": (None, None)}

    def wrapped(x):
        v = _checked(f, x, state["k"])
        state["last"] = (np.array(x), v)
        return v

    def grad(x):
        g = np.empty_like(x)
        for i in range(x.size):
            step = np.zeros_like(x)
            step[i] = grad_step
            g[i] = (wrapped(x + step) - wrapped(x - step)) / (2.0 * grad_step)
        return g

    def callback(xk):
        if (xk < lo - 1e-9).any() or (xk > hi + 1e-9).any():
            raise AssertionError("iterate left the feasible box")
        last_x, last_v = state["last"]
        v = last_v if last_x is not None and np.array_equal(last_x, xk) else wrapped(xk)
        trace.record(state["k"], v, xk, time.perf_counter() - start)
        state["k"] += 1

    v0 = wrapped(x0)
    trace.record(0, v0, x0, time.perf_counter() - start)
    state["k"] = 1
    result = minimize(
        wrapped,
        x0,
        method="L-BFGS-B",
        jac=grad,
        bounds=list(zip(lo, hi)),
        callback=callback,
        options={"ftol": conv_tol, "gtol": conv_tol, "maxcor": 10, "maxiter": max_iter},
    )
    trace.record(state["k"], float(result.fun), result.x, time.perf_counter() - start)
    best_value, best_params = trace.best()
    return best_params, trace
