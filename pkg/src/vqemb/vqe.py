"""VQE driver: ties a qubit Hamiltonian, a parameterized circuit, an energy
estimator, and a classical optimizer into one seeded, reproducible solve."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import mitigation
from .optimize import OptimizerTrace, bounded_quasi_newton, spsa
from .pauli import PauliExpectation, QubitHamiltonian
from .simulator import Circuit, ReadoutNoiseModel, evolve, sampled_expectation


@dataclass(frozen=True)
class EstimatorSpec:
    """How the energy is evaluated: exact statevector or shot-based."""

    kind: str = "exact"  # exact | sampled
    shots: int = 1000
    noise: Optional[ReadoutNoiseModel] = None
    mitigation: str = "none"  # none | m3 | trex
    seed: Optional[int] = None
    calibration_shots: int = 20000

    def __post_init__(self):
        if self.kind not in ("exact", "sampled"):
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.mitigation not in ("none", "m3", "trex"):
            raise ValueError(f"unknown mitigation kind {self.mitigation!r}")
        if self.kind == "sampled" and self.seed is None:
            raise ValueError("sampled estimation requires a seed")


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = "quasi_newton"  # quasi_newton | spsa
    iterations: int = 100
    seed: Optional[int] = None
    conv_tol: float = 1e-8
    grad_step: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.kind not in ("quasi_newton", "spsa"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.kind == "spsa" and self.seed is None:
            raise ValueError("SPSA requires a seed")


@dataclass(frozen=True)
class VqeProblem:
    hamiltonian: QubitHamiltonian
    circuit: Circuit
    estimator: EstimatorSpec = EstimatorSpec()
    optimizer: OptimizerSpec = OptimizerSpec()
    initial: str = "zeros"  # zeros | random
    initial_seed: Optional[int] = None
    restarts: int = 1

    def __post_init__(self):
        if self.circuit.n_qubits != self.hamiltonian.n_qubits:
            raise ValueError(
                f"circuit acts on {self.circuit.n_qubits} qubits but the "
                f"Hamiltonian has {self.hamiltonian.n_qubits}"
            )
        if self.initial not in ("zeros", "random"):
            raise ValueError(f"unknown initial-parameter policy {self.initial!r}")
        if self.initial == "random" and self.initial_seed is None:
            raise ValueError("random initial parameters require a seed")
        if self.restarts > 1 and self.initial_seed is None:
            raise ValueError("multi-start requires an initial seed")


@dataclass
class VqeResult:
    energy: float
    parameters: np.ndarray
    trace: OptimizerTrace
    relative_error: Optional[float] = None
    restart_index: int = 0

    def to_text(self) -> str:
        lines = [
            f"energy={self.energy!r}",
            f"relative_error={'none' if self.relative_error is None else repr(self.relative_error)}",
            f"restart_index={self.restart_index}",
            f"n_parameters={len(self.parameters)}",
            "parameters=" + ",".join(repr(float(p)) for p in self.parameters),
        ]
        return "\n".join(lines) + "\n"


def relative_error(energy: float, reference: float) -> float:
    """|energy - reference| / |reference| (the accuracy metric of the tables)."""
    if reference == 0:
        raise ValueError("relative error is undefined for a zero reference")
    return abs(energy - reference) / abs(reference)


def build_objective(problem: VqeProblem):
    """Energy-evaluation closure for the configured estimator."""
    est = problem.estimator
    if est.kind == "exact":
        evaluator = PauliExpectation(problem.hamiltonian.simplify())

        def objective(params):
            return evaluator(evolve(problem.circuit, params))

        return objective

    mitigator = None
    if est.mitigation == "m3":
        cal = mitigation.calibrate(
            est.noise
            if est.noise is not None
            else ReadoutNoiseModel.uniform(problem.circuit.n_qubits, 0.0),
            est.calibration_shots,
            seed=est.seed,
        )
        mitigator = mitigation.M3GroupEstimator(cal)
    elif est.mitigation == "trex":
        mitigator = mitigation.TrexGroupEstimator(cal_shots=est.calibration_shots)

    rng = np.random.default_rng(est.seed)

    def objective(params):
        sub_seed = int(rng.integers(0, 2**63 - 1))
        value, _ = sampled_expectation(
            problem.circuit,
            params,
            problem.hamiltonian,
            est.shots,
            noise=est.noise,
            mitigator=mitigator,
            seed=sub_seed,
        )
        return value

    return objective


def _initial_vector(problem: VqeProblem, restart: int, init_rng) -> np.ndarray:
    n = problem.circuit.n_parameters
    if problem.initial == "zeros" and restart == 0:
        return np.zeros(n)
    return init_rng.uniform(-math.pi, math.pi, size=n)


def _run_optimizer(problem: VqeProblem, objective, x0) -> tuple[np.ndarray, OptimizerTrace]:
    opt = problem.optimizer
    if opt.kind == "spsa":
        return spsa(objective, x0, iterations=opt.iterations, seed=opt.seed)
    bounds = [(-2.0 * math.pi, 2.0 * math.pi)] * len(x0)
    x0 = np.mod(np.asarray(x0, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    return bounded_quasi_newton(
        objective,
        x0,
        bounds,
        grad_step=opt.grad_step,
        conv_tol=opt.conv_tol,
        max_iter=opt.max_iter,
    )


def solve(
    problem: VqeProblem,
    x0: Optional[np.ndarray] = None,
    reference: Optional[float] = None,
) -> VqeResult:
    """Minimize the estimated energy over the circuit's free parameters.

    ``x0`` overrides the initial point of the first restart (warm start).
    ``reference`` fills in the relative-error field.  Deterministic for
    fixed seeds.
    """
    objective = build_objective(problem)
    if problem.circuit.n_parameters == 0:
        trace = OptimizerTrace()
        value = float(objective(np.zeros(0)))
        trace.record(0, value, np.zeros(0), 0.0)
        result = VqeResult(value, np.zeros(0), trace)
        if reference is not None:
            result.relative_error = relative_error(value, reference)
        return result
    init_rng = np.random.default_rng(problem.initial_seed)
    best = None
    for r in range(problem.restarts):
        start = x0 if (x0 is not None and r == 0) else _initial_vector(problem, r, init_rng)
        params, trace = _run_optimizer(problem, objective, start)
        energy, best_params = trace.best()
        if best is None or energy < best.energy:
            best = VqeResult(energy, best_params, trace, restart_index=r)
    if reference is not None:
        best.relative_error = relative_error(best.energy, reference)
    return best
