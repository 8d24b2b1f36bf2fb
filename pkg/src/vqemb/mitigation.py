"""Readout-error mitigation.

Two schemes: assignment-matrix inversion restricted to the observed-bitstring
subspace (direct solve below 500 distinct bitstrings, preconditioned GMRES
above), and twirled readout estimation, where random X masks symmetrize the
readout channel and a calibration pass on the empty circuit measures the
attenuation factor to divide out.

Quasi-probabilities are renormalized to unit sum (restriction to the observed
subspace can lose the unobserved probability mass) and are never clipped;
expectation values are computed directly from the quasi-distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .pauli import PauliWord
from .simulator import (
    Circuit,
    ReadoutNoiseModel,
    ShotCounts,
    _rotate_to_basis,
    evolve,
    sample,
    zero_state,
)

DIRECT_SOLVE_LIMIT = 500


@dataclass(frozen=True)
class ReadoutCalibration:
    """Per-qubit confusion matrices estimated from prepared 0/1 states."""

    matrices: tuple
    shots: int
    seed: int

    def __post_init__(self):
        for q, m in enumerate(self.matrices):
            if not np.allclose(np.asarray(m).sum(axis=0), 1.0, atol=1e-12):
                raise ValueError(f"qubit {q}: estimated confusion columns must sum to 1")

    @property
    def n_qubits(self) -> int:
        return len(self.matrices)

    def to_text(self) -> str:
        lines = [f"nqubits={self.n_qubits}", f"shots={self.shots}", f"seed={self.seed}"]
        for m in self.matrices:
            m = np.asarray(m)
            lines.append(f"{m[1, 0]!r} {m[0, 1]!r}")
        return "\n".join(lines) + "\n"


def calibrate(noise: ReadoutNoiseModel, shots: int, seed: int = 0) -> ReadoutCalibration:
    """Estimate each qubit's flip rates by measuring all-0 and all-1 preparations."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    fp = noise.flip_probs()
    n = noise.n_qubits
    p10 = (rng.random((shots, n)) < fp[:, 0]).mean(axis=0)
    p01 = (rng.random((shots, n)) < fp[:, 1]).mean(axis=0)
    matrices = tuple(
        ((1.0 - a, b), (a, 1.0 - b)) for a, b in zip(p10, p01)
    )
    return ReadoutCalibration(matrices, shots, seed)


def _restricted_matrix(bitstrings: Sequence[str], cal: ReadoutCalibration) -> np.ndarray:
    """Assignment matrix A[i, j] = P(measure b_i | true b_j) on the observed set."""
    bits = np.array([[int(c) for c in b] for b in bitstrings])
    m = len(bitstrings)
    A = np.ones((m, m))
    for q in range(bits.shape[1]):
        Mq = np.asarray(cal.matrices[q], dtype=float)
        A *= Mq[bits[:, None, q], bits[None, :, q]]
    return A


def _solve_assignment(A: np.ndarray, p: np.ndarray) -> np.ndarray:
    if len(p) < DIRECT_SOLVE_LIMIT:
        try:
            return np.linalg.solve(A, p)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"singular restricted assignment matrix: {exc}") from exc
    diag = np.diag(A).copy()
    if (np.abs(diag) < 1e-12).any():
        raise ValueError("restricted assignment matrix has a vanishing diagonal")
    precond = LinearOperator(A.shape, matvec=lambda v: v / diag)
    x, info = gmres(A, p, rtol=1e-10, atol=0.0, restart=50, M=precond)
    if info != 0:
        raise ValueError(f"iterative assignment solve did not converge (info={info})")
    return x


def m3_mitigate(counts: ShotCounts, cal: ReadoutCalibration) -> dict:
    """Quasi-probability distribution over the observed bitstrings.

    Solves A x = p with A restricted to the observed subspace; x is
    renormalized to unit sum and may carry negative entries.
    """
    if not counts.counts:
        raise ValueError("empty counts")
    observed = sorted(counts.counts)
    p = np.array([counts.counts[b] for b in observed], dtype=float) / counts.shots
    A = _restricted_matrix(observed, cal)
    x = _solve_assignment(A, p)
    total = x.sum()
    if abs(total) < 1e-8:
        raise ValueError("quasi-probability mass vanished; calibration is pathological")
    x = x / total
    return dict(zip(observed, x.tolist()))


class M3GroupEstimator:
    """Group-estimation hook for sampled expectations with subspace inversion.

    The group value is w . p_hat with A^T w = v, where v holds each observed
    bitstring's coefficient-weighted parity; the variance is propagated from
    the multinomial covariance of p_hat (renormalization treated as constant).
    """

    def __init__(self, calibration: ReadoutCalibration):
        self.calibration = calibration

    def estimate_group(self, state, basis, members, shots, noise, seed):
        counts = sample(state, basis, shots, noise, seed)
        observed = sorted(counts.counts)
        p = np.array([counts.counts[b] for b in observed], dtype=float) / shots
        A = _restricted_matrix(observed, self.calibration)
        v = np.zeros(len(observed))
        for i, b in enumerate(observed):
            for coeff, support in members:
                parity = sum(int(b[q]) for q in support) & 1
                v[i] += coeff * (1.0 - 2.0 * parity)
        x = _solve_assignment(A, p)
        s = x.sum()
        if abs(s) < 1e-8:
            raise ValueError("quasi-probability mass vanished; calibration is pathological")
        w = _solve_assignment(A.T, v)
        mean = float(w @ p) / s
        var = max(float(p @ (w * w)) - float(w @ p) ** 2, 0.0) / shots / (s * s)
        return mean, var


# -- twirled readout estimation ---------------------------------------------------

def _twirled_bits(
    state: np.ndarray,
    n: int,
    shots: int,
    noise: Optional[ReadoutNoiseModel],
    rng,
    n_batches: int = 16,
) -> np.ndarray:
    """Measured bits with per-batch X-mask twirling already compensated."""
    probs = np.abs(state) ** 2
    probs = probs / probs.sum()
    sizes = [shots // n_batches] * n_batches
    for i in range(shots % n_batches):
        sizes[i] += 1
    fp = noise.flip_probs() if noise is not None else None
    out = []
    for size in sizes:
        if size == 0:
            continue
        mask = rng.integers(0, 2, size=n)
        outcomes = rng.choice(probs.size, size=size, p=probs)
        bits = (outcomes[:, None] >> (n - 1 - np.arange(n))) & 1
        bits = bits ^ mask
        if fp is not None:
            u = rng.random(size=(size, n))
            p_flip = np.where(bits == 0, fp[:, 0], fp[:, 1])
            bits = bits ^ (u < p_flip)
        out.append(bits ^ mask)
    return np.concatenate(out, axis=0)


def _parity_eigs(bits: np.ndarray, support: Sequence[int]) -> np.ndarray:
    if len(support) == 0:
        return np.ones(bits.shape[0])
    return 1.0 - 2.0 * (bits[:, list(support)].sum(axis=1) % 2)


def trex_expectation(
    circuit: Circuit,
    params,
    observable: PauliWord,
    shots: int,
    noise: Optional[ReadoutNoiseModel] = None,
    seed: int = 0,
    cal_shots: Optional[int] = None,
    n_batches: int = 16,
) -> tuple[float, float]:
    """Twirled estimate of a diagonal (I/Z) observable, divided by the
    calibrated attenuation of its Z support.

    Returns (value, stderr); stderr combines the main and calibration passes.
    """
    if set(observable.letters) - {"I", "Z"}:
        raise ValueError("twirled readout estimation needs a diagonal (I/Z) observable")
    if shots <= 0:
        raise ValueError("shots must be positive")
    n = observable.n_qubits
    support = observable.support()
    rng = np.random.default_rng(seed)
    cal_shots = cal_shots if cal_shots is not None else shots

    state = evolve(circuit, params)
    bits = _twirled_bits(state, n, shots, noise, rng, n_batches)
    eigs = _parity_eigs(bits, support)
    raw = float(eigs.mean())
    var_raw = max(float((eigs * eigs).mean()) - raw * raw, 0.0) / shots

    cal_bits = _twirled_bits(zero_state(n), n, cal_shots, noise, rng, n_batches)
    cal_eigs = _parity_eigs(cal_bits, support)
    att = float(cal_eigs.mean())
    var_att = max(float((cal_eigs * cal_eigs).mean()) - att * att, 0.0) / cal_shots
    if abs(att) < 1e-6:
        raise ValueError(f"twirled attenuation {att:.2e} is too small to mitigate")

    value = raw / att
    stderr = math.sqrt(var_raw / att**2 + raw**2 * var_att / att**4)
    return value, stderr


class TrexGroupEstimator:
    """Group-estimation hook applying twirled readout to every term.

    One twirled calibration pass (lazy, on the first group) serves all Z
    supports; per-term attenuations are read from its stored bit matrix.
    """

    def __init__(self, cal_shots: int = 20000, n_batches: int = 16):
        self.cal_shots = cal_shots
        self.n_batches = n_batches
        self._cal_bits = None

    def _calibration_bits(self, n: int, noise, seed) -> np.ndarray:
        if self._cal_bits is None or self._cal_bits.shape[1] != n:
            rng = np.random.default_rng(seed)
            self._cal_bits = _twirled_bits(
                zero_state(n), n, self.cal_shots, noise, rng, self.n_batches
            )
        return self._cal_bits

    def estimate_group(self, state, basis, members, shots, noise, seed):
        n = basis.n_qubits
        rng = np.random.default_rng(seed)
        cal_bits = self._calibration_bits(n, noise, seed + 1 if seed is not None else 1)
        rotated = _rotate_to_basis(state, basis, n)
        bits = _twirled_bits(rotated, n, shots, noise, rng, self.n_batches)

        per_shot = np.zeros(bits.shape[0])
        extra_var = 0.0
        for coeff, support in members:
            eigs = _parity_eigs(bits, support)
            cal_eigs = _parity_eigs(cal_bits, support)
            att = float(cal_eigs.mean())
            if abs(att) < 1e-6:
                raise ValueError(f"twirled attenuation {att:.2e} is too small to mitigate")
            var_att = max(float((cal_eigs**2).mean()) - att * att, 0.0) / self.cal_shots
            raw = float(eigs.mean())
            per_shot += coeff * eigs / att
            extra_var += (coeff * raw / att**2) ** 2 * var_att
        mean = float(per_shot.mean())
        var = max(float((per_shot**2).mean()) - mean * mean, 0.0) / shots
        return mean, var + extra_var
