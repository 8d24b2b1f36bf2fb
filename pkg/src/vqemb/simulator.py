"""Statevector circuit simulation, expectation estimation, and readout noise.

States are dense complex vectors with qubit 0 on the most significant bit,
so bitstring output reads left to right as qubit 0, 1, ...  Circuits carry
X, Ry and CNOT gates; Ry angles sit in slots that are either free (an index
into the parameter vector) or frozen at a fixed angle.

Measurement grouping for sampled expectations uses greedy qubit-wise
commutativity; Y-basis measurements rotate with S-dagger followed by H.
Every stochastic operation takes an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .pauli import PauliWord, QubitHamiltonian

_H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SDG_MAT = np.array([[1, 0], [0, -1j]], dtype=complex)
_X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class FreeSlot:
    """Rotation angle bound to position `index` of the parameter vector."""

    index: int


@dataclass(frozen=True)
class FrozenSlot:
    """Rotation angle fixed at construction time (radians)."""

    angle: float


Slot = Union[FreeSlot, FrozenSlot]


@dataclass(frozen=True)
class PauliXGate:
    qubit: int


@dataclass(frozen=True)
class RyGate:
    qubit: int
    slot: Slot


@dataclass(frozen=True)
class CnotGate:
    control: int
    target: int


Gate = Union[PauliXGate, RyGate, CnotGate]


class Circuit:
    """Ordered gate list over a fixed register.

    Free parameter slots must form a contiguous 0..P-1 index range.
    """

    def __init__(self, n_qubits: int, gates: Iterable[Gate] = ()):
        self.n_qubits = int(n_qubits)
        self.gates = tuple(gates)
        indices = []
        for g in self.gates:
            if isinstance(g, CnotGate):
                if g.control == g.target:
                    raise ValueError("CNOT control and target must differ")
                qubits = (g.control, g.target)
            else:
                qubits = (g.qubit,)
            for q in qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")
            if isinstance(g, RyGate) and isinstance(g.slot, FreeSlot):
                indices.append(g.slot.index)
        if sorted(indices) != list(range(len(indices))):
            raise ValueError(f"free parameter indices {sorted(indices)} are not contiguous from 0")
        self.n_parameters = len(indices)

    def free_gates(self) -> list[tuple[int, int]]:
        """(gate position, parameter index) for every free Ry gate."""
        return [
            (pos, g.slot.index)
            for pos, g in enumerate(self.gates)
            if isinstance(g, RyGate) and isinstance(g.slot, FreeSlot)
        ]


def zero_state(n_qubits: int) -> np.ndarray:
    state = np.zeros(1 << n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def _apply_1q(state: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    tensor = state.reshape([2] * n)
    tensor = np.tensordot(mat, tensor, axes=([1], [qubit]))
    return np.moveaxis(tensor, 0, qubit).reshape(-1)


def _apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    tensor = state.reshape([2] * n).copy()
    sel = [slice(None)] * n
    sel[control] = 1
    block = tensor[tuple(sel)]
    t_axis = target if target < control else target - 1
    tensor[tuple(sel)] = np.flip(block, axis=t_axis)
    return tensor.reshape(-1)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def evolve(circuit: Circuit, params: Sequence[float] = ()) -> np.ndarray:
    """Run the circuit on |0...0>, binding free slots to ``params``."""
    params = np.asarray(params, dtype=float)
    if params.size != circuit.n_parameters:
        raise ValueError(
            f"expected {circuit.n_parameters} parameters, got {params.size}"
        )
    n = circuit.n_qubits
    state = zero_state(n)
    for g in circuit.gates:
        if isinstance(g, PauliXGate):
            state = _apply_1q(state, _X_MAT, g.qubit, n)
        elif isinstance(g, RyGate):
            angle = g.slot.angle if isinstance(g.slot, FrozenSlot) else params[g.slot.index]
            state = _apply_1q(state, _ry(angle), g.qubit, n)
        else:
            state = _apply_cnot(state, g.control, g.target, n)
    return state


def exact_expectation(state: np.ndarray, h: QubitHamiltonian) -> float:
    """<state|H|state>; raises if a Hermitian value does not come out real."""
    value = h.expectation(state)
    if abs(value.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}; Hamiltonian not Hermitian?")
    return float(value.real)


# -- readout noise ---------------------------------------------------------------

@dataclass(frozen=True)
class ReadoutNoiseModel:
    """Per-qubit confusion matrices, columns indexed by the true bit.

    ``matrices[q] = [[p(0|0), p(0|1)], [p(1|0), p(1|1)]]``.
    """

    matrices: tuple

    def __post_init__(self):
        for q, m in enumerate(self.matrices):
            m = np.asarray(m, dtype=float)
            if m.shape != (2, 2) or (m < -1e-12).any() or (m > 1 + 1e-12).any():
                raise ValueError(f"qubit {q}: confusion matrix entries must lie in [0, 1]")
            if not np.allclose(m.sum(axis=0), 1.0, atol=1e-12):
                raise ValueError(f"qubit {q}: confusion matrix columns must sum to 1")

    @property
    def n_qubits(self) -> int:
        return len(self.matrices)

    def flip_probs(self) -> np.ndarray:
        """(n, 2) array of [p(1|0), p(0|1)] per qubit."""
        out = np.empty((self.n_qubits, 2))
        for q, m in enumerate(self.matrices):
            m = np.asarray(m, dtype=float)
            out[q] = (m[1, 0], m[0, 1])
        return out

    @classmethod
    def uniform(cls, n_qubits: int, p_flip: float) -> "ReadoutNoiseModel":
        m = ((1 - p_flip, p_flip), (p_flip, 1 - p_flip))
        return cls(tuple(m for _ in range(n_qubits)))

    @classmethod
    def from_flip_probs(cls, p10: Sequence[float], p01: Sequence[float]) -> "ReadoutNoiseModel":
        return cls(tuple(
            ((1 - a, b), (a, 1 - b)) for a, b in zip(p10, p01)
        ))

    def to_text(self) -> str:
        lines = [f"nqubits={self.n_qubits}"]
        for a, b in self.flip_probs():
            lines.append(f"{float(a)!r} {float(b)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ReadoutNoiseModel":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("nqubits="):
            raise ValueError("missing 'nqubits=' header line")
        n = int(lines[0].split("=", 1)[1])
        if len(lines) - 1 != n:
            raise ValueError(f"expected {n} noise lines, found {len(lines) - 1}")
        p10, p01 = [], []
        for ln in lines[1:]:
            a, b = ln.split()
            p10.append(float(a))
            p01.append(float(b))
        return cls.from_flip_probs(p10, p01)


@dataclass(frozen=True)
class ShotCounts:
    """Measured bitstring histogram in a fixed Pauli basis."""

    counts: dict
    shots: int
    basis: PauliWord

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to the shot total")

    def to_text(self) -> str:
        lines = [f"shots={self.shots}", f"basis={self.basis.letters}"]
        for b in sorted(self.counts):
            lines.append(f"{b} {self.counts[b]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ShotCounts":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2 or not lines[0].startswith("shots=") or not lines[1].startswith("basis="):
            raise ValueError("missing 'shots='/'basis=' header lines")
        shots = int(lines[0].split("=", 1)[1])
        basis = PauliWord(lines[1].split("=", 1)[1])
        counts = {}
        for ln in lines[2:]:
            b, c = ln.split()
            counts[b] = int(c)
        return cls(counts, shots, basis)


def _rotate_to_basis(state: np.ndarray, basis: PauliWord, n: int) -> np.ndarray:
    for q, letter in enumerate(basis.letters):
        if letter == "X":
            state = _apply_1q(state, _H_MAT, q, n)
        elif letter == "Y":
            state = _apply_1q(state, _SDG_MAT, q, n)
            state = _apply_1q(state, _H_MAT, q, n)
    return state


def _sample_bits(
    state: np.ndarray, n: int, shots: int, noise: Optional[ReadoutNoiseModel], rng
) -> np.ndarray:
    """(shots, n) matrix of measured bits, including readout flips."""
    probs = np.abs(state) ** 2
    probs = probs / probs.sum()
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    bits = (outcomes[:, None] >> (n - 1 - np.arange(n))) & 1
    if noise is not None:
        fp = noise.flip_probs()
        u = rng.random(size=(shots, n))
        p_flip = np.where(bits == 0, fp[:, 0], fp[:, 1])
        bits = bits ^ (u < p_flip)
    return bits.astype(np.int64)


def _bits_to_strings(bits: np.ndarray) -> dict:
    n = bits.shape[1]
    weights = 1 << (n - 1 - np.arange(n))
    packed = bits @ weights
    values, counts = np.unique(packed, return_counts=True)
    return {format(int(v), f"0{n}b"): int(c) for v, c in zip(values, counts)}


def sample(
    state: np.ndarray,
    basis: PauliWord,
    shots: int,
    noise: Optional[ReadoutNoiseModel] = None,
    seed: int = 0,
) -> ShotCounts:
    """Born-rule sampling of all qubits after rotating into ``basis``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    n = basis.n_qubits
    if state.size != 1 << n:
        raise ValueError(f"state dimension {state.size} does not match basis {basis.letters}")
    rng = np.random.default_rng(seed)
    rotated = _rotate_to_basis(state, basis, n)
    bits = _sample_bits(rotated, n, shots, noise, rng)
    return ShotCounts(_bits_to_strings(bits), shots, basis)


# -- grouped sampled expectations ------------------------------------------------

def group_qubitwise(h: QubitHamiltonian) -> tuple[float, list]:
    """Greedy first-fit partition into qubit-wise commuting groups.

    Returns (identity constant, groups); each group is (basis word,
    [(coefficient, support tuple), ...]).  Coefficients are taken real.
    """
    constant = 0.0
    groups: list[tuple[list[str], list]] = []
    for term in h.terms:
        coeff = complex(term.coefficient)
        if abs(coeff.imag) > 1e-10:
            raise ValueError("sampled estimation requires a Hermitian Hamiltonian")
        if term.word.is_identity:
            constant += coeff.real
            continue
        placed = False
        for letters, members in groups:
            ok = True
            for q, c in enumerate(term.word.letters):
                if c != "I" and letters[q] != "I" and letters[q] != c:
                    ok = False
                    break
            if ok:
                for q, c in enumerate(term.word.letters):
                    if c != "I":
                        letters[q] = c
                members.append((coeff.real, term.word.support()))
                placed = True
                break
        if not placed:
            letters = list(term.word.letters)
            groups.append((letters, [(coeff.real, term.word.support())]))
    return constant, [
        (PauliWord("".join(letters)), members) for letters, members in groups
    ]


def tally_counts(counts: ShotCounts, members: list) -> tuple[float, float]:
    """Weighted eigenvalue mean and variance-of-mean from a histogram.

    ``members`` holds (coefficient, support) pairs measured in the same basis;
    the per-shot variable is the coefficient-weighted sum of parities.
    """
    total = counts.shots
    mean = 0.0
    second = 0.0
    for bitstring, c in counts.counts.items():
        v = 0.0
        for coeff, support in members:
            parity = sum(int(bitstring[q]) for q in support) & 1
            v += coeff * (1.0 - 2.0 * parity)
        w = c / total
        mean += w * v
        second += w * v * v
    var = max(second - mean * mean, 0.0) / total
    return mean, var


class RawGroupEstimator:
    """Unmitigated group estimation: sample and tally."""

    def estimate_group(self, state, basis, members, shots, noise, seed):
        counts = sample(state, basis, shots, noise, seed)
        return tally_counts(counts, members)


def sampled_expectation(
    circuit: Circuit,
    params: Sequence[float],
    h: QubitHamiltonian,
    shots: int,
    noise: Optional[ReadoutNoiseModel] = None,
    mitigator=None,
    seed: int = 0,
) -> tuple[float, float]:
    """Shot-based estimate of <H> with one measurement per commuting group.

    Returns (value, stderr).  ``mitigator`` may supply an ``estimate_group``
    hook (see mitigation module); None means raw counts.
    """
    if shots <= 0:
        raise ValueError("shots must be positive")
    state = evolve(circuit, params)
    constant, groups = group_qubitwise(h.simplify())
    estimator = mitigator if mitigator is not None else RawGroupEstimator()
    rng = np.random.default_rng(seed)
    value = constant
    variance = 0.0
    for basis, members in groups:
        sub_seed = int(rng.integers(0, 2**63 - 1))
        mean, var = estimator.estimate_group(state, basis, members, shots, noise, sub_seed)
        value += mean
        variance += var
    return value, math.sqrt(variance)
