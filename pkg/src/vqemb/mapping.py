"""Second-quantized Hamiltonians and fermion-to-qubit encodings.

Spin-orbitals use the interleaved convention: spatial orbital p maps to
spin-orbitals 2p (alpha) and 2p+1 (beta).  Jordan-Wigner encodes occupations
directly.  The parity encoding first reorders modes into spin blocks (all
alpha, then all beta) so that qubit M/2-1 carries the alpha-block parity and
qubit M-1 the total parity; the optional two-qubit reduction removes those
two qubits and substitutes the eigenvalues fixed by the electron count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chem import MolecularIntegrals
from .pauli import PauliTerm, PauliWord, QubitHamiltonian, _letters, _mul_masks, _PHASES

JORDAN_WIGNER = "jordan_wigner"
PARITY = "parity"


@dataclass(frozen=True)
class MappingSpec:
    """Which encoding to use and whether to taper the two parity qubits."""

    kind: str = JORDAN_WIGNER
    two_qubit_reduction: bool = False
    n_electrons: int | None = None

    def __post_init__(self):
        if self.kind not in (JORDAN_WIGNER, PARITY):
            raise ValueError(f"unknown mapping kind {self.kind!r}")
        if self.two_qubit_reduction and self.kind != PARITY:
            raise ValueError("two-qubit reduction requires the parity mapping")


@dataclass(frozen=True)
class FermionOperator:
    """Sum of products of creation/annihilation operators.

    ``terms`` holds (coefficient, ops) pairs where ops is an ordered tuple of
    (spin-orbital index, is_creation); an empty ops tuple is a constant.
    """

    n_modes: int
    terms: tuple = field(default=())

    def __post_init__(self):
        for coeff, ops in self.terms:
            for index, _ in ops:
                if not 0 <= index < self.n_modes:
                    raise ValueError(f"mode index {index} out of range 0..{self.n_modes - 1}")

    def __len__(self) -> int:
        return len(self.terms)


def build_fermionic_hamiltonian(m: MolecularIntegrals) -> FermionOperator:
    """Second-quantized molecular Hamiltonian from spatial integrals.

    H = E_core + sum_pq h_pq a+_ps a_qs
              + 1/2 sum_pqrs (pq|rs) a+_ps a+_rt a_st a_qs
    with s, t summed over both spins.
    """
    n = m.n_orbitals
    terms = []
    if m.core_energy != 0.0:
        terms.append((complex(m.core_energy), ()))
    for p in range(n):
        for q in range(n):
            h = m.one_body[p, q]
            if abs(h) < 1e-14:
                continue
            for s in (0, 1):
                terms.append((complex(h), ((2 * p + s, True), (2 * q + s, False))))
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    g = m.two_body[p, q, r, s_]
                    if abs(g) < 1e-14:
                        continue
                    for sa in (0, 1):
                        for sb in (0, 1):
                            ops = (
                                (2 * p + sa, True),
                                (2 * r + sb, True),
                                (2 * s_ + sb, False),
                                (2 * q + sa, False),
                            )
                            terms.append((0.5 * complex(g), ops))
    return FermionOperator(2 * n, tuple(terms))


def total_number_operator(n_modes: int) -> FermionOperator:
    """Sum of occupation-number operators over all spin-orbitals."""
    return FermionOperator(
        n_modes, tuple((1.0 + 0j, ((j, True), (j, False))) for j in range(n_modes))
    )


def _block_permutation(n_modes: int) -> list[int]:
    """Interleaved mode index -> block-ordered position (alpha block first)."""
    half = n_modes // 2
    return [(j // 2) + (j % 2) * half for j in range(n_modes)]


def _ladder_words(position: int, creation: bool, n: int, kind: str):
    """Expand one ladder operator into [(coeff, x_mask, z_mask)] on n qubits.

    Masks live in basis-index space (qubit q on bit n-1-q), matching pauli.py.
    """
    sign = -1.0j if creation else 1.0j

    def bit(q):
        return 1 << (n - 1 - q)

    if kind == JORDAN_WIGNER:
        z_chain = 0
        for q in range(position):
            z_chain |= bit(q)
        x_word = (0.5 + 0j, bit(position), z_chain)
        y_word = (0.5 * sign, bit(position), z_chain | bit(position))
        return [x_word, y_word]

    # parity: X chain on qubits above `position`, Z on the qubit below.
    x_chain = 0
    for q in range(position + 1, n):
        x_chain |= bit(q)
    z_below = bit(position - 1) if position > 0 else 0
    x_word = (0.5 + 0j, x_chain | bit(position), z_below)
    y_word = (0.5 * sign, x_chain | bit(position), bit(position))
    return [x_word, y_word]


def map_to_qubits(
    f: FermionOperator, spec: MappingSpec, drop_tol: float = 1e-12
) -> QubitHamiltonian:
    """Encode a fermionic operator as a qubit Hamiltonian."""
    n = f.n_modes
    perm = _block_permutation(n) if spec.kind == PARITY else list(range(n))

    cache: dict[tuple[int, bool], list] = {}
    accum: dict[tuple[int, int], complex] = {}
    identity = (0, 0)
    for coeff, ops in f.terms:
        # product of the 2-word expansions of each ladder operator
        words = [(complex(coeff), 0, 0)]
        for index, creation in ops:
            key = (index, creation)
            factor = cache.get(key)
            if factor is None:
                factor = _ladder_words(perm[index], creation, n, spec.kind)
                cache[key] = factor
            new_words = []
            for c1, x1, z1 in words:
                for c2, x2, z2 in factor:
                    k, x, z = _mul_masks(x1, z1, x2, z2)
                    new_words.append((c1 * c2 * _PHASES[k], x, z))
            words = new_words
        for c, x, z in words:
            key = (x, z)
            accum[key] = accum.get(key, 0.0) + c

    if spec.two_qubit_reduction:
        return _reduce_two_qubits(accum, n, spec.n_electrons, drop_tol)

    ham = QubitHamiltonian(
        n,
        [
            PauliTerm(c, PauliWord(_letters(x, z, n)))
            for (x, z), c in accum.items()
        ],
    )
    return ham.simplify(drop_tol)


def _reduce_two_qubits(accum, n, n_electrons, drop_tol) -> QubitHamiltonian:
    """Remove the alpha-parity and total-parity qubits of a block-parity register."""
    if n_electrons is None:
        raise ValueError("two-qubit reduction needs the electron count on the mapping spec")
    if n_electrons % 2:
        raise ValueError("two-qubit reduction assumes a closed-shell (even) electron count")
    half = n // 2
    z_alpha = (-1.0) ** (n_electrons // 2)
    z_total = (-1.0) ** n_electrons
    taper = {half - 1: z_alpha, n - 1: z_total}

    def bit(q):
        return 1 << (n - 1 - q)

    reduced: dict[tuple[int, int], complex] = {}
    for (x, z), c in accum.items():
        if abs(c) < drop_tol:
            continue
        for q, eig in taper.items():
            if x & bit(q):
                raise ValueError(
                    f"operator does not commute with the parity symmetry on qubit {q}; "
                    "two-qubit reduction is invalid"
                )
            if z & bit(q):
                c = c * eig
        new_x = _drop_bits(x, n, (half - 1, n - 1))
        new_z = _drop_bits(z, n, (half - 1, n - 1))
        key = (new_x, new_z)
        reduced[key] = reduced.get(key, 0.0) + c

    m = n - 2
    ham = QubitHamiltonian(
        m,
        [PauliTerm(c, PauliWord(_letters(x, z, m))) for (x, z), c in reduced.items()],
    )
    return ham.simplify(drop_tol)


def _drop_bits(mask: int, n: int, drop_qubits: tuple) -> int:
    """Re-pack an index-space mask after deleting the given qubit positions."""
    out = 0
    new_n = n - len(drop_qubits)
    new_q = 0
    for q in range(n):
        if q in drop_qubits:
            continue
        if mask & (1 << (n - 1 - q)):
            out |= 1 << (new_n - 1 - new_q)
        new_q += 1
    return out


def decode_statevector(state: np.ndarray, n_modes: int, spec: MappingSpec) -> np.ndarray:
    """Relabel a mapped-register statevector into the occupation basis.

    Both encodings permute computational basis states without phases, so this
    is a pure amplitude permutation; tapered registers are first expanded by
    reinserting the two parity bits fixed by the electron-number sector.
    Qubit/mode 0 sits on the most significant bit throughout.
    """
    if spec.kind == JORDAN_WIGNER:
        return np.asarray(state, dtype=complex)
    half = n_modes // 2
    state = np.asarray(state, dtype=complex)
    if spec.two_qubit_reduction:
        if state.size != 1 << (n_modes - 2):
            raise ValueError("state dimension does not match the reduced register")
        b_alpha = (spec.n_electrons // 2) % 2
        b_total = spec.n_electrons % 2
        expanded = np.zeros(1 << n_modes, dtype=complex)
        for idx in range(state.size):
            bits = [(idx >> (n_modes - 3 - q)) & 1 for q in range(n_modes - 2)]
            bits.insert(half - 1, b_alpha)
            bits.insert(n_modes - 1, b_total)
            full = 0
            for q, b in enumerate(bits):
                full |= b << (n_modes - 1 - q)
            expanded[full] = state[idx]
        state = expanded
    elif state.size != 1 << n_modes:
        raise ValueError("state dimension does not match the register")

    perm = _block_permutation(n_modes)
    inv = [0] * n_modes
    for mode, pos in enumerate(perm):
        inv[pos] = mode
    out = np.zeros_like(state)
    for idx in np.nonzero(state)[0]:
        p_bits = [(int(idx) >> (n_modes - 1 - q)) & 1 for q in range(n_modes)]
        occ_block = [p_bits[0]] + [p_bits[q] ^ p_bits[q - 1] for q in range(1, n_modes)]
        target = 0
        for mode in range(n_modes):
            if occ_block[perm[mode]]:
                target |= 1 << (n_modes - 1 - mode)
        # fermionic sign of reordering the occupied creation operators from
        # block-scan order to ascending interleaved order
        occupied = [inv[pos] for pos in range(n_modes) if occ_block[pos]]
        inversions = sum(
            1
            for i in range(len(occupied))
            for j in range(i + 1, len(occupied))
            if occupied[i] > occupied[j]
        )
        out[target] = state[idx] * (-1.0) ** inversions
    return out


def hartree_fock_occupation(n_spatial: int, n_electrons: int) -> list[int]:
    """Interleaved spin-orbital occupation bits of the aufbau determinant."""
    n_modes = 2 * n_spatial
    if n_electrons > n_modes:
        raise ValueError(f"{n_electrons} electrons exceed {n_modes} spin-orbitals")
    return [1 if j < n_electrons else 0 for j in range(n_modes)]


def hartree_fock_bitstring(
    n_spatial: int, n_electrons: int, spec: MappingSpec
) -> list[int]:
    """Qubit-register bits preparing the Hartree-Fock state under a mapping."""
    occ = hartree_fock_occupation(n_spatial, n_electrons)
    if spec.kind == JORDAN_WIGNER:
        return occ
    perm = _block_permutation(len(occ))
    blocked = [0] * len(occ)
    for j, o in enumerate(occ):
        blocked[perm[j]] = o
    bits = list(np.cumsum(blocked) % 2)
    if spec.two_qubit_reduction:
        n = len(bits)
        bits = [b for q, b in enumerate(bits) if q not in (n // 2 - 1, n - 1)]
    return [int(b) for b in bits]
