"""Resource scaling with the active-space window.

Sweeps HOMO-k ... LUMO+k windows over the 10-orbital hydrogen chain and
reports circuit width and mapped Hamiltonian term counts: the width grows
linearly (8, 12, 16, 20 qubits) while the term count climbs much faster.
"""

from pathlib import Path

from vqemb import MappingSpec, estimate, parse_fcidump, restricted_hartree_fock
from vqemb.resources import format_table

ROOT = Path(__file__).resolve().parent.parent

integrals = parse_fcidump((ROOT / "fixtures" / "h10.fcidump").read_text())
mf = restricted_hartree_fock(integrals)
print(f"H10 chain: {integrals.n_orbitals} orbitals, HF = {mf.hf_energy:.6f} Ha\n")

estimates = estimate(integrals, mf, windows=[1, 2, 3, 4], spec=MappingSpec("jordan_wigner"))
print(format_table(estimates))

ratios = [
    estimates[i + 1].hamiltonian_terms / estimates[i].hamiltonian_terms
    for i in range(len(estimates) - 1)
]
print("term-count growth per window step:", ", ".join(f"{r:.1f}x" for r in ratios))
