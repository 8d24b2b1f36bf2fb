#!/usr/bin/env python3
"""Generate the FCIDUMP fixtures shipped under fixtures/.

Self-contained reference implementation: STO-3G s-orbital integrals for
hydrogen chains (closed-form Gaussian formulas), an AO-basis restricted
Hartree-Fock solver, symmetric Lowdin orthogonalization, and a
determinant-based full-CI solver.  None of this code is shared with the
vqemb package; the energies recorded in the fixture metadata are therefore
an independent cross-check for it.

Sanity anchor: H2 at R = 1.4 bohr in STO-3G gives E_HF = -1.11671 Ha and
E_FCI = -1.13727 Ha (textbook values); the script asserts both.

Usage: python tools/make_fixtures.py [outdir]
"""

import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

# STO-3G 1s contraction for hydrogen (zeta = 1.24, exponents pre-scaled).
H_EXPONENTS = np.array([3.425250914, 0.6239137298, 0.1688554040])
H_COEFFS = np.array([0.1543289673, 0.5353281423, 0.4446345422])


def _f0(t):
    """Boys function of order zero."""
    if t < 1e-12:
        return 1.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def _norm(alpha):
    return (2.0 * alpha / math.pi) ** 0.75


def ao_integrals(centers):
    """Return (S, T, V, ERI) over contracted H 1s functions at `centers`.

    Closed-form formulas for s-type Gaussians; ERI in chemist convention
    (pq|rs).  `centers` is an (natom, 3) array in bohr.
    """
    centers = np.asarray(centers, dtype=float)
    n = len(centers)
    prim = [
        [(a, c * _norm(a), centers[i]) for a, c in zip(H_EXPONENTS, H_COEFFS)]
        for i in range(n)
    ]

    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            for a, ca, A in prim[i]:
                for b, cb, B in prim[j]:
                    p = a + b
                    ab2 = float(np.dot(A - B, A - B))
                    pref = ca * cb * math.exp(-a * b / p * ab2)
                    s = pref * (math.pi / p) ** 1.5
                    S[i, j] += s
                    T[i, j] += s * a * b / p * (3.0 - 2.0 * a * b / p * ab2)
                    P = (a * A + b * B) / p
                    for C in centers:
                        pc2 = float(np.dot(P - C, P - C))
                        V[i, j] -= pref * 2.0 * math.pi / p * _f0(p * pc2)

    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    acc = 0.0
                    for a, ca, A in prim[i]:
                        for b, cb, B in prim[j]:
                            p = a + b
                            P = (a * A + b * B) / p
                            kab = math.exp(-a * b / p * float(np.dot(A - B, A - B)))
                            for c, cc, C in prim[k]:
                                for d, cd, D in prim[l]:
                                    q = c + d
                                    Q = (c * C + d * D) / q
                                    kcd = math.exp(-c * d / q * float(np.dot(C - D, C - D)))
                                    t = p * q / (p + q) * float(np.dot(P - Q, P - Q))
                                    acc += (
                                        ca * cb * cc * cd * kab * kcd
                                        * 2.0 * math.pi ** 2.5
                                        / (p * q * math.sqrt(p + q))
                                        * _f0(t)
                                    )
                    eri[i, j, k, l] = acc
    return S, T, V, eri


def nuclear_repulsion(centers):
    centers = np.asarray(centers, dtype=float)
    e = 0.0
    for i in range(len(centers)):
        for j in range(i):
            e += 1.0 / float(np.linalg.norm(centers[i] - centers[j]))
    return e


def scf_rhf(S, hcore, eri, n_elec, max_iter=200, tol=1e-12):
    """AO-basis closed-shell SCF; returns (electronic energy, density)."""
    n = S.shape[0]
    nocc = n_elec // 2
    seval, svec = np.linalg.eigh(S)
    X = svec @ np.diag(seval ** -0.5) @ svec.T
    D = np.zeros((n, n))
    F = hcore
    energy = 0.0
    for _ in range(max_iter):
        Fp = X.T @ F @ X
        _, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        Cocc = C[:, :nocc]
        D_new = 2.0 * Cocc @ Cocc.T
        J = np.einsum("pqrs,rs->pq", eri, D_new)
        K = np.einsum("prqs,rs->pq", eri, D_new)
        F = hcore + J - 0.5 * K
        e_new = 0.5 * np.sum(D_new * (hcore + F))
        if abs(e_new - energy) < tol and np.linalg.norm(D_new - D) < 1e-8:
            return e_new, D_new
        energy, D = e_new, D_new
    raise RuntimeError("reference SCF did not converge")


def lowdin_basis(S, hcore, eri):
    """Transform integrals to the symmetric-orthogonalized AO basis."""
    seval, svec = np.linalg.eigh(S)
    X = svec @ np.diag(seval ** -0.5) @ svec.T
    h = X.T @ hcore @ X
    g = np.einsum("ap,bq,cr,ds,abcd->pqrs", X, X, X, X, eri, optimize=True)
    return h, g


def _ann(det, q):
    if not (det >> q) & 1:
        return None
    sign = -1 if bin(det & ((1 << q) - 1)).count("1") % 2 else 1
    return sign, det & ~(1 << q)


def _cre(det, q):
    if (det >> q) & 1:
        return None
    sign = -1 if bin(det & ((1 << q) - 1)).count("1") % 2 else 1
    return sign, det | (1 << q)


def fci_ground_energy(h, g, n_elec, e_const):
    """Determinant full CI (Sz = 0 sector) for the orthonormal-basis integrals.

    Spin-orbital ordering: alpha block 0..n-1, beta block n..2n-1.
    H = e_const + sum h_pq a+_ps a_qs + 1/2 sum (pq|rs) a+_ps a+_rt a_st a_qs.
    """
    n = h.shape[0]
    nocc = n_elec // 2
    dets = []
    for occ_a in itertools.combinations(range(n), nocc):
        for occ_b in itertools.combinations(range(n), nocc):
            d = 0
            for p in occ_a:
                d |= 1 << p
            for p in occ_b:
                d |= 1 << (n + p)
            dets.append(d)
    index = {d: i for i, d in enumerate(dets)}
    dim = len(dets)
    H = np.zeros((dim, dim))

    spins = (0, n)
    for col, det in enumerate(dets):
        for p in range(n):
            for q in range(n):
                for s in spins:
                    r1 = _ann(det, q + s)
                    if r1 is None:
                        continue
                    sg1, d1 = r1
                    r2 = _cre(d1, p + s)
                    if r2 is None:
                        continue
                    sg2, d2 = r2
                    H[index[d2], col] += h[p, q] * sg1 * sg2
        for p in range(n):
            for q in range(n):
                for r in range(n):
                    for s_ in range(n):
                        val = 0.5 * g[p, q, r, s_]
                        if abs(val) < 1e-14:
                            continue
                        for sa in spins:
                            for sb in spins:
                                t1 = _ann(det, q + sa)
                                if t1 is None:
                                    continue
                                g1, d1 = t1
                                t2 = _ann(d1, s_ + sb)
                                if t2 is None:
                                    continue
                                g2, d2 = t2
                                t3 = _cre(d2, r + sb)
                                if t3 is None:
                                    continue
                                g3, d3 = t3
                                t4 = _cre(d3, p + sa)
                                if t4 is None:
                                    continue
                                g4, d4 = t4
                                H[index[d4], col] += val * g1 * g2 * g3 * g4
    evals = np.linalg.eigvalsh(H)
    return float(evals[0]) + e_const


def write_fcidump(path, h, g, n_elec, e_const, thresh=1e-12):
    """Write symmetry-unique integrals in FCIDUMP format (chemist (ij|kl))."""
    n = h.shape[0]
    lines = [f"&FCI NORB={n},NELEC={n_elec},MS2=0", "/"]

    def fmt(v):
        return f"{v:24.16e}"

    seen = set()
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i, j) < (k, l):
                        continue
                    key = (i, j, k, l)
                    if key in seen:
                        continue
                    seen.add(key)
                    v = g[i, j, k, l]
                    if abs(v) > thresh:
                        lines.append(f"{fmt(v)} {i+1:3d} {j+1:3d} {k+1:3d} {l+1:3d}")
    for i in range(n):
        for j in range(i + 1):
            if abs(h[i, j]) > thresh:
                lines.append(f"{fmt(h[i, j])} {i+1:3d} {j+1:3d}   0   0")
    lines.append(f"{fmt(e_const)}   0   0   0   0")
    Path(path).write_text("\n".join(lines) + "\n")


def make_chain(name, spacings, outdir, do_fci):
    """Build a hydrogen chain fixture with the given bond spacings (bohr)."""
    positions = [0.0]
    for s in spacings:
        positions.append(positions[-1] + s)
    centers = np.array([[x, 0.0, 0.0] for x in positions])
    natom = len(centers)

    S, T, V, eri = ao_integrals(centers)
    e_nuc = nuclear_repulsion(centers)
    hcore = T + V
    e_elec, _ = scf_rhf(S, hcore, eri, natom)
    e_hf = e_elec + e_nuc

    h, g = lowdin_basis(S, hcore, eri)
    e_fci = fci_ground_energy(h, g, natom, e_nuc) if do_fci else None

    outdir = Path(outdir)
    write_fcidump(outdir / f"{name}.fcidump", h, g, natom, e_nuc)
    meta = {
        "system": name,
        "geometry": "linear H chain, x-positions (bohr): "
        + ", ".join(f"{x:.6f}" for x in positions),
        "basis": "STO-3G (hydrogen s functions)",
        "orbital_basis": "symmetric Lowdin orthogonalization of the AOs",
        "n_orbitals": natom,
        "n_electrons": natom,
        "nuclear_repulsion": e_nuc,
        "hf_energy": e_hf,
        "fci_energy": e_fci,
        "generated_by": "tools/make_fixtures.py",
    }
    (outdir / f"{name}.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"{name}: E_HF = {e_hf:.10f}" + (f", E_FCI = {e_fci:.10f}" if e_fci else ""))
    return e_hf, e_fci


def write_field_chain(outdir, n=5, g=0.3):
    """Transverse-field chain Hamiltonian used by the deparameterisation runs.

    H = -sum_i X_i - g * sum_i Z_i Z_{i+1}: the ground state is close to a
    product of X eigenstates, so a one-layer hardware-efficient ansatz can
    represent it and most rotations freeze at standardized angles.
    """
    lines = [f"nqubits={n}"]
    for q in range(n):
        lines.append(f"{-1.0!r} {0.0!r} " + "I" * q + "X" + "I" * (n - 1 - q))
    for q in range(n - 1):
        lines.append(f"{-g!r} {0.0!r} " + "I" * q + "ZZ" + "I" * (n - 2 - q))
    (Path(outdir) / f"chain{n}.ham").write_text("\n".join(lines) + "\n")
    print(f"chain{n}: transverse-field chain, g = {g}")


def write_noise_model(outdir, n=2, p=0.02):
    lines = [f"nqubits={n}"] + [f"{p!r} {p!r}" for _ in range(n)]
    (Path(outdir) / f"noise_{n}q_2pct.txt").write_text("\n".join(lines) + "\n")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures")
    outdir.mkdir(parents=True, exist_ok=True)

    # H2 at 1.4 bohr: check against the textbook STO-3G values.
    e_hf, e_fci = make_chain("h2", [1.4], outdir, do_fci=True)
    assert abs(e_hf - (-1.11671)) < 5e-5, e_hf
    assert abs(e_fci - (-1.13727)) < 5e-5, e_fci

    # H4 chain for the embedding tests.
    make_chain("h4", [1.8, 1.8, 1.8], outdir, do_fci=True)

    # Dimerized H10 chain: gapped, SCF-friendly, 10 orbitals for the
    # active-space resource sweep.  Full CI is out of reach and not needed.
    make_chain("h10", [1.4, 1.9] * 4 + [1.4], outdir, do_fci=False)

    write_field_chain(outdir)
    write_noise_model(outdir, n=2)
    write_noise_model(outdir, n=4)


if __name__ == "__main__":
    main()
