"""Bath construction, embedding Hamiltonians, fragment solvers, and the
chemical-potential loop."""

import numpy as np
import pytest

from vqemb.chem import MolecularIntegrals, restricted_hartree_fock
from vqemb.dmet import (
    Fragmentation,
    VqeFragmentSolver,
    build_embedding,
    fragment_hamiltonian,
    full_ci_ground_energy,
    make_bath,
    run_dmet,
    sector_ground_state,
    solve_fragment,
    spin_summed_rdms,
)
from vqemb.mapping import (
    JORDAN_WIGNER,
    MappingSpec,
    build_fermionic_hamiltonian,
    map_to_qubits,
)
from vqemb.vqe import EstimatorSpec, OptimizerSpec


def hubbard_chain(n, t=1.0, u=2.0):
    """Half-filled Hubbard chain in its particle-hole symmetric form."""
    h = np.zeros((n, n))
    for i in range(n - 1):
        h[i, i + 1] = h[i + 1, i] = -t
    np.fill_diagonal(h, -u / 2)
    g = np.zeros((n, n, n, n))
    for i in range(n):
        g[i, i, i, i] = u
    return MolecularIntegrals(n, n, 0.0, h, g)


class TestFragmentation:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="more than one"):
            Fragmentation(((0, 1), (1, 2)))

    def test_empty_fragment_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            Fragmentation(((0,), ()))

    def test_cover_check(self):
        with pytest.raises(ValueError, match="cover"):
            Fragmentation(((0,), (2,))).validate_cover(3)


class TestMakeBath:
    def test_whole_molecule_has_no_bath(self, h4, h4_mf):
        basis, env = make_bath(h4_mf, (0, 1, 2, 3))
        assert basis.shape == (4, 4)
        assert np.allclose(env, 0.0)

    def test_block_diagonal_density_gives_no_bath(self):
        # 4 electrons fill orbitals 0 and 1; the density is diagonal, so no
        # fragment-environment entanglement exists for any index fragment
        levels = MolecularIntegrals(
            4, 4, 0.0,
            np.diag([-2.0, -1.0, 1.0, 2.0]),
            np.zeros((4, 4, 4, 4)),
        )
        mf = restricted_hartree_fock(levels)
        basis, env = make_bath(mf, (2, 3))
        assert basis.shape[1] == 2  # no bath, fragment only
        assert np.trace(env) == pytest.approx(4.0, abs=1e-8)  # both pairs stay outside
        basis, env = make_bath(mf, (0, 1))
        assert basis.shape[1] == 2
        assert np.trace(env) == pytest.approx(0.0, abs=1e-8)  # all electrons inside

    def test_h4_fragment_bookkeeping(self, h4, h4_mf):
        m, _ = h4
        basis, env = make_bath(h4_mf, (0, 1))
        assert basis.shape[1] <= 4
        assert np.allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-10)
        emb_electrons = np.trace(basis.T @ h4_mf.density @ basis)
        assert emb_electrons + np.trace(env) == pytest.approx(m.n_electrons, abs=1e-8)


class TestFragmentHamiltonian:
    def test_whole_molecule_embedding_is_identity(self, h4, h4_mf):
        m, _ = h4
        basis, env = make_bath(h4_mf, (0, 1, 2, 3))
        ints = fragment_hamiltonian(m, basis, env, mu=0.0, n_fragment=4)
        assert full_ci_ground_energy(ints) == pytest.approx(full_ci_ground_energy(m), abs=1e-8)

    def test_mu_shifts_fragment_diagonal_exactly(self, h4, h4_mf):
        m, _ = h4
        e = build_embedding(m, h4_mf, (0, 1))
        base = e.solver_integrals(0.0).one_body
        shifted = e.solver_integrals(0.25).one_body
        delta = base - shifted
        assert delta[0, 0] == pytest.approx(0.25) and delta[1, 1] == pytest.approx(0.25)
        off = delta - np.diag(np.diag(delta))
        assert np.allclose(off, 0.0)
        assert np.allclose(np.diag(delta)[2:], 0.0)


class TestSectorSolver:
    def test_matches_dense_oracle(self, h2):
        m, meta = h2
        h = map_to_qubits(build_fermionic_hamiltonian(m), MappingSpec(JORDAN_WIGNER))
        dense_energy, _ = h.ground_state_energy()
        sector_energy, state = sector_ground_state(h, 1, 1)
        assert sector_energy == pytest.approx(dense_energy, abs=1e-10)
        assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-10)

    def test_rdm_traces(self, h4):
        m, _ = h4
        h = map_to_qubits(build_fermionic_hamiltonian(m), MappingSpec(JORDAN_WIGNER))
        _, state = sector_ground_state(h, 2, 2)
        gamma, Gamma = spin_summed_rdms(state, 4)
        assert np.trace(gamma) == pytest.approx(4.0, abs=1e-10)
        # energy reassembled from RDMs equals the eigenvalue
        e_rdm = (
            m.core_energy
            + float(np.sum(m.one_body * gamma))
            + 0.5 * float(np.einsum("pqrs,pqrs->", m.two_body, Gamma))
        )
        assert e_rdm == pytest.approx(full_ci_ground_energy(m), abs=1e-8)

    def test_rdms_match_operator_expectations(self, h2):
        # independent route: fermionic operators mapped to qubits
        m, _ = h2
        h = map_to_qubits(build_fermionic_hamiltonian(m), MappingSpec(JORDAN_WIGNER))
        _, state = sector_ground_state(h, 1, 1)
        gamma, _ = spin_summed_rdms(state, 2)
        from vqemb.mapping import FermionOperator

        for p in range(2):
            for q in range(2):
                ops = tuple(
                    (1.0 + 0j, ((2 * p + s, True), (2 * q + s, False))) for s in (0, 1)
                )
                op = map_to_qubits(FermionOperator(4, ops), MappingSpec(JORDAN_WIGNER))
                assert op.expectation(state).real == pytest.approx(gamma[p, q], abs=1e-10)


class TestSolveFragment:
    def test_non_interacting_energy(self):
        levels = MolecularIntegrals(
            2, 2, 0.0, np.diag([-1.5, 0.5]), np.zeros((2, 2, 2, 2))
        )
        mf = restricted_hartree_fock(levels)
        e = build_embedding(levels, mf, (0, 1))
        sol = solve_fragment(e, "exact")
        assert sol.energy == pytest.approx(-3.0, abs=1e-8)
        assert sol.n_electrons == pytest.approx(2.0, abs=1e-8)

    def test_whole_molecule_electron_count(self, h4, h4_mf):
        m, _ = h4
        e = build_embedding(m, h4_mf, (0, 1, 2, 3))
        sol = solve_fragment(e, "exact")
        assert sol.n_electrons == pytest.approx(m.n_electrons, abs=1e-10)

    def test_exact_vs_vqe_two_orbital_embedding(self, h2, h2_mf):
        m, _ = h2
        e = build_embedding(m, h2_mf, (0,))
        assert e.n_orbitals == 2
        exact = solve_fragment(e, "exact")
        solver = VqeFragmentSolver(
            layers=1,
            optimizer=OptimizerSpec("quasi_newton"),
            estimator=EstimatorSpec("exact"),
            initial="random",
            initial_seed=2,
        )
        via_vqe = solve_fragment(e, solver)
        assert abs(via_vqe.energy - exact.energy) < 2e-3
        assert via_vqe.n_electrons == pytest.approx(exact.n_electrons, abs=1e-3)

    def test_unknown_solver_rejected(self, h2, h2_mf):
        e = build_embedding(h2[0], h2_mf, (0,))
        with pytest.raises(ValueError, match="unknown fragment solver"):
            solve_fragment(e, "ccsd")

    def test_vqe_failure_falls_back_with_warning(self, h2, h2_mf, monkeypatch):
        import vqemb.dmet as dmet_mod
        from vqemb.chem import ScfConvergenceError

        def failing_rhf(*args, **kwargs):
            raise ScfConvergenceError("forced failure", density_change=1.0)

        monkeypatch.setattr(dmet_mod, "restricted_hartree_fock", failing_rhf)
        e = build_embedding(h2[0], h2_mf, (0,))
        exact = solve_fragment(e, "exact")
        solver = VqeFragmentSolver(
            optimizer=OptimizerSpec("quasi_newton"), estimator=EstimatorSpec("exact")
        )
        with pytest.warns(UserWarning, match="falling back"):
            sol = solve_fragment(e, solver)
        assert sol.used_fallback
        assert sol.energy == pytest.approx(exact.energy, abs=1e-10)

    def test_vqe_failure_without_fallback_raises(self, h2, h2_mf, monkeypatch):
        import vqemb.dmet as dmet_mod
        from vqemb.chem import ScfConvergenceError

        def failing_rhf(*args, **kwargs):
            raise ScfConvergenceError("forced failure", density_change=1.0)

        monkeypatch.setattr(dmet_mod, "restricted_hartree_fock", failing_rhf)
        e = build_embedding(h2[0], h2_mf, (0,))
        solver = VqeFragmentSolver(
            optimizer=OptimizerSpec("quasi_newton"),
            estimator=EstimatorSpec("exact"),
            fallback_to_exact=False,
        )
        with pytest.raises(ScfConvergenceError):
            solve_fragment(e, solver)


class TestRunDmet:
    def test_whole_molecule_identity(self, h2, h4, h2_mf, h4_mf):
        for (m, _), mf in (((h2[0], None), h2_mf), ((h4[0], None), h4_mf)):
            res = run_dmet(m, mf, Fragmentation((tuple(range(m.n_orbitals)),)))
            assert res.total_energy == pytest.approx(full_ci_ground_energy(m), abs=1e-8)
            assert res.mu == 0.0
            assert len(res.trace) == 1  # accepted at the first evaluation
            assert res.converged

    def test_h4_two_fragments(self, h4, h4_mf):
        m, _ = h4
        res = run_dmet(m, h4_mf, Fragmentation(((0, 1), (2, 3))))
        assert abs(res.electron_mismatch) < 1e-6
        assert abs(res.total_energy - full_ci_ground_energy(m)) < 1e-2
        assert res.converged

    def test_h4_single_orbital_fragments_move_mu(self, h4, h4_mf):
        m, _ = h4
        res = run_dmet(m, h4_mf, Fragmentation(((0,), (1,), (2,), (3,))))
        assert res.converged
        assert abs(res.electron_mismatch) < 1e-6
        assert len(res.trace) > 1  # Newton actually iterated
        assert abs(res.total_energy - full_ci_ground_energy(m)) < 1e-2

    def test_particle_hole_symmetric_mu_is_zero(self):
        m = hubbard_chain(4)
        mf = restricted_hartree_fock(m)
        res = run_dmet(m, mf, Fragmentation(((0, 1), (2, 3))))
        assert abs(res.mu) < 1e-6
        assert res.converged

    def test_dmet_vqe_agrees_with_exact(self, h2, h2_mf):
        m, _ = h2
        frag = Fragmentation(((0,), (1,)))
        exact = run_dmet(m, h2_mf, frag)
        solver = VqeFragmentSolver(
            layers=1,
            optimizer=OptimizerSpec("quasi_newton"),
            estimator=EstimatorSpec("exact"),
            initial="random",
            initial_seed=0,
        )
        via_vqe = run_dmet(m, h2_mf, frag, solver=solver)
        assert abs(via_vqe.total_energy - exact.total_energy) < 5e-3

    def test_windowed_run_matches_full_when_window_covers(self, h4, h4_mf):
        m, _ = h4
        frag = Fragmentation(((0, 1), (2, 3)))
        plain = run_dmet(m, h4_mf, frag)
        # every embedding has 4 orbitals / 4 electrons: window 2 covers all
        windowed = run_dmet(m, h4_mf, frag, window=2)
        assert windowed.total_energy == pytest.approx(plain.total_energy, abs=1e-8)

    def test_windowed_reduction_is_sane(self, h4, h4_mf):
        m, _ = h4
        res = run_dmet(m, h4_mf, Fragmentation(((0, 1), (2, 3))), window=1)
        assert res.converged
        fci = full_ci_ground_energy(m)
        hf = h4_mf.hf_energy
        assert fci - 1e-6 <= res.total_energy <= hf + 1e-6

    def test_result_text(self, h2, h2_mf):
        res = run_dmet(h2[0], h2_mf, Fragmentation(((0, 1),)))
        text = res.to_text()
        assert "total_energy=" in text and "mu_step" in text
