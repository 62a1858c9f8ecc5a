"""Hamiltonian builders against the tensor-product oracle and hand values."""

import numpy as np
import pytest

from h2qed.fock import BasisState, Variant
from h2qed.generator import ChannelSpec, generate_basis
from h2qed.operators import (
    ModelParams,
    SparseOperator,
    assoc_dissoc_rules,
    build_assoc_dissoc,
    build_covalent_bond,
    build_tchm,
    build_tcm,
    covalent_rules,
    model_hash,
    tchm_rules,
    tcm_rules,
    tensor_product_assoc_dissoc,
    tensor_product_covalent,
    tensor_product_tchm,
    tensor_product_tcm,
)
from h2qed.scenarios import builtin_scenario


class TestSparseOperator:
    def test_duplicate_entries_are_summed(self):
        op = SparseOperator(2)
        op.add(0, 1, 1.0)
        op.add(0, 1, 0.5)
        op.add(1, 0, 1.5)
        norm = op.normalized()
        assert norm.entries == [(0, 1, 1.5), (1, 0, 1.5)]

    def test_hermiticity_check(self):
        op = SparseOperator(2)
        op.add(0, 1, 1.0j)
        with pytest.raises(ValueError):
            op.assert_hermitian()
        op.add(1, 0, -1.0j)
        op.assert_hermitian()

    def test_out_of_range_entry(self):
        op = SparseOperator(2)
        with pytest.raises(IndexError):
            op.add(2, 0, 1.0)

    def test_expectation(self):
        op = SparseOperator(2)
        op.add(0, 0, 1.0)
        rho = np.array([[0.25, 0], [0, 0.75]], dtype=complex)
        assert op.expectation(rho) == pytest.approx(0.25)

    def test_dump_load_round_trip(self, tmp_path):
        op = SparseOperator(3)
        op.add(0, 1, 0.5 + 0.25j)
        op.add(1, 0, 0.5 - 0.25j)
        path = tmp_path / "op.txt"
        op.dump(path, model_hash(ModelParams()))
        back, tag = SparseOperator.load(path)
        assert back.dim == 3
        assert tag == model_hash(ModelParams())
        assert np.allclose(back.to_dense(), op.to_dense())


class TestTensorProductJCM:
    def test_full_four_by_four(self):
        w, g = 1.0, 0.02
        dense = tensor_product_tcm(1, w, w, g, rwa=True, cutoff=1).dense()
        expect = np.array(
            [[0, 0, 0, 0], [0, w, g, 0], [0, g, w, 0], [0, 0, 0, 2 * w]], dtype=complex
        )
        assert np.allclose(dense, expect, atol=0)

    def test_closed_two_state_reduction(self):
        w, g = 1.0, 0.02
        init = BasisState(Variant.REFERENCE, (0,), (1,))
        basis = generate_basis(init, tcm_rules(1, g, cutoff=1))
        h = build_tcm(basis, 1, w, w, g, cutoff=1)
        assert np.allclose(h.to_dense(), [[w, g], [g, w]], atol=0)

    def test_leaky_three_state_reduction(self):
        w, g = 1.0, 0.02
        init = BasisState(Variant.REFERENCE, (0,), (1,))
        rules = tcm_rules(1, g, channels=(ChannelSpec(0, 1e-3),), cutoff=1)
        basis = generate_basis(init, rules)
        h = build_tcm(basis, 1, w, w, g, cutoff=1).to_dense()
        oracle = tensor_product_tcm(1, w, w, g, rwa=True, cutoff=1)
        assert np.allclose(oracle.restrict(basis), h, atol=0)
        vac = basis.index_of(BasisState(Variant.REFERENCE, (0,), (0,)))
        assert np.all(h[vac] == 0) and np.all(h[:, vac] == 0)

    def test_decoupled_limit_is_diagonal(self):
        dense = tensor_product_tcm(1, 1.0, 1.0, 0.0, rwa=True, cutoff=1).dense()
        assert np.allclose(dense, np.diag(np.diag(dense)))


class TestTCM:
    def test_oracle_equivalence_two_atoms(self):
        w, g = 1.0, 0.015
        init = BasisState(Variant.REFERENCE, (0,), (1, 1))
        rules = tcm_rules(2, g, channels=(ChannelSpec(0, 1e-3),), cutoff=2)
        basis = generate_basis(init, rules)
        h = build_tcm(basis, 2, w, w, g, cutoff=2)
        oracle = tensor_product_tcm(2, w, w, g, rwa=True, cutoff=2)
        assert np.max(np.abs(oracle.restrict(basis) - h.to_dense())) <= 1e-12

    def test_excitation_number_conserved_under_rwa(self):
        w, g = 1.0, 0.015
        oracle = tensor_product_tcm(2, w, w, g, rwa=True, cutoff=2).dense()
        dim_ph, n = 3, 2
        n_op = np.zeros_like(oracle)
        # photon number plus excited-atom count on the product basis
        for idx in range(oracle.shape[0]):
            p, rest = divmod(idx, 4)
            n_op[idx, idx] = p + bin(rest).count("1")
        comm = oracle @ n_op - n_op @ oracle
        assert np.max(np.abs(comm)) <= 1e-10

    def test_counter_rotating_terms_break_conservation(self):
        w, g = 1.0, 0.015
        full = tensor_product_tcm(1, w, w, g, rwa=False, cutoff=1).dense()
        rwa = tensor_product_tcm(1, w, w, g, rwa=True, cutoff=1).dense()
        extra = full - rwa
        # the non-RWA piece couples |00> with |11>
        assert extra[3, 0] == pytest.approx(g)
        assert extra[0, 3] == pytest.approx(g)


class TestTCHM:
    def test_two_cavity_hopping_block(self):
        # one photon hopping between two empty-atom cavities
        w, zeta = 1.0, 0.03
        init = BasisState(Variant.REFERENCE, (1, 0), (0, 0))
        rules = tchm_rules(2, 1, g=0.0, hopping=zeta, cutoff=1)
        basis = generate_basis(init, rules)
        h = build_tchm(basis, 2, 1, w, w, g=0.0, hopping=zeta, cutoff=1).to_dense()
        assert basis.labels() == ["|1 0; a:00>", "|0 1; a:00>"]
        assert np.allclose(h, [[w, zeta], [zeta, w]], atol=0)
        # hopping eigenvalues split symmetrically around the photon energy
        assert np.allclose(np.linalg.eigvalsh(h), [w - zeta, w + zeta])

    def test_zero_hopping_is_block_diagonal(self):
        w, g = 1.0, 0.02
        oracle = tensor_product_tchm(2, 1, w, w, g, hopping=0.0, rwa=True, cutoff=1)
        dense = oracle.dense()

        def excitations(idx):  # per-cavity photon + atom excitation count
            p1, p2, a1, a2 = idx // 8, (idx // 4) % 2, (idx // 2) % 2, idx % 2
            return (p1 + a1, p2 + a2)

        # without hopping each cavity conserves its own excitation number
        for i in range(dense.shape[0]):
            for j in range(dense.shape[1]):
                if dense[i, j] != 0:
                    assert excitations(i) == excitations(j)
        h_one = tensor_product_tcm(1, w, w, g, rwa=True, cutoff=1).dense()
        # block for cavity-2 vacuum reproduces the single-cavity model
        idx = [oracle.index_of(BasisState(Variant.REFERENCE, (p, 0), (a, 0)))
               for p in (0, 1) for a in (0, 1)]
        sub = dense[np.ix_(idx, idx)]
        order = [0, 1, 2, 3]  # p*2+a matches the single-cavity layout
        assert np.allclose(sub[np.ix_(order, order)], h_one)

    def test_oracle_equivalence_with_hopping(self):
        w, g, zeta = 1.0, 0.02, 0.03
        init = BasisState(Variant.REFERENCE, (1, 0), (1, 0))
        rules = tchm_rules(2, 1, g=g, hopping=zeta,
                           channels=(ChannelSpec(0, 1e-3), ChannelSpec(1, 1e-3)), cutoff=2)
        basis = generate_basis(init, rules)
        h = build_tchm(basis, 2, 1, w, w, g, hopping=zeta, cutoff=2)
        oracle = tensor_product_tchm(2, 1, w, w, g, hopping=zeta, rwa=True, cutoff=2)
        assert np.max(np.abs(oracle.restrict(basis) - h.to_dense())) <= 1e-12

    def test_hermitian_for_random_parameters(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            w1, w2, g, zeta = rng.uniform(0.1, 2.0, size=4)
            oracle = tensor_product_tchm(2, 1, [w1, w2], [w1, w2], g, hopping=zeta,
                                         rwa=True, cutoff=1)
            dense = oracle.dense()
            assert np.max(np.abs(dense - dense.conj().T)) <= 1e-12


@pytest.fixture(scope="module")
def fig4b_system():
    cfg = builtin_scenario("fig4b")
    rules = assoc_dissoc_rules(cfg.params, cfg.channels, cfg.cutoff_map(), True)
    basis = generate_basis(cfg.initial_states[0], rules)
    h = build_assoc_dissoc(cfg.params, basis, True, cfg.cutoff_map())
    return cfg, basis, h


class TestAssocDissoc:
    def test_oracle_equivalence_full_space(self, fig4b_system):
        cfg, basis, h = fig4b_system
        oracle = tensor_product_assoc_dissoc(cfg.params, cfg.cutoff_map(), with_spin=True)
        assert oracle.dim == 2**14
        diff = np.max(np.abs(oracle.restrict(basis) - h.to_dense()))
        assert diff <= 1e-12

    def test_hermitian(self, fig4b_system):
        _, _, h = fig4b_system
        assert h.hermiticity_defect() <= 1e-12

    def test_diagonal_of_ground_atoms_with_photons(self, fig4b_system):
        # both electrons on ground orbitals carry no transition energy:
        # only the two atomic photons contribute
        cfg, basis, h = fig4b_system
        s = BasisState(Variant.ASSOC_DISSOC, (0, 0, 1, 1, 0), (0, 0, 0, 1, 0, 0, 0, 1), k=1)
        i = basis.index_of(s)
        dense = h.to_dense()
        assert dense[i, i] == pytest.approx(cfg.params.freq_atom_up + cfg.params.freq_atom_down)

    def test_tunnel_elements_select_intensity_by_pattern(self, fig4b_system):
        cfg, basis, h = fig4b_system
        dense = h.to_dense()
        from h2qed.fock import TUNNEL_IMAGES

        both_upper = basis.index_of(
            BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), (1, 1, 0, 0), k=0)
        )
        mixed = basis.index_of(
            BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), (1, 0, 0, 1), k=0)
        )
        both_lower = basis.index_of(
            BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), (0, 0, 1, 1), k=0)
        )
        for bits in TUNNEL_IMAGES:
            image = BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), bits, k=1)
            j = basis.index_of(image)
            assert dense[j, both_upper] == pytest.approx(cfg.params.zeta2)
            assert dense[j, mixed] == pytest.approx(cfg.params.zeta1)
            assert dense[j, both_lower] == 0.0

    def test_no_spin_model_never_couples_spin_sectors(self):
        cfg = builtin_scenario("fig4a")
        rules = assoc_dissoc_rules(cfg.params, cfg.channels, cfg.cutoff_map(), False)
        basis = generate_basis(cfg.initial_states[0], rules)
        h = build_assoc_dissoc(cfg.params, basis, False, cfg.cutoff_map())
        from h2qed.fock import has_spin_up

        for r, c, v in h.normalized().entries:
            assert not has_spin_up(basis[r]) and not has_spin_up(basis[c])

    def test_no_spin_oracle_equivalence(self):
        cfg = builtin_scenario("fig4a")
        rules = assoc_dissoc_rules(cfg.params, cfg.channels, cfg.cutoff_map(), False)
        basis = generate_basis(cfg.initial_states[0], rules)
        h = build_assoc_dissoc(cfg.params, basis, False, cfg.cutoff_map())
        oracle = tensor_product_assoc_dissoc(cfg.params, cfg.cutoff_map(), with_spin=False)
        assert np.max(np.abs(oracle.restrict(basis) - h.to_dense())) <= 1e-12


@pytest.fixture(scope="module")
def fig9_system():
    cfg = builtin_scenario("fig9")
    rules = covalent_rules(cfg.params, cfg.channels, cfg.cutoff_map())
    basis = generate_basis(cfg.initial_states, rules)
    h = build_covalent_bond(cfg.params, basis, cfg.cutoff_map())
    return cfg, basis, h


class TestCovalentBond:
    def test_oracle_equivalence(self, fig9_system):
        cfg, basis, h = fig9_system
        oracle = tensor_product_covalent(cfg.params, cfg.cutoff_map())
        assert np.max(np.abs(oracle.restrict(basis) - h.to_dense())) <= 1e-12

    def test_diagonal_of_excited_broken_bond(self, fig9_system):
        cfg, basis, h = fig9_system
        p = cfg.params
        s = BasisState(Variant.COVALENT, (0, 0, 0), (1, 1), cb=1, k=1)
        i = basis.index_of(s)
        expect = p.freq_mol_up + p.freq_mol_down + p.freq_phonon + p.zeta
        assert h.to_dense()[i, i] == pytest.approx(expect)

    def test_nucleus_term_is_constant_diagonal_shift(self, fig9_system):
        cfg, basis, h = fig9_system
        zeroed = build_covalent_bond(
            ModelParams(**{**vars(cfg.params), "zeta": 0.0}), basis, cfg.cutoff_map()
        )
        diff = h.to_dense() - zeroed.to_dense()
        assert np.allclose(diff, cfg.params.zeta * np.eye(len(basis)), atol=0)

    def test_molecular_relaxation_gated_on_formed_bond(self, fig9_system):
        cfg, basis, h = fig9_system
        dense = h.to_dense()
        formed = BasisState(Variant.COVALENT, (0, 0, 1), (0, 1), cb=0, k=1)
        formed_tgt = BasisState(Variant.COVALENT, (0, 1, 1), (0, 0), cb=0, k=1)
        i, j = basis.index_of(formed), basis.index_of(formed_tgt)
        assert dense[j, i] == pytest.approx(cfg.params.g_mol_down)
        broken = BasisState(Variant.COVALENT, (0, 0, 0), (0, 1), cb=1, k=1)
        broken_tgt = BasisState(Variant.COVALENT, (0, 1, 0), (0, 0), cb=1, k=1)
        bi, bj = basis.index_of(broken), basis.index_of(broken_tgt)
        assert bi is not None and bj is not None
        assert dense[bj, bi] == 0.0

    def test_phonon_coupling_exchanges_bond_and_quantum(self, fig9_system):
        cfg, basis, h = fig9_system
        dense = h.to_dense()
        broken = BasisState(Variant.COVALENT, (0, 0, 0), (1, 1), cb=1, k=1)
        formed = BasisState(Variant.COVALENT, (0, 0, 1), (1, 1), cb=0, k=1)
        i, j = basis.index_of(broken), basis.index_of(formed)
        assert dense[j, i] == pytest.approx(cfg.params.g_phonon)


class TestOracleGuards:
    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            tensor_product_tcm(16, 1.0, 1.0, 0.01, cutoff=3)

    def test_dense_cap(self):
        oracle = tensor_product_assoc_dissoc(ModelParams())
        with pytest.raises(ValueError):
            oracle.dense()

    def test_wrong_variant_state_rejected(self):
        oracle = tensor_product_covalent(ModelParams())
        with pytest.raises(ValueError):
            oracle.index_of(BasisState(Variant.REFERENCE, (0,), (0,)))
