"""Ladder and transition actions on occupation-number states."""

import math

import numpy as np
import pytest

from h2qed.fock import (
    ATOMIC_SLOTS,
    MOLECULAR_PATTERNS,
    TUNNEL_IMAGES,
    BasisState,
    Mode,
    Variant,
    apply_annihilate,
    apply_create,
    apply_transition,
    atomic_transition,
    bond_transition,
    electron_count,
    has_spin_up,
    molecular_transition,
    nucleus_transition,
    parse_state,
    render_state,
    spin_transition,
    two_level_transition,
)


def atomic_state(photons=(0, 0, 0, 0, 0), electrons=(0, 0, 0, 1, 0, 0, 0, 1)):
    return BasisState(Variant.ASSOC_DISSOC, tuple(photons), tuple(electrons), k=1)


def molecular_state(photons=(0, 0, 0, 0, 0), electrons=(1, 1, 0, 0)):
    return BasisState(Variant.ASSOC_DISSOC, tuple(photons), tuple(electrons), k=0)


def ladder_matrix(cutoff):
    """Independent dense annihilation matrix used as the amplitude oracle."""
    a = np.zeros((cutoff + 1, cutoff + 1))
    for p in range(1, cutoff + 1):
        a[p - 1, p] = math.sqrt(p)
    return a


class TestLadders:
    def test_annihilate_single_quantum(self):
        s = atomic_state(photons=(0, 0, 1, 0, 0))
        amp, out = apply_annihilate(s, Mode.ATOM_UP)
        assert amp == 1.0
        assert out.photons == (0, 0, 0, 0, 0)

    def test_annihilate_vacuum_is_absent(self):
        assert apply_annihilate(atomic_state(), Mode.ATOM_UP) is None

    def test_annihilate_amplitude_matches_matrix_oracle(self):
        s = BasisState(Variant.ASSOC_DISSOC, (0, 2, 0, 0, 0), (0, 0, 0, 1, 0, 0, 0, 1), k=1)
        amp, out = apply_annihilate(s, Mode.MOL_DOWN)
        oracle = ladder_matrix(2)[1, 2]
        assert amp == pytest.approx(oracle, abs=0)
        assert out.photons[1] == 1

    def test_create_from_vacuum(self):
        amp, out = apply_create(atomic_state(), Mode.ATOM_UP, cutoff=2)
        assert amp == 1.0
        assert out.photons[2] == 1

    def test_create_at_cutoff_is_absent(self):
        s = BasisState(Variant.ASSOC_DISSOC, (0, 0, 2, 0, 0), (0, 0, 0, 1, 0, 0, 0, 1), k=1)
        assert apply_create(s, Mode.ATOM_UP, cutoff=2) is None

    def test_create_amplitude_matches_matrix_oracle(self):
        s = BasisState(Variant.ASSOC_DISSOC, (1, 0, 0, 0, 0), (0, 0, 0, 1, 0, 0, 0, 1), k=1)
        amp, out = apply_create(s, Mode.MOL_UP, cutoff=2)
        oracle = ladder_matrix(2).T[2, 1]
        assert amp == pytest.approx(oracle, abs=0)

    @pytest.mark.parametrize("p", [0, 1, 2, 3])
    def test_create_then_annihilate_amplitude_product(self, p):
        s = BasisState(Variant.ASSOC_DISSOC, (p, 0, 0, 0, 0), (0, 0, 0, 1, 0, 0, 0, 1), k=1)
        created = apply_create(s, Mode.MOL_UP, cutoff=5)
        amp_up, mid = created
        amp_dn, back = apply_annihilate(mid, Mode.MOL_UP)
        assert back == s
        assert amp_up * amp_dn == pytest.approx(p + 1, rel=1e-15)

    def test_phonon_mode_only_in_covalent_variant(self):
        with pytest.raises(ValueError):
            apply_annihilate(atomic_state(), Mode.PHONON)


class TestTransitions:
    def test_atomic_excitation_moves_bit(self):
        s = atomic_state()  # both electrons in ground-down slots
        sign, out = apply_transition(s, atomic_transition(1, "dn"))
        assert sign == 1
        assert out.electrons == (0, 1, 0, 0, 0, 0, 0, 1)

    def test_molecular_excitation(self):
        s = molecular_state(electrons=(0, 1, 1, 0))
        sign, out = apply_transition(s, molecular_transition("up"))
        assert out.electrons == (1, 1, 0, 0)

    def test_spin_flip_blocked_by_pauli(self):
        # up slot already occupied at the same level: flip must be absent
        s = atomic_state(electrons=(1, 1, 0, 0, 0, 0, 0, 1))
        assert apply_transition(s, spin_transition(1, "exc")) is None

    def test_spin_flip_both_levels(self):
        s = atomic_state()  # ground-down electrons
        sign, out = apply_transition(s, spin_transition(1, "gnd"))
        assert out.electrons == (0, 0, 1, 0, 0, 0, 0, 1)
        s2 = atomic_state(electrons=(0, 1, 0, 0, 0, 0, 0, 1))
        sign, out2 = apply_transition(s2, spin_transition(1, "exc"))
        assert out2.electrons == (1, 0, 0, 0, 0, 0, 0, 1)

    def test_nucleus_transition_to_both_excited_images(self):
        for pattern in MOLECULAR_PATTERNS:
            for image in TUNNEL_IMAGES:
                s = molecular_state(electrons=pattern)
                sign, out = apply_transition(s, nucleus_transition(pattern, image=image))
                assert out.k == 1
                assert out.electrons == image
                sign, back = apply_transition(
                    out, nucleus_transition(pattern, up=False, image=image)
                )
                assert back == s

    def test_nucleus_transition_requires_matching_pattern(self):
        s = molecular_state(electrons=(1, 1, 0, 0))
        assert apply_transition(s, nucleus_transition((0, 0, 1, 1))) is None
        # the mirror image does not accept the canonical one's source
        mirror = TUNNEL_IMAGES[1]
        img_state = atomic_state(electrons=TUNNEL_IMAGES[0])
        assert apply_transition(
            img_state, nucleus_transition((1, 1, 0, 0), up=False, image=mirror)
        ) is None

    def test_bond_flip(self):
        s = BasisState(Variant.COVALENT, (0, 0, 0), (1, 1), cb=0, k=1)
        sign, out = apply_transition(s, bond_transition(up=True))
        assert out.cb == 1
        assert apply_transition(out, bond_transition(up=True)) is None

    def test_wrong_variant_raises(self):
        with pytest.raises(ValueError):
            apply_transition(atomic_state(), bond_transition())
        cov = BasisState(Variant.COVALENT, (0, 0, 0), (0, 0), cb=1, k=1)
        with pytest.raises(ValueError):
            apply_transition(cov, atomic_transition(1, "dn"))

    def test_two_level_transition(self):
        s = BasisState(Variant.REFERENCE, (0,), (1, 0))
        sign, out = apply_transition(s, two_level_transition(0, up=False))
        assert out.electrons == (0, 0)
        assert apply_transition(s, two_level_transition(1, up=False)) is None


def all_elementary_transitions():
    out = []
    for atom in (1, 2):
        for spin in ("up", "dn"):
            out.append(atomic_transition(atom, spin))
        for level in ("exc", "gnd"):
            out.append(spin_transition(atom, level))
    for spin in ("up", "dn"):
        out.append(molecular_transition(spin))
    for pattern in MOLECULAR_PATTERNS:
        for image in TUNNEL_IMAGES:
            out.append(nucleus_transition(pattern, image=image))
    return out


def some_assoc_states():
    states = [
        atomic_state(),
        atomic_state(electrons=(1, 0, 0, 0, 0, 1, 0, 0)),
        atomic_state(electrons=(0, 1, 0, 0, 0, 1, 0, 0)),
        atomic_state(photons=(1, 0, 1, 1, 0), electrons=(0, 0, 1, 0, 0, 0, 0, 1)),
    ]
    states += [molecular_state(electrons=p) for p in MOLECULAR_PATTERNS]
    return states


class TestInvariants:
    @pytest.mark.parametrize("t", all_elementary_transitions())
    def test_nilpotency(self, t):
        # applying the same directed transition twice always yields absent
        for s in some_assoc_states():
            for direction in (t, t.reversed()):
                res = apply_transition(s, direction)
                if res is not None:
                    assert apply_transition(res[1], direction) is None

    @pytest.mark.parametrize("t", all_elementary_transitions())
    def test_electron_count_conserved(self, t):
        for s in some_assoc_states():
            res = apply_transition(s, t)
            if res is not None:
                assert electron_count(res[1]) == electron_count(s)

    def test_spin_up_detector(self):
        assert not has_spin_up(atomic_state())
        assert has_spin_up(atomic_state(electrons=(1, 0, 0, 1, 0, 0, 0, 0)))
        assert has_spin_up(molecular_state(electrons=(1, 1, 0, 0)))
        assert not has_spin_up(molecular_state(electrons=(0, 1, 0, 1)))


class TestRendering:
    def test_assoc_rendering(self):
        s = atomic_state(photons=(0, 0, 1, 1, 1))
        assert render_state(s) == "|0 0 1 1 1; e:00010001|1>"
        m = molecular_state(electrons=(0, 0, 1, 1))
        assert render_state(m) == "|0 0 0 0 0; e:0011|0>"

    def test_covalent_rendering(self):
        s = BasisState(Variant.COVALENT, (1, 0, 2), (1, 0), cb=1, k=1)
        assert render_state(s) == "|1 0 2; 1 0; 1 1>"

    @pytest.mark.parametrize(
        "state",
        some_assoc_states()
        + [
            BasisState(Variant.COVALENT, (1, 0, 2), (1, 0), cb=1, k=1),
            BasisState(Variant.REFERENCE, (2, 0), (1, 0, 1, 1)),
        ],
    )
    def test_parse_round_trip(self, state):
        assert parse_state(render_state(state)) == state

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_state("|not a state>")


class TestValidation:
    def test_sector_length_must_match_nucleus_bit(self):
        with pytest.raises(ValueError):
            BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), (1, 1, 0, 0), k=1)
        with pytest.raises(ValueError):
            BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), (1,) * 8, k=0)

    def test_bits_validated(self):
        with pytest.raises(ValueError):
            BasisState(Variant.ASSOC_DISSOC, (0, 0, 0, 0, 0), (2, 0, 0, 0), k=0)
        with pytest.raises(ValueError):
            BasisState(Variant.ASSOC_DISSOC, (-1, 0, 0, 0, 0), (1, 1, 0, 0), k=0)

    def test_slot_tables_are_consistent(self):
        assert len(ATOMIC_SLOTS) == 8
        assert all(sum(image) == 2 for image in TUNNEL_IMAGES)
        # the two images are each other's atom swap
        a, b = TUNNEL_IMAGES
        assert b == a[4:] + a[:4]
