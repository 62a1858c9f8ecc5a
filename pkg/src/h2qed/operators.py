"""Hamiltonian assembly over a generated basis, plus the dense oracle.

Two independent construction paths are kept side by side:

* the sparse builders (`build_assoc_dissoc`, `build_covalent_bond`,
  `build_tcm`, `build_tchm`) walk a generated :class:`~h2qed.generator.Basis`
  and emit matrix elements term by term;
* :mod:`tensor-product oracles <h2qed.operators>` build the same models on
  the full, unreduced product space by Kronecker products of single-slot
  matrices, never touching the basis machinery.

Restricting an oracle to a generated basis must reproduce the sparse
matrix entrywise; the test-suite leans on that equivalence.

Units: hbar = 1 and the atomic transition frequency is the energy unit,
so all frequencies, couplings and rates are dimensionless ratios.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .fock import (
    ATOMIC_SLOTS,
    MOLECULAR_PATTERNS,
    MOLECULAR_SLOTS,
    TUNNEL_IMAGES,
    BasisState,
    Mode,
    ModeId,
    Variant,
    apply_annihilate,
    apply_create,
    apply_transition,
    atomic_transition,
    bond_transition,
    mode_order,
    molecular_transition,
    nucleus_transition,
    render_state,
    spin_transition,
    two_level_transition,
)
from .generator import Basis, ChannelSpec, HoppingRule, InteractionRule, RuleSet

__all__ = [
    "SparseOperator",
    "ModelParams",
    "assoc_dissoc_rules",
    "covalent_rules",
    "tcm_rules",
    "tchm_rules",
    "build_assoc_dissoc",
    "build_covalent_bond",
    "build_tcm",
    "build_tchm",
    "TensorOracle",
    "tensor_product_assoc_dissoc",
    "tensor_product_covalent",
    "tensor_product_tcm",
    "tensor_product_tchm",
    "DENSE_DIM_CAP",
    "ORACLE_DIM_CAP",
]

DENSE_DIM_CAP = 4096
ORACLE_DIM_CAP = 1 << 16


class UnclassifiableStateError(ValueError):
    """A basis state the requested model's rules cannot interpret."""


@dataclass
class SparseOperator:
    """Complex operator over a basis in coordinate form.

    Duplicate (row, col) pairs are summed by :meth:`normalized`.  Builders
    flag Hamiltonians via :meth:`assert_hermitian`.
    """

    dim: int
    entries: list[tuple[int, int, complex]] = field(default_factory=list)

    def add(self, row: int, col: int, value: complex) -> None:
        if not (0 <= row < self.dim and 0 <= col < self.dim):
            raise IndexError(f"entry ({row},{col}) outside dim {self.dim}")
        self.entries.append((row, col, complex(value)))

    def add_hermitian_pair(self, row: int, col: int, value: complex) -> None:
        self.add(row, col, value)
        self.add(col, row, complex(value).conjugate())

    def normalized(self) -> "SparseOperator":
        acc: dict[tuple[int, int], complex] = {}
        for r, c, v in self.entries:
            acc[(r, c)] = acc.get((r, c), 0.0) + v
        merged = [(r, c, v) for (r, c), v in sorted(acc.items()) if v != 0.0]
        return SparseOperator(self.dim, merged)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_coo(self) -> sp.coo_matrix:
        if not self.entries:
            return sp.coo_matrix((self.dim, self.dim), dtype=complex)
        rows, cols, vals = zip(*self.entries)
        return sp.coo_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)

    def to_csr(self) -> sp.csr_matrix:
        return self.to_coo().tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_coo().toarray()

    def hermiticity_defect(self) -> float:
        m = self.to_csr()
        d = m - m.conjugate().transpose()
        return 0.0 if d.nnz == 0 else float(abs(d).max())

    def assert_hermitian(self, tol: float = 1e-12) -> "SparseOperator":
        defect = self.hermiticity_defect()
        if defect > tol:
            raise ValueError(f"operator is not Hermitian: defect {defect:.3e} > {tol:.0e}")
        return self

    def expectation(self, rho: np.ndarray) -> float:
        """tr(O rho) for a density matrix, as a real number."""
        total = 0.0 + 0.0j
        for r, c, v in self.entries:
            total += v * rho[c, r]
        return float(total.real)

    def dump(self, path, model_hash: str = "") -> None:
        """Triplet text dump: a header with dim/nnz/hash, then row col re im."""
        op = self.normalized()
        with open(path, "w") as fh:
            fh.write(f"{op.dim} {len(op.entries)} {model_hash}\n")
            for r, c, v in op.entries:
                fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")

    @classmethod
    def load(cls, path) -> tuple["SparseOperator", str]:
        with open(path) as fh:
            head = fh.readline().split()
            dim, nnz = int(head[0]), int(head[1])
            model_hash = head[2] if len(head) > 2 else ""
            op = cls(dim)
            for _ in range(nnz):
                r, c, re, im = fh.readline().split()
                op.add(int(r), int(c), complex(float(re), float(im)))
        return op, model_hash

    @classmethod
    def projector_onto_indices(cls, dim: int, indices: Sequence[int]) -> "SparseOperator":
        op = cls(dim)
        for i in indices:
            op.add(i, i, 1.0)
        return op

    @classmethod
    def projector_onto_vector(cls, vec: np.ndarray) -> "SparseOperator":
        op = cls(len(vec))
        nz = np.flatnonzero(np.abs(vec) > 0)
        for i in nz:
            for j in nz:
                op.add(int(i), int(j), vec[i] * np.conj(vec[j]))
        return op


@dataclass(frozen=True)
class ModelParams:
    """Frequencies, couplings and tunnelling intensities (hbar = 1).

    Defaults follow the simulation parameter set used throughout:
    atomic frequency 1 (the unit), molecular frequencies one half of it,
    spin-flip a tenth, phonon a hundredth; the atomic coupling 0.01 with
    the others expressed as its fixed fractions; tunnelling strongest
    (zeta2) when both electrons sit on the upper molecular orbital and
    switched off entirely (zeta0 = 0) when both sit on the lower one.
    """

    freq_atom_up: float = 1.0
    freq_atom_down: float = 1.0
    freq_mol_up: float = 0.5
    freq_mol_down: float = 0.5
    freq_spin: float = 0.1
    freq_phonon: float = 0.01
    g_atom_up: float = 0.01
    g_atom_down: float = 0.01
    g_mol_up: float = 0.005
    g_mol_down: float = 0.005
    g_spin: float = 0.001
    g_phonon: float = 0.0005
    zeta: float = 0.005
    zeta0: float = 0.0
    zeta1: float = 0.01
    zeta2: float = 0.1

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")

    _FREQ = {
        Mode.MOL_UP: "freq_mol_up",
        Mode.MOL_DOWN: "freq_mol_down",
        Mode.ATOM_UP: "freq_atom_up",
        Mode.ATOM_DOWN: "freq_atom_down",
        Mode.SPIN: "freq_spin",
        Mode.PHONON: "freq_phonon",
    }
    _COUPLING = {
        Mode.MOL_UP: "g_mol_up",
        Mode.MOL_DOWN: "g_mol_down",
        Mode.ATOM_UP: "g_atom_up",
        Mode.ATOM_DOWN: "g_atom_down",
        Mode.SPIN: "g_spin",
        Mode.PHONON: "g_phonon",
    }

    def frequency(self, mode: Mode) -> float:
        return getattr(self, self._FREQ[mode])

    def coupling(self, mode: Mode) -> float:
        return getattr(self, self._COUPLING[mode])

    def tunnel_weight(self, pattern: tuple[int, ...]) -> float:
        """Tunnelling intensity selected by the molecular occupation pattern."""
        upper_up, upper_dn = pattern[0], pattern[1]
        if upper_up and upper_dn:
            return self.zeta2
        if upper_up or upper_dn:
            return self.zeta1
        return self.zeta0


# ---------------------------------------------------------------------------
# Rule sets (generator input) mirroring each model's interaction terms.
# ---------------------------------------------------------------------------

def assoc_dissoc_rules(
    params: ModelParams,
    channels: Sequence[ChannelSpec] = (),
    cutoffs: Optional[Mapping[ModeId, int]] = None,
    with_spin: bool = True,
) -> RuleSet:
    """Interaction terms of the association/dissociation model."""
    if cutoffs is None:
        cutoffs = {m: 1 for m in mode_order(Variant.ASSOC_DISSOC)}
    rules: list[InteractionRule] = [
        InteractionRule(molecular_transition("up"), Mode.MOL_UP, params.g_mol_up),
        InteractionRule(molecular_transition("dn"), Mode.MOL_DOWN, params.g_mol_down),
    ]
    for atom in (1, 2):
        rules.append(InteractionRule(atomic_transition(atom, "up"), Mode.ATOM_UP, params.g_atom_up))
        rules.append(InteractionRule(atomic_transition(atom, "dn"), Mode.ATOM_DOWN, params.g_atom_down))
    if with_spin:
        for atom in (1, 2):
            for level in ("exc", "gnd"):
                rules.append(InteractionRule(spin_transition(atom, level), Mode.SPIN, params.g_spin))
    for pattern in MOLECULAR_PATTERNS:
        for image in TUNNEL_IMAGES:
            rules.append(
                InteractionRule(nucleus_transition(pattern, image=image), None,
                                params.tunnel_weight(pattern))
            )
    return RuleSet(Variant.ASSOC_DISSOC, tuple(rules), tuple(channels), (), dict(cutoffs))


def covalent_rules(
    params: ModelParams,
    channels: Sequence[ChannelSpec] = (),
    cutoffs: Optional[Mapping[ModeId, int]] = None,
) -> RuleSet:
    """Interaction terms of the covalent-bond/phonon model."""
    if cutoffs is None:
        cutoffs = {m: 1 for m in mode_order(Variant.COVALENT)}
    rules = (
        InteractionRule(molecular_transition("up"), Mode.MOL_UP, params.g_mol_up),
        InteractionRule(molecular_transition("dn"), Mode.MOL_DOWN, params.g_mol_down),
        InteractionRule(bond_transition(), Mode.PHONON, params.g_phonon),
    )
    return RuleSet(Variant.COVALENT, rules, tuple(channels), (), dict(cutoffs))


def tcm_rules(
    n_atoms: int,
    g: Union[float, Sequence[float]],
    channels: Sequence[ChannelSpec] = (),
    cutoff: int = 1,
) -> RuleSet:
    gs = [g] * n_atoms if np.isscalar(g) else list(g)
    rules = tuple(
        InteractionRule(two_level_transition(i), 0, gs[i]) for i in range(n_atoms)
    )
    return RuleSet(Variant.REFERENCE, rules, tuple(channels), (), {0: cutoff})


def tchm_rules(
    m_cavities: int,
    n_atoms: int,
    g: Union[float, Sequence[float]],
    hopping: float,
    channels: Sequence[ChannelSpec] = (),
    cutoff: int = 1,
) -> RuleSet:
    gs = [g] * n_atoms if np.isscalar(g) else list(g)
    rules = []
    for j in range(m_cavities):
        for i in range(n_atoms):
            rules.append(InteractionRule(two_level_transition(j * n_atoms + i), j, gs[i]))
    hops = tuple(HoppingRule(j, j + 1, hopping) for j in range(m_cavities - 1))
    cutoffs = {j: cutoff for j in range(m_cavities)}
    return RuleSet(Variant.REFERENCE, tuple(rules), tuple(channels), hops, cutoffs)


# ---------------------------------------------------------------------------
# Sparse Hamiltonian builders.
# ---------------------------------------------------------------------------

_ATOMIC_IDX = {key: i for i, key in enumerate(ATOMIC_SLOTS)}
_MOL_IDX = {key: i for i, key in enumerate(MOLECULAR_SLOTS)}


def _pair_energy(bits: Sequence[int], exc: int, gnd: int) -> int:
    # sigma^dag sigma of a two-slot pair: excited slot filled, ground empty
    return bits[exc] * (1 - bits[gnd])


def _emit_relaxations(
    h: SparseOperator,
    basis: Basis,
    i: int,
    state: BasisState,
    rules: Sequence[InteractionRule],
    cutoffs: Mapping[ModeId, int],
) -> None:
    # relaxation direction only (sigma lower + photon create); the Hermitian
    # partner entry is added alongside, so each pair is produced exactly once
    for rule in rules:
        if rule.weight == 0.0:
            continue
        res = apply_transition(state, rule.transition.reversed())
        if res is None:
            continue
        target = res[1]
        amp = float(rule.weight)
        if rule.mode is not None:
            created = apply_create(target, rule.mode, cutoffs[rule.mode])
            if created is None:
                continue
            amp *= created[0]
            target = created[1]
        j = basis.index_of(target)
        if j is None:
            raise UnclassifiableStateError(
                f"image {render_state(target)} of {render_state(state)} missing from basis"
            )
        h.add_hermitian_pair(j, i, amp)


def build_assoc_dissoc(
    params: ModelParams,
    basis: Basis,
    with_spin: bool = True,
    cutoffs: Optional[Mapping[ModeId, int]] = None,
) -> SparseOperator:
    """Hamiltonian of the association/dissociation model over ``basis``.

    Molecular terms act on nuclei-together states, atomic and (when
    ``with_spin``) spin terms on nuclei-apart states; tunnelling couples
    each two-electron molecular pattern to the two both-excited atomic
    configurations (one electron per atom, spins kept, both spin
    placements) with the intensity selected by that pattern.
    """
    if basis.variant is not Variant.ASSOC_DISSOC:
        raise UnclassifiableStateError(f"basis holds {basis.variant.value} states")
    if cutoffs is None:
        cutoffs = _infer_cutoffs(basis)
    rs = assoc_dissoc_rules(params, (), cutoffs, with_spin)
    photon_rules = [r for r in rs.interactions if r.mode is not None]

    h = SparseOperator(len(basis))
    for i, s in enumerate(basis):
        p1, p2, p3, p4, p5 = s.photons
        if s.k == 0:
            e = s.electrons
            # the molecular doublet is anchored at the atomic excited level:
            # the upper orbital is degenerate with it and the lower orbital
            # sits one molecular quantum below, so hybridization itself is
            # (nearly) energy conserving and the binding energy leaves as
            # molecular photons
            n_up = e[_MOL_IDX[("exc", "up")]] + e[_MOL_IDX[("gnd", "up")]]
            n_dn = e[_MOL_IDX[("exc", "dn")]] + e[_MOL_IDX[("gnd", "dn")]]
            diag = (
                params.freq_mol_up * p1
                + params.freq_mol_down * p2
                + (params.freq_atom_up - params.freq_mol_up) * n_up
                + (params.freq_atom_down - params.freq_mol_down) * n_dn
                + params.freq_mol_up * _pair_energy(e, _MOL_IDX[("exc", "up")], _MOL_IDX[("gnd", "up")])
                + params.freq_mol_down * _pair_energy(e, _MOL_IDX[("exc", "dn")], _MOL_IDX[("gnd", "dn")])
            )
        else:
            e = s.electrons
            diag = params.freq_atom_up * p3 + params.freq_atom_down * p4
            for atom in (1, 2):
                diag += params.freq_atom_up * _pair_energy(
                    e, _ATOMIC_IDX[(atom, "exc", "up")], _ATOMIC_IDX[(atom, "gnd", "up")]
                )
                diag += params.freq_atom_down * _pair_energy(
                    e, _ATOMIC_IDX[(atom, "exc", "dn")], _ATOMIC_IDX[(atom, "gnd", "dn")]
                )
            if with_spin:
                diag += params.freq_spin * p5
                for atom in (1, 2):
                    for level in ("exc", "gnd"):
                        diag += params.freq_spin * _pair_energy(
                            e, _ATOMIC_IDX[(atom, level, "up")], _ATOMIC_IDX[(atom, level, "dn")]
                        )
        if diag != 0.0:
            h.add(i, i, diag)

        _emit_relaxations(h, basis, i, s, photon_rules, cutoffs)

        if s.k == 0 and s.electrons in MOLECULAR_PATTERNS:
            # tunnelling, enumerated from the molecular side only; patterns
            # without one electron of each spin never tunnel
            weight = params.tunnel_weight(s.electrons)
            if weight != 0.0:
                for image in TUNNEL_IMAGES:
                    res = apply_transition(s, nucleus_transition(s.electrons, image=image))
                    if res is None:
                        continue
                    j = basis.index_of(res[1])
                    if j is None:
                        raise UnclassifiableStateError(
                            f"tunnel image of {render_state(s)} missing from basis"
                        )
                    h.add_hermitian_pair(j, i, weight)
    return h.normalized().assert_hermitian()


def build_covalent_bond(
    params: ModelParams,
    basis: Basis,
    cutoffs: Optional[Mapping[ModeId, int]] = None,
) -> SparseOperator:
    """Hamiltonian of the covalent-bond/phonon model over ``basis``.

    The molecular photon couplings are gated on a formed bond (cb = 0);
    the phonon coupling exchanges one phonon against the bond bit (the
    broken bond, cb = 1, is the excited member carrying the phonon
    quantum of energy); the nucleus term is a constant ζ on the diagonal.
    """
    if basis.variant is not Variant.COVALENT:
        raise UnclassifiableStateError(f"basis holds {basis.variant.value} states")
    if cutoffs is None:
        cutoffs = _infer_cutoffs(basis)

    h = SparseOperator(len(basis))
    mol_rules = (
        InteractionRule(molecular_transition("up"), Mode.MOL_UP, params.g_mol_up),
        InteractionRule(molecular_transition("dn"), Mode.MOL_DOWN, params.g_mol_down),
    )
    bond_rule = (InteractionRule(bond_transition(), Mode.PHONON, params.g_phonon),)
    for i, s in enumerate(basis):
        p1, p2, m = s.photons
        l1, l2 = s.electrons
        diag = (
            params.freq_mol_up * p1
            + params.freq_mol_down * p2
            + params.freq_phonon * m
            + params.freq_mol_up * l1
            + params.freq_mol_down * l2
            + params.freq_phonon * s.cb
            + params.zeta
        )
        h.add(i, i, diag)
        if s.cb == 0:
            _emit_relaxations(h, basis, i, s, mol_rules, cutoffs)
        _emit_relaxations(h, basis, i, s, bond_rule, cutoffs)
    return h.normalized().assert_hermitian()


def build_tcm(
    basis: Basis,
    n_atoms: int,
    omega_c: float,
    omega_a: float,
    g: Union[float, Sequence[float]],
    rwa: bool = True,
    cutoff: Optional[int] = None,
) -> SparseOperator:
    """Single-cavity reference Hamiltonian for ``n_atoms`` two-level atoms."""
    return build_tchm(basis, 1, n_atoms, omega_c, omega_a, g, hopping=0.0, rwa=rwa, cutoff=cutoff)


def build_tchm(
    basis: Basis,
    m_cavities: int,
    n_atoms: int,
    omega_c: Union[float, Sequence[float]],
    omega_a: Union[float, Sequence[float]],
    g: Union[float, Sequence[float]],
    hopping: float,
    rwa: bool = True,
    cutoff: Optional[int] = None,
) -> SparseOperator:
    """Chain of ``m_cavities`` reference cavities with nearest-neighbour hopping."""
    if basis.variant is not Variant.REFERENCE:
        raise UnclassifiableStateError(f"basis holds {basis.variant.value} states")
    if m_cavities < 1:
        raise ValueError("need at least one cavity")
    ocs = [omega_c] * m_cavities if np.isscalar(omega_c) else list(omega_c)
    oas = [omega_a] * m_cavities if np.isscalar(omega_a) else list(omega_a)
    gs = [g] * n_atoms if np.isscalar(g) else list(g)
    if cutoff is None:
        cutoff = max(max(s.photons) for s in basis)
    cutoffs = {j: cutoff for j in range(m_cavities)}

    h = SparseOperator(len(basis))
    for i, s in enumerate(basis):
        diag = sum(ocs[j] * s.photons[j] for j in range(m_cavities))
        diag += sum(
            oas[j] * s.electrons[j * n_atoms + a]
            for j in range(m_cavities)
            for a in range(n_atoms)
        )
        if diag != 0.0:
            h.add(i, i, diag)
        for j in range(m_cavities):
            for a in range(n_atoms):
                t = two_level_transition(j * n_atoms + a)
                rule = (InteractionRule(t, j, gs[a]),)
                _emit_relaxations(h, basis, i, s, rule, cutoffs)
                if not rwa and gs[a] != 0.0:
                    # counter-rotating piece g (a† σ† + a σ): raise + create
                    res = apply_transition(s, t)
                    if res is not None:
                        created = apply_create(res[1], j, cutoff)
                        if created is not None:
                            jdx = basis.index_of(created[1])
                            if jdx is None:
                                raise UnclassifiableStateError(
                                    f"image of {render_state(s)} missing from basis"
                                )
                            h.add_hermitian_pair(jdx, i, gs[a] * created[0])
        # hopping enumerated in one fixed direction per neighbour pair
        for j in range(m_cavities - 1):
            if hopping == 0.0:
                continue
            lowered = apply_annihilate(s, j)
            if lowered is None:
                continue
            raised = apply_create(lowered[1], j + 1, cutoff)
            if raised is None:
                continue
            jdx = basis.index_of(raised[1])
            if jdx is None:
                raise UnclassifiableStateError(
                    f"hop image of {render_state(s)} missing from basis"
                )
            h.add_hermitian_pair(jdx, i, hopping * lowered[0] * raised[0])
    return h.normalized().assert_hermitian()


def _infer_cutoffs(basis: Basis) -> dict[ModeId, int]:
    order = mode_order(basis.variant)
    peaks = [0] * len(order)
    for s in basis:
        for pos, p in enumerate(s.photons):
            peaks[pos] = max(peaks[pos], p)
    return {mode: peaks[pos] for pos, mode in enumerate(order)}


def default_cutoffs(
    initial: BasisState, channels: Sequence[ChannelSpec], influx_cutoff: int = 2
) -> dict[ModeId, int]:
    """Per-mode cutoff defaults: ``influx_cutoff`` under influx, initial occupancy otherwise."""
    influx = {c.mode for c in channels if c.gamma_in > 0}
    order = mode_order(initial.variant)
    return {
        mode: influx_cutoff if mode in influx else initial.photons[pos]
        for pos, mode in enumerate(order)
    }


# ---------------------------------------------------------------------------
# Tensor-product oracle.
# ---------------------------------------------------------------------------

def _lower(dim: int) -> np.ndarray:
    m = np.zeros((dim, dim))
    for p in range(1, dim):
        m[p - 1, p] = np.sqrt(p)
    return m


def _number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float))


def _ket_bra(dim: int, ket: int, bra: int) -> np.ndarray:
    m = np.zeros((dim, dim))
    m[ket, bra] = 1.0
    return m


class TensorOracle:
    """Full product-space Hamiltonian built from per-slot matrices.

    Stored sparse internally (the association/dissociation space already
    has 2^14 product states); :meth:`dense` materializes matrices up to
    ``DENSE_DIM_CAP`` and :meth:`restrict` extracts the block spanned by a
    generated basis at any supported dimension.
    """

    def __init__(
        self,
        dims: Sequence[int],
        slot_index: Callable[[BasisState], tuple[int, ...]],
    ):
        self.dims = tuple(int(d) for d in dims)
        self.dim = int(np.prod(self.dims))
        if self.dim > ORACLE_DIM_CAP:
            raise ValueError(f"oracle dimension {self.dim} exceeds cap {ORACLE_DIM_CAP}")
        self._slot_index = slot_index
        self._weights = np.cumprod([1] + list(self.dims[::-1][:-1]))[::-1]
        self._matrix = sp.csr_matrix((self.dim, self.dim), dtype=complex)

    def add_term(self, coeff: complex, factors: Mapping[int, np.ndarray]) -> None:
        """Add coeff * (⊗ slot factors, identity on untouched slots)."""
        if coeff == 0.0:
            return
        term = sp.identity(1, dtype=complex, format="coo")
        for slot, d in enumerate(self.dims):
            f = factors.get(slot)
            factor = sp.identity(d, dtype=complex, format="coo") if f is None else sp.coo_matrix(f)
            term = sp.kron(term, factor, format="coo")
        self._matrix = (self._matrix + coeff * term.tocsr()).tocsr()

    def add_hermitian_term(self, coeff: complex, factors: Mapping[int, np.ndarray]) -> None:
        self.add_term(coeff, factors)
        self.add_term(
            np.conj(coeff), {s: f.conj().T for s, f in factors.items()}
        )

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    def index_of(self, state: BasisState) -> int:
        slots = self._slot_index(state)
        if len(slots) != len(self.dims):
            raise ValueError("state does not match the oracle slot layout")
        for occ, d in zip(slots, self.dims):
            if not 0 <= occ < d:
                raise ValueError(f"slot occupation {occ} outside dimension {d}")
        return int(np.dot(slots, self._weights))

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_DIM_CAP:
            raise ValueError(f"dense materialization capped at {DENSE_DIM_CAP}, dim={self.dim}")
        return self._matrix.toarray()

    def restrict(self, basis: Basis) -> np.ndarray:
        """Dense block of the oracle spanned by ``basis``, in basis order."""
        idx = np.array([self.index_of(s) for s in basis], dtype=int)
        return self._matrix[idx][:, idx].toarray()


def _assoc_slot_index(state: BasisState) -> tuple[int, ...]:
    if state.variant is not Variant.ASSOC_DISSOC:
        raise ValueError("oracle expects association/dissociation states")
    if state.k == 1:
        bits = state.electrons
    else:
        # nuclei-together configurations reuse the excited-orbital slots:
        # the upper molecular orbital occupies atom 1's excited slots, the
        # lower one atom 2's; ground slots stay empty
        up_u, up_d, lo_u, lo_d = state.electrons
        bits = (up_u, up_d, 0, 0, lo_u, lo_d, 0, 0)
    return state.photons + bits + (state.k,)


def tensor_product_assoc_dissoc(
    params: ModelParams,
    cutoffs: Optional[Mapping[ModeId, int]] = None,
    with_spin: bool = True,
) -> TensorOracle:
    """Association/dissociation Hamiltonian on the full product space."""
    order = mode_order(Variant.ASSOC_DISSOC)
    if cutoffs is None:
        cutoffs = {m: 1 for m in order}
    ph_dims = [cutoffs[m] + 1 for m in order]
    dims = ph_dims + [2] * 8 + [2]
    oracle = TensorOracle(dims, _assoc_slot_index)

    P1, P2, P3, P4, P5 = range(5)
    EL = 5  # first electron slot
    K = 13
    k0 = _ket_bra(2, 0, 0)
    k1 = _ket_bra(2, 1, 1)
    occ = _ket_bra(2, 1, 1)
    emp = _ket_bra(2, 0, 0)
    low = _ket_bra(2, 0, 1)   # |0><1| on an orbital bit

    def eslot(atom: int, level: str, spin: str) -> int:
        return EL + _ATOMIC_IDX[(atom, level, spin)]

    # molecular sector embedding (see _assoc_slot_index)
    mol_up_exc, mol_dn_exc = eslot(1, "exc", "up"), eslot(1, "exc", "dn")
    mol_up_gnd, mol_dn_gnd = eslot(2, "exc", "up"), eslot(2, "exc", "dn")

    # nuclei together: field, molecular energies, molecular-photon couplings;
    # the molecular doublet is anchored at the atomic excited level (upper
    # orbital degenerate with it, lower orbital one molecular quantum below)
    oracle.add_term(params.freq_mol_up, {P1: _number(ph_dims[P1]), K: k0})
    oracle.add_term(params.freq_mol_down, {P2: _number(ph_dims[P2]), K: k0})
    for slot in (mol_up_exc, mol_up_gnd):
        oracle.add_term(params.freq_atom_up - params.freq_mol_up, {slot: occ, K: k0})
    for slot in (mol_dn_exc, mol_dn_gnd):
        oracle.add_term(params.freq_atom_down - params.freq_mol_down, {slot: occ, K: k0})
    oracle.add_term(params.freq_mol_up, {mol_up_exc: occ, mol_up_gnd: emp, K: k0})
    oracle.add_term(params.freq_mol_down, {mol_dn_exc: occ, mol_dn_gnd: emp, K: k0})
    oracle.add_hermitian_term(
        params.g_mol_up,
        {P1: _lower(ph_dims[P1]).T, mol_up_exc: low, mol_up_gnd: low.T, K: k0},
    )
    oracle.add_hermitian_term(
        params.g_mol_down,
        {P2: _lower(ph_dims[P2]).T, mol_dn_exc: low, mol_dn_gnd: low.T, K: k0},
    )

    # nuclei apart: field, atomic energies, atomic-photon couplings
    oracle.add_term(params.freq_atom_up, {P3: _number(ph_dims[P3]), K: k1})
    oracle.add_term(params.freq_atom_down, {P4: _number(ph_dims[P4]), K: k1})
    for atom in (1, 2):
        oracle.add_term(
            params.freq_atom_up,
            {eslot(atom, "exc", "up"): occ, eslot(atom, "gnd", "up"): emp, K: k1},
        )
        oracle.add_term(
            params.freq_atom_down,
            {eslot(atom, "exc", "dn"): occ, eslot(atom, "gnd", "dn"): emp, K: k1},
        )
        oracle.add_hermitian_term(
            params.g_atom_up,
            {P3: _lower(ph_dims[P3]).T, eslot(atom, "exc", "up"): low,
             eslot(atom, "gnd", "up"): low.T, K: k1},
        )
        oracle.add_hermitian_term(
            params.g_atom_down,
            {P4: _lower(ph_dims[P4]).T, eslot(atom, "exc", "dn"): low,
             eslot(atom, "gnd", "dn"): low.T, K: k1},
        )

    if with_spin:
        oracle.add_term(params.freq_spin, {P5: _number(ph_dims[P5]), K: k1})
        for atom in (1, 2):
            for level in ("exc", "gnd"):
                up_slot, dn_slot = eslot(atom, level, "up"), eslot(atom, level, "dn")
                oracle.add_term(params.freq_spin, {up_slot: occ, dn_slot: emp, K: k1})
                oracle.add_hermitian_term(
                    params.g_spin,
                    {P5: _lower(ph_dims[P5]).T, up_slot: low, dn_slot: low.T, K: k1},
                )

    # tunnelling: each molecular pattern couples to both both-excited images
    for pattern in MOLECULAR_PATTERNS:
        weight = params.tunnel_weight(pattern)
        if weight == 0.0:
            continue
        up_u, up_d, lo_u, lo_d = pattern
        pattern_bits = (up_u, up_d, 0, 0, lo_u, lo_d, 0, 0)
        for image in TUNNEL_IMAGES:
            factors: dict[int, np.ndarray] = {
                EL + i: _ket_bra(2, image[i], pattern_bits[i]) for i in range(8)
            }
            factors[K] = _ket_bra(2, 1, 0)
            oracle.add_hermitian_term(weight, factors)
    return oracle


def _covalent_slot_index(state: BasisState) -> tuple[int, ...]:
    if state.variant is not Variant.COVALENT:
        raise ValueError("oracle expects covalent-bond states")
    return state.photons + state.electrons + (state.cb, state.k)


def tensor_product_covalent(
    params: ModelParams,
    cutoffs: Optional[Mapping[ModeId, int]] = None,
) -> TensorOracle:
    """Covalent-bond/phonon Hamiltonian on the full product space."""
    order = mode_order(Variant.COVALENT)
    if cutoffs is None:
        cutoffs = {m: 1 for m in order}
    ph_dims = [cutoffs[m] + 1 for m in order]
    dims = ph_dims + [2, 2, 2, 2]  # l1 l2 cb k
    oracle = TensorOracle(dims, _covalent_slot_index)

    P1, P2, M, L1, L2, CB, K = range(7)
    occ = _ket_bra(2, 1, 1)
    low = _ket_bra(2, 0, 1)
    cb_formed = _ket_bra(2, 0, 0)

    oracle.add_term(params.freq_mol_up, {P1: _number(ph_dims[P1])})
    oracle.add_term(params.freq_mol_down, {P2: _number(ph_dims[P2])})
    oracle.add_term(params.freq_phonon, {M: _number(ph_dims[M])})
    oracle.add_term(params.freq_mol_up, {L1: occ})
    oracle.add_term(params.freq_mol_down, {L2: occ})
    oracle.add_term(params.freq_phonon, {CB: occ})
    oracle.add_term(params.zeta, {})  # nucleus term: zeta times identity
    oracle.add_hermitian_term(
        params.g_mol_up, {P1: _lower(ph_dims[P1]).T, L1: low, CB: cb_formed}
    )
    oracle.add_hermitian_term(
        params.g_mol_down, {P2: _lower(ph_dims[P2]).T, L2: low, CB: cb_formed}
    )
    oracle.add_hermitian_term(params.g_phonon, {M: _lower(ph_dims[M]).T, CB: low})
    return oracle


def _reference_slot_index(m_cavities: int) -> Callable[[BasisState], tuple[int, ...]]:
    def slot_index(state: BasisState) -> tuple[int, ...]:
        if state.variant is not Variant.REFERENCE:
            raise ValueError("oracle expects reference-model states")
        return state.photons + state.electrons

    return slot_index


def tensor_product_tcm(
    n_atoms: int,
    omega_c: float,
    omega_a: float,
    g: Union[float, Sequence[float]],
    rwa: bool = True,
    cutoff: int = 1,
) -> TensorOracle:
    return tensor_product_tchm(1, n_atoms, omega_c, omega_a, g, hopping=0.0, rwa=rwa, cutoff=cutoff)


def tensor_product_tchm(
    m_cavities: int,
    n_atoms: int,
    omega_c: Union[float, Sequence[float]],
    omega_a: Union[float, Sequence[float]],
    g: Union[float, Sequence[float]],
    hopping: float,
    rwa: bool = True,
    cutoff: int = 1,
) -> TensorOracle:
    ocs = [omega_c] * m_cavities if np.isscalar(omega_c) else list(omega_c)
    oas = [omega_a] * m_cavities if np.isscalar(omega_a) else list(omega_a)
    gs = [g] * n_atoms if np.isscalar(g) else list(g)
    ph_dim = cutoff + 1
    dims = [ph_dim] * m_cavities + [2] * (m_cavities * n_atoms)
    oracle = TensorOracle(dims, _reference_slot_index(m_cavities))

    occ = _ket_bra(2, 1, 1)
    low = _ket_bra(2, 0, 1)
    for j in range(m_cavities):
        oracle.add_term(ocs[j], {j: _number(ph_dim)})
        for a in range(n_atoms):
            slot = m_cavities + j * n_atoms + a
            oracle.add_term(oas[j], {slot: occ})
            oracle.add_hermitian_term(gs[a], {j: _lower(ph_dim).T, slot: low})
            if not rwa:
                oracle.add_hermitian_term(gs[a], {j: _lower(ph_dim).T, slot: low.T})
    for j in range(m_cavities - 1):
        oracle.add_hermitian_term(hopping, {j + 1: _lower(ph_dim).T, j: _lower(ph_dim)})
    return oracle


def model_hash(params: ModelParams, extra: str = "") -> str:
    """Short stable hash of a parameter set, for operator dumps."""
    text = ",".join(f"{k}={v!r}" for k, v in sorted(vars(params).items())) + "|" + extra
    return hashlib.sha256(text.encode()).hexdigest()[:12]
