"""Occupation-number states and elementary operator actions.

The simulator works with three families of finite-dimensional models:

* the association/dissociation model of a two-atom, two-electron system
  (five photonic modes, eight atomic orbital slots or four molecular
  orbital slots, one nucleus-position bit),
* the covalent-bond/phonon variant (two photonic modes, one phonon mode,
  two molecular excitation bits, a bond bit and a nucleus bit),
* plain reference cavity models (one or more cavities, each with a photon
  mode and a register of two-level atoms).

Every pure configuration is a :class:`BasisState`: a tuple of photon
occupation numbers, a tuple of electron occupation bits and, where the
model needs them, a covalent-bond bit ``cb`` and a nucleus bit ``k``.
States are immutable values with structural equality, so they can be used
as dictionary keys and shared freely between threads.

Canonical text rendering (used for logs, golden files and deterministic
ordering):

* association/dissociation: ``|p1 p2 p3 p4 p5; e:bits|k>`` where the
  photon slots are ordered (molecular-up, molecular-down, atomic-up,
  atomic-down, spin) and ``bits`` lists the eight atomic slots
  (atom1 excited-up, atom1 excited-down, atom1 ground-up, atom1
  ground-down, then the same four for atom 2) when ``k=1``, or the four
  molecular slots (upper-up, upper-down, lower-up, lower-down) when
  ``k=0``;
* covalent bond: ``|p1 p2 m; l1 l2; L k>`` with photon slots
  (molecular-up, molecular-down, phonon);
* reference: ``|p1 .. pM; a:bits>`` with one photon slot per cavity and
  one bit per two-level atom.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, replace
from typing import Optional, Union

__all__ = [
    "Variant",
    "Mode",
    "ModeId",
    "TransitionKind",
    "Transition",
    "BasisState",
    "mode_order",
    "mode_position",
    "apply_annihilate",
    "apply_create",
    "apply_transition",
    "atomic_transition",
    "spin_transition",
    "molecular_transition",
    "bond_transition",
    "nucleus_transition",
    "two_level_transition",
    "electron_count",
    "has_spin_up",
    "render_state",
    "parse_state",
    "MOLECULAR_PATTERNS",
    "TUNNEL_IMAGE",
    "TUNNEL_IMAGES",
]


class Variant(enum.Enum):
    """Which model family a basis state belongs to."""

    ASSOC_DISSOC = "assoc-dissoc"
    COVALENT = "covalent-bond"
    REFERENCE = "reference"


class Mode(enum.Enum):
    """Named bosonic modes of the hydrogen-molecule models.

    ``MOL_*`` drive transitions between the molecular orbitals, ``ATOM_*``
    between the atomic orbitals, ``SPIN`` flips an electron spin inside an
    atom and ``PHONON`` accompanies covalent-bond formation/breaking.
    Reference models use plain integer cavity indices instead.
    """

    MOL_UP = "mol_up"
    MOL_DOWN = "mol_down"
    ATOM_UP = "atom_up"
    ATOM_DOWN = "atom_down"
    SPIN = "spin"
    PHONON = "phonon"


ModeId = Union[Mode, int]

_MODE_ORDER = {
    Variant.ASSOC_DISSOC: (
        Mode.MOL_UP,
        Mode.MOL_DOWN,
        Mode.ATOM_UP,
        Mode.ATOM_DOWN,
        Mode.SPIN,
    ),
    Variant.COVALENT: (Mode.MOL_UP, Mode.MOL_DOWN, Mode.PHONON),
}

# Atomic electron slots, k=1 sector: (atom, level, spin) per index.
ATOMIC_SLOTS = (
    (1, "exc", "up"),
    (1, "exc", "dn"),
    (1, "gnd", "up"),
    (1, "gnd", "dn"),
    (2, "exc", "up"),
    (2, "exc", "dn"),
    (2, "gnd", "up"),
    (2, "gnd", "dn"),
)
_ATOMIC_INDEX = {key: i for i, key in enumerate(ATOMIC_SLOTS)}

# Molecular electron slots, k=0 sector: (level, spin) per index; "exc" is
# the upper (antibonding) orbital, "gnd" the lower (bonding) one.
MOLECULAR_SLOTS = (("exc", "up"), ("exc", "dn"), ("gnd", "up"), ("gnd", "dn"))
_MOLECULAR_INDEX = {key: i for i, key in enumerate(MOLECULAR_SLOTS)}

# The four two-electron molecular occupation patterns (one electron of
# each spin) in slot order (exc-up, exc-dn, gnd-up, gnd-dn).
MOLECULAR_PATTERNS = ((1, 1, 0, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 1, 1))

# Atomic-sector images of a nucleus flip: both electrons on the excited
# orbitals with their spins kept, one electron per atom.  The two identical
# atoms make the coupling symmetric under atom exchange, so both spin
# placements take part; ground orbitals never do.
TUNNEL_IMAGES = ((1, 0, 0, 0, 0, 1, 0, 0), (0, 1, 0, 0, 1, 0, 0, 0))
TUNNEL_IMAGE = TUNNEL_IMAGES[0]


def mode_order(variant: Variant) -> tuple[Mode, ...]:
    """Photon-slot ordering of a named-mode variant."""
    try:
        return _MODE_ORDER[variant]
    except KeyError:
        raise ValueError(f"{variant} has no fixed mode order; use integer cavity indices")


def mode_position(variant: Variant, mode: ModeId) -> int:
    """Index of ``mode`` in the photon tuple of ``variant``."""
    if isinstance(mode, int):
        if variant is not Variant.REFERENCE:
            raise ValueError(f"integer mode {mode} is only valid for reference models")
        return mode
    if variant is Variant.REFERENCE:
        raise ValueError(f"reference models use integer cavity indices, got {mode}")
    order = _MODE_ORDER[variant]
    try:
        return order.index(mode)
    except ValueError:
        raise ValueError(f"mode {mode.value} does not exist in variant {variant.value}")


@dataclass(frozen=True)
class BasisState:
    """One pure occupation-number configuration.

    ``photons`` follows the variant's fixed mode order; ``electrons`` holds
    orbital occupation bits whose meaning depends on the variant (and, for
    the association/dissociation model, on the nucleus bit ``k``: the
    8-slot atomic layout when the nuclei are apart, the 4-slot molecular
    layout when they are together).  ``cb`` is the covalent-bond bit
    (0 = bond formed); ``k`` is the nucleus bit (0 = together, 1 = apart).
    """

    variant: Variant
    photons: tuple[int, ...]
    electrons: tuple[int, ...]
    cb: int = 0
    k: int = 0

    def __post_init__(self) -> None:
        if any(p < 0 for p in self.photons):
            raise ValueError(f"negative photon occupation in {self.photons}")
        if any(b not in (0, 1) for b in self.electrons):
            raise ValueError(f"electron slots must be bits, got {self.electrons}")
        if self.cb not in (0, 1) or self.k not in (0, 1):
            raise ValueError("cb and k must be bits")
        if self.variant is Variant.ASSOC_DISSOC:
            if len(self.photons) != 5:
                raise ValueError("association/dissociation states carry 5 photon slots")
            want = 8 if self.k == 1 else 4
            if len(self.electrons) != want:
                raise ValueError(
                    f"k={self.k} requires {want} electron slots, got {len(self.electrons)}"
                )
        elif self.variant is Variant.COVALENT:
            if len(self.photons) != 3:
                raise ValueError("covalent-bond states carry 3 boson slots")
            if len(self.electrons) != 2:
                raise ValueError("covalent-bond states carry 2 orbital bits")

    def occupation(self, mode: ModeId) -> int:
        return self.photons[mode_position(self.variant, mode)]

    def render(self) -> str:
        return render_state(self)

    def __repr__(self) -> str:  # compact, log-friendly
        return f"BasisState({self.variant.value}: {render_state(self)})"


class TransitionKind(enum.Enum):
    ATOMIC = "atomic"        # ground <-> excited orbital, same atom, same spin
    SPIN = "spin"            # spin down <-> up, same atom, same orbital level
    MOLECULAR = "molecular"  # lower <-> upper molecular orbital, same spin
    BOND = "bond"            # covalent-bond bit (1 = broken is the excited member)
    NUCLEUS = "nucleus"      # nucleus bit with the cross-sector electron map
    TWO_LEVEL = "two-level"  # reference-model atom bit


@dataclass(frozen=True)
class Transition:
    """A directed elementary transition between basis states.

    ``up=True`` is the excitation direction (toward the excited member of
    the two-level pair).  All transitions carry unit amplitude and sign
    +1: with at most one electron per orbital slot and spin-conserving
    photonic couplings, no observable of these models depends on a
    fermionic sign convention, so none is introduced.
    """

    kind: TransitionKind
    up: bool
    atom: int = 0                 # ATOMIC/SPIN: atom index; TWO_LEVEL: bit index
    spin: str = ""                # "up"/"dn" for ATOMIC and MOLECULAR
    level: str = ""               # "exc"/"gnd" for SPIN
    pattern: tuple[int, ...] = () # NUCLEUS: molecular occupation it couples
    image: tuple[int, ...] = ()   # NUCLEUS: atomic occupation it couples

    def reversed(self) -> "Transition":
        return replace(self, up=not self.up)


def atomic_transition(atom: int, spin: str, up: bool = True) -> Transition:
    return Transition(TransitionKind.ATOMIC, up, atom=atom, spin=spin)


def spin_transition(atom: int, level: str, up: bool = True) -> Transition:
    return Transition(TransitionKind.SPIN, up, atom=atom, level=level)


def molecular_transition(spin: str, up: bool = True) -> Transition:
    return Transition(TransitionKind.MOLECULAR, up, spin=spin)


def bond_transition(up: bool = True) -> Transition:
    return Transition(TransitionKind.BOND, up)


def nucleus_transition(
    pattern: tuple[int, ...],
    up: bool = True,
    image: tuple[int, ...] = TUNNEL_IMAGE,
) -> Transition:
    if pattern not in MOLECULAR_PATTERNS:
        raise ValueError(f"{pattern} is not a two-electron molecular pattern")
    if image not in TUNNEL_IMAGES:
        raise ValueError(f"{image} is not a both-excited atomic configuration")
    return Transition(TransitionKind.NUCLEUS, up, pattern=tuple(pattern), image=tuple(image))


def two_level_transition(index: int, up: bool = True) -> Transition:
    return Transition(TransitionKind.TWO_LEVEL, up, atom=index)


def apply_annihilate(state: BasisState, mode: ModeId) -> Optional[tuple[float, BasisState]]:
    """Remove one quantum from ``mode``: amplitude sqrt(p), or None on vacuum."""
    pos = mode_position(state.variant, mode)
    p = state.photons[pos]
    if p == 0:
        return None
    photons = state.photons[:pos] + (p - 1,) + state.photons[pos + 1 :]
    return math.sqrt(p), replace(state, photons=photons)


def apply_create(state: BasisState, mode: ModeId, cutoff: int) -> Optional[tuple[float, BasisState]]:
    """Add one quantum to ``mode``: amplitude sqrt(p+1), or None at the cutoff."""
    pos = mode_position(state.variant, mode)
    p = state.photons[pos]
    if p >= cutoff:
        return None
    photons = state.photons[:pos] + (p + 1,) + state.photons[pos + 1 :]
    return math.sqrt(p + 1), replace(state, photons=photons)


def _move_bit(bits: tuple[int, ...], src: int, dst: int) -> Optional[tuple[int, ...]]:
    # occupied source, free target, else blocked (Pauli)
    if bits[src] != 1 or bits[dst] != 0:
        return None
    out = list(bits)
    out[src], out[dst] = 0, 1
    return tuple(out)


def apply_transition(state: BasisState, which: Transition) -> Optional[tuple[int, BasisState]]:
    """Apply one directed transition.

    Returns ``(+1, target)`` when the source occupancy pattern matches
    (occupied source slot, free target slot), ``None`` otherwise.  Raises
    :class:`ValueError` when the transition kind does not exist in the
    state's variant.
    """
    kind = which.kind
    v = state.variant

    if kind is TransitionKind.ATOMIC:
        if v is not Variant.ASSOC_DISSOC:
            raise ValueError(f"{kind.value} transition is invalid for {v.value} states")
        if state.k != 1:
            return None
        lo = _ATOMIC_INDEX[(which.atom, "gnd", which.spin)]
        hi = _ATOMIC_INDEX[(which.atom, "exc", which.spin)]
        src, dst = (lo, hi) if which.up else (hi, lo)
        bits = _move_bit(state.electrons, src, dst)
        return None if bits is None else (1, replace(state, electrons=bits))

    if kind is TransitionKind.SPIN:
        if v is not Variant.ASSOC_DISSOC:
            raise ValueError(f"{kind.value} transition is invalid for {v.value} states")
        if state.k != 1:
            return None
        dn = _ATOMIC_INDEX[(which.atom, which.level, "dn")]
        up = _ATOMIC_INDEX[(which.atom, which.level, "up")]
        src, dst = (dn, up) if which.up else (up, dn)
        bits = _move_bit(state.electrons, src, dst)
        return None if bits is None else (1, replace(state, electrons=bits))

    if kind is TransitionKind.MOLECULAR:
        if v is Variant.ASSOC_DISSOC:
            if state.k != 0:
                return None
            lo = _MOLECULAR_INDEX[("gnd", which.spin)]
            hi = _MOLECULAR_INDEX[("exc", which.spin)]
            src, dst = (lo, hi) if which.up else (hi, lo)
            bits = _move_bit(state.electrons, src, dst)
            return None if bits is None else (1, replace(state, electrons=bits))
        if v is Variant.COVALENT:
            # one bit per spin: 1 = upper orbital occupied by that spin
            pos = 0 if which.spin == "up" else 1
            bit = state.electrons[pos]
            want, new = (0, 1) if which.up else (1, 0)
            if bit != want:
                return None
            bits = state.electrons[:pos] + (new,) + state.electrons[pos + 1 :]
            return 1, replace(state, electrons=bits)
        raise ValueError(f"{kind.value} transition is invalid for {v.value} states")

    if kind is TransitionKind.BOND:
        if v is not Variant.COVALENT:
            raise ValueError(f"{kind.value} transition is invalid for {v.value} states")
        want, new = (0, 1) if which.up else (1, 0)
        if state.cb != want:
            return None
        return 1, replace(state, cb=new)

    if kind is TransitionKind.NUCLEUS:
        if v is not Variant.ASSOC_DISSOC:
            raise ValueError(f"{kind.value} transition is invalid for {v.value} states")
        if which.up:
            # molecular pattern -> both-excited atomic image, nuclei move apart
            if state.k != 0 or state.electrons != which.pattern:
                return None
            return 1, replace(state, electrons=tuple(which.image), k=1)
        if state.k != 1 or state.electrons != tuple(which.image):
            return None
        return 1, replace(state, electrons=tuple(which.pattern), k=0)

    if kind is TransitionKind.TWO_LEVEL:
        if v is not Variant.REFERENCE:
            raise ValueError(f"{kind.value} transition is invalid for {v.value} states")
        bit = state.electrons[which.atom]
        want, new = (0, 1) if which.up else (1, 0)
        if bit != want:
            return None
        bits = state.electrons[: which.atom] + (new,) + state.electrons[which.atom + 1 :]
        return 1, replace(state, electrons=bits)

    raise ValueError(f"unknown transition kind {kind!r}")


def electron_count(state: BasisState) -> int:
    return sum(state.electrons)


def has_spin_up(state: BasisState) -> bool:
    """True when any electron slot with spin up is occupied."""
    if state.variant is Variant.ASSOC_DISSOC:
        slots = ATOMIC_SLOTS if state.k == 1 else MOLECULAR_SLOTS
        spins = (slot[-1] for slot in slots)
        return any(b == 1 and s == "up" for b, s in zip(state.electrons, spins))
    raise ValueError(f"spin bookkeeping is not defined for {state.variant.value} states")


def render_state(state: BasisState) -> str:
    ph = " ".join(str(p) for p in state.photons)
    if state.variant is Variant.ASSOC_DISSOC:
        bits = "".join(str(b) for b in state.electrons)
        return f"|{ph}; e:{bits}|{state.k}>"
    if state.variant is Variant.COVALENT:
        l1, l2 = state.electrons
        return f"|{ph}; {l1} {l2}; {state.cb} {state.k}>"
    bits = "".join(str(b) for b in state.electrons)
    return f"|{ph}; a:{bits}>"


_ASSOC_RE = re.compile(r"^\|([\d ]+); e:([01]+)\|([01])>$")
_COVALENT_RE = re.compile(r"^\|([\d ]+); ([01]) ([01]); ([01]) ([01])>$")
_REFERENCE_RE = re.compile(r"^\|([\d ]+); a:([01]*)>$")


def parse_state(text: str) -> BasisState:
    """Inverse of :func:`render_state`."""
    m = _ASSOC_RE.match(text)
    if m:
        photons = tuple(int(p) for p in m.group(1).split())
        electrons = tuple(int(b) for b in m.group(2))
        return BasisState(Variant.ASSOC_DISSOC, photons, electrons, k=int(m.group(3)))
    m = _COVALENT_RE.match(text)
    if m:
        photons = tuple(int(p) for p in m.group(1).split())
        electrons = (int(m.group(2)), int(m.group(3)))
        return BasisState(Variant.COVALENT, photons, electrons, cb=int(m.group(4)), k=int(m.group(5)))
    m = _REFERENCE_RE.match(text)
    if m:
        photons = tuple(int(p) for p in m.group(1).split())
        electrons = tuple(int(b) for b in m.group(2))
        return BasisState(Variant.REFERENCE, photons, electrons)
    raise ValueError(f"unparseable state rendering: {text!r}")
