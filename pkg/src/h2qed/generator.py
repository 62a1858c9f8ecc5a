"""Reachable-basis construction.

Instead of working in the full tensor-product space, every model is
evolved on the closure of its initial state under the model's interaction
terms and its dissipation/influx channels.  The closure is a plain
breadth-first search: a rule is followed in both directions of each
Hermitian-conjugate pair, a leakage channel contributes the lowering
image, an influx channel the raising image clipped at the per-mode
cutoff.  Rules whose coupling constant is exactly zero move no amplitude
and are skipped.

The resulting :class:`Basis` is ordered deterministically: states appear
in breadth-first discovery order from the initial state(s), ties within a
discovery level broken by the canonical text rendering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

from .fock import (
    BasisState,
    Mode,
    ModeId,
    Transition,
    Variant,
    apply_annihilate,
    apply_create,
    apply_transition,
    parse_state,
    render_state,
)

__all__ = [
    "InteractionRule",
    "HoppingRule",
    "ChannelSpec",
    "RuleSet",
    "Basis",
    "BasisOverflowError",
    "generate_basis",
]

HARD_CAP_DEFAULT = 1_000_000


class BasisOverflowError(RuntimeError):
    """Closure exceeded the configured hard cap."""


@dataclass(frozen=True)
class InteractionRule:
    """One interaction term g·(a†σ + aσ†), or a bare σ† + σ pair.

    ``transition`` is stored in its excitation direction; ``mode`` is the
    boson mode consumed by the excitation (``None`` for photon-free
    couplings such as nucleus tunnelling).
    """

    transition: Transition
    mode: Optional[ModeId]
    weight: float


@dataclass(frozen=True)
class HoppingRule:
    """Boson hopping ζ·(a†_b a_a + a†_a a_b) between two modes."""

    mode_a: ModeId
    mode_b: ModeId
    weight: float


@dataclass(frozen=True)
class ChannelSpec:
    """Leakage/influx pair for one mode.

    ``gamma_out`` is the leakage rate, ``gamma_in`` the thermal influx
    rate; their ratio mu = gamma_in/gamma_out encodes the mode
    temperature and must stay below 1 for a normalizable stationary
    state.
    """

    mode: ModeId
    gamma_out: float
    gamma_in: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma_out < 0 or self.gamma_in < 0:
            raise ValueError("channel rates must be non-negative")
        if self.gamma_in > 0 and self.gamma_in >= self.gamma_out:
            raise ValueError(
                f"influx requires mu = gamma_in/gamma_out < 1, got "
                f"{self.gamma_in}/{self.gamma_out}"
            )

    @property
    def mu(self) -> float:
        if self.gamma_in == 0:
            return 0.0
        return self.gamma_in / self.gamma_out


@dataclass
class RuleSet:
    """Everything that can move amplitude in one model.

    Mirrors the model's Hamiltonian (one entry per interaction term) plus
    its dissipation channels and the per-mode occupation cutoffs.
    """

    variant: Variant
    interactions: tuple[InteractionRule, ...]
    channels: tuple[ChannelSpec, ...] = ()
    hoppings: tuple[HoppingRule, ...] = ()
    cutoffs: Mapping[ModeId, int] = field(default_factory=dict)

    def cutoff(self, mode: ModeId) -> int:
        try:
            return self.cutoffs[mode]
        except KeyError:
            raise KeyError(f"no cutoff configured for mode {mode}")

    def neighbours(self, state: BasisState) -> Iterator[BasisState]:
        """All states one rule application away (zero-weight rules skipped)."""
        for rule in self.interactions:
            if rule.weight == 0.0:
                continue
            # excitation: raise the transition, absorb one quantum
            res = apply_transition(state, rule.transition)
            if res is not None:
                img = res[1]
                if rule.mode is None:
                    yield img
                else:
                    absorbed = apply_annihilate(img, rule.mode)
                    if absorbed is not None:
                        yield absorbed[1]
            # relaxation: lower the transition, emit one quantum (clipped)
            res = apply_transition(state, rule.transition.reversed())
            if res is not None:
                img = res[1]
                if rule.mode is None:
                    yield img
                else:
                    emitted = apply_create(img, rule.mode, self.cutoff(rule.mode))
                    if emitted is not None:
                        yield emitted[1]
        for hop in self.hoppings:
            if hop.weight == 0.0:
                continue
            for src, dst in ((hop.mode_a, hop.mode_b), (hop.mode_b, hop.mode_a)):
                lowered = apply_annihilate(state, src)
                if lowered is None:
                    continue
                raised = apply_create(lowered[1], dst, self.cutoff(dst))
                if raised is not None:
                    yield raised[1]
        for ch in self.channels:
            if ch.gamma_out > 0:
                lowered = apply_annihilate(state, ch.mode)
                if lowered is not None:
                    yield lowered[1]
            if ch.gamma_in > 0:
                raised = apply_create(state, ch.mode, self.cutoff(ch.mode))
                if raised is not None:
                    yield raised[1]


class Basis:
    """Deterministically ordered set of basis states with O(1) lookup."""

    def __init__(self, states: Iterable[BasisState]):
        self._states = tuple(states)
        self._index = {s: i for i, s in enumerate(self._states)}
        if len(self._index) != len(self._states):
            raise ValueError("duplicate states in basis")
        if self._states:
            variants = {s.variant for s in self._states}
            if len(variants) != 1:
                raise ValueError("basis mixes state variants")

    @property
    def states(self) -> tuple[BasisState, ...]:
        return self._states

    @property
    def variant(self) -> Variant:
        return self._states[0].variant

    def __len__(self) -> int:
        return len(self._states)

    def __iter__(self) -> Iterator[BasisState]:
        return iter(self._states)

    def __getitem__(self, i: int) -> BasisState:
        return self._states[i]

    def index_of(self, state: BasisState) -> Optional[int]:
        return self._index.get(state)

    def labels(self) -> list[str]:
        return [render_state(s) for s in self._states]

    def indices_where(self, predicate) -> list[int]:
        return [i for i, s in enumerate(self._states) if predicate(s)]

    def to_json(self) -> str:
        import json

        return json.dumps(self.labels(), indent=0)

    @classmethod
    def from_json(cls, text: str) -> "Basis":
        import json

        return cls(parse_state(label) for label in json.loads(text))


def _diagnose_runaway(states: Iterable[BasisState], cutoffs: Mapping[ModeId, int]) -> str:
    peak: dict[ModeId, int] = {}
    order = None
    for s in states:
        if order is None:
            if s.variant is Variant.REFERENCE:
                order = tuple(range(len(s.photons)))
            else:
                from .fock import mode_order

                order = mode_order(s.variant)
        for mode, p in zip(order, s.photons):
            if p > peak.get(mode, -1):
                peak[mode] = p
    if not peak:
        return "no states collected"
    mode, p = max(peak.items(), key=lambda kv: kv[1])
    name = mode.value if isinstance(mode, Mode) else f"cavity {mode}"
    return f"mode {name} reached occupation {p} (cutoff {cutoffs.get(mode, 'unset')})"


def generate_basis(
    initial: Union[BasisState, Iterable[BasisState]],
    rules: RuleSet,
    hard_cap: int = HARD_CAP_DEFAULT,
) -> Basis:
    """Close ``initial`` under every non-zero rule of ``rules``.

    Returns the minimal basis containing the initial state(s), closed
    under both directions of every interaction/hopping term and under
    every channel jump (lowering for leakage, cutoff-clipped raising for
    influx).  Ordering is breadth-first from the initial states with
    lexicographic tie-breaking inside each level, so repeated runs yield
    identical bases.
    """
    if isinstance(initial, BasisState):
        seeds = [initial]
    else:
        seeds = list(initial)
    if not seeds:
        raise ValueError("no initial state given")
    for s in seeds:
        for mode, cut in rules.cutoffs.items():
            try:
                occ = s.occupation(mode)
            except ValueError:
                continue
            if occ > cut:
                raise ValueError(
                    f"initial occupation {occ} of mode {mode} exceeds cutoff {cut}"
                )

    level = sorted(set(seeds), key=render_state)
    order: list[BasisState] = []
    seen: set[BasisState] = set(level)
    while level:
        order.extend(level)
        if len(order) > hard_cap:
            raise BasisOverflowError(
                f"basis closure exceeded hard cap {hard_cap}: "
                + _diagnose_runaway(order, rules.cutoffs)
            )
        nxt: set[BasisState] = set()
        for state in level:
            for image in rules.neighbours(state):
                if image not in seen:
                    nxt.add(image)
        seen |= nxt
        level = sorted(nxt, key=render_state)
    return Basis(order)
