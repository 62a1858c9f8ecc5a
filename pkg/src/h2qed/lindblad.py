"""Dissipative evolution of density matrices.

The master equation is integrated with the two-step splitting used
throughout this project: one exact unitary conjugation by exp(-i H dt)
(computed once per run from the eigendecomposition of H and cached),
followed by one explicit Euler step of the dissipation/influx
superoperators evaluated at the unitarily advanced state.  The state is
re-Hermitized and trace-renormalized after every step, with the
pre-normalization drift logged rather than silently discarded.

Two structural facts keep long runs affordable without approximating
anything: the Hamiltonian coupling graph usually falls apart into many
small connected components, so the propagator is eigendecomposed and
applied block by block; and the jump operator of a bosonic mode maps each
basis state to at most one partner, so both superoperators reduce to an
index gather plus a diagonal rescaling, all O(dim^2).

Jump operators are the per-mode annihilation operators over the generated
basis; the influx superoperator uses the exact matrix adjoint of that
truncated operator, which keeps every channel exactly trace-free even at
the occupation cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .fock import apply_annihilate
from .generator import Basis, ChannelSpec
from .operators import SparseOperator

try:  # optional accelerator for the channel gathers; numpy path is equivalent
    from numba import njit as _njit

    @_njit(cache=True)
    def _gather_add(out, rho, dst, src, w):  # pragma: no cover - jitted
        n = dst.size
        for a in range(n):
            da = dst[a]
            sa = src[a]
            for b in range(n):
                out[da, dst[b]] += w[a, b] * rho[sa, src[b]]

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

__all__ = [
    "DissipationChannel",
    "compile_channel",
    "dissipator",
    "influx",
    "UnitaryPropagator",
    "unitary_step",
    "step",
    "evolve",
    "EvolutionResult",
    "StepDiagnostics",
    "StepSizeError",
    "density_from_vector",
    "validate_density_matrix",
]

MAX_STEP_DRIFT = 1e-3


class StepSizeError(RuntimeError):
    """Per-step trace drift exceeded the safety bound."""


class DimensionMismatchError(ValueError):
    pass


def density_from_vector(vec: np.ndarray) -> np.ndarray:
    """|v><v| for a normalized state vector."""
    v = np.asarray(vec, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot build a density matrix from the zero vector")
    v = v / norm
    return np.outer(v, v.conj())


def validate_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-9,
    eig_floor: float = -1e-6,
) -> float:
    """Check Hermiticity, unit trace and positivity; returns the min eigenvalue."""
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian: defect {herm:.3e}")
    tr = float(rho.trace().real)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < eig_floor:
        raise ValueError(f"density matrix has eigenvalue {lo:.3e} below {eig_floor:.0e}")
    return lo


@dataclass
class DissipationChannel:
    """One leakage/influx channel: annihilation jump operator plus rates."""

    jump: SparseOperator
    gamma_out: float
    gamma_in: float = 0.0
    label: str = ""
    _dst: np.ndarray = field(init=False, repr=False)
    _src: np.ndarray = field(init=False, repr=False)
    _amp: np.ndarray = field(init=False, repr=False)
    _n_out: np.ndarray = field(init=False, repr=False)
    _n_in: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.gamma_out < 0 or self.gamma_in < 0:
            raise ValueError("channel rates must be non-negative")
        if self.gamma_in > 0 and self.gamma_in >= self.gamma_out:
            raise ValueError("influx requires mu = gamma_in/gamma_out < 1")
        entries = self.jump.normalized().entries
        dim = self.jump.dim
        dst = np.array([r for r, _, _ in entries], dtype=np.intp)
        src = np.array([c for _, c, _ in entries], dtype=np.intp)
        amp = np.array([v for _, _, v in entries], dtype=complex)
        if len(set(dst.tolist())) != len(dst) or len(set(src.tolist())) != len(src):
            raise ValueError("jump operator must map each basis state to at most one partner")
        self._dst, self._src, self._amp = dst, src, amp
        n_out = np.zeros(dim)
        n_in = np.zeros(dim)
        np.add.at(n_out, src, np.abs(amp) ** 2)   # diag of A†A
        np.add.at(n_in, dst, np.abs(amp) ** 2)    # diag of A A†
        self._n_out, self._n_in = n_out, n_in

    @property
    def mu(self) -> float:
        return 0.0 if self.gamma_in == 0 else self.gamma_in / self.gamma_out

    @property
    def dim(self) -> int:
        return self.jump.dim


def compile_channel(spec: ChannelSpec, basis: Basis, label: str = "") -> DissipationChannel:
    """Build the annihilation jump operator of ``spec.mode`` over ``basis``."""
    a = SparseOperator(len(basis))
    for i, s in enumerate(basis):
        lowered = apply_annihilate(s, spec.mode)
        if lowered is None:
            continue
        amp, img = lowered
        j = basis.index_of(img)
        if j is None:
            raise ValueError(
                f"basis is not closed under the {spec.mode} jump operator "
                f"(image of state {i} missing)"
            )
        a.add(j, i, amp)
    name = label or (spec.mode.value if hasattr(spec.mode, "value") else f"cavity {spec.mode}")
    return DissipationChannel(a, spec.gamma_out, spec.gamma_in, name)


def _gather(rho: np.ndarray, dst: np.ndarray, src: np.ndarray, amp: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    if len(dst):
        w = np.outer(amp, amp.conj())
        out[np.ix_(dst, dst)] = w * rho[np.ix_(src, src)]
    return out


def dissipator(channel: DissipationChannel, rho: np.ndarray) -> np.ndarray:
    """gamma_out (A rho A† - {rho, A†A}/2); exactly trace-free."""
    if rho.shape != (channel.dim, channel.dim):
        raise DimensionMismatchError(
            f"rho {rho.shape} does not match channel dim {channel.dim}"
        )
    if channel.gamma_out == 0:
        return np.zeros_like(rho)
    out = _gather(rho, channel._dst, channel._src, channel._amp)
    out -= 0.5 * (channel._n_out[:, None] + channel._n_out[None, :]) * rho
    out *= channel.gamma_out
    return out


def influx(channel: DissipationChannel, rho: np.ndarray) -> np.ndarray:
    """gamma_in (A† rho A - {rho, A A†}/2); exactly trace-free."""
    if rho.shape != (channel.dim, channel.dim):
        raise DimensionMismatchError(
            f"rho {rho.shape} does not match channel dim {channel.dim}"
        )
    if channel.gamma_in == 0:
        return np.zeros_like(rho)
    out = _gather(rho, channel._src, channel._dst, channel._amp)
    out -= 0.5 * (channel._n_in[:, None] + channel._n_in[None, :]) * rho
    out *= channel.gamma_in
    return out


def _as_dense_hermitian(h: Union[SparseOperator, np.ndarray]) -> np.ndarray:
    hd = h.to_dense() if isinstance(h, SparseOperator) else np.asarray(h, dtype=complex)
    defect = np.max(np.abs(hd - hd.conj().T)) if hd.size else 0.0
    scale = max(1.0, float(np.max(np.abs(hd)))) if hd.size else 1.0
    if defect > 1e-12 * scale:
        raise ValueError(f"Hamiltonian is not Hermitian (defect {defect:.3e})")
    return hd


class UnitaryPropagator:
    """exp(-i H dt) conjugation, eigendecomposed once and reused.

    The coupling graph of H is split into connected components and each
    block is diagonalized separately, which is both cheaper and exactly
    block-preserving; states are permuted so each block is a contiguous
    slice.  ``apply`` works in the original basis order; the permuted
    fast path is used internally by :func:`evolve`.
    """

    def __init__(self, h: Union[SparseOperator, np.ndarray], dt: float):
        hd = _as_dense_hermitian(h)
        self.dim = hd.shape[0]
        self.dt = dt
        if self.dim == 0:
            raise ValueError("empty Hamiltonian")
        ncomp, labels = connected_components(sp.csr_matrix(hd != 0), directed=False)
        if ncomp <= 1:
            self.perm: Optional[np.ndarray] = None
            self.inv_perm: Optional[np.ndarray] = None
            self._bounds = [(0, self.dim)]
            self._blocks = [self._block_propagator(hd, dt)]
        else:
            order = np.argsort(labels, kind="stable")
            self.perm = order
            self.inv_perm = np.argsort(order)
            sizes = np.bincount(labels)
            bounds = np.concatenate(([0], np.cumsum(sizes)))
            hp = hd[np.ix_(order, order)]
            self._bounds = [(int(bounds[i]), int(bounds[i + 1])) for i in range(ncomp)]
            self._blocks = [self._block_propagator(hp[lo:hi, lo:hi], dt) for lo, hi in self._bounds]
        self._blocks_h = [np.ascontiguousarray(b.conj().T) for b in self._blocks]
        self._matrix: Optional[np.ndarray] = None

    @staticmethod
    def _block_propagator(block: np.ndarray, dt: float) -> np.ndarray:
        w, v = np.linalg.eigh(block)
        return (v * np.exp(-1j * w * dt)) @ v.conj().T

    @property
    def matrix(self) -> np.ndarray:
        """Dense propagator in the original basis order (built lazily)."""
        if self._matrix is None:
            full = np.zeros((self.dim, self.dim), dtype=complex)
            for (lo, hi), blk in zip(self._bounds, self._blocks):
                full[lo:hi, lo:hi] = blk
            if self.perm is not None:
                full = full[np.ix_(self.inv_perm, self.inv_perm)]
            self._matrix = full
        return self._matrix

    def apply_permuted(self, rho: np.ndarray, out: np.ndarray, scratch: np.ndarray) -> np.ndarray:
        """P rho P† for rho already in the permuted (block-contiguous) order."""
        for (lo, hi), blk in zip(self._bounds, self._blocks):
            np.matmul(blk, rho[lo:hi, :], out=scratch[lo:hi, :])
        for (lo, hi), blk_h in zip(self._bounds, self._blocks_h):
            np.matmul(scratch[:, lo:hi], blk_h, out=out[:, lo:hi])
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """P rho P† in the original basis order."""
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"rho {rho.shape} does not match dim {self.dim}")
        rp = rho if self.perm is None else rho[np.ix_(self.perm, self.perm)]
        rp = np.ascontiguousarray(rp, dtype=complex)
        out = np.empty_like(rp)
        scratch = np.empty_like(rp)
        self.apply_permuted(rp, out, scratch)
        if self.perm is not None:
            out = out[np.ix_(self.inv_perm, self.inv_perm)]
        return out


def unitary_step(h: Union[SparseOperator, np.ndarray], rho: np.ndarray, dt: float) -> np.ndarray:
    """One exact unitary step; use :class:`UnitaryPropagator` for repeated steps."""
    return UnitaryPropagator(h, dt).apply(rho)


@dataclass
class StepDiagnostics:
    trace_drift: float     # |tr - 1| before renormalization
    herm_defect: float     # max |rho - rho†| before re-Hermitization


class _LindbladOps:
    """Channels compiled against a fixed (possibly permuted) index order.

    All anticommutator halves collapse into one real decay matrix
    D_ij = sum_ch (gamma_out (n_i + n_j) + gamma_in (m_i + m_j)) / 2; the
    A rho A† and A† rho A parts stay per-channel index gathers.
    """

    def __init__(self, channels: Sequence[DissipationChannel], dim: int,
                 pos: Optional[np.ndarray] = None, scale: float = 1.0):
        # pos maps original index -> compiled position; diagonal vectors are
        # re-ordered with the inverse map order = argsort(pos).  ``scale``
        # (the step size) is folded into every weight up front.
        order = None if pos is None else np.argsort(pos)
        decay = np.zeros(dim)
        self._gathers: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        for ch in channels:
            if ch.dim != dim:
                raise DimensionMismatchError("channel dimension mismatch")
            dst = ch._dst if pos is None else pos[ch._dst]
            src = ch._src if pos is None else pos[ch._src]
            w_base = np.outer(ch._amp, ch._amp.conj())
            if np.all(w_base.imag == 0):
                w_base = w_base.real  # ladder amplitudes are real in practice
            if ch.gamma_out:
                n_out = ch._n_out if order is None else ch._n_out[order]
                decay += ch.gamma_out * n_out
                if len(dst):
                    self._gathers.append((dst, src, scale * ch.gamma_out * w_base))
            if ch.gamma_in:
                n_in = ch._n_in if order is None else ch._n_in[order]
                decay += ch.gamma_in * n_in
                if len(dst):
                    self._gathers.append((src, dst, scale * ch.gamma_in * w_base))
        self._neg_decay = -0.5 * scale * (decay[:, None] + decay[None, :])
        self._np_gathers = [
            (np.ix_(to, to), np.ix_(frm, frm), w, np.empty((len(to), len(to)), complex))
            for to, frm, w in self._gathers
        ]

    def increment(self, rho: np.ndarray, out: np.ndarray) -> np.ndarray:
        """out = scale * L(rho) with the construction-time scale."""
        np.multiply(rho, self._neg_decay, out=out)
        if _HAVE_NUMBA:
            for to, frm, w in self._gathers:
                _gather_add(out, rho, to, frm, w)
        else:
            for ix_to, ix_from, w, buf in self._np_gathers:
                np.multiply(w, rho[ix_from], out=buf)
                out[ix_to] += buf
        return out


def _lindblad_increment(channels: Sequence[DissipationChannel], rho: np.ndarray) -> np.ndarray:
    incr = np.zeros_like(rho)
    for ch in channels:
        if ch.gamma_out:
            incr += dissipator(ch, rho)
        if ch.gamma_in:
            incr += influx(ch, rho)
    return incr


def step(
    h: Union[SparseOperator, np.ndarray, UnitaryPropagator],
    channels: Sequence[DissipationChannel],
    rho: np.ndarray,
    dt: float,
    max_drift: float = MAX_STEP_DRIFT,
) -> tuple[np.ndarray, StepDiagnostics]:
    """One split step: exact unitary conjugation, then an Euler Lindblad step."""
    prop = h if isinstance(h, UnitaryPropagator) else UnitaryPropagator(h, dt)
    rho_t = prop.apply(rho)
    rho_t += dt * _lindblad_increment(channels, rho_t)
    herm = float(np.max(np.abs(rho_t - rho_t.conj().T)))
    rho_t = 0.5 * (rho_t + rho_t.conj().T)
    tr = float(rho_t.trace().real)
    drift = abs(tr - 1.0)
    if drift > max_drift:
        raise StepSizeError(
            f"trace drifted by {drift:.3e} in one step; reduce dt (currently {dt})"
        )
    rho_t /= tr
    return rho_t, StepDiagnostics(drift, herm)


@dataclass
class EvolutionResult:
    """Strided time series of projector expectations plus integrator health."""

    steps: np.ndarray
    times: np.ndarray
    values: dict[str, np.ndarray]
    trace_drift: np.ndarray
    min_eig: np.ndarray
    final_rho: np.ndarray
    dt: float
    stride: int
    max_herm_defect: float = 0.0
    max_trace_drift: float = 0.0

    @property
    def labels(self) -> list[str]:
        return list(self.values)

    def row(self, step: int) -> dict[str, float]:
        idx = int(np.searchsorted(self.steps, step))
        if idx >= len(self.steps) or self.steps[idx] != step:
            raise KeyError(f"step {step} was not recorded (stride {self.stride})")
        out = {"step": int(step), "time": float(self.times[idx])}
        for label, series in self.values.items():
            out[label] = float(series[idx])
        out["trace_drift"] = float(self.trace_drift[idx])
        out["min_eig"] = float(self.min_eig[idx])
        return out

    def final_row(self) -> dict[str, float]:
        return self.row(int(self.steps[-1]))


def evolve(
    h: Union[SparseOperator, np.ndarray, UnitaryPropagator],
    channels: Sequence[DissipationChannel],
    rho0: np.ndarray,
    steps: int,
    dt: float,
    observables: Iterable[tuple[str, SparseOperator]] = (),
    stride: int = 1,
    max_drift: float = MAX_STEP_DRIFT,
    track_min_eig: bool = True,
) -> EvolutionResult:
    """Iterate the split step and record expectations every ``stride`` steps.

    The state at step 0 and at the final step are always recorded.  The
    propagator is factorized once up front; per step the cost is the
    block-wise unitary conjugation plus O(dim^2) channel work, with all
    buffers preallocated.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    obs = list(observables)
    prop = h if isinstance(h, UnitaryPropagator) else UnitaryPropagator(h, dt)
    dim = prop.dim
    if rho0.shape != (dim, dim):
        raise DimensionMismatchError(f"rho0 {rho0.shape} does not match dim {dim}")

    perm, inv_perm = prop.perm, prop.inv_perm
    rho = np.array(rho0, dtype=complex, copy=True)
    if perm is not None:
        rho = np.ascontiguousarray(rho[np.ix_(perm, perm)])
    ops = _LindbladOps(channels, dim, pos=inv_perm, scale=dt)
    out = np.empty_like(rho)
    scratch = np.empty_like(rho)
    incr = np.empty_like(rho)
    absbuf = np.empty(rho.shape, dtype=float)

    rec_steps: list[int] = []
    rec_drift: list[float] = []
    rec_eig: list[float] = []
    rec_vals: dict[str, list[float]] = {label: [] for label, _ in obs}
    max_herm = 0.0
    max_drift_seen = 0.0

    def record(n: int, drift: float) -> None:
        snapshot = rho if perm is None else rho[np.ix_(inv_perm, inv_perm)]
        rec_steps.append(n)
        rec_drift.append(drift)
        rec_eig.append(float(np.linalg.eigvalsh(snapshot)[0]) if track_min_eig else np.nan)
        for label, op in obs:
            rec_vals[label].append(op.expectation(snapshot))

    record(0, 0.0)
    for n in range(1, steps + 1):
        prop.apply_permuted(rho, out, scratch)
        ops.increment(out, incr)
        incr += out
        # incr now holds the post-step state; measure and repair symmetry
        np.conjugate(incr.T, out=scratch)
        np.subtract(incr, scratch, out=out)
        np.abs(out, out=absbuf)
        herm = float(absbuf.max())
        np.add(incr, scratch, out=rho)
        rho *= 0.5
        tr = float(np.trace(rho).real)
        drift = abs(tr - 1.0)
        if drift > max_drift:
            raise StepSizeError(
                f"trace drifted by {drift:.3e} at step {n}; reduce dt (currently {dt})"
            )
        rho *= 1.0 / tr
        max_herm = max(max_herm, herm)
        max_drift_seen = max(max_drift_seen, drift)
        if n % stride == 0 or n == steps:
            record(n, drift)

    final = rho if perm is None else rho[np.ix_(inv_perm, inv_perm)]
    arr_steps = np.array(rec_steps, dtype=int)
    return EvolutionResult(
        steps=arr_steps,
        times=arr_steps * dt,
        values={label: np.array(v) for label, v in rec_vals.items()},
        trace_drift=np.array(rec_drift),
        min_eig=np.array(rec_eig),
        final_rho=final,
        dt=dt,
        stride=stride,
        max_herm_defect=max_herm,
        max_trace_drift=max_drift_seen,
    )
