"""Thermal photon states and stationarity checks.

The stationary field state at temperature T is the Gibbs mixture of Fock
states with geometric weights mu^p, where mu < 1 is the influx-to-leakage
rate ratio of the mode and encodes the temperature through
mu = exp(-omega/T) (hbar = k_B = 1).  The checks in this module make the
stationarity statement executable: per-level detailed balance of the
probability flows, and the invariance of a product state gibbs ⊗ atom
under the full split integrator.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from .lindblad import DissipationChannel, UnitaryPropagator, step
from .operators import SparseOperator

__all__ = [
    "gibbs_state",
    "gibbs_tail_mass",
    "mu_to_temperature",
    "temperature_to_mu",
    "photon_mode_channel",
    "check_detailed_balance",
    "verify_product_stationarity",
    "report_json",
]


def gibbs_state(mu: float, cutoff: int) -> np.ndarray:
    """Diagonal thermal photon state with weights mu^p, p = 0..cutoff."""
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    weights = np.array([mu**p for p in range(cutoff + 1)])
    return np.diag(weights / weights.sum()).astype(complex)


def gibbs_tail_mass(mu: float, cutoff: int) -> float:
    """Unnormalized weight mu^(cutoff+1)/(1-mu) left beyond the cutoff."""
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    return mu ** (cutoff + 1) / (1.0 - mu)


def mu_to_temperature(mu: float, omega_c: float = 1.0) -> float:
    """T = omega_c / ln(1/mu); mu = 0 maps to T = 0 by convention."""
    if mu == 0.0:
        return 0.0
    if not 0.0 < mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    return omega_c / math.log(1.0 / mu)


def temperature_to_mu(temperature: float, omega_c: float = 1.0) -> float:
    """Inverse of :func:`mu_to_temperature`."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0.0:
        return 0.0
    return math.exp(-omega_c / temperature)


def photon_mode_channel(
    gamma_out: float, gamma_in: float, cutoff: int
) -> DissipationChannel:
    """Leakage/influx channel of a single truncated photon mode."""
    a = SparseOperator(cutoff + 1)
    for p in range(1, cutoff + 1):
        a.add(p - 1, p, math.sqrt(p))
    return DissipationChannel(a, gamma_out, gamma_in, "photon")


def check_detailed_balance(
    rho: np.ndarray, channel: DissipationChannel
) -> dict:
    """Per-level balance of upward and downward probability flows.

    For a photon mode the flow up from level p is (p+1) rho_pp gamma_in
    and the flow down from level p+1 is (p+1) rho_{p+1,p+1} gamma_out;
    they cancel level by level exactly on the Gibbs state with matching
    mu.  Returns the per-level mismatches and their maximum.
    """
    diag = np.real(np.diag(rho))
    cutoff = len(diag) - 1
    flows = []
    for p in range(cutoff):
        up = (p + 1) * diag[p] * channel.gamma_in
        down = (p + 1) * diag[p + 1] * channel.gamma_out
        flows.append(abs(up - down))
    return {
        "max_flow_mismatch": max(flows) if flows else 0.0,
        "flow_mismatch_per_level": flows,
        "mu": channel.mu,
    }


def _photon_marginal(rho: np.ndarray, dim_ph: int, dim_at: int) -> np.ndarray:
    return np.einsum("aibi->ab", rho.reshape(dim_ph, dim_at, dim_ph, dim_at))


def verify_product_stationarity(
    h_at: np.ndarray,
    rho_at: np.ndarray,
    mu: float,
    gamma_out: float,
    omega: float = 1.0,
    cutoff: int = 2,
    steps: int = 10_000,
    dt: float = 0.25,
    stride: int = 100,
    rho_ph: Optional[np.ndarray] = None,
) -> dict:
    """Evolve gibbs ⊗ atom under the split integrator and watch the marginal.

    The photon mode is uncoupled from the atom (H = H_ph ⊗ 1 + 1 ⊗ H_at,
    jump operator a ⊗ 1), so the photon marginal must stay at — or, when
    ``rho_ph`` starts elsewhere, converge to — the Gibbs state of the
    channel's mu.  Reports the running maximum and final deviation of the
    marginal, the off-diagonal magnitudes, and the detailed-balance
    mismatch of the final marginal.
    """
    dim_ph = cutoff + 1
    dim_at = h_at.shape[0]
    target = gibbs_state(mu, cutoff)
    start_ph = target if rho_ph is None else np.asarray(rho_ph, dtype=complex)

    h_ph = omega * np.diag(np.arange(dim_ph, dtype=float))
    h_total = np.kron(h_ph, np.eye(dim_at)) + np.kron(np.eye(dim_ph), h_at)

    a_full = SparseOperator(dim_ph * dim_at)
    for p in range(1, dim_ph):
        for j in range(dim_at):
            a_full.add((p - 1) * dim_at + j, p * dim_at + j, math.sqrt(p))
    channel = DissipationChannel(a_full, gamma_out, mu * gamma_out, "photon")

    rho = np.kron(start_ph, np.asarray(rho_at, dtype=complex))
    prop = UnitaryPropagator(h_total, dt)

    max_dev = 0.0
    offdiag_trace: list[float] = []
    for n in range(steps):
        rho, _ = step(prop, [channel], rho, dt)
        if n % stride == 0 or n == steps - 1:
            marg = _photon_marginal(rho, dim_ph, dim_at)
            dev = float(np.max(np.abs(marg - target)))
            max_dev = max(max_dev, dev)
            off = marg - np.diag(np.diag(marg))
            offdiag_trace.append(float(np.max(np.abs(off))))
    marg = _photon_marginal(rho, dim_ph, dim_at)
    final_dev = float(np.max(np.abs(marg - target)))
    ph_channel = photon_mode_channel(gamma_out, mu * gamma_out, cutoff)
    balance = check_detailed_balance(marg, ph_channel)
    return {
        "marginal_deviation": max_dev,
        "final_marginal_deviation": final_dev,
        "max_offdiagonal": offdiag_trace,
        "max_flow_mismatch": balance["max_flow_mismatch"],
        "tail_mass": gibbs_tail_mass(mu, cutoff),
    }


def report_json(report: dict) -> str:
    """Stable JSON rendering of a stationarity/balance report."""
    return json.dumps(report, sort_keys=True, default=float)
