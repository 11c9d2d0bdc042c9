"""Dipole-dipole pair Hamiltonian and the adiabatically eliminated
effective gate-source potential.

In the four-state pair basis {|SS>, |PP>, |P'P'>, |S'S'>} the dipolar
Hamiltonian is (1/r^3) times a fixed symmetric coupling pattern with
direct coupling C3 and hopping coupling C3'.  After eliminating the
P-pair amplitudes the source polariton sees the complex potential

    V_ef(r) = sum_alpha  C3_alpha^2 / (defect_alpha - omega - i*gamma_p)
              / (r - r_gate)^6

which is van der Waals shaped at every field; on resonance the
prefactor is purely imaginary (dissipative) with magnitude C3^2/gamma_p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atomic_states import PairChannel, forster_defect


@dataclass(frozen=True)
class InteractionParams:
    """Everything entering the pair Hamiltonian and V_ef.

    All couplings in angular units: c3, c3_prime in rad/us * um^3,
    gamma_p in rad/us, c6_reference in rad/us * um^6 (zero-field van der
    Waals coefficient, used for blockade-radius reporting only).
    """

    c3: float
    c3_prime: float
    gamma_p: float
    channels: tuple = ()
    c6_reference: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        for name in ("c3", "c3_prime", "gamma_p", "c6_reference"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def dipole_hamiltonian(r: float, params: InteractionParams) -> np.ndarray:
    """4x4 pair Hamiltonian at separation r (um), in rad/us."""
    if r <= 0:
        raise ValueError(f"separation must be > 0, got {r}")
    c3, c3p = params.c3, params.c3_prime
    h = np.array(
        [
            [0.0, c3, c3p, 0.0],
            [c3, 0.0, 0.0, c3p],
            [c3p, 0.0, 0.0, c3],
            [0.0, c3p, c3, 0.0],
        ],
        dtype=complex,
    )
    return h / r**3


def effective_c6(omega: float, field: float, params: InteractionParams) -> complex:
    """Complex prefactor of V_ef: sum_alpha c3_alpha^2/(defect - omega - i*gamma_p).

    V_ef(r) = effective_c6 / (r - r_gate)^6.  The imaginary part is
    non-negative for gamma_p > 0 (dissipative convention: positive
    imaginary susceptibility absorbs).
    """
    total = 0.0 + 0.0j
    for ch in params.channels:
        defect = forster_defect(ch, field)
        total += ch.coupling**2 / (defect - omega - 1j * params.gamma_p)
    return total


def effective_potential(
    r: float,
    gate_pos: float,
    omega: float,
    field: float,
    params: InteractionParams,
) -> complex:
    """V_ef at source position r for a gate at gate_pos (both um, 1D)."""
    if r == gate_pos:
        from .errors import GateSingularityError

        raise GateSingularityError("V_ef diverges at the gate position")
    return effective_c6(omega, field, params) / (r - gate_pos) ** 6


def blockade_radius(c6: float, gamma: float, omega_rabi: float) -> float:
    """r_b = (gamma * C6 / Omega^2)^(1/6), all inputs > 0."""
    if c6 <= 0 or gamma <= 0 or omega_rabi <= 0:
        raise ValueError("blockade_radius requires strictly positive inputs")
    return (gamma * c6 / omega_rabi**2) ** (1.0 / 6.0)


def hopping_suppression(params: InteractionParams) -> float:
    """Ratio C3'/C3; the fixed-gate approximation needs this << 1."""
    if params.c3 == 0:
        raise ValueError("hopping suppression undefined for c3 = 0")
    return params.c3_prime / params.c3
