"""Decoherence of the stored gate spin-wave by source photons.

The stored excitation is a pure superposition over positions with
amplitude proportional to sqrt(n(z)).  One source photon acts as a
quantum channel that is diagonal in the gate position: a transmitted
photon imprints the position-dependent transmission amplitude t(z_g),
while a scattered photon projects according to where it scattered.  The
recoverable spin-wave fraction is the overlap of the decohered state
with the original stored mode, and the Uhlmann fidelity splits into
transmitted and scattered branch contributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from .ensemble import ExperimentGeometry, sample_geometry
from .errors import NumericsError
from .interaction import InteractionParams, effective_c6
from .propagation import PropagationParams, chi_values, transmission_batch


@dataclass(frozen=True)
class SpinWaveState:
    """Density matrix of the stored excitation on a position grid."""

    grid: np.ndarray
    rho: np.ndarray
    intrinsic_lifetime: float = 3.6

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if abs(np.trace(rho).real - 1.0) > 1e-8:
            raise ValueError("density matrix must have unit trace")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        object.__setattr__(self, "rho", rho)

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


@dataclass(frozen=True)
class PhotonChannel:
    """Diagonal transmit/scatter Kraus family for one source photon.

    `transmit` holds t(z_g); `scatter[s, g]` is the amplitude to scatter
    at grid point s given the gate at grid point g.  Completeness
    |t(g)|^2 + sum_s |scatter[s,g]|^2 = 1 holds per column.
    """

    grid: np.ndarray
    transmit: np.ndarray
    scatter: np.ndarray
    baseline_intensity: float = 1.0

    def __post_init__(self):
        total = np.abs(self.transmit) ** 2 + np.sum(np.abs(self.scatter) ** 2, axis=0)
        err = float(np.max(np.abs(total - 1.0)))
        if not np.isfinite(err) or err > 1e-6:
            raise NumericsError(f"Kraus completeness violated by {err:.3g}")

    @property
    def decoherence_matrix(self) -> np.ndarray:
        """D with rho_f = D * rho elementwise; D[g,g] = 1."""
        t = self.transmit
        k = np.einsum("sg,sh->gh", self.scatter, self.scatter.conj())
        return np.outer(t, t.conj()) + k


def stored_spinwave(
    geometry: ExperimentGeometry,
    n_points: int = 201,
    span_factor: float = 2.0,
    intrinsic_lifetime: float = 3.6,
) -> SpinWaveState:
    """Pure stored state with |psi(z)|^2 proportional to the density."""
    half = span_factor * geometry.cloud_half_length
    grid = np.linspace(-half, half, n_points)
    amp = np.exp(-(grid**2) / (2.0 * geometry.cloud_half_length**2))
    amp = amp / np.linalg.norm(amp)
    rho = np.outer(amp, amp.conj())
    return SpinWaveState(grid=grid, rho=rho, intrinsic_lifetime=intrinsic_lifetime)


def photon_channel(
    grid: np.ndarray,
    params: PropagationParams,
    interaction: InteractionParams,
    field: float,
    gate_offset: Tuple[float, float] = (0.0, 0.0),
    source_offset: Tuple[float, float] = (0.0, 0.0),
    density_scale: float = 1.0,
) -> PhotonChannel:
    """Channel for one source photon passing a gate stored on `grid`.

    The source line runs at `source_offset`; the gate sits transversally
    at `gate_offset`.  Scattering amplitudes are distributed over the
    grid proportionally to the local scattering density Im chi(z_s; z_g),
    carrying the propagation phase accumulated up to z_s.
    """
    grid = np.asarray(grid, dtype=float)
    n_g = grid.size
    gates = np.column_stack(
        [np.full(n_g, gate_offset[0]), np.full(n_g, gate_offset[1]), grid]
    )
    offsets = np.tile(np.asarray(source_offset, dtype=float), (n_g, 1))
    t = transmission_batch(
        offsets, gates, params, interaction, field, density_scale=density_scale
    )
    # clip |t| <= 1 against trapezoid roundoff
    mag = np.abs(t)
    t = np.where(mag > 1.0, t / mag, t)

    pref = effective_c6(params.omega, field, interaction)
    t_dist_sq = (source_offset[0] - gate_offset[0]) ** 2 + (
        source_offset[1] - gate_offset[1]
    ) ** 2
    chi = np.empty((n_g, n_g), dtype=complex)  # [g, s]
    for i in range(n_g):
        chi[i] = chi_values(
            grid, params, pref, grid[i], t_dist_sq, density_scale
        )
    dz = np.gradient(grid)
    weights = np.clip(chi.imag, 0.0, None) * dz[None, :]
    norm = weights.sum(axis=1)
    norm = np.where(norm > 0, norm, 1.0)
    weights = weights / norm[:, None]
    lost = np.clip(1.0 - np.abs(t) ** 2, 0.0, None)
    # cumulative propagation phase up to each scattering point
    phase = np.cumsum(chi.real * dz[None, :], axis=1) / params.c
    scatter = (np.sqrt(lost[:, None] * weights) * np.exp(1j * phase)).T
    t_bg = transmission_batch(
        offsets[:1], None, params, density_scale=density_scale
    )[0]
    baseline = min(float(np.abs(t_bg) ** 2), 1.0)
    return PhotonChannel(
        grid=grid, transmit=t, scatter=scatter, baseline_intensity=baseline
    )


def apply_channel(
    state: SpinWaveState, channel: PhotonChannel
) -> Tuple[SpinWaveState, float, float]:
    """State after one source photon, with transmit/scatter probabilities."""
    rho_p, rho_s = channel_branches(state.rho, channel)
    p_t = float(np.trace(rho_p).real)
    p_s = float(np.trace(rho_s).real)
    rho_f = rho_p + rho_s
    rho_f = rho_f / np.trace(rho_f).real
    new = SpinWaveState(
        grid=state.grid, rho=rho_f, intrinsic_lifetime=state.intrinsic_lifetime
    )
    return new, p_t, p_s


def channel_branches(
    rho: np.ndarray, channel: PhotonChannel
) -> Tuple[np.ndarray, np.ndarray]:
    """Unnormalized transmitted and scattered branches of the output state."""
    t = channel.transmit
    rho_p = np.outer(t, t.conj()) * rho
    k = np.einsum("sg,sh->gh", channel.scatter, channel.scatter.conj())
    rho_s = k * rho
    return rho_p, rho_s


def _psd_sqrt(rho: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    if w.min() < -tol * max(1.0, w.max()):
        raise ValueError(f"matrix not positive semidefinite (min eig {w.min():.3g})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(rho_i: np.ndarray, rho_f: np.ndarray) -> float:
    """F = [Tr |sqrt(rho_i) sqrt(rho_f)|]^2; rho_f may be unnormalized."""
    s1 = _psd_sqrt(np.asarray(rho_i, dtype=complex))
    s2 = _psd_sqrt(np.asarray(rho_f, dtype=complex))
    sing = np.linalg.svd(s1 @ s2, compute_uv=False)
    return float(sing.sum() ** 2)


def state_fidelity(
    rho_i: np.ndarray,
    rho_p: np.ndarray,
    rho_s: Optional[np.ndarray] = None,
) -> Tuple[float, float, float]:
    """(F, F_p, F_s) with branch fidelities computed on unnormalized branches.

    With only two arguments the second is the full final state and
    F = F_p, F_s = 0.
    """
    f_p = uhlmann_fidelity(rho_i, rho_p)
    f_s = uhlmann_fidelity(rho_i, rho_s) if rho_s is not None else 0.0
    return f_p + f_s, f_p, f_s


@dataclass(frozen=True)
class RetrievalPoint:
    n_in_mean: float
    n_scattered_mean: float
    efficiency: float
    model_variant: str


def _poisson_weights(mean: float, k_max: int) -> np.ndarray:
    return sps.poisson.pmf(np.arange(k_max + 1), mean)


def retrieval_efficiency_curve(
    state: SpinWaveState,
    channels: Sequence[PhotonChannel],
    source_means: Sequence[float],
    eta0: float,
    storage_time: float = 4.2,
    weights: Optional[np.ndarray] = None,
) -> list:
    """Retrieval efficiency versus mean source photon number.

    The photon number per shot is Poissonian; each photon applies the
    per-photon channel once.  `channels` is a sequence of groups (or bare
    channels), one group per stored-gate transverse offset, averaged with
    `weights`.  Readout projects back on the initial stored mode and the
    intrinsic coherence decay exp(-t_store/tau) factorizes out.
    """
    source_means = np.asarray(source_means, dtype=float)
    groups = [
        list(g) if isinstance(g, (list, tuple)) else [g] for g in channels
    ]
    if weights is None:
        weights = np.full(len(groups), 1.0 / len(groups))
    eta_base = eta0 * math.exp(-storage_time / state.intrinsic_lifetime)
    p_diag = np.real(np.diag(state.rho))
    k_max = int(np.ceil(source_means.max() + 10.0 * math.sqrt(source_means.max() + 1.0)))

    # Each group shares one stored-gate transverse offset; within a group
    # every source photon independently samples its transverse path, so the
    # per-photon channel is the source-averaged mixture.
    overlap = np.empty((len(groups), k_max + 1))
    p_scatter = np.empty(len(groups))
    for ic, group in enumerate(groups):
        d = np.mean([ch.decoherence_matrix for ch in group], axis=0)
        # count only the scattering the gate causes: photons lost to the
        # gate-independent background carry no which-path information
        excess = [
            max(
                1.0
                - float(p_diag @ (np.abs(ch.transmit) ** 2))
                - (1.0 - ch.baseline_intensity),
                0.0,
            )
            for ch in group
        ]
        p_scatter[ic] = float(np.mean(excess))
        dk = np.ones_like(d)
        psi = np.sqrt(p_diag)  # stored mode amplitudes (real by construction)
        for k in range(k_max + 1):
            overlap[ic, k] = float(np.real(psi @ ((dk * state.rho) @ psi)))
            dk = dk * d

    rows = []
    for mean in source_means:
        pk = _poisson_weights(mean, k_max)
        eff = 0.0
        n_scat = 0.0
        for ic in range(len(groups)):
            eff += weights[ic] * float(pk @ overlap[ic])
            n_scat += weights[ic] * mean * p_scatter[ic]
        rows.append(
            RetrievalPoint(
                n_in_mean=float(mean),
                n_scattered_mean=float(n_scat),
                efficiency=float(eta_base * eff),
                model_variant="model",
            )
        )
    return rows


def transverse_channels(
    state: SpinWaveState,
    geometry: ExperimentGeometry,
    params: PropagationParams,
    interaction: InteractionParams,
    field: float,
    n_offsets: int = 12,
    seed: int = 0,
) -> list:
    """Channel groups over a deterministic set of transverse offsets.

    One group per sampled gate offset; within a group, one channel per
    sampled source path (source photons draw their transverse position
    independently, so a group is averaged per photon downstream).
    """
    rng = np.random.default_rng(seed)
    samples = sample_geometry(geometry, n_offsets, rng)
    groups = []
    for i in range(n_offsets):
        group = [
            photon_channel(
                state.grid,
                params,
                interaction,
                field,
                gate_offset=(samples.gates[i, 0], samples.gates[i, 1]),
                source_offset=(samples.offsets[j, 0], samples.offsets[j, 1]),
                density_scale=float(samples.density_scales[j]),
            )
            for j in range(n_offsets)
        ]
        groups.append(group)
    return groups


def limit_curves(
    source_means: Sequence[float],
    p_scatter: float,
    eta_base: float,
    blockade_fraction: float,
) -> list:
    """The three limiting reference curves of the retrieval decay.

    black: coherence survives only shots with zero scattered photons;
    dashed: destroyed by one of the incident photons;
    dotted: destroyed by one of the photons incident on the blockade
    sphere (fraction `blockade_fraction` of the beam).
    """
    rows = []
    for mean in np.asarray(source_means, dtype=float):
        rows.append(
            RetrievalPoint(
                float(mean),
                float(mean * p_scatter),
                float(eta_base * math.exp(-mean * p_scatter)),
                "black",
            )
        )
        rows.append(
            RetrievalPoint(
                float(mean),
                float(mean * p_scatter),
                float(eta_base * math.exp(-mean)),
                "dashed",
            )
        )
        rows.append(
            RetrievalPoint(
                float(mean),
                float(mean * p_scatter),
                float(eta_base * math.exp(-mean * blockade_fraction)),
                "dotted",
            )
        )
    return rows


def blockade_beam_fraction(r_b: float, beam_waist: float) -> float:
    """Beam-intensity fraction inside a disc of radius r_b on axis."""
    return 1.0 - math.exp(-2.0 * r_b**2 / beam_waist**2)
