"""Ramsey interferometry with collective-spin input states.

The pulse sequence is fixed: pi/2 about x, free phase accumulation phi
about z, -pi/2 about x.  The detected observable is Jz after the
sequence, whose mean and variance follow in closed form from the input
state's moments; the phase accuracy is the noise divided by the signal
slope.  Sensitivity zeros (signal extrema) are reported explicitly, not
silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dicke import DickeState, MomentSummary, build_spin_operators, moments
from .errors import ZeroSensitivityError

SENSITIVITY_TOL = 1e-12


def ramsey_unitary(n_atoms: int, phi: float) -> np.ndarray:
    """U(phi) = exp(i pi/2 Jx) exp(-i phi Jz) exp(-i pi/2 Jx)."""
    if not np.isfinite(phi):
        raise ValueError(f"phi must be finite, got {phi}")
    ops = build_spin_operators(n_atoms)
    half = expm(-1j * (np.pi / 2) * ops.jx)
    phase = np.diag(np.exp(-1j * phi * ops.m_values))
    return half.conj().T @ phase @ half


def _summary(state: DickeState) -> MomentSummary:
    return moments(state, build_spin_operators(state.n_atoms))


def ramsey_signal(state: DickeState, phi: float, summary: MomentSummary | None = None) -> float:
    """<Jz(phi)> = <Jz> cos(phi) - <Jx> sin(phi)."""
    s = summary if summary is not None else _summary(state)
    return s.mean_z * np.cos(phi) - s.mean_x * np.sin(phi)


def ramsey_variance(state: DickeState, phi: float, summary: MomentSummary | None = None) -> float:
    """Standard deviation of Jz after the sequence, from input-state moments."""
    s = summary if summary is not None else _summary(state)
    c, sn = np.cos(phi), np.sin(phi)
    var = s.var_z * c * c + s.var_x * sn * sn - 2 * c * sn * s.sym_cov_xz
    return float(np.sqrt(max(var, 0.0)))


def ramsey_sensitivity(state: DickeState, phi: float, summary: MomentSummary | None = None) -> float:
    """Analytic signal slope d<Jz(phi)>/dphi (no finite differences)."""
    s = summary if summary is not None else _summary(state)
    return -s.mean_z * np.sin(phi) - s.mean_x * np.cos(phi)


def phase_accuracy(state: DickeState, phi: float, summary: MomentSummary | None = None) -> float:
    """delta_phi = Delta Jz(phi) / |d<Jz(phi)>/dphi|.

    Raises ZeroSensitivityError at signal extrema, where the estimator
    carries no phase information.
    """
    s = summary if summary is not None else _summary(state)
    slope = ramsey_sensitivity(state, phi, s)
    scale = abs(s.mean_z) + abs(s.mean_x) + 1.0
    if abs(slope) <= SENSITIVITY_TOL * scale:
        raise ZeroSensitivityError(
            f"signal slope {slope:.3e} vanishes at phi={phi}; "
            "phase accuracy undefined at signal extrema"
        )
    return ramsey_variance(state, phi, s) / abs(slope)


@dataclass(frozen=True)
class RamseySweep:
    """Per-phase Ramsey observables; rows with zero sensitivity are flagged."""

    phi: np.ndarray
    excited_fraction: np.ndarray
    signal: np.ndarray
    noise: np.ndarray
    delta_phi: np.ndarray          # NaN where flagged
    sensitivity_zero: np.ndarray   # bool


def ramsey_sweep(state: DickeState, phi_grid) -> RamseySweep:
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.size == 0:
        raise ValueError("phase grid must be nonempty")
    s = _summary(state)
    n = state.n_atoms
    signal = np.empty_like(phi_grid)
    noise = np.empty_like(phi_grid)
    dphi = np.full_like(phi_grid, np.nan)
    flag = np.zeros(phi_grid.shape, dtype=bool)
    for i, phi in enumerate(phi_grid):
        signal[i] = ramsey_signal(state, phi, s)
        noise[i] = ramsey_variance(state, phi, s)
        try:
            dphi[i] = phase_accuracy(state, phi, s)
        except ZeroSensitivityError:
            flag[i] = True
    fraction = (n / 2 + signal) / n
    return RamseySweep(
        phi=phi_grid,
        excited_fraction=fraction,
        signal=signal,
        noise=noise,
        delta_phi=dphi,
        sensitivity_zero=flag,
    )
