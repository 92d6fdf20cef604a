"""Collective-spin states of N two-level atoms in the symmetric (Dicke) subspace.

N spin-1/2 atoms coupling identically to the fields live in the J = N/2
multiplet spanned by |J, m>, m = -J..+J.  This module provides the dense
angular-momentum matrices, the uncorrelated Bloch state, the squeezed
family built from the m_x = 0, +-1 eigenstates of Jx, eigenbasis
projections and first/second moments.  Everything downstream (Ramsey
analysis, exact twisting dynamics, Wigner maps) consumes these objects.

All states are pure, normalized and immutable; operations are pure
functions and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

NORM_TOL = 1e-12


def _check_atom_count(n_atoms: int) -> None:
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise ValueError(f"atom count must be a positive integer, got {n_atoms}")


@dataclass(frozen=True)
class SpinOperatorSet:
    """Dense collective spin matrices in the |J, m> basis (m ascending)."""

    J: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.jz.shape[0]

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)


@dataclass(frozen=True)
class DickeState:
    """Pure state in the symmetric subspace: amplitudes over m = -J..+J."""

    J: float
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        dim = int(round(2 * self.J + 1))
        if amps.shape != (dim,):
            raise ValueError(
                f"amplitude vector must have length 2J+1 = {dim}, got {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |psi| = {norm}")

    @property
    def n_atoms(self) -> int:
        return int(round(2 * self.J))

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    def norm_deviation(self) -> float:
        return abs(np.linalg.norm(self.amplitudes) - 1.0)


@dataclass(frozen=True)
class MomentSummary:
    """First and second moments of (Jx, Jy, Jz) for a state.

    Variances follow the (Delta A)^2 = <A^2> - <A>^2 convention; the
    symmetrized covariances are cov(A, B) = <AB + BA>/2 - <A><B>.
    """

    mean_x: float
    mean_y: float
    mean_z: float
    var_x: float
    var_y: float
    var_z: float
    sym_cov_xz: float
    sym_cov_yz: float

    def uncertainty_slack(self) -> float:
        """var_x * var_y - <Jz>^2 / 4; nonnegative up to roundoff."""
        return self.var_x * self.var_y - 0.25 * self.mean_z**2


def build_spin_operators(n_atoms: int) -> SpinOperatorSet:
    """Angular-momentum matrices for J = N/2 in the |J, m> basis.

    Jz is diagonal with entries m; J+ has the standard matrix elements
    sqrt((J-m)(J+m+1)) raising m by one.
    """
    _check_atom_count(n_atoms)
    J = n_atoms / 2
    m = np.arange(-J, J + 1)
    jz = np.diag(m).astype(complex)
    # row m+1, column m
    jplus = np.diag(np.sqrt((J - m[:-1]) * (J + m[:-1] + 1)), -1).astype(complex)
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    return SpinOperatorSet(J=J, jx=jx, jy=jy, jz=jz, jplus=jplus, jminus=jminus)


def bloch_ground_state(n_atoms: int) -> DickeState:
    """All atoms in the lower level: |J, m = -J>."""
    _check_atom_count(n_atoms)
    J = n_atoms / 2
    amps = np.zeros(n_atoms + 1, dtype=complex)
    amps[0] = 1.0
    return DickeState(J=J, amplitudes=amps)


def jx_eigenbasis(n_atoms: int) -> np.ndarray:
    """Columns are |Jx = m>, m ascending, with a fixed phase convention.

    |Jx = m> = exp(-i pi/2 Jy) exp(-i pi/2 Jz) |J, m>.  The extra z-phase
    pins the relative phases between the m_x = +-1 components so that the
    squeezed family below reproduces the closed-form moments
    <Jz> = 2a/(1+a^2) sqrt(J(J+1)/2) with the correct sign.
    """
    ops = build_spin_operators(n_atoms)
    m = ops.m_values
    rot_y = expm(-1j * (np.pi / 2) * ops.jy)
    return rot_y * np.exp(-1j * np.pi * m / 2)[np.newaxis, :]


def psi_a_state(n_atoms: int, a: float) -> DickeState:
    """The squeezed family (i|Jx=0> + a(|Jx=+1> - |Jx=-1>)/sqrt(2)) / sqrt(1+a^2).

    Minimum-uncertainty states interpolating between the maximally
    squeezed |Jx=0> (a = 0) and states with large <Jz>.  Only even atom
    numbers are supported (integer J with m_x = 0 present).
    """
    _check_atom_count(n_atoms)
    if n_atoms % 2 != 0:
        raise ValueError(f"psi_a_state requires even atom count, got {n_atoms}")
    if n_atoms < 2:
        raise ValueError("psi_a_state needs at least 2 atoms")
    basis = jx_eigenbasis(n_atoms)
    J = n_atoms // 2
    v0 = basis[:, J]
    vp = basis[:, J + 1]
    vm = basis[:, J - 1]
    amps = (1j * v0 + a * (vp - vm) / np.sqrt(2)) / np.sqrt(1 + a * a)
    return DickeState(J=n_atoms / 2, amplitudes=amps)


def projections(state: DickeState, axis: str) -> np.ndarray:
    """Probabilities P_i(m) = |<J_i = m|psi>|^2, ordered by m ascending.

    For x and y the eigenbasis comes from an independent dense
    diagonalization; phases drop out of the probabilities.
    """
    if axis == "z":
        probs = np.abs(state.amplitudes) ** 2
    elif axis in ("x", "y"):
        ops = build_spin_operators(state.n_atoms)
        op = ops.jx if axis == "x" else ops.jy
        evals, evecs = np.linalg.eigh(op)
        order = np.argsort(evals)
        probs = np.abs(evecs[:, order].conj().T @ state.amplitudes) ** 2
    else:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    return probs


def expectation(state: DickeState, op: np.ndarray) -> float:
    psi = state.amplitudes
    return float(np.real(np.vdot(psi, op @ psi)))


def moments(state: DickeState, ops: SpinOperatorSet) -> MomentSummary:
    """First and second moments of the collective spin in a pure state."""
    psi = state.amplitudes
    if psi.shape[0] != ops.dim:
        raise ValueError("state and operator dimensions disagree")

    jx_psi = ops.jx @ psi
    jy_psi = ops.jy @ psi
    jz_psi = ops.jz @ psi
    mean_x = float(np.real(np.vdot(psi, jx_psi)))
    mean_y = float(np.real(np.vdot(psi, jy_psi)))
    mean_z = float(np.real(np.vdot(psi, jz_psi)))

    def _var(op_psi, mean):
        v = float(np.real(np.vdot(op_psi, op_psi))) - mean * mean
        if v < -1e-10:
            raise ValueError(f"negative variance {v} beyond roundoff tolerance")
        return max(v, 0.0)

    var_x = _var(jx_psi, mean_x)
    var_y = _var(jy_psi, mean_y)
    var_z = _var(jz_psi, mean_z)
    sym_cov_xz = float(np.real(np.vdot(jx_psi, jz_psi))) - mean_x * mean_z
    sym_cov_yz = float(np.real(np.vdot(jy_psi, jz_psi))) - mean_y * mean_z
    return MomentSummary(
        mean_x=mean_x,
        mean_y=mean_y,
        mean_z=mean_z,
        var_x=var_x,
        var_y=var_y,
        var_z=var_z,
        sym_cov_xz=sym_cov_xz,
        sym_cov_yz=sym_cov_yz,
    )
