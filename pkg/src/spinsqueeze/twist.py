"""Exact dynamics under the two-axis counter-twisting Hamiltonian.

H = -i hbar chi/2 (L+^2 - L-^2) = hbar chi (Lx Ly + Ly Lx), creating and
destroying collective excitations in pairs.  Two exact routes:

* unitary evolution in the (2J+1)-dimensional symmetric subspace (no
  loss), via eigendecomposition of H;
* a two-mode Fock-basis Lindblad master equation with amplitude loss on
  both modes, the brute-force oracle for the moment-closure equations.

Mode convention (Schwinger): L+ = a2^dag a1, Lz = (n2 - n1)/2, so the
all-atoms-in-mode-1 initial state |n1=N, n2=0> has l_z = -N/2 and maps
onto the Bloch ground state of the symmetric subspace.  A Langevin drift
a_dot = -gamma a corresponds to the jump operator sqrt(2 gamma) a
(dissipator rate 2 gamma), so occupations decay as exp(-2 gamma t).

Second moments use the symmetrized double-covariance convention
Delta_ij = <Li Lj + Lj Li> - 2<Li><Lj>, giving Delta_xx(0) = N/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .dicke import build_spin_operators
from .errors import BasisSizeError, IntegrationError, NoInteriorMinimumError

MASTER_N_MAX = 30
TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POPULATION_TOL = 1e-9


@dataclass(frozen=True)
class TwistParams:
    """Counter-twisting rate and per-mode amplitude loss rates."""

    N: int
    chi: float
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"atom count must be a positive integer, got {self.N}")
        if self.chi < 0 or self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("rates chi, gamma1, gamma2 must be nonnegative")

    @property
    def Gamma(self) -> float:
        """Mean loss rate (gamma1 + gamma2)/2."""
        return 0.5 * (self.gamma1 + self.gamma2)


@dataclass(frozen=True)
class MomentTrajectory:
    """(l0, lz, Delta_xx, Delta_yy) sampled on a time grid."""

    n_atoms: int
    times: np.ndarray
    l0: np.ndarray
    lz: np.ndarray
    dxx: np.ndarray
    dyy: np.ndarray


def _check_grid(t_grid: np.ndarray) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid must be a 1-d array with at least two points")
    if abs(t[0]) > 1e-15:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def evolve_unitary(n_atoms: int, chi: float, t_grid) -> MomentTrajectory:
    """Loss-free evolution from the Bloch ground state, exact to roundoff.

    H is diagonalized once; each output time is a single matrix-vector
    product, so late times cost the same as early ones.
    """
    if n_atoms < 2 or n_atoms % 2 != 0:
        raise ValueError(f"atom count must be even and >= 2, got {n_atoms}")
    t = _check_grid(t_grid)
    ops = build_spin_operators(n_atoms)
    h = chi * (ops.jx @ ops.jy + ops.jy @ ops.jx)
    evals, evecs = np.linalg.eigh(h)
    psi0 = np.zeros(ops.dim, dtype=complex)
    psi0[0] = 1.0
    coeffs = evecs.conj().T @ psi0

    lz_m = ops.m_values
    jx2 = ops.jx @ ops.jx
    jy2 = ops.jy @ ops.jy
    l0 = np.full(t.shape, float(n_atoms))
    lz = np.empty_like(t)
    dxx = np.empty_like(t)
    dyy = np.empty_like(t)
    for i, ti in enumerate(t):
        psi = evecs @ (np.exp(-1j * evals * ti) * coeffs)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-9:
            raise IntegrationError(f"norm drift {abs(norm - 1.0):.3e} at t={ti}")
        mx = np.real(np.vdot(psi, ops.jx @ psi))
        my = np.real(np.vdot(psi, ops.jy @ psi))
        lz[i] = np.real(np.vdot(psi, lz_m * psi))
        dxx[i] = 2 * (np.real(np.vdot(psi, jx2 @ psi)) - mx * mx)
        dyy[i] = 2 * (np.real(np.vdot(psi, jy2 @ psi)) - my * my)
    return MomentTrajectory(n_atoms=n_atoms, times=t, l0=l0, lz=lz, dxx=dxx, dyy=dyy)


def _fock_basis(n_max: int):
    """Ordered basis {(n1, n2): n1+n2 <= n_max}, lexicographic by (total, n1)."""
    states = [
        (n1, total - n1) for total in range(n_max + 1) for n1 in range(total + 1)
    ]
    index = {s: i for i, s in enumerate(states)}
    return states, index


def _mode_operators(n_max: int):
    """Sparse annihilation operators a1, a2 on the truncated two-mode basis."""
    states, index = _fock_basis(n_max)
    dim = len(states)
    a1 = sp.lil_matrix((dim, dim))
    a2 = sp.lil_matrix((dim, dim))
    for i, (n1, n2) in enumerate(states):
        if n1 > 0:
            a1[index[(n1 - 1, n2)], i] = np.sqrt(n1)
        if n2 > 0:
            a2[index[(n1, n2 - 1)], i] = np.sqrt(n2)
    return a1.tocsr(), a2.tocsr(), states, index


def _liouvillian(params: TwistParams):
    """Sparse superoperator on column-stacked rho."""
    n = params.N
    a1, a2, states, index = _mode_operators(n)
    dim = len(states)
    lp = (a2.conj().T @ a1).tocsr()  # L+
    lm = lp.conj().T
    h = (-0.5j * params.chi) * (lp @ lp - lm @ lm)
    ident = sp.identity(dim, format="csr")
    # vec(A rho B) = (B^T kron A) vec(rho)
    liouv = -1j * (sp.kron(ident, h) - sp.kron(h.T, ident))
    for rate, a in ((params.gamma1, a1), (params.gamma2, a2)):
        if rate == 0.0:
            continue
        ada = (a.conj().T @ a).tocsr()
        liouv = liouv + 2 * rate * (
            sp.kron(a.conj(), a)
            - 0.5 * sp.kron(ident, ada)
            - 0.5 * sp.kron(ada.T, ident)
        )
    return liouv.tocsr(), lp, lm, a1, a2, states, index


def evolve_master(params: TwistParams, t_grid,
                  rtol: float = 1e-8, atol: float = 1e-10) -> MomentTrajectory:
    """Lindblad evolution from |n1=N, n2=0> with per-output physicality checks."""
    if params.N > MASTER_N_MAX:
        raise BasisSizeError(
            f"master equation limited to N <= {MASTER_N_MAX}, got {params.N}"
        )
    t = _check_grid(t_grid)
    liouv, lp, lm, a1, a2, states, index = _liouvillian(params)
    dim = len(states)
    rho0 = np.zeros((dim, dim), dtype=complex)
    i0 = index[(params.N, 0)]
    rho0[i0, i0] = 1.0

    lx = 0.5 * (lp + lm)
    ly = (lp - lm) / 2j
    n1op = (a1.conj().T @ a1).tocsr()
    n2op = (a2.conj().T @ a2).tocsr()
    lz_op = 0.5 * (n2op - n1op)
    num_op = n1op + n2op
    lx2 = (lx @ lx).tocsr()
    ly2 = (ly @ ly).tocsr()

    def rhs(_, y):
        return liouv @ y

    sol = solve_ivp(rhs, (t[0], t[-1]), rho0.reshape(-1, order="F"),
                    t_eval=t, method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")

    l0 = np.empty_like(t)
    lz = np.empty_like(t)
    dxx = np.empty_like(t)
    dyy = np.empty_like(t)
    for i in range(t.size):
        rho = sol.y[:, i].reshape((dim, dim), order="F")
        _check_density(rho)
        l0[i] = _tr(num_op, rho)
        lz[i] = _tr(lz_op, rho)
        mx = _tr(lx, rho)
        my = _tr(ly, rho)
        dxx[i] = 2 * (_tr(lx2, rho) - mx * mx)
        dyy[i] = 2 * (_tr(ly2, rho) - my * my)
    return MomentTrajectory(n_atoms=params.N, times=t, l0=l0, lz=lz, dxx=dxx, dyy=dyy)


def _tr(op, rho) -> float:
    return float(np.real((op @ rho).diagonal().sum()))


def _check_density(rho: np.ndarray) -> None:
    trace_dev = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_dev > TRACE_TOL:
        raise IntegrationError(f"trace drift {trace_dev:.3e} exceeds {TRACE_TOL}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise IntegrationError(f"hermiticity drift {herm:.3e}")
    pops = np.diag(rho).real
    if pops.min() < -POPULATION_TOL:
        raise IntegrationError(f"negative population {pops.min():.3e}")


def find_min_variance(traj: MomentTrajectory):
    """Interior minimum of Delta_xx, refined by a local quadratic fit.

    Returns (t_star, delta_xx_min) with delta_xx_min = Delta_xx(t*)/N.
    """
    d = traj.dxx
    i = int(np.argmin(d))
    if i == 0 or i == d.size - 1:
        raise NoInteriorMinimumError(
            "Delta_xx has no interior minimum on this grid; extend the time grid"
        )
    # quadratic through the bracketing triple
    t0, t1, t2 = traj.times[i - 1: i + 2]
    y0, y1, y2 = d[i - 1: i + 2]
    coeffs = np.polyfit([t0, t1, t2], [y0, y1, y2], 2)
    if coeffs[0] <= 0:
        t_star, y_star = t1, y1
    else:
        t_star = -coeffs[1] / (2 * coeffs[0])
        t_star = min(max(t_star, t0), t2)
        y_star = np.polyval(coeffs, t_star)
    return float(t_star), float(y_star / traj.n_atoms)
