"""Second-order moment closure for the lossy counter-twisting dynamics.

The operator-moment hierarchy is truncated at second order by a
Gaussian-like decorrelation of third moments, leaving four coupled ODEs
for (l0, lz, Delta_xx, Delta_yy).  A change of variables to contracted
quantities h0 = l0/N, hz = lz + l0/2, delta_ij = Delta_ij/N, together
with the scaled time tau = N chi t, makes the small parameters explicit:
epsilon = 1/N (finite size) and kappa = Gamma/(N chi) (loss per
twisting cycle).  The two forms are exactly equivalent; both are
provided and tested against each other.

In the bosonic limit epsilon -> 0 with kappa = 0 the equations reduce
to ideal two-mode squeezing: delta_xx = (1/2) exp(-2 tau).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError


@dataclass(frozen=True)
class ClosureConfig:
    """epsilon = 1/N (0 selects the bosonic limit), kappa = Gamma/(N chi)."""

    epsilon: float
    kappa: float

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")


@dataclass(frozen=True)
class ContractedTrajectory:
    """(h0, hz, delta_xx, delta_yy) on a tau grid."""

    taus: np.ndarray
    h0: np.ndarray
    hz: np.ndarray
    dxx: np.ndarray
    dyy: np.ndarray


def derivs_L(state, chi: float, Gamma: float) -> np.ndarray:
    """Raw-variable right-hand sides (symmetric loss).

    d l0 /dt = -2 Gamma l0
    d lz /dt = -2 Gamma lz - chi (Dxx - Dyy)
    d Dxx/dt = -4 Gamma Dxx + Gamma l0 + 4 chi lz Dxx
    d Dyy/dt = -4 Gamma Dyy + Gamma l0 - 4 chi lz Dyy
    """
    l0, lz, dxx, dyy = state
    return np.array([
        -2 * Gamma * l0,
        -2 * Gamma * lz - chi * (dxx - dyy),
        -4 * Gamma * dxx + Gamma * l0 + 4 * chi * lz * dxx,
        -4 * Gamma * dyy + Gamma * l0 - 4 * chi * lz * dyy,
    ])


def derivs_h(state, config: ClosureConfig) -> np.ndarray:
    """Contracted-variable right-hand sides, in scaled time tau = N chi t.

    d h0 /dtau = -2 kappa h0
    d hz /dtau = -2 kappa hz - (dxx - dyy)
    d dxx/dtau = -4 kappa dxx + kappa h0 - 2 h0 dxx + 4 eps hz dxx
    d dyy/dtau = -4 kappa dyy + kappa h0 + 2 h0 dyy - 4 eps hz dyy
    """
    h0, hz, dxx, dyy = state
    k, eps = config.kappa, config.epsilon
    return np.array([
        -2 * k * h0,
        -2 * k * hz - (dxx - dyy),
        -4 * k * dxx + k * h0 - 2 * h0 * dxx + 4 * eps * hz * dxx,
        -4 * k * dyy + k * h0 + 2 * h0 * dyy - 4 * eps * hz * dyy,
    ])


def l_to_h(state_l, n_atoms: int) -> np.ndarray:
    """(l0, lz, Dxx, Dyy) -> (h0, hz, dxx, dyy)."""
    l0, lz, dxx, dyy = state_l
    return np.array([l0 / n_atoms, lz + l0 / 2, dxx / n_atoms, dyy / n_atoms])


def h_to_l(state_h, n_atoms: int) -> np.ndarray:
    h0, hz, dxx, dyy = state_h
    return np.array([n_atoms * h0, hz - n_atoms * h0 / 2,
                     n_atoms * dxx, n_atoms * dyy])


def initial_state_h() -> np.ndarray:
    """Bloch initial conditions: h0 = 1, hz = 0, delta_xx = delta_yy = 1/2."""
    return np.array([1.0, 0.0, 0.5, 0.5])


def integrate_closure(config: ClosureConfig, tau_grid,
                      rtol: float = 1e-10, atol: float = 1e-12) -> ContractedTrajectory:
    """Integrate the contracted equations from the Bloch initial state."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 2 or np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be 1-d, strictly increasing, >= 2 points")

    sol = solve_ivp(lambda _, y: derivs_h(y, config), (tau[0], tau[-1]),
                    initial_state_h(), t_eval=tau, method="RK45",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"closure integration failed: {sol.message}")
    h0, hz, dxx, dyy = sol.y
    if h0.max() > 1 + 1e-9 or dxx.min() < -1e-12 or dyy.min() < -1e-12:
        raise IntegrationError("closure trajectory left the physical region")
    return ContractedTrajectory(taus=tau, h0=h0, hz=hz,
                                dxx=np.maximum(dxx, 0.0), dyy=np.maximum(dyy, 0.0))


def analytic_variance(config: ClosureConfig, tau, include_growth: bool = False):
    """Perturbative squeezed variance delta_xx(tau) ~ (1/2)[e^{-2 tau} + kappa + eps/2].

    Valid for kappa, eps << 1.  With include_growth=True a heuristic
    exponentially growing term max(kappa, eps)^2 e^{2 tau} is added as a
    bracketing bound; its coefficient is not derived, only bounded
    empirically against the integrated equations.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be nonnegative")
    if config.kappa > 0.1 or config.epsilon > 0.1:
        warnings.warn("analytic_variance is perturbative; kappa or epsilon > 0.1",
                      stacklevel=2)
    out = 0.5 * (np.exp(-2 * tau) + config.kappa + config.epsilon / 2)
    if include_growth:
        out = out + 0.5 * max(config.kappa, config.epsilon) ** 2 * np.exp(2 * tau)
    return out if out.ndim else float(out)


def find_min_dxx(traj: ContractedTrajectory):
    """Interior minimum (tau*, delta_xx_min) via golden-section-free quadratic fit."""
    from .errors import NoInteriorMinimumError

    d = traj.dxx
    i = int(np.argmin(d))
    if i == 0 or i == d.size - 1:
        raise NoInteriorMinimumError("delta_xx has no interior minimum on this grid")
    t0, t1, t2 = traj.taus[i - 1: i + 2]
    coeffs = np.polyfit([t0, t1, t2], d[i - 1: i + 2], 2)
    if coeffs[0] <= 0:
        return float(t1), float(d[i])
    tau_star = float(np.clip(-coeffs[1] / (2 * coeffs[0]), t0, t2))
    return tau_star, float(np.polyval(coeffs, tau_star))


def squeezing_scalings(s: float, n_atoms: int, chi: float, Gamma: float):
    """Order-of-magnitude feasibility of reaching squeezing factor s.

    Returns (feasible, time_estimate, atom_loss_estimate).  Feasible
    means N chi > s Gamma.  The estimates are t ~ log(s)/(N chi) and
    Delta N ~ (N/s) log(s); both are order-of-magnitude only.
    """
    if not (1 <= s <= n_atoms):
        raise ValueError(f"target squeezing factor must be in [1, N], got {s}")
    if chi <= 0:
        raise ValueError("chi must be positive")
    feasible = n_atoms * chi > s * Gamma
    logs = np.log(max(s, 1.0 + 1e-15))
    time_estimate = logs / (n_atoms * chi)
    atom_loss_estimate = (n_atoms / s) * logs
    return feasible, float(time_estimate), float(atom_loss_estimate)
