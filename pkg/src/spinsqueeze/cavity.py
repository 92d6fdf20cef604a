"""Linearized cavity-EIT squeezing model: two coupled bosonic modes.

A Raman-driven ensemble in a cavity maps, after adiabatic elimination of
the excited states and the bright polariton, onto two effective modes: a
collective spin-wave mode (quadratures X1, Y1) and the dark-state
polariton (XD, YD).  The pair-generation rate xi couples them as a
non-degenerate parametric amplifier; losses are the optical-pumping rate
gamma_L on the spin wave (with a gain contribution (g1/g2)^2 gamma_L
from re-pumping) and the slow-light-suppressed cavity rate kappa/eta on
the polariton.  Everything is Gaussian, so dynamics close on the 4x4
symmetric-ordered quadrature covariance matrix:

    dC/dt = A C + C A^T + D,  C(0) = I/2 (vacuum).

Conventions: xi real positive; the quadrature basis is fixed so that
Y+ = (Y1 + YD)/sqrt(2) and X- = (X1 - XD)/sqrt(2) are the squeezed
combinations.  The diffusion matrix uses symmetric ordering and is
calibrated so that pure cavity loss preserves the vacuum C = I/2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError

SYMPLECTIC_TOL = 1e-8
# standard symplectic form on (X1, Y1, XD, YD)
OMEGA = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


@dataclass(frozen=True)
class CavityParams:
    """Physical inputs; all rates in the same (arbitrary) frequency unit."""

    g1: float
    g2: float
    Omega1: float
    Omega2: float
    Delta: float
    gamma: float
    kappa_cav: float
    N: int
    delta1: float = 0.0
    delta2: float = 0.0
    gamma_br1: float = None
    gamma_br2: float = None
    gamma0: float = 0.0

    def __post_init__(self):
        if self.gamma_br1 is None:
            object.__setattr__(self, "gamma_br1", self.gamma)
        if self.gamma_br2 is None:
            object.__setattr__(self, "gamma_br2", self.gamma)
        for name in ("g1", "g2", "Omega1", "Omega2", "gamma", "kappa_cav",
                     "gamma_br1", "gamma_br2", "gamma0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if abs(self.gamma_br1 + self.gamma_br2 - 2 * self.gamma) > 1e-9 * max(self.gamma, 1.0):
            raise ValueError("branching rates must satisfy gamma_br1 + gamma_br2 = 2 gamma")
        if self.Delta < 10 * self.gamma:
            raise ValueError("single-photon detuning must satisfy Delta >= 10 gamma")
        if self.Delta < 30 * self.gamma:
            warnings.warn("Delta < 30 gamma: adiabatic elimination is marginal",
                          stacklevel=2)
        if self.Omega2 == 0:
            raise ValueError("Omega2 must be nonzero")


@dataclass(frozen=True)
class DerivedRates:
    xi: float
    eta: float
    gamma_L: float
    delta_L: float
    chi_raman: float


def derive_rates(params: CavityParams) -> DerivedRates:
    """Pair-generation rate, slow-light factor, pumping rate, light shift."""
    p = params
    eta = p.g2**2 * p.N / p.Omega2**2
    xi = (p.Omega1 * p.Omega2 / p.Delta) * p.g1 * np.sqrt(p.N) / np.sqrt(
        p.g2**2 * p.N + p.Omega2**2
    )
    gamma_L = p.gamma * p.Omega1**2 / p.Delta**2
    delta_L = p.Omega1**2 / p.Delta
    chi_raman = p.g1 * np.sqrt(p.N) * p.Omega1 / p.Delta
    return DerivedRates(xi=float(xi), eta=float(eta), gamma_L=float(gamma_L),
                        delta_L=float(delta_L), chi_raman=float(chi_raman))


def drift_diffusion(params: CavityParams, rates: DerivedRates | None = None):
    """Quadrature drift A and symmetric-ordered diffusion D on (X1, Y1, XD, YD).

    The spin-wave mode sees net gain/loss G = (g1/g2)^2 gamma_L - gamma_L
    - gamma0 (zero for g1 = g2, gamma0 = 0); the polariton decays at
    Gamma_D = kappa/eta + gamma_L.  The parametric coupling enters the X
    block with +xi and the Y block with -xi, which makes Y+ and X- the
    squeezed pair.
    """
    p = params
    r = rates if rates is not None else derive_rates(p)
    g_ratio2 = (p.g1 / p.g2) ** 2 if p.g2 > 0 else 0.0
    gain = g_ratio2 * r.gamma_L - r.gamma_L - p.gamma0
    gamma_d = p.kappa_cav / r.eta + r.gamma_L
    xi = r.xi
    a = np.array([
        [gain, p.delta1, xi, 0.0],
        [-p.delta1, gain, 0.0, -xi],
        [xi, 0.0, -gamma_d, -p.delta2],
        [0.0, -xi, p.delta2, -gamma_d],
    ])
    # spin-wave noise: optical pumping in and out, branching-summed to 2 gamma_L;
    # polariton noise: cavity vacuum at rate kappa/eta plus the same pumping.
    pump = 2 * r.gamma_L * (p.gamma_br1 + p.gamma_br2) / (2 * p.gamma) + 2 * p.gamma0
    cav = p.kappa_cav / r.eta
    d = np.diag([pump, pump, cav + pump, cav + pump])
    return a, d


def evolve_covariance(a: np.ndarray, d: np.ndarray, c0: np.ndarray, t_grid,
                      rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Integrate dC/dt = A C + C A^T + D; returns array of shape (len(t), 4, 4)."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("time grid must be a nonempty 1-d array")
    n = c0.shape[0]
    check_physical(c0)

    def rhs(_, y):
        c = y.reshape((n, n))
        return (a @ c + c @ a.T + d).reshape(-1)

    sol = solve_ivp(rhs, (0.0, t[-1]), np.asarray(c0, dtype=float).reshape(-1),
                    t_eval=t, method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"covariance integration failed: {sol.message}")
    out = sol.y.T.reshape((t.size, n, n))
    for c in out:
        check_physical(c)
    return out


def check_physical(c: np.ndarray) -> None:
    """Symmetry and symplectic positivity C + (i/2) Omega >= 0."""
    if np.max(np.abs(c - c.T)) > 1e-10:
        raise IntegrationError("covariance matrix lost symmetry")
    if c.shape[0] == 4:
        omega = OMEGA
    else:
        omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
    evals = np.linalg.eigvalsh(c + 0.5j * omega)
    if evals.min() < -SYMPLECTIC_TOL:
        raise IntegrationError(
            f"covariance violates symplectic positivity: min eig {evals.min():.3e}"
        )


def quadrature_stats(c: np.ndarray):
    """Variances of the sum/difference quadratures and total excitation proxy.

    Returns (varYplus, varXminus, varYminus, varXplus, total), with
    total = tr(C) - 2 = <X+^2 + Y+^2 + X-^2 + Y-^2> - 2 x vacuum.
    """
    var_yp = 0.5 * (c[1, 1] + c[3, 3] + 2 * c[1, 3])
    var_ym = 0.5 * (c[1, 1] + c[3, 3] - 2 * c[1, 3])
    var_xp = 0.5 * (c[0, 0] + c[2, 2] + 2 * c[0, 2])
    var_xm = 0.5 * (c[0, 0] + c[2, 2] - 2 * c[0, 2])
    total = float(np.trace(c)) - 2.0
    return float(var_yp), float(var_xm), float(var_ym), float(var_xp), total


def analytic_quadrature(rates: DerivedRates, params: CavityParams, t):
    """Perturbative squeezed variance of Y+ for g1 = g2, zero detunings.

    (Delta Y+)^2(t) = 1/2 { e^{-2 xi t} + (3 gamma_L + kappa/eta)/(2 xi)
                            + [(gamma_L + kappa/eta)/(2 xi)]^2 e^{2 xi t} },
    valid for xi t > 1.
    """
    if rates.xi <= 0:
        raise ValueError("xi must be positive")
    if params.g1 != params.g2:
        warnings.warn("analytic_quadrature assumes g1 = g2", stacklevel=2)
    t = np.asarray(t, dtype=float)
    if np.any(rates.xi * t <= 1.0):
        warnings.warn("analytic_quadrature is valid for xi t > 1", stacklevel=2)
    loss = rates.gamma_L + params.kappa_cav / rates.eta
    out = 0.5 * (
        np.exp(-2 * rates.xi * t)
        + (3 * rates.gamma_L + params.kappa_cav / rates.eta) / (2 * rates.xi)
        + (loss / (2 * rates.xi)) ** 2 * np.exp(2 * rates.xi * t)
    )
    return out if out.ndim else float(out)


def optimal_time(rates: DerivedRates, params: CavityParams) -> float:
    """t* solving e^{-2 xi t*} = (gamma_L + kappa/eta)/(2 xi)."""
    loss = rates.gamma_L + params.kappa_cav / rates.eta
    if loss <= 0 or loss >= 2 * rates.xi:
        raise ValueError("no perturbative optimum: need 0 < gamma_L + kappa/eta < 2 xi")
    return float(np.log(2 * rates.xi / loss) / (2 * rates.xi))


def optimal_detuning(params: CavityParams) -> float:
    """Delta_opt = gamma sqrt( (5 Omega1^2 / 3 Omega2^2) (g^2 N / gamma kappa) )."""
    p = params
    return float(p.gamma * np.sqrt(
        (5 * p.Omega1**2 / (3 * p.Omega2**2)) * (p.g1**2 * p.N / (p.gamma * p.kappa_cav))
    ))


@dataclass(frozen=True)
class OperatingPoint:
    delta_opt: float
    var_yplus_closed_form: float
    t_star_closed_form: float
    var_yplus_numeric: float
    t_star_numeric: float


def optimal_operating_point(params: CavityParams, n_times: int = 2000) -> OperatingPoint:
    """Closed-form optimum at Delta_opt plus a numerical cross-check.

    The closed form is (Delta Y+)^2_min = sqrt(15)/2 / sqrt(g^2 N / gamma kappa);
    the numeric value minimizes the integrated covariance trajectory over t.
    """
    if params.g1 != params.g2:
        raise ValueError("closed-form optimum requires g1 = g2")
    p_opt = replace_delta(params, optimal_detuning(params))
    rates = derive_rates(p_opt)
    cooperativity = p_opt.g1**2 * p_opt.N / (p_opt.gamma * p_opt.kappa_cav)
    var_cf = float(np.sqrt(15.0) / 2.0 / np.sqrt(cooperativity))
    t_star = optimal_time(rates, p_opt)
    a, d = drift_diffusion(p_opt, rates)
    t_grid = np.linspace(0.0, 2.0 * t_star, n_times)
    cs = evolve_covariance(a, d, 0.5 * np.eye(4), t_grid)
    var_yp = np.array([quadrature_stats(c)[0] for c in cs])
    i = int(np.argmin(var_yp))
    return OperatingPoint(
        delta_opt=p_opt.Delta,
        var_yplus_closed_form=var_cf,
        t_star_closed_form=t_star,
        var_yplus_numeric=float(var_yp[i]),
        t_star_numeric=float(t_grid[i]),
    )


def replace_delta(params: CavityParams, delta: float) -> CavityParams:
    import dataclasses
    return dataclasses.replace(params, Delta=delta)


def regime_classifier(params: CavityParams) -> dict:
    """Squeezing regime from the single-atom cooperativity r = g^2 / (kappa gamma)."""
    p = params
    r = p.g1**2 / (p.kappa_cav * p.gamma)
    if r * p.N <= 1:
        regime = "none"
        prediction = None
    elif r >= p.N:
        regime = "heisenberg"
        prediction = 1.0 / p.N
    elif r >= 1:
        regime = "strong"
        prediction = 1.0 / np.sqrt(p.N)
    else:
        regime = "squeezed"
        prediction = float(np.sqrt(15.0) / 2.0 / np.sqrt(r * p.N))
    return {
        "regime": regime,
        "cooperativity": float(r),
        "collective_cooperativity": float(r * p.N),
        "predicted_var_yplus": prediction,
    }


def degenerate_variance(params: CavityParams, t_grid) -> np.ndarray:
    """Single-mode (degenerate) scheme: rows of (t, varX, varY).

    When the two spin flips end in the same final state the interaction
    becomes a degenerate parametric amplifier on one effective mode:
    X decays at 2 xi + Gamma_d, Y grows at 2 xi - Gamma_d, with both
    loss channels (pumping and cavity) acting on the single mode.
    """
    rates = derive_rates(params)
    if rates.eta < 10:
        warnings.warn("degenerate scheme assumes eta >> 1", stacklevel=2)
    gamma_d = rates.gamma_L + params.kappa_cav / rates.eta
    diff = 4 * rates.gamma_L + params.kappa_cav / rates.eta
    a = np.array([[-(2 * rates.xi + gamma_d), 0.0], [0.0, 2 * rates.xi - gamma_d]])
    d = np.diag([diff, diff])
    t = np.asarray(t_grid, dtype=float)
    cs = evolve_covariance(a, d, 0.5 * np.eye(2), t)
    out = np.column_stack([t, cs[:, 0, 0], cs[:, 1, 1]])
    return out
