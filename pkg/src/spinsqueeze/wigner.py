"""SU(2) Wigner-function machinery: 3j symbols, multipole operators, sphere maps.

A spin-J density operator expands over the orthonormal multipole
(irreducible tensor) operators

    T_kq = sum_m (-1)^(J-m) sqrt(2k+1) (J k J; -m q m-q) |J,m><J,m-q|,

k = 0..2J, q = -k..k, with Tr[T_kq T_k'q'^dag] = delta_kk' delta_qq'.
The coefficients are rho_kq = Tr[rho T_kq^dag] (this conjugation makes
W real for Hermitian rho), and the spherical Wigner function is

    W(theta, phi) = sum_kq Y_k^q(theta, phi) rho_kq.

3j symbols are evaluated in exact rational arithmetic (the Racah sum as
a Fraction), with a single square root at the end, so they stay accurate
through the large alternating sums that appear at J ~ tens.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

try:  # scipy >= 1.15
    from scipy.special import sph_harm_y as _sph_harm_y

    def _ykq(k, q, theta, phi):
        return _sph_harm_y(k, q, theta, phi)
except ImportError:  # pragma: no cover
    from scipy.special import sph_harm as _sph_harm

    def _ykq(k, q, theta, phi):
        return _sph_harm(q, k, phi, theta)


def _twice(x, name: str) -> int:
    tx = 2 * x
    if abs(tx - round(tx)) > 1e-9:
        raise ValueError(f"{name} = {x} is not a half-integer")
    return int(round(tx))


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol, exact-rational Racah evaluation.

    Returns 0 for violated selection rules; raises for non-half-integer
    or inconsistent (j, m) inputs.
    """
    tj = [_twice(j, f"j{i+1}") for i, j in enumerate((j1, j2, j3))]
    tm = [_twice(m, f"m{i+1}") for i, m in enumerate((m1, m2, m3))]
    for i in range(3):
        if tj[i] < 0:
            raise ValueError(f"j{i+1} must be nonnegative")
        if abs(tm[i]) > tj[i] or (tj[i] - tm[i]) % 2 != 0:
            raise ValueError(f"m{i+1} = {tm[i]/2} invalid for j{i+1} = {tj[i]/2}")
    if tm[0] + tm[1] + tm[2] != 0:
        return 0.0
    if sum(tj) % 2 != 0:
        return 0.0
    # triangle inequality
    if tj[2] > tj[0] + tj[1] or tj[2] < abs(tj[0] - tj[1]):
        return 0.0

    def f(twice_n: int) -> int:
        if twice_n % 2 != 0 or twice_n < 0:
            raise ValueError("internal: non-integer factorial argument")
        return factorial(twice_n // 2)

    ta, tb, tc = tj
    tal, tbe, tga = tm
    delta = Fraction(
        f(ta + tb - tc) * f(ta - tb + tc) * f(-ta + tb + tc),
        f(ta + tb + tc + 2),
    )
    pi = (
        f(ta + tal) * f(ta - tal) * f(tb + tbe) * f(tb - tbe)
        * f(tc + tga) * f(tc - tga)
    )
    # Racah sum over t; all arguments in twice-integer units
    t_min = max(0, tb - tc - tal, ta - tc + tbe)
    t_max = min(ta + tb - tc, ta - tal, tb + tbe)
    s = Fraction(0)
    for tt in range(t_min, t_max + 2, 2):
        denom = (
            f(tt) * f(tc - tb + tt + tal) * f(tc - ta + tt - tbe)
            * f(ta + tb - tc - tt) * f(ta - tt - tal) * f(tb - tt + tbe)
        )
        s += Fraction((-1) ** (tt // 2), denom)
    if s == 0:
        return 0.0
    square = delta * pi * s * s
    sign = (-1) ** ((ta - tb - tga) // 2) * (1 if s > 0 else -1)
    return float(sign * np.sqrt(float(square)))


def multipole_operator(J: float, k: int, q: int) -> np.ndarray:
    """Dense T_kq in the |J, m> basis (m ascending); cached internally."""
    return _multipole_operator(_twice(J, "J"), k, q).copy()


@lru_cache(maxsize=200_000)
def _multipole_diag(tJ: int, k: int, q: int) -> np.ndarray:
    """The only nonzero diagonal (offset -q) of T_kq, as a 1-d array."""
    dim = tJ + 1
    if not (0 <= k <= tJ) or abs(q) > k:
        raise ValueError(f"need 0 <= k <= 2J and |q| <= k, got k={k}, q={q}")
    diag = np.zeros(dim - abs(q), dtype=float)
    for m in np.arange(-tJ / 2, tJ / 2 + 1):
        mp = m - q  # column index value
        if abs(mp) > tJ / 2:
            continue
        val = (-1) ** round(tJ / 2 - m) * np.sqrt(2 * k + 1) * wigner3j(
            tJ / 2, k, tJ / 2, -m, q, mp
        )
        row = round(m + tJ / 2)
        col = round(mp + tJ / 2)
        diag[col if q >= 0 else row] = val
    return diag


def _multipole_operator(tJ: int, k: int, q: int) -> np.ndarray:
    return np.diag(_multipole_diag(tJ, k, q).astype(complex), -q)


@dataclass(frozen=True)
class MultipoleDecomposition:
    """rho_kq coefficients; coeffs[k, q + 2J] indexes (k, q)."""

    J: float
    coeffs: np.ndarray

    def coeff(self, k: int, q: int) -> complex:
        tJ = _twice(self.J, "J")
        return self.coeffs[k, q + tJ]


def _as_density(state, J: float | None):
    if hasattr(state, "amplitudes"):
        psi = np.asarray(state.amplitudes, dtype=complex)
        return np.outer(psi, psi.conj()), state.J
    rho = np.asarray(state, dtype=complex)
    if rho.ndim == 1:
        return np.outer(rho, rho.conj()), (rho.size - 1) / 2
    if J is None:
        J = (rho.shape[0] - 1) / 2
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise ValueError(f"density matrix must have unit trace, got {np.trace(rho)}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise ValueError("density matrix must be Hermitian")
    return rho, J


def multipole_coeffs(state, J: float | None = None) -> MultipoleDecomposition:
    """rho_kq = Tr[rho T_kq^dag] for a DickeState, amplitude vector or matrix."""
    rho, J = _as_density(state, J)
    tJ = _twice(J, "J")
    coeffs = np.zeros((tJ + 1, 2 * tJ + 1), dtype=complex)
    for k in range(tJ + 1):
        for q in range(-k, k + 1):
            # T_kq is a single shifted diagonal, so the trace collapses
            # to a dot product along the matching diagonal of rho
            tdiag = _multipole_diag(tJ, k, q)
            coeffs[k, q + tJ] = np.diagonal(rho, -q) @ tdiag
    return MultipoleDecomposition(J=J, coeffs=coeffs)


def reconstruct_density(decomp: MultipoleDecomposition) -> np.ndarray:
    """Inverse expansion rho = sum_kq rho_kq T_kq (orthonormal basis)."""
    tJ = _twice(decomp.J, "J")
    rho = np.zeros((tJ + 1, tJ + 1), dtype=complex)
    for k in range(tJ + 1):
        for q in range(-k, k + 1):
            c = decomp.coeffs[k, q + tJ]
            if c != 0:
                rho += c * _multipole_operator(tJ, k, q)
    return rho


def spherical_harmonic(k: int, q: int, theta, phi):
    """Y_k^q(theta, phi), Condon-Shortley phase; theta polar, phi azimuthal."""
    if k < 0 or abs(q) > k:
        raise ValueError(f"need k >= 0 and |q| <= k, got k={k}, q={q}")
    return _ykq(k, q, np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))


@dataclass(frozen=True)
class SphericalGrid:
    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray  # shape (len(thetas), len(phis))


def wigner_map(decomp: MultipoleDecomposition, theta_grid, phi_grid) -> SphericalGrid:
    """W(theta, phi) on the tensor grid; real up to roundoff for Hermitian input."""
    thetas = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    phis = np.atleast_1d(np.asarray(phi_grid, dtype=float))
    if thetas.size == 0 or phis.size == 0:
        raise ValueError("grids must be nonempty")
    tJ = _twice(decomp.J, "J")
    # separable evaluation: Y_kq(theta, phi) = Y_kq(theta, 0) e^{i q phi},
    # so accumulate f_q(theta) = sum_k c_kq Y_kq(theta, 0) first and apply
    # the azimuthal phases in one outer product per q
    lam = _lambda_table(tJ, tuple(thetas.tolist()))
    f_q = np.einsum("kq,kqt->qt", decomp.coeffs, lam)
    phase = np.exp(1j * np.outer(np.arange(-tJ, tJ + 1), phis))
    w = f_q.T @ phase
    resid = np.max(np.abs(w.imag))
    if resid > 1e-9:
        raise ValueError(f"Wigner map has imaginary residue {resid:.3e}; "
                         "input not Hermitian?")
    return SphericalGrid(thetas=thetas, phis=phis, values=w.real)


@lru_cache(maxsize=64)
def _lambda_table(tJ: int, thetas: tuple) -> np.ndarray:
    """Y_kq(theta, 0) for k = 0..2J, q = -2J..2J on a fixed theta grid."""
    th = np.asarray(thetas, dtype=float)
    out = np.zeros((tJ + 1, 2 * tJ + 1, th.size), dtype=complex)
    zero = np.zeros_like(th)
    for k in range(tJ + 1):
        for q in range(-k, k + 1):
            out[k, q + tJ] = _ykq(k, q, th, zero)
    return out


def quadrature_grid(n_theta: int = 64, n_phi: int = 128):
    """Gauss-Legendre nodes in cos(theta) and a uniform phi grid with weights."""
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(x[::-1])
    w_theta = wx[::-1]
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    w_phi = np.full(n_phi, 2 * np.pi / n_phi)
    return thetas, w_theta, phis, w_phi


def sphere_integral(decomp: MultipoleDecomposition,
                    n_theta: int = 64, n_phi: int = 128) -> float:
    """Integral of W over the sphere; equals sqrt(4 pi / (2J+1)) for trace one.

    Exact for the bandlimited integrand when n_theta >= 2J+1 and
    n_phi >= 4J+1.
    """
    thetas, w_theta, phis, w_phi = quadrature_grid(n_theta, n_phi)
    grid = wigner_map(decomp, thetas, phis)
    return float(w_theta @ grid.values @ w_phi)
