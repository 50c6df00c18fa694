"""Normal modes of the harmonic expansion around a potential minimum.

With all energies expressed as frequencies in GHz, the small-oscillation
problem reads ``H xi = (f^2 / 8) EC^{-1} xi`` where ``H`` is the potential
Hessian at the minimum and ``f`` the ordinary mode frequency in GHz.  The
mode matrix is normalized so that ``Xi^T EC^{-1} Xi = diag(8 / f)`` and
``Xi^T H Xi = diag(f)``, which casts each mode Hamiltonian into the standard
form ``f (a^dag a + 1/2)``.  For a single transmon this reduces to the
familiar harmonic length ``(8 EC / EJ)^{1/4}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import NotPositiveDefinite

__all__ = ["ModeData", "normal_modes", "rescale"]


@dataclass(frozen=True)
class ModeData:
    """Mode frequencies and the normalized mode matrix for one minimum.

    omega holds ordinary frequencies in GHz sorted ascending; the columns of
    xi are the mode vectors (dimensionless); xi_inv_t caches Xi^{-T}.
    """

    omega: np.ndarray
    xi: np.ndarray
    xi_inv_t: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def delta(self) -> np.ndarray:
        """Inverse covariance form Xi^{-T} Xi^{-1} of the ground Gaussian."""
        return self.xi_inv_t @ self.xi_inv_t.T


def _check_spd(mat: np.ndarray, label: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotPositiveDefinite(f"{label} must be a square matrix")
    if np.abs(mat - mat.T).max() > 1e-10 * max(np.abs(mat).max(), 1e-300):
        raise NotPositiveDefinite(f"{label} must be symmetric")
    sym = 0.5 * (mat + mat.T)
    if np.linalg.eigvalsh(sym).min() <= 0:
        raise NotPositiveDefinite(f"{label} must be positive definite")
    return sym


def normal_modes(ec_matrix: np.ndarray, hessian: np.ndarray) -> ModeData:
    """Solve the generalized symmetric-definite mode problem.

    Parameters
    ----------
    ec_matrix:
        Charging-energy matrix in GHz (symmetric positive definite).
    hessian:
        Potential Hessian at the minimum in GHz (symmetric positive definite).

    Returns
    -------
    ModeData
        Frequencies ``sqrt(8 * eig)`` of the whitened Hessian and the mode
        matrix carrying the oscillator lengths, with a deterministic sign
        convention (largest-magnitude component of each column positive).
    """
    ec = _check_spd(ec_matrix, "ec_matrix")
    hess = _check_spd(hessian, "hessian")
    b = np.linalg.inv(ec) / 8.0
    b = 0.5 * (b + b.T)
    # scipy reduces the problem with a Cholesky factor of b; eigenvectors come
    # back b-orthonormal, so columns only need the 1/sqrt(f) length factor.
    freq_sq, vecs = linalg.eigh(hess, b)
    if freq_sq.min() <= 0:
        raise NotPositiveDefinite("mode problem produced a non-positive frequency")
    omega = np.sqrt(freq_sq)
    xi = vecs / np.sqrt(omega)
    for col in range(xi.shape[1]):
        lead = np.argmax(np.abs(xi[:, col]))
        if xi[lead, col] < 0:
            xi[:, col] = -xi[:, col]
    return ModeData(omega=omega, xi=xi, xi_inv_t=np.linalg.inv(xi).T)


def rescale(modes: ModeData, lambdas) -> ModeData:
    """Scale each mode vector by a positive factor, keeping frequencies.

    The factors deform the ansatz wavefunctions (their harmonic lengths), not
    the physical normal-mode frequencies.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (modes.n_modes,):
        raise ValueError("lambdas must have one entry per mode")
    if np.any(lam <= 0):
        raise ValueError("lambdas must be positive")
    xi = modes.xi * lam
    return ModeData(omega=modes.omega.copy(), xi=xi, xi_inv_t=np.linalg.inv(xi).T)
