"""Exact normal-ordering algebra for products of Gaussian ladder operators.

An operator product built from pure-raising exponentials ``exp(a^dag . X .
a^dag)``, excitation-preserving factors ``exp(a^dag . ln(E) . a)`` (stored by
their linear map ``E``, never through a logarithm), pure-lowering exponentials
``exp(a . Z . a)``, linear displacements ``exp(rho . a^dag)`` / ``exp(sigma .
a)`` and scalars is reduced to the canonical normal-ordered form

    c * exp(a^dag X a^dag) * exp(rho a^dag) * :exp(a^dag (E-1) a): *
    exp(sigma a) * exp(a Z a)

by folding factors in from the right with the standard reordering identities
(lowering past raising produces the determinant/Gaussian factors; the
preserving factor acts on raising content by its linear map).  Because the
canonical form keeps all raising to the left of all lowering, its truncated
matrix elements are exact under a global excitation cutoff.

Scalars and displacement vectors carry first-order jets in an auxiliary
parameter ``s`` (scalars to second order): displacement arguments are affine
in ``s`` and every scalar exponent is at most quadratic, so the jets are
exact and yield exact first and second derivatives of matrix elements with
respect to ``s``.  Charge-operator (kinetic) matrix elements are evaluated as
second derivatives of displaced overlaps along a translation direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NearSingularP

_COND_LIMIT = 1e12


def jet_scalar(value=0.0, d1=0.0, d2=0.0) -> np.ndarray:
    return np.array([value, d1, d2], dtype=np.complex128)


def jet_vector(value, d1=None) -> np.ndarray:
    value = np.asarray(value, dtype=np.complex128)
    out = np.zeros((2, value.size), dtype=np.complex128)
    out[0] = value
    if d1 is not None:
        out[1] = np.asarray(d1, dtype=np.complex128)
    return out


def _dot_jet(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Jet of u(s) . v(s) for affine vector jets."""
    return jet_scalar(
        u[0] @ v[0],
        u[0] @ v[1] + u[1] @ v[0],
        u[1] @ v[1],
    )


def _quad_form_jet(u: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Jet of u(s) . mat . u(s) for a symmetric matrix."""
    return jet_scalar(
        u[0] @ mat @ u[0],
        2.0 * (u[0] @ mat @ u[1]),
        u[1] @ mat @ u[1],
    )


def _solve_checked(mat: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    if np.linalg.cond(mat) > _COND_LIMIT:
        raise NearSingularP(f"{context}: condition number exceeds {_COND_LIMIT:g}")
    return np.linalg.solve(mat, rhs)


@dataclass
class CanonicalGaussian:
    """Canonical normal-ordered Gaussian form with s-jets on the scalars and
    displacement vectors."""

    log_c: np.ndarray
    quad_raise: np.ndarray
    lin_raise: np.ndarray
    preserve: np.ndarray
    lin_lower: np.ndarray
    quad_lower: np.ndarray

    @classmethod
    def identity(cls, n_modes: int) -> "CanonicalGaussian":
        return cls(
            log_c=jet_scalar(),
            quad_raise=np.zeros((n_modes, n_modes)),
            lin_raise=jet_vector(np.zeros(n_modes)),
            preserve=np.eye(n_modes),
            lin_lower=jet_vector(np.zeros(n_modes)),
            quad_lower=np.zeros((n_modes, n_modes)),
        )

    # All mul_* methods multiply a primitive factor onto the RIGHT of the
    # operator currently held in canonical form.

    def mul_scalar(self, log_jet: np.ndarray) -> None:
        self.log_c = self.log_c + np.asarray(log_jet, dtype=np.complex128)

    def mul_quad_lower(self, w: np.ndarray) -> None:
        self.quad_lower = self.quad_lower + w

    def mul_lin_lower(self, v: np.ndarray) -> None:
        self.lin_lower = self.lin_lower + v

    def mul_preserve(self, f: np.ndarray) -> None:
        self.preserve = self.preserve @ f
        self.lin_lower = self.lin_lower @ f  # row-jets times f == f^T acting on vectors
        self.quad_lower = f.T @ self.quad_lower @ f

    def mul_lin_raise(self, mu: np.ndarray) -> None:
        # Commute exp(mu . a^dag) leftward past the lowering content; the
        # crossing produces Gaussian scalars and a shifted lowering vector.
        self.mul_scalar(_quad_form_jet(mu, self.quad_lower) + _dot_jet(self.lin_lower, mu))
        self.lin_raise = self.lin_raise + mu @ self.preserve.T
        self.lin_lower = self.lin_lower + 2.0 * (mu @ self.quad_lower)

    def mul_quad_raise(self, w: np.ndarray) -> None:
        # Crossing the lowering quadratic: the two-Gaussian contraction with
        # kernel inverses of (1 - 4 W Z).
        z = self.quad_lower
        n = z.shape[0]
        m_wz = np.eye(n) - 4.0 * w @ z
        m_zw = np.eye(n) - 4.0 * z @ w
        sign, logdet = np.linalg.slogdet(m_wz)
        if sign <= 0:
            raise NearSingularP("quadratic contraction crossed a singular kernel")
        w1 = _solve_checked(m_wz, w, "quadratic contraction")
        w1 = 0.5 * (w1 + w1.T)
        p1 = _solve_checked(m_wz, np.eye(n), "quadratic contraction")
        z1 = np.linalg.solve(m_zw, z)
        self.mul_scalar(jet_scalar(-0.5 * logdet))
        # Crossing the lowering displacement.
        self.mul_scalar(_quad_form_jet(self.lin_lower, w1))
        lifted = 2.0 * (self.lin_lower @ w1)
        e = self.preserve
        self.lin_raise = self.lin_raise + lifted @ e.T
        self.quad_raise = self.quad_raise + e @ w1 @ e.T
        self.preserve = e @ p1
        self.lin_lower = self.lin_lower @ p1
        self.quad_lower = 0.5 * (z1 + z1.T)

    @property
    def scalar(self) -> complex:
        return np.exp(self.log_c[0])
