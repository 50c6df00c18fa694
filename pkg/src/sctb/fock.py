"""Truncated multimode Fock space under a global excitation cutoff, and exact
matrix elements of translation, squeezing, charge and exponential-phase
operators in that space.

States are multi-indices ``s`` with Manhattan norm ``|s|_1 <= sigma_max``,
ordered by total excitation and then lexicographically.  Operator matrices
are evaluated from normal-ordered factorizations whose truncated products are
exact: pure-raising and pure-lowering exponentials terminate as finite graded
series, and excitation-preserving factors are built by an exact column
recursion.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
from scipy import linalg

from . import _kernels as kernels
from ._gaussian import CanonicalGaussian, jet_scalar, jet_vector
from .exceptions import DimensionOverflow, SingularU

__all__ = [
    "FockBasis",
    "LadderOps",
    "SqueezeData",
    "build_basis",
    "ladder_ops",
    "translation_matrix",
    "bogoliubov",
    "normal_ordered_quadratic",
    "exp_quadratic_raising",
    "exp_quadratic_lowering",
    "squeeze_matrix",
    "squeezed_displaced_block",
    "charge_op_matrices",
    "commute_V_past",
]


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class FockBasis:
    """Ordered excitation multi-indices with ``|s|_1 <= sigma_max``."""

    n_modes: int
    sigma_max: int
    states: np.ndarray

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def __len__(self) -> int:
        return self.dim

    @cached_property
    def index_of(self) -> dict:
        return {tuple(s): i for i, s in enumerate(self.states)}

    @cached_property
    def tables(self) -> "FockTables":
        return _build_tables(self)


@dataclass(frozen=True)
class FockTables:
    """Index tables driving the graded kernels; see :mod:`sctb._kernels_numpy`."""

    raise_idx: np.ndarray
    raise_w: np.ndarray
    lower_idx: np.ndarray
    lower_w: np.ndarray
    first_mode: np.ndarray
    parent_col: np.ndarray


def _build_tables(basis: FockBasis) -> FockTables:
    states = basis.states
    dim, n = states.shape
    index_of = basis.index_of
    raise_idx = np.full((n, dim), -1, dtype=np.int64)
    raise_w = np.zeros((n, dim))
    lower_idx = np.full((n, dim), -1, dtype=np.int64)
    lower_w = np.zeros((n, dim))
    first_mode = np.full(dim, -1, dtype=np.int64)
    parent_col = np.full(dim, -1, dtype=np.int64)
    for i, s in enumerate(states):
        for mu in range(n):
            if s[mu] > 0:
                lowered = tuple(s - _unit(n, mu))
                lower_idx[mu, i] = index_of[lowered]
                lower_w[mu, i] = np.sqrt(s[mu])
            raised = tuple(s + _unit(n, mu))
            j = index_of.get(raised)
            if j is not None:
                raise_idx[mu, i] = j
                raise_w[mu, i] = np.sqrt(s[mu] + 1)
        occupied = np.nonzero(s)[0]
        if occupied.size:
            first_mode[i] = occupied[0]
            parent_col[i] = lower_idx[occupied[0], i]
    return FockTables(raise_idx, raise_w, lower_idx, lower_w, first_mode, parent_col)


def _unit(n: int, mu: int) -> np.ndarray:
    e = np.zeros(n, dtype=np.int64)
    e[mu] = 1
    return e


def build_basis(n_modes: int, sigma_max: int, max_states: int = 2_000_000) -> FockBasis:
    """Enumerate the global-cutoff basis in graded lexicographic order."""
    if n_modes < 1 or sigma_max < 0:
        raise ValueError("need n_modes >= 1 and sigma_max >= 0")
    dim = comb(n_modes + sigma_max, n_modes)
    if dim > max_states:
        raise DimensionOverflow(
            f"basis would hold {dim} states, above the cap of {max_states}"
        )
    states = np.array(
        [s for total in range(sigma_max + 1) for s in _compositions(total, n_modes)],
        dtype=np.int64,
    ).reshape(dim, n_modes)
    return FockBasis(n_modes=n_modes, sigma_max=sigma_max, states=states)


@dataclass(frozen=True)
class LadderOps:
    """Dense per-mode annihilation matrices and their transposes."""

    a_mu: tuple
    adag_mu: tuple


def ladder_ops(basis: FockBasis) -> LadderOps:
    t = basis.tables
    dim = basis.dim
    ann = []
    for mu in range(basis.n_modes):
        mat = np.zeros((dim, dim))
        valid = t.lower_idx[mu] >= 0
        mat[t.lower_idx[mu, valid], np.nonzero(valid)[0]] = t.lower_w[mu, valid]
        ann.append(mat)
    return LadderOps(a_mu=tuple(ann), adag_mu=tuple(m.T.copy() for m in ann))


# ---------------------------------------------------------------------------
# Canonical-form evaluation


def core_matrix(basis: FockBasis, gauss: CanonicalGaussian) -> np.ndarray:
    """Dense matrix of the displacement-independent part raise*preserve*lower."""
    t = basis.tables
    napply = basis.sigma_max // 2
    left = kernels.exp_quad_raise_matrix(gauss.quad_raise, t.raise_idx, t.raise_w, napply)
    mid = kernels.preserve_matrix(
        gauss.preserve, basis.states, t.first_mode, t.parent_col, t.lower_idx, t.lower_w
    )
    right = kernels.exp_quad_raise_matrix(gauss.quad_lower, t.raise_idx, t.raise_w, napply).T
    return left @ mid @ right


def evaluate_canonical(
    basis: FockBasis,
    gauss: CanonicalGaussian,
    order: int = 0,
    core: np.ndarray | None = None,
) -> list:
    """Matrices of the canonical form and its s-derivatives at s = 0.

    Returns ``[F0]``, ``[F0, F1]`` or ``[F0, F1, F2]`` depending on ``order``.
    """
    t = basis.tables
    kmax = basis.sigma_max
    if core is None:
        core = core_matrix(basis, gauss)
    rho0, rho1 = gauss.lin_raise
    sig0, sig1 = gauss.lin_lower
    a0 = kernels.exp_lin_raise_left(rho0, core.astype(np.complex128), t.raise_idx, t.raise_w, kmax)
    a0 = kernels.exp_lin_lower_right(sig0, a0, t.lower_idx, t.lower_w, kmax)
    q0, q1, q2 = gauss.log_c
    c0 = np.exp(q0)
    out = [c0 * a0]
    if order == 0:
        return out
    braise = kernels.lin_raise_left(rho1, a0, t.raise_idx, t.raise_w)
    blower = kernels.lin_lower_right(sig1, a0, t.lower_idx, t.lower_w)
    a1 = braise + blower
    out.append(c0 * (q1 * a0 + a1))
    if order == 1:
        return out
    a2 = (
        kernels.lin_raise_left(rho1, braise, t.raise_idx, t.raise_w)
        + 2.0 * kernels.lin_raise_left(rho1, blower, t.raise_idx, t.raise_w)
        + kernels.lin_lower_right(sig1, blower, t.lower_idx, t.lower_w)
    )
    out.append(c0 * ((q1 * q1 + 2.0 * q2) * a0 + 2.0 * q1 * a1 + a2))
    return out


# ---------------------------------------------------------------------------
# Public operator constructions


def translation_matrix(basis: FockBasis, xi: np.ndarray, theta) -> np.ndarray:
    """Matrix of the phase-space translation by ``theta`` in the oscillator
    basis defined by mode matrix ``xi``.

    Factorized as Gaussian prefactor times pure-raising times pure-lowering
    displacement exponentials, each a finite series under the cutoff.
    """
    theta = np.asarray(theta, dtype=float)
    xi_inv = np.linalg.inv(xi)
    lam = xi_inv @ theta / np.sqrt(2.0)
    prefactor = np.exp(-0.25 * theta @ (xi_inv.T @ xi_inv) @ theta)
    t = basis.tables
    mat = kernels.exp_lin_raise_left(
        lam.astype(np.complex128),
        np.eye(basis.dim, dtype=np.complex128),
        t.raise_idx,
        t.raise_w,
        basis.sigma_max,
    )
    mat = kernels.exp_lin_lower_right(
        -lam.astype(np.complex128), mat, t.lower_idx, t.lower_w, basis.sigma_max
    )
    return prefactor * mat.real


@dataclass(frozen=True)
class SqueezeData:
    """Bogoliubov blocks and the disentangled-form kernels of a squeeze.

    ``u``, ``v`` relate the two ladder-operator sets; ``X = u^{-1} v``,
    ``Y = ln u``, ``Z = v u^{-1}`` feed the raising / preserving / lowering
    factors, and ``prefactor = exp(-tr(Y)/2) = det(u)^{-1/2}``.
    """

    u: np.ndarray
    v: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    prefactor: float

    @classmethod
    def identity(cls, n_modes: int) -> "SqueezeData":
        eye = np.eye(n_modes)
        zero = np.zeros((n_modes, n_modes))
        return cls(u=eye, v=zero, x=zero.copy(), y=zero.copy(), z=zero.copy(), prefactor=1.0)

    @property
    def n_modes(self) -> int:
        return self.u.shape[0]

    @property
    def is_identity(self) -> bool:
        return not self.v.any() and np.allclose(self.u, np.eye(self.n_modes))


def align_mode_signs(xi_ref: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Flip the last column of ``xi`` when its determinant sign differs from
    the reference, so the connecting Bogoliubov ``u`` block keeps a positive
    determinant.  Column signs are pure phase conventions of the local basis;
    spectra are unaffected."""
    if np.linalg.det(xi) * np.linalg.det(xi_ref) < 0:
        xi = np.array(xi, copy=True)
        xi[:, -1] *= -1.0
    return xi


def bogoliubov(xi: np.ndarray, xi_prime: np.ndarray) -> SqueezeData:
    """Squeeze data connecting the oscillator basis of ``xi`` to that of
    ``xi_prime`` (both invertible mode matrices).

    Raises :class:`~sctb.exceptions.SingularU` when the ``u`` block has no
    real logarithm (non-positive determinant or complex principal branch).
    """
    xi = np.asarray(xi, dtype=float)
    xi_prime = np.asarray(xi_prime, dtype=float)
    m1 = np.linalg.solve(xi_prime, xi)
    m2 = xi_prime.T @ np.linalg.inv(xi).T
    u = 0.5 * (m1 + m2)
    v = 0.5 * (m1 - m2)
    n = u.shape[0]
    sym_err = np.abs(u @ u.T - v @ v.T - np.eye(n)).max()
    if sym_err > 1e-8:
        raise ValueError(f"inputs are not a symplectic mode pair (defect {sym_err:.2e})")
    sign, logdet = np.linalg.slogdet(u)
    if sign <= 0:
        raise SingularU("u block has non-positive determinant")
    y = linalg.logm(u)
    if np.iscomplexobj(y):
        if np.abs(y.imag).max() > 1e-8:
            raise SingularU("u block has no real principal logarithm")
        y = y.real
    x = np.linalg.solve(u, v)
    z = v @ np.linalg.inv(u)
    x = 0.5 * (x + x.T)
    z = 0.5 * (z + z.T)
    return SqueezeData(u=u, v=v, x=x, y=y, z=z, prefactor=float(np.exp(-0.5 * logdet)))


def normal_ordered_quadratic(basis: FockBasis, w_kernel: np.ndarray) -> np.ndarray:
    """Matrix of ``:exp(a^dag . W . a):`` evaluated by exact contractions.

    Equals ``exp(a^dag ln(1+W) a)`` on the cutoff space (both preserve total
    excitation) but is computed without any logarithm via the level-by-level
    recursion on the linear map ``E = 1 + W``.
    """
    w_kernel = np.asarray(w_kernel, dtype=float)
    t = basis.tables
    return kernels.preserve_matrix(
        np.eye(basis.n_modes) + w_kernel,
        basis.states,
        t.first_mode,
        t.parent_col,
        t.lower_idx,
        t.lower_w,
    )


def exp_quadratic_raising(basis: FockBasis, x: np.ndarray) -> np.ndarray:
    """Matrix of ``exp(-1/2 a^dag . X . a^dag)`` (finite graded series)."""
    x = _check_symmetric(x)
    t = basis.tables
    return kernels.exp_quad_raise_matrix(-0.5 * x, t.raise_idx, t.raise_w, basis.sigma_max // 2)


def exp_quadratic_lowering(basis: FockBasis, z: np.ndarray) -> np.ndarray:
    """Matrix of ``exp(+1/2 a . Z . a)``, the transpose raising series."""
    z = _check_symmetric(z)
    t = basis.tables
    return kernels.exp_quad_raise_matrix(0.5 * z, t.raise_idx, t.raise_w, basis.sigma_max // 2).T


def _check_symmetric(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if np.abs(mat - mat.T).max() > 1e-10 * max(np.abs(mat).max(), 1e-300):
        raise ValueError("kernel matrix must be symmetric")
    return 0.5 * (mat + mat.T)


def squeeze_matrix(basis: FockBasis, sq: SqueezeData) -> np.ndarray:
    """Matrix of the multimode squeeze in disentangled form: prefactor times
    raising exponential, excitation-preserving factor and lowering
    exponential."""
    mid = normal_ordered_quadratic(basis, np.linalg.inv(sq.u) - np.eye(sq.n_modes))
    return sq.prefactor * (
        exp_quadratic_raising(basis, sq.x) @ mid @ exp_quadratic_lowering(basis, sq.z)
    )


def _squeeze_bra_factors(gauss: CanonicalGaussian, sq: SqueezeData) -> None:
    gauss.mul_scalar(jet_scalar(np.log(sq.prefactor)))
    gauss.mul_quad_raise(0.5 * sq.z)
    gauss.mul_preserve(np.linalg.inv(sq.u).T)
    gauss.mul_quad_lower(-0.5 * sq.x)


def _squeeze_ket_factors(gauss: CanonicalGaussian, sq: SqueezeData) -> None:
    gauss.mul_scalar(jet_scalar(np.log(sq.prefactor)))
    gauss.mul_quad_raise(-0.5 * sq.x)
    gauss.mul_preserve(np.linalg.inv(sq.u))
    gauss.mul_quad_lower(0.5 * sq.z)


def squeezed_displaced_block(
    basis: FockBasis,
    sq_left: SqueezeData,
    sq_right: SqueezeData,
    lambda_vec,
) -> np.ndarray:
    """Matrix of ``S_left^dag exp(lambda a^dag) exp(-lambda a) S_right``.

    The product is reduced to its canonical normal-ordered form (scalar *
    raising exponential * displaced raising * excitation-preserving factor *
    displaced lowering * lowering exponential) and each factor is evaluated
    exactly in the truncated basis.
    """
    lam = np.asarray(lambda_vec, dtype=np.complex128)
    gauss = CanonicalGaussian.identity(basis.n_modes)
    _squeeze_bra_factors(gauss, sq_left)
    gauss.mul_lin_raise(jet_vector(lam))
    gauss.mul_lin_lower(jet_vector(-lam))
    _squeeze_ket_factors(gauss, sq_right)
    block = evaluate_canonical(basis, gauss, order=0)[0]
    if np.abs(lam.imag).max() == 0:
        return block.real
    return block


def charge_op_matrices(basis: FockBasis, xi: np.ndarray) -> np.ndarray:
    """Node charge operators ``n_j`` in the oscillator basis of ``xi``;
    Hermitian in the truncated space."""
    xi_inv_t = np.linalg.inv(xi).T
    ops = ladder_ops(basis)
    n_ops = np.zeros((basis.n_modes, basis.dim, basis.dim), dtype=np.complex128)
    for j in range(basis.n_modes):
        acc = np.zeros((basis.dim, basis.dim))
        for mu in range(basis.n_modes):
            acc += xi_inv_t[j, mu] * (ops.a_mu[mu] - ops.adag_mu[mu])
        n_ops[j] = (-1j / np.sqrt(2.0)) * acc
    return n_ops


def commute_V_past(kind: str, theta, xi: np.ndarray, w=None):
    """Shift acquired when a pure-lowering displacement exponential is moved
    past a charge operator or an exponential-phase operator.

    For ``kind='charge'`` the charge vector shifts by the returned (imaginary)
    vector; for ``kind='exp_iphi'`` the phase ``w . phi`` shifts by the
    returned half-angle ``w . theta / 2``.
    """
    theta = np.asarray(theta, dtype=float)
    if kind == "charge":
        xi_inv = np.linalg.inv(xi)
        return 0.5j * (xi_inv.T @ xi_inv) @ theta
    if kind == "exp_iphi":
        if w is None:
            raise ValueError("exp_iphi rule needs a weight vector w")
        return 0.5 * float(np.asarray(w, dtype=float) @ theta)
    raise ValueError(f"unknown operator kind {kind!r}")
