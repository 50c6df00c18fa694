"""Pure-numpy implementations of the truncated-Fock-space kernels.

Every kernel works on precomputed index tables: ``raise_idx[mu, i]`` is the
basis index of ``state[i] + e_mu`` (or -1 when that leaves the cutoff) with
weight ``raise_w[mu, i] = sqrt(s_mu + 1)``; ``lower_idx`` / ``lower_w`` hold
the matching annihilation data.  Products of these graded operators never
visit states outside the cutoff, so all results are exact, not approximate.
"""

from __future__ import annotations

import numpy as np


def exp_lin_raise_left(coef, mat, raise_idx, raise_w, kmax):
    """Return exp(sum_mu coef[mu] a_mu^dag) @ mat via its finite graded series."""
    out = np.array(mat, dtype=np.complex128, copy=True)
    term = out.copy()
    n_modes = raise_idx.shape[0]
    for k in range(1, kmax + 1):
        new = np.zeros_like(term)
        for mu in range(n_modes):
            if coef[mu] == 0:
                continue
            idx = raise_idx[mu]
            valid = idx >= 0
            new[idx[valid]] += (coef[mu] / k) * raise_w[mu, valid, None] * term[valid]
        if not new.any():
            break
        term = new
        out += term
    return out


def exp_lin_lower_right(coef, mat, lower_idx, lower_w, kmax):
    """Return mat @ exp(sum_mu coef[mu] a_mu) via its finite graded series."""
    out = np.array(mat, dtype=np.complex128, copy=True)
    term = out.copy()
    n_modes = lower_idx.shape[0]
    for k in range(1, kmax + 1):
        new = np.zeros_like(term)
        for mu in range(n_modes):
            if coef[mu] == 0:
                continue
            idx = lower_idx[mu]
            valid = idx >= 0
            new[:, valid] += (coef[mu] / k) * lower_w[mu, valid] * term[:, idx[valid]]
        if not new.any():
            break
        term = new
        out += term
    return out


def lin_raise_left(coef, mat, raise_idx, raise_w):
    """Single application (sum_mu coef[mu] a_mu^dag) @ mat."""
    out = np.zeros(mat.shape, dtype=np.complex128)
    for mu in range(raise_idx.shape[0]):
        if coef[mu] == 0:
            continue
        idx = raise_idx[mu]
        valid = idx >= 0
        out[idx[valid]] += coef[mu] * raise_w[mu, valid, None] * mat[valid]
    return out


def lin_lower_right(coef, mat, lower_idx, lower_w):
    """Single application mat @ (sum_mu coef[mu] a_mu)."""
    out = np.zeros(mat.shape, dtype=np.complex128)
    for mu in range(lower_idx.shape[0]):
        if coef[mu] == 0:
            continue
        idx = lower_idx[mu]
        valid = idx >= 0
        out[:, valid] += coef[mu] * lower_w[mu, valid] * mat[:, idx[valid]]
    return out


def _quad_raise_apply(kernel, mat, raise_idx, raise_w):
    """(a^dag . kernel . a^dag) @ mat for a real symmetric kernel."""
    n_modes, dim = raise_idx.shape
    out = np.zeros_like(mat)
    tmp = np.empty_like(mat)
    for nu in range(n_modes):
        idx_nu = raise_idx[nu]
        val_nu = idx_nu >= 0
        tmp[:] = 0.0
        tmp[idx_nu[val_nu]] = raise_w[nu, val_nu, None] * mat[val_nu]
        for mu in range(n_modes):
            if kernel[mu, nu] == 0:
                continue
            idx_mu = raise_idx[mu]
            val_mu = idx_mu >= 0
            out[idx_mu[val_mu]] += kernel[mu, nu] * raise_w[mu, val_mu, None] * tmp[val_mu]
    return out


def exp_quad_raise_matrix(kernel, raise_idx, raise_w, napply):
    """Dense matrix of exp(a^dag . kernel . a^dag); nilpotent under the cutoff."""
    dim = raise_idx.shape[1]
    out = np.eye(dim)
    term = np.eye(dim)
    for k in range(1, napply + 1):
        term = _quad_raise_apply(kernel, term, raise_idx, raise_w) / k
        if not term.any():
            break
        out += term
    return out


def preserve_matrix(emat, states, first_mode, parent_col, lower_idx, lower_w):
    """Dense matrix of the excitation-preserving factor :exp(a^dag (E-1) a):.

    Column recursion: peeling one quantum off the ket in its first occupied
    mode expresses each column through columns of the previous total-excitation
    level, which the graded basis ordering guarantees are already filled.
    """
    dim = states.shape[0]
    n_modes = emat.shape[0]
    out = np.zeros((dim, dim))
    out[0, 0] = 1.0
    gather = lower_idx.copy()
    invalid = gather < 0
    gather[invalid] = 0
    weights = lower_w.copy()
    weights[invalid] = 0.0
    for j in range(1, dim):
        kappa = first_mode[j]
        pc = parent_col[j]
        col = np.zeros(dim)
        for mu in range(n_modes):
            if emat[mu, kappa] == 0:
                continue
            col += emat[mu, kappa] * weights[mu] * out[gather[mu], pc]
        out[:, j] = col / np.sqrt(states[j, kappa])
    return out
