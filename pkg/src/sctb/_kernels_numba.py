"""Numba-compiled versions of the truncated-Fock-space kernels.

Same contracts as :mod:`sctb._kernels_numpy`; see there for the index-table
conventions.  Importing this module requires numba.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _raise_once(coef, mat, raise_idx, raise_w, out):
    n_modes, dim = raise_idx.shape
    out[:] = 0.0
    for mu in range(n_modes):
        c = coef[mu]
        if c == 0:
            continue
        for i in range(dim):
            tgt = raise_idx[mu, i]
            if tgt < 0:
                continue
            cw = c * raise_w[mu, i]
            for col in range(dim):
                out[tgt, col] += cw * mat[i, col]


@njit(cache=True)
def _lower_once(coef, mat, lower_idx, lower_w, out):
    n_modes, dim = lower_idx.shape
    out[:] = 0.0
    for mu in range(n_modes):
        c = coef[mu]
        if c == 0:
            continue
        for col in range(dim):
            src = lower_idx[mu, col]
            if src < 0:
                continue
            cw = c * lower_w[mu, col]
            for row in range(dim):
                out[row, col] += cw * mat[row, src]


@njit(cache=True)
def exp_lin_raise_left(coef, mat, raise_idx, raise_w, kmax):
    out = mat.astype(np.complex128)
    term = out.copy()
    nxt = np.zeros_like(term)
    for k in range(1, kmax + 1):
        _raise_once(coef / k, term, raise_idx, raise_w, nxt)
        if not np.any(nxt):
            break
        term = nxt.copy()
        out += term
    return out


@njit(cache=True)
def exp_lin_lower_right(coef, mat, lower_idx, lower_w, kmax):
    out = mat.astype(np.complex128)
    term = out.copy()
    nxt = np.zeros_like(term)
    for k in range(1, kmax + 1):
        _lower_once(coef / k, term, lower_idx, lower_w, nxt)
        if not np.any(nxt):
            break
        term = nxt.copy()
        out += term
    return out


@njit(cache=True)
def lin_raise_left(coef, mat, raise_idx, raise_w):
    out = np.zeros_like(mat)
    _raise_once(coef, mat, raise_idx, raise_w, out)
    return out


@njit(cache=True)
def lin_lower_right(coef, mat, lower_idx, lower_w):
    out = np.zeros_like(mat)
    _lower_once(coef, mat, lower_idx, lower_w, out)
    return out


@njit(cache=True)
def _quad_raise_apply(kernel, mat, raise_idx, raise_w):
    n_modes, dim = raise_idx.shape
    out = np.zeros_like(mat)
    tmp = np.empty_like(mat)
    for nu in range(n_modes):
        tmp[:] = 0.0
        for i in range(dim):
            tgt = raise_idx[nu, i]
            if tgt < 0:
                continue
            w = raise_w[nu, i]
            for col in range(dim):
                tmp[tgt, col] = w * mat[i, col]
        for mu in range(n_modes):
            kval = kernel[mu, nu]
            if kval == 0:
                continue
            for i in range(dim):
                tgt = raise_idx[mu, i]
                if tgt < 0:
                    continue
                kw = kval * raise_w[mu, i]
                for col in range(dim):
                    out[tgt, col] += kw * tmp[i, col]
    return out


@njit(cache=True)
def exp_quad_raise_matrix(kernel, raise_idx, raise_w, napply):
    dim = raise_idx.shape[1]
    out = np.eye(dim)
    term = np.eye(dim)
    for k in range(1, napply + 1):
        term = _quad_raise_apply(kernel / k, term, raise_idx, raise_w)
        if not np.any(term):
            break
        out += term
    return out


@njit(cache=True)
def preserve_matrix(emat, states, first_mode, parent_col, lower_idx, lower_w):
    dim = states.shape[0]
    n_modes = emat.shape[0]
    out = np.zeros((dim, dim))
    out[0, 0] = 1.0
    for j in range(1, dim):
        kappa = first_mode[j]
        pc = parent_col[j]
        norm = 1.0 / np.sqrt(states[j, kappa])
        for mu in range(n_modes):
            e = emat[mu, kappa]
            if e == 0:
                continue
            for i in range(dim):
                src = lower_idx[mu, i]
                if src < 0:
                    continue
                out[i, j] += e * lower_w[mu, i] * out[src, pc] * norm
    return out
