"""Independent brute-force oracles used by the test suite.

Everything here deliberately avoids the package's normal-ordered evaluation
paths: oversized per-mode product bases with dense matrix exponentials,
finite differences, quadrature and grid scans.
"""

import numpy as np
from scipy.linalg import expm, logm

from sctb.circuit import potential


def dense_ladder(n_modes, cut):
    """Per-mode annihilation operators in a product basis with per-mode cutoff."""
    a1 = np.diag(np.sqrt(np.arange(1, cut)), 1)
    eye = np.eye(cut)
    ops = []
    for mu in range(n_modes):
        mats = [eye] * n_modes
        mats[mu] = a1
        acc = mats[0]
        for m in mats[1:]:
            acc = np.kron(acc, m)
        ops.append(acc)
    return ops


def embed_indices(basis, cut):
    """Positions of the truncated-basis states inside the dense product basis."""
    radix = cut ** np.arange(basis.n_modes - 1, -1, -1)
    return (basis.states @ radix).astype(int)


def project(mat, basis, cut):
    idx = embed_indices(basis, cut)
    return mat[np.ix_(idx, idx)]


def translation_oracle(xi, theta, n_modes, cut):
    """exp(-theta . n) as a dense matrix via the ladder decomposition."""
    ops = dense_ladder(n_modes, cut)
    coefs = np.linalg.inv(xi).T @ np.asarray(theta, dtype=float) / np.sqrt(2.0)
    gen = sum(-coefs[mu] * (ops[mu] - ops[mu].T) for mu in range(n_modes))
    return expm(gen)


def squeeze_oracle(sq, n_modes, cut):
    """Dense squeeze operator from its symplectic generator (log of the
    Bogoliubov block matrix), evaluated without any disentangling."""
    m_block = np.block([[sq.u, sq.v], [sq.v, sq.u]])
    j_block = np.block(
        [
            [np.zeros((n_modes, n_modes)), np.eye(n_modes)],
            [-np.eye(n_modes), np.zeros((n_modes, n_modes))],
        ]
    )
    kernel = j_block @ logm(m_block)
    ops = dense_ladder(n_modes, cut)
    vec = ops + [o.T for o in ops]
    gen = 0.5 * sum(
        kernel[i, k] * vec[i] @ vec[k] for i in range(2 * n_modes) for k in range(2 * n_modes)
    )
    return expm(gen)


def number_ops(xi, n_modes, cut):
    """Charge operators in the dense product basis."""
    ops = dense_ladder(n_modes, cut)
    xi_inv_t = np.linalg.inv(xi).T
    out = []
    for j in range(n_modes):
        acc = sum(xi_inv_t[j, mu] * (ops[mu] - ops[mu].T) for mu in range(n_modes))
        out.append((-1j / np.sqrt(2.0)) * acc)
    return out


def fd_gradient(spec, phi, step=1e-5):
    phi = np.asarray(phi, dtype=float)
    out = np.zeros_like(phi)
    for i in range(len(phi)):
        delta = np.zeros_like(phi)
        delta[i] = step
        out[i] = (potential(spec, phi + delta) - potential(spec, phi - delta)) / (2 * step)
    return out


def fd_hessian(spec, phi, step=1e-4):
    phi = np.asarray(phi, dtype=float)
    n = len(phi)
    out = np.zeros((n, n))
    for i in range(n):
        di = np.zeros(n)
        di[i] = step
        for j in range(n):
            dj = np.zeros(n)
            dj[j] = step
            out[i, j] = (
                potential(spec, phi + di + dj)
                - potential(spec, phi + di - dj)
                - potential(spec, phi - di + dj)
                + potential(spec, phi - di - dj)
            ) / (4 * step * step)
    return out


def grid_scan_minima_2d(spec, points=400):
    """Approximate minima of a 2-node potential: strict local minima of the
    periodic grid sampling."""
    axis = np.linspace(-np.pi, np.pi, points, endpoint=False)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    vals = potential(spec, np.stack([xx, yy], axis=-1))
    found = []
    for shift_x in (-1, 0, 1):
        for shift_y in (-1, 0, 1):
            if shift_x == 0 and shift_y == 0:
                continue
            rolled = np.roll(np.roll(vals, shift_x, axis=0), shift_y, axis=1)
            found.append(vals < rolled)
    mask = np.logical_and.reduce(found)
    return np.stack([xx[mask], yy[mask]], axis=-1)


def gauss_hermite_overlap(theta_a, xi_a, theta_b, xi_b, order=80):
    """Overlap of two displaced ground-state Gaussians by tensor-product
    Gauss-Hermite quadrature (exact for Gaussian integrands at this order)."""
    n = len(theta_a)
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    if n == 1:
        grid = nodes[:, None]
        wts = weights
    elif n == 2:
        gx, gy = np.meshgrid(nodes, nodes, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        wts = np.outer(weights, weights).ravel()
    else:
        raise ValueError("quadrature oracle implemented for one or two modes")

    def ground(phi, theta, xi):
        delta_form = np.linalg.inv(xi).T @ np.linalg.inv(xi)
        det = np.linalg.det(xi)
        diff = phi - theta
        expo = -0.5 * np.einsum("si,ij,sj->s", diff, delta_form, diff)
        return np.pi ** (-n / 4) * np.abs(det) ** -0.5 * np.exp(expo)

    # weight function e^{-x.x} is divided back out
    compensation = np.exp(np.sum(grid**2, axis=1))
    vals = ground(grid, theta_a, xi_a) * ground(grid, theta_b, xi_b) * compensation
    return float(vals @ wts)
