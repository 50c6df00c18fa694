"""Scratch validation of the operator algebra against brute-force oracles.

Not part of the package or test suite; deleted before release.
"""
import numpy as np
from scipy.linalg import expm, logm

import sctb
from sctb import fock
from sctb.fock import build_basis, translation_matrix, bogoliubov, squeeze_matrix, \
    squeezed_displaced_block, normal_ordered_quadratic, charge_op_matrices

rng = np.random.default_rng(7)

# ---- oversized product-basis ladder ops (per-mode cutoff) ----
def dense_ladder(n_modes, cut):
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
    # index of each basis multi-index inside the dense product basis
    radix = cut ** np.arange(basis.n_modes - 1, -1, -1)
    return (basis.states @ radix).astype(int)

# ---- 1. basis enumeration ----
b = build_basis(2, 1)
assert [tuple(s) for s in b.states] == [(0, 0), (0, 1), (1, 0)], b.states
b95 = build_basis(9, 5)
assert b95.dim == 2002
print("basis ok")

# ---- 2. translation vs expm ----
cut = 40
basis = build_basis(1, 10)
a, = dense_ladder(1, cut)
xi = np.array([[0.73]])
theta = np.array([0.9])
gen = -(theta[0] / (np.sqrt(2) * xi[0, 0])) * (a - a.T)
T_big = expm(gen)
idx = embed_indices(basis, cut)
T_mine = translation_matrix(basis, xi, theta)
err = np.abs(T_mine - T_big[np.ix_(idx, idx)]).max()
print("translation err", err)
assert err < 1e-10

# vacuum element
print("vac", T_mine[0, 0], np.exp(-0.25 * theta[0] ** 2 / xi[0, 0] ** 2))

# ---- 3. bogoliubov identities ----
for _ in range(50):
    n = 2
    A = rng.normal(size=(n, n)); spd1 = A @ A.T + n * np.eye(n)
    B = rng.normal(size=(n, n)); spd2 = B @ B.T + n * np.eye(n)
    from sctb.modes import normal_modes
    xi1 = normal_modes(np.eye(n), spd1).xi
    xi2 = fock.align_mode_signs(xi1, normal_modes(np.eye(n), spd2).xi)
    sq = bogoliubov(xi1, xi2)
    assert np.abs(sq.u @ sq.u.T - sq.v @ sq.v.T - np.eye(n)).max() < 1e-10
    assert np.abs(sq.x - sq.x.T).max() < 1e-10
    assert np.abs(sq.z - sq.z.T).max() < 1e-10
print("bogoliubov ok")

# scalar case
xi0 = np.array([[0.8]]); s = 1.3
sq = bogoliubov(xi0, s * xi0)
print("u,v", sq.u, sq.v, "expect", (1/s + s)/2, (1/s - s)/2)

# ---- 4. normal ordered quadratic vs expm ----
basis2 = build_basis(2, 6)
cut2 = 20
ops2 = dense_ladder(2, cut2)
idx2 = embed_indices(basis2, cut2)
W = rng.normal(size=(2, 2)) * 0.3
gen = sum((logm(np.eye(2) + W))[i, j] * ops2[i].T @ ops2[j] for i in range(2) for j in range(2))
big = expm(gen)
mine = normal_ordered_quadratic(basis2, W)
err = np.abs(mine - big[np.ix_(idx2, idx2)].real).max()
print("preserve err", err)
assert err < 1e-11

# ---- 5. squeeze matrix vs Eq-19-style expm oracle ----
def squeeze_oracle(xi_from, xi_to, basis, cut):
    nmode = xi_from.shape[0]
    sq = bogoliubov(xi_from, xi_to)
    M = np.block([[sq.u, sq.v], [sq.v, sq.u]])
    J = np.block([[np.zeros((nmode, nmode)), np.eye(nmode)], [-np.eye(nmode), np.zeros((nmode, nmode))]])
    K = J @ logm(M)
    ops = dense_ladder(nmode, cut)
    vec = ops + [o.T for o in ops]   # (a..., adag...)
    gen = 0.5 * sum(K[i, j] * vec[i] @ vec[j] for i in range(2*nmode) for j in range(2*nmode))
    return expm(gen), sq

basis1 = build_basis(1, 8)
idx1 = embed_indices(basis1, 35)
big, sq = squeeze_oracle(np.array([[0.8]]), np.array([[1.1]]), basis1, 35)
mine = squeeze_matrix(basis1, sq)
err = np.abs(mine - big[np.ix_(idx1, idx1)].real).max()
print("squeeze 1d err", err, " <0|S|0>", mine[0,0], "expect", sq.u[0,0]**-0.5)
assert err < 1e-9

# N=2 squeeze
from sctb.modes import normal_modes
xiA = normal_modes(np.eye(2), np.array([[2.0, 0.3], [0.3, 1.5]])).xi
xiB = fock.align_mode_signs(xiA, normal_modes(np.eye(2), np.array([[1.7, -0.2], [-0.2, 2.2]])).xi)
big, sq = squeeze_oracle(xiA, xiB, basis2, cut2)
mine = squeeze_matrix(basis2, sq)
err = np.abs(mine - big[np.ix_(idx2, idx2)].real).max()
print("squeeze 2d err", err)
assert err < 1e-9

# ---- 6. squeezed displaced block vs brute force ----
sqL = bogoliubov(xiA, xiB)
xiC = fock.align_mode_signs(xiA, normal_modes(np.eye(2), np.array([[2.4, 0.1], [0.1, 1.9]])).xi)
sqR = bogoliubov(xiA, xiC)
lam = rng.normal(size=2) * 0.6
bigL, _ = squeeze_oracle(xiA, xiB, basis2, cut2)
bigR, _ = squeeze_oracle(xiA, xiC, basis2, cut2)
ops2d = dense_ladder(2, cut2)
raise_disp = expm(sum(lam[m] * ops2d[m].T for m in range(2)))
lower_disp = expm(-sum(lam[m] * ops2d[m] for m in range(2)))
brute = (bigL.T @ raise_disp @ lower_disp @ bigR)[np.ix_(idx2, idx2)]
mine = squeezed_displaced_block(basis2, sqL, sqR, lam)
err = np.abs(mine - brute.real).max()
print("squeezed displaced err", err)
assert err < 1e-9

# identity squeezes
from sctb.fock import SqueezeData
ident = SqueezeData.identity(2)
mine = squeezed_displaced_block(basis2, ident, ident, np.zeros(2))
assert np.abs(mine - np.eye(basis2.dim)).max() < 1e-13
print("all fock checks passed")
