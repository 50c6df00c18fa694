"""Tight-binding generalized eigenvalue problem over Bloch sums of local
oscillator states.

Local wavefunctions live in the potential minima of the central unit cell;
their periodic repetitions carry Bloch phases set by the offset charges.  The
Hamiltonian and overlap blocks between two local bases reduce to translated
(and, for the proper schemes, squeezed) Gaussian operator products evaluated
exactly in the truncated Fock space by :mod:`sctb.fock`.  The resulting
near-singular generalized problem is solved after canonical orthogonalization
of the overlap matrix.
"""

from __future__ import annotations

import itertools
import warnings
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize
from scipy.sparse import issparse

from . import fock
from ._gaussian import CanonicalGaussian, jet_scalar, jet_vector
from .circuit import CircuitSpec
from .exceptions import AllDeflated, BlockMismatch, NeighborExplosion
from .fock import FockBasis, SqueezeData, bogoliubov
from .minima import Minimum
from .modes import ModeData, rescale

__all__ = [
    "Scheme",
    "NeighborEntry",
    "NeighborList",
    "TBSystem",
    "LowdinResult",
    "SpectrumResult",
    "ansatz_modes",
    "gs_overlap",
    "select_neighbors",
    "assemble",
    "lowdin_solve",
    "anharmonic_optimize",
    "localization_ratios",
    "count_nnz",
    "solve_spectrum",
]


class Scheme(str, Enum):
    """Ansatz construction scheme.

    IP reuses the global minimum's local basis everywhere; P builds each
    minimum's basis from its own curvature (relative squeezing); the AC
    variants additionally optimize the harmonic lengths of the global
    minimum's ansatz ground state.
    """

    IP = "ip"
    P = "p"
    IPAC = "ipac"
    PAC = "pac"

    @property
    def proper(self) -> bool:
        return self in (Scheme.P, Scheme.PAC)

    @property
    def anharmonic(self) -> bool:
        return self in (Scheme.IPAC, Scheme.PAC)

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown scheme {text!r}; pick from ip, p, ipac, pac")


def ansatz_modes(scheme: Scheme, modes_per_min: list) -> list:
    """Mode data actually used for each minimum's local basis under a scheme."""
    if scheme.proper:
        return list(modes_per_min)
    return [modes_per_min[0]] * len(modes_per_min)


@dataclass(frozen=True)
class NeighborEntry:
    m_bra: int
    m_ket: int
    j: tuple
    overlap: float


@dataclass(frozen=True)
class NeighborList:
    entries: tuple

    def pairs(self) -> dict:
        grouped = defaultdict(list)
        for e in self.entries:
            grouped[(e.m_bra, e.m_ket)].append(e)
        return dict(grouped)

    def __len__(self) -> int:
        return len(self.entries)


def gs_overlap(
    min_bra: Minimum,
    modes_bra: ModeData,
    min_ket: Minimum,
    modes_ket: ModeData,
    j,
) -> float:
    """Overlap of the two ground-state Gaussians, the ket displaced by the
    lattice vector ``2 pi j``; always in (0, 1]."""
    j = np.asarray(j, dtype=float)
    dtheta = 2 * np.pi * j + min_ket.theta - min_bra.theta
    da, db = modes_ket.delta, modes_bra.delta
    n = da.shape[0]
    _, logdet_a = np.linalg.slogdet(da)
    _, logdet_b = np.linalg.slogdet(db)
    _, logdet_sum = np.linalg.slogdet(da + db)
    log_amp = 0.5 * (n * np.log(2.0) + 0.5 * logdet_a + 0.5 * logdet_b - logdet_sum)
    w = np.linalg.inv(np.linalg.inv(da) + np.linalg.inv(db))
    return float(np.exp(log_amp - 0.5 * dtheta @ w @ dtheta))


def _lattice_points_in_ellipsoid(
    q_mat: np.ndarray, center: np.ndarray, bound: float, box_cap: int
) -> list:
    """All integer vectors x with (x + center)^T q_mat (x + center) <= bound
    and |x_i| <= box_cap, by the standard Cholesky coordinate recursion."""
    if bound < 0:
        return []
    r_fac = np.linalg.cholesky(q_mat).T  # upper triangular, q = R^T R
    n = len(center)
    out: list = []
    x = np.zeros(n, dtype=np.int64)

    def descend(i: int, remaining: float) -> None:
        partial = r_fac[i, i + 1 :] @ (x[i + 1 :] + center[i + 1 :]) if i + 1 < n else 0.0
        radius = np.sqrt(max(remaining, 0.0))
        lo = (-radius - partial) / r_fac[i, i] - center[i]
        hi = (radius - partial) / r_fac[i, i] - center[i]
        lo = max(int(np.ceil(lo - 1e-9)), -box_cap)
        hi = min(int(np.floor(hi + 1e-9)), box_cap)
        for xi in range(lo, hi + 1):
            x[i] = xi
            z = r_fac[i, i] * (xi + center[i]) + partial
            if i == 0:
                out.append(x.copy())
            else:
                descend(i - 1, remaining - z * z)

    descend(n - 1, bound)
    return out


def select_neighbors(
    minima: list,
    modes: list,
    epsilon: float,
    max_degree: int = 16,
    max_entries: int = 500_000,
) -> NeighborList:
    """Lattice vectors kept for every ordered minima pair: exactly those whose
    ground-state overlap reaches ``epsilon``, plus the same-cell vector
    unconditionally.

    The overlap threshold defines an ellipsoid in lattice-vector space; its
    integer points are enumerated completely (no connectivity assumptions,
    which matters for strongly anisotropic wavefunctions whose superlevel sets
    are thin diagonal tubes).  ``max_degree`` caps each component.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    n = len(minima[0].theta)
    entries = []
    zero = (0,) * n
    for mb, mk in itertools.product(range(len(minima)), repeat=2):
        args = (minima[mb], modes[mb], minima[mk], modes[mk])
        da, db = modes[mk].delta, modes[mb].delta
        _, logdet_a = np.linalg.slogdet(da)
        _, logdet_b = np.linalg.slogdet(db)
        _, logdet_sum = np.linalg.slogdet(da + db)
        log_amp = 0.5 * (n * np.log(2.0) + 0.5 * logdet_a + 0.5 * logdet_b - logdet_sum)
        w = np.linalg.inv(np.linalg.inv(da) + np.linalg.inv(db))
        d0 = minima[mk].theta - minima[mb].theta
        q_mat = (2 * np.pi) ** 2 * w
        bound = 2.0 * (log_amp - np.log(epsilon))
        found = set()
        for j_arr in _lattice_points_in_ellipsoid(q_mat, d0 / (2 * np.pi), bound, max_degree):
            j = tuple(int(c) for c in j_arr)
            ov = gs_overlap(*args, j)
            if ov >= epsilon or j == zero:
                found.add(j)
                entries.append(NeighborEntry(mb, mk, j, ov))
        if zero not in found:
            entries.append(NeighborEntry(mb, mk, zero, gs_overlap(*args, zero)))
        if len(entries) > max_entries:
            raise NeighborExplosion(
                f"more than {max_entries} neighbor entries at epsilon={epsilon:g}"
            )
    entries.sort(key=lambda e: (e.m_bra, e.m_ket, e.j))
    return NeighborList(entries=tuple(entries))


@dataclass(frozen=True)
class TBSystem:
    """Assembled Hermitian matrices of the generalized eigenvalue problem."""

    h: np.ndarray
    s: np.ndarray
    scheme: Scheme
    n_g: np.ndarray
    sigma_max: int
    n_minima: int
    states_per_minimum: int

    @property
    def dim(self) -> int:
        return self.h.shape[0]


def _compose_pair(
    sq_bra: SqueezeData,
    sq_ket: SqueezeData,
    xi_inv: np.ndarray,
    delta0: np.ndarray,
    dtheta: np.ndarray,
    jet_dir: np.ndarray | None = None,
    phase_factor: tuple | None = None,
) -> CanonicalGaussian:
    """Canonical form of bra-squeeze^dag * translation * (optional phase
    exponential) * ket-squeeze, with translation jets along ``jet_dir``."""
    n = xi_inv.shape[0]
    g = CanonicalGaussian.identity(n)
    fock._squeeze_bra_factors(g, sq_bra)
    lam0 = xi_inv @ dtheta / np.sqrt(2.0)
    lam1 = np.zeros(n) if jet_dir is None else xi_inv @ jet_dir / np.sqrt(2.0)
    v = np.zeros(n) if jet_dir is None else jet_dir
    g.mul_scalar(
        jet_scalar(
            -0.25 * dtheta @ delta0 @ dtheta,
            -0.5 * dtheta @ delta0 @ v,
            -0.25 * v @ delta0 @ v,
        )
    )
    g.mul_lin_raise(jet_vector(lam0, lam1))
    g.mul_lin_lower(jet_vector(-lam0, -lam1))
    if phase_factor is not None:
        log_phase, beta_vec = phase_factor
        # exp(b.adag + b.a) = exp(b.adag) exp(b.a) exp(b.b / 2)
        g.mul_scalar(jet_scalar(log_phase + 0.5 * beta_vec @ beta_vec))
        g.mul_lin_raise(jet_vector(beta_vec))
        g.mul_lin_lower(jet_vector(beta_vec))
    fock._squeeze_ket_factors(g, sq_ket)
    return g


def _align_mode_columns(ladder_xi: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Relabel and sign-fix the target's mode columns so they track the ladder
    basis modes.

    Column order and signs of a mode matrix are conventions; choosing the
    assignment that maximizes the diagonal of ``ladder^-1 target`` keeps the
    connecting Bogoliubov ``u`` block near the identity, where its real
    logarithm (and positive-determinant prefactor) exist.
    """
    from scipy.optimize import linear_sum_assignment

    overlap = np.linalg.solve(ladder_xi, target)
    rows, cols = linear_sum_assignment(-np.abs(overlap))
    perm = np.empty_like(cols)
    perm[rows] = cols
    aligned = target[:, perm].copy()
    diag = overlap[rows, cols]
    signs = np.where(diag[np.argsort(rows)] < 0, -1.0, 1.0)
    aligned *= signs
    if np.linalg.det(aligned) * np.linalg.det(ladder_xi) < 0:
        weakest = int(np.argmin(np.abs(np.linalg.solve(ladder_xi, aligned).diagonal())))
        aligned[:, weakest] *= -1.0
    return aligned


def _pair_squeezes(scheme: Scheme, ansatz: list) -> list:
    """Squeeze data mapping the shared ladder basis onto each minimum's local
    basis, with mode columns aligned to keep the squeeze on the principal
    branch."""
    ladder_xi = ansatz[0].xi
    out = []
    for md in ansatz:
        if md is ansatz[0] or np.allclose(md.xi, ladder_xi, atol=1e-14, rtol=0.0):
            out.append(SqueezeData.identity(ladder_xi.shape[0]))
            continue
        out.append(bogoliubov(ladder_xi, _align_mode_columns(ladder_xi, md.xi)))
    return out


def assemble(
    spec: CircuitSpec,
    minima: list,
    modes_per_min: list,
    basis: FockBasis,
    scheme: Scheme,
    neighbors: NeighborList,
    n_g=None,
) -> TBSystem:
    """Accumulate the Hamiltonian and overlap matrices over all neighbor
    entries.

    Kinetic blocks come from exact second derivatives of the displaced
    overlap kernel along charging-matrix eigendirections; every cosine term
    contributes displaced phase exponentials; Bloch phases multiply each
    lattice-vector contribution.  Both matrices are Hermitian-symmetrized and
    returned real when the offset-charge phases allow it.
    """
    n = spec.n_nodes
    n_minima = len(minima)
    if len(modes_per_min) != n_minima:
        raise BlockMismatch("one ModeData per minimum is required")
    if basis.n_modes != n:
        raise BlockMismatch("basis mode count differs from circuit nodes")
    n_g = np.asarray(spec.offset_charges if n_g is None else n_g, dtype=float)
    ansatz = ansatz_modes(scheme, modes_per_min)
    ladder = ansatz[0]
    xi = ladder.xi
    xi_inv = np.linalg.inv(xi)
    delta0 = xi_inv.T @ xi_inv
    squeezes = _pair_squeezes(scheme, ansatz)
    kappa, ec_vecs = np.linalg.eigh(spec.ec_matrix)
    terms = [
        (t.amplitude, t.weight_vector, t.phase_offset, xi.T @ t.weight_vector / np.sqrt(2.0))
        for t in spec.cosine_terms
    ]
    dim = basis.dim
    total = n_minima * dim
    h = np.zeros((total, total), dtype=np.complex128)
    s = np.zeros((total, total), dtype=np.complex128)
    for (mb, mk), pair_entries in neighbors.pairs().items():
        sqb, sqk = squeezes[mb], squeezes[mk]
        probe = _compose_pair(sqb, sqk, xi_inv, delta0, np.zeros(n))
        core = fock.core_matrix(basis, probe)
        rows = slice(mb * dim, (mb + 1) * dim)
        cols = slice(mk * dim, (mk + 1) * dim)
        for entry in pair_entries:
            jvec = np.asarray(entry.j, dtype=float)
            dtheta = 2 * np.pi * jvec + minima[mk].theta - minima[mb].theta
            bloch = np.exp(-1j * (n_g @ dtheta))
            block_s = None
            block_kin = np.zeros((dim, dim), dtype=np.complex128)
            for k in range(n):
                g = _compose_pair(sqb, sqk, xi_inv, delta0, dtheta, jet_dir=ec_vecs[:, k])
                parts = fock.evaluate_canonical(basis, g, order=2, core=core)
                if block_s is None:
                    block_s = parts[0]
                block_kin -= 4.0 * kappa[k] * parts[2]
            block_pot = np.zeros((dim, dim), dtype=np.complex128)
            for amp, w, phase0, beta in terms:
                angle = phase0 + w @ (minima[mk].theta + 2 * np.pi * jvec)
                for sign in (1.0, -1.0):
                    g = _compose_pair(
                        sqb,
                        sqk,
                        xi_inv,
                        delta0,
                        dtheta,
                        phase_factor=(1j * sign * angle, 1j * sign * beta),
                    )
                    block_pot -= (
                        0.5 * amp * fock.evaluate_canonical(basis, g, order=0, core=core)[0]
                    )
            block_h = block_kin + block_pot + spec.energy_shift * block_s
            h[rows, cols] += bloch * block_h
            s[rows, cols] += bloch * block_s
    h = 0.5 * (h + h.conj().T)
    s = 0.5 * (s + s.conj().T)
    if max(np.abs(h.imag).max(), np.abs(s.imag).max()) < 1e-12 * max(
        np.abs(h).max(), 1.0
    ):
        h, s = h.real.copy(), s.real.copy()
    return TBSystem(
        h=h,
        s=s,
        scheme=scheme,
        n_g=n_g,
        sigma_max=basis.sigma_max,
        n_minima=n_minima,
        states_per_minimum=dim,
    )


@dataclass(frozen=True)
class LowdinResult:
    energies: np.ndarray
    retained_dim: int
    overlap_eigenvalues: np.ndarray


def lowdin_solve(sys: TBSystem, delta_min: float = 1e-10, k: int = 4) -> LowdinResult:
    """Canonically orthogonalize the overlap matrix and solve.

    Overlap eigendirections below ``delta_min`` relative to the largest
    eigenvalue are deflated; the Hamiltonian is projected on the survivors and
    the ``k`` lowest eigenvalues of the standard problem are returned
    (variational upper bounds).
    """
    w, u = np.linalg.eigh(sys.s)
    w_max = w.max() if len(w) else 0.0
    if w_max <= 0:
        raise AllDeflated("overlap matrix has no positive eigenvalue")
    keep = w > delta_min * w_max
    if not keep.any():
        raise AllDeflated("all overlap eigenvalues fell below the deflation cutoff")
    basis_map = u[:, keep] / np.sqrt(w[keep])
    h_proj = basis_map.conj().T @ sys.h @ basis_map
    h_proj = 0.5 * (h_proj + h_proj.conj().T)
    vals = np.linalg.eigvalsh(h_proj)
    return LowdinResult(
        energies=vals[: min(k, len(vals))],
        retained_dim=int(keep.sum()),
        overlap_eigenvalues=w,
    )


def anharmonic_optimize(
    spec: CircuitSpec,
    minimum: Minimum,
    modes: ModeData,
    basis_1state: FockBasis,
    n_g,
    neighbors: NeighborList,
) -> np.ndarray:
    """Optimize per-mode harmonic-length factors of the ansatz ground state.

    Minimizes the Rayleigh quotient of the single-state Bloch sum in the given
    minimum with a Nelder-Mead search over log-factors starting from unity.
    On failure a warning is emitted and unit factors are returned.
    """
    if basis_1state.sigma_max != 0:
        raise ValueError("harmonic-length optimization uses the one-state basis")
    local_min = Minimum(0, minimum.theta, minimum.value, minimum.hessian)
    jset = tuple(
        NeighborEntry(0, 0, e.j, e.overlap)
        for e in neighbors.entries
        if e.m_bra == minimum.index and e.m_ket == minimum.index
    )
    local_neighbors = NeighborList(entries=jset)

    def quotient(log_lam: np.ndarray) -> float:
        md = rescale(modes, np.exp(log_lam))
        sys = assemble(
            spec, [local_min], [md], basis_1state, Scheme.IP, local_neighbors, n_g
        )
        return float((sys.h[0, 0] / sys.s[0, 0]).real)

    x0 = np.zeros(modes.n_modes)
    f0 = quotient(x0)
    simplex = np.vstack([x0, x0 + 0.1 * np.eye(modes.n_modes)])
    result = optimize.minimize(
        quotient,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "fatol": 1e-6,
            "xatol": 1e-5,
            "maxiter": 400 * modes.n_modes,
        },
    )
    if not result.success or result.fun > f0 + 1e-9:
        warnings.warn(
            "harmonic-length optimization did not improve the ansatz; "
            "falling back to unit factors",
            RuntimeWarning,
        )
        return np.ones(modes.n_modes)
    return np.exp(result.x)


def localization_ratios(minima: list, modes: list) -> np.ndarray:
    """Half inter-minima distance over effective harmonic length, for every
    minima pair under minimum-image (including same-minimum lattice images).

    Values well above one indicate localized wavefunctions.  Among
    equal-distance image directions the smallest ratio (most delocalized
    direction) is reported; the length scale is the larger of the two
    wavefunctions' spreads along the separation.
    """
    m_count = len(minima)
    n = len(minima[0].theta)
    shifts = 2 * np.pi * np.array(list(itertools.product((-1, 0, 1), repeat=n)))
    out = np.zeros((m_count, m_count))
    deltas_by_min = [md.delta for md in modes]
    for a in range(m_count):
        for b in range(a, m_count):
            disp = minima[b].theta - minima[a].theta + shifts
            norms = np.linalg.norm(disp, axis=1)
            valid = norms > 1e-9
            d_min = norms[valid].min()
            ratios = []
            for vec, dist in zip(disp[valid], norms[valid]):
                if dist > d_min + 1e-9:
                    continue
                unit = vec / dist
                length = max(
                    (unit @ deltas_by_min[a] @ unit) ** -0.5,
                    (unit @ deltas_by_min[b] @ unit) ** -0.5,
                )
                ratios.append(0.5 * dist / length)
            out[a, b] = out[b, a] = min(ratios)
    return out


def count_nnz(h, threshold: float | None = None) -> int:
    """Nonzero entries of a Hamiltonian: structural count for sparse storage,
    thresholded count (default ``1e-12 * max|H|``) for dense matrices."""
    if issparse(h):
        return int(h.nnz)
    h = np.asarray(h)
    if threshold is None:
        threshold = 1e-12 * (np.abs(h).max() if h.size else 0.0)
    return int((np.abs(h) > threshold).sum())


@dataclass(frozen=True)
class SpectrumResult:
    energies: np.ndarray
    retained_dim: int
    total_dim: int
    n_h: int
    epsilon_used: float
    scheme: Scheme
    sigma_max: int
    lambdas: np.ndarray | None
    minima: list


def solve_spectrum(
    spec: CircuitSpec,
    scheme: Scheme = Scheme.IP,
    sigma_max: int = 5,
    n_levels: int = 4,
    epsilon: float = 1e-3,
    delta_min: float = 1e-10,
    adaptive: bool = True,
    refine_tol: float = 1e-6,
    max_refine: int = 6,
    n_g=None,
    search_opts=None,
    minima_list=None,
) -> SpectrumResult:
    """End-to-end tight-binding solve: minima, modes, optional harmonic-length
    optimization, neighbor selection with adaptive overlap threshold, assembly
    and deflated eigensolve."""
    from .minima import find_minima
    from .modes import normal_modes

    scheme = Scheme(scheme)
    mins = minima_list if minima_list is not None else find_minima(spec, search_opts)
    raw_modes = [normal_modes(spec.ec_matrix, m.hessian) for m in mins]
    n_g = spec.offset_charges if n_g is None else np.asarray(n_g, dtype=float)
    lambdas = None
    modes_list = list(raw_modes)
    if scheme.anharmonic:
        basis_1 = fock.build_basis(spec.n_nodes, 0)
        opt_neighbors = select_neighbors(
            [mins[0]], [raw_modes[0]], epsilon=max(epsilon * 1e-3, 1e-12)
        )
        lambdas = anharmonic_optimize(
            spec, mins[0], raw_modes[0], basis_1, n_g, opt_neighbors
        )
        modes_list[0] = rescale(raw_modes[0], lambdas)
    ansatz = ansatz_modes(scheme, modes_list)
    basis = fock.build_basis(spec.n_nodes, sigma_max)
    eps = epsilon
    prev = None
    prev_entries = None
    result = None
    sys = None
    assemblies = 0
    eps_assembled = eps
    while True:
        neighbors = select_neighbors(mins, ansatz, eps)
        if prev_entries is not None and neighbors.entries == prev_entries:
            # Halving changed nothing; keep shrinking until new lattice
            # vectors actually enter before judging convergence.
            if eps <= 1e-15:
                break
            eps *= 0.5
            continue
        sys = assemble(spec, mins, modes_list, basis, scheme, neighbors, n_g)
        result = lowdin_solve(sys, delta_min=delta_min, k=n_levels)
        assemblies += 1
        eps_assembled = eps
        if not adaptive:
            break
        if prev is not None and len(prev) == len(result.energies):
            if np.abs(prev - result.energies).max() < refine_tol:
                break
        if assemblies > max_refine or eps <= 1e-15:
            break
        prev = result.energies
        prev_entries = neighbors.entries
        eps *= 0.5
    return SpectrumResult(
        energies=result.energies,
        retained_dim=result.retained_dim,
        total_dim=sys.dim,
        n_h=count_nnz(sys.h),
        epsilon_used=eps_assembled,
        scheme=scheme,
        sigma_max=sigma_max,
        lambdas=lambdas,
        minima=mins,
    )
