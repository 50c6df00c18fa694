"""Exact-diagonalization reference in the truncated charge basis.

Charge states are integer vectors with ``|n_i| <= n_cut``.  The kinetic term
is diagonal; each cosine term splits into two charge-shift operators, so the
Hamiltonian is assembled directly in sparse coordinate form from shift index
arithmetic, never materializing Kronecker factors.  Low eigenvalues come from
a Lanczos-type iterative solver (dense diagonalization for small dimensions),
and relative-deviation metrics compare approximate spectra against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .circuit import CircuitSpec
from .exceptions import DimensionOverflow, NoConvergence, ZeroExactEnergy

__all__ = [
    "ChargeBasisConfig",
    "EtaReport",
    "build_sparse_h",
    "lowest_eigs",
    "eta_metrics",
    "converged_reference",
]

_DENSE_CUTOFF = 900


@dataclass(frozen=True)
class ChargeBasisConfig:
    """Charge cutoff and solve size; the dimension cap guards memory."""

    n_cut: int
    k: int = 4
    max_dim: int = 2_000_000

    def __post_init__(self):
        if self.n_cut < 1:
            raise ValueError("n_cut must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")


def _charge_grid(n_nodes: int, n_cut: int) -> tuple:
    """Flat index <-> charge-vector digits, last node fastest."""
    pts = 2 * n_cut + 1
    dim = pts**n_nodes
    radix = pts ** np.arange(n_nodes - 1, -1, -1)
    digits = (np.arange(dim)[:, None] // radix) % pts
    return digits - n_cut, radix, pts


def build_sparse_h(spec: CircuitSpec, config: ChargeBasisConfig) -> csr_matrix:
    """Sparse Hermitian circuit Hamiltonian in the charge representation."""
    n = spec.n_nodes
    pts = 2 * config.n_cut + 1
    dim = pts**n
    if dim > config.max_dim:
        raise DimensionOverflow(
            f"charge basis dimension {dim} exceeds the cap of {config.max_dim}"
        )
    charges, radix, _ = _charge_grid(n, config.n_cut)
    shifted = charges - spec.offset_charges
    diag = 4.0 * np.einsum("si,ij,sj->s", shifted, spec.ec_matrix, shifted)
    complex_needed = any(abs(np.sin(t.phase_offset)) > 1e-14 for t in spec.cosine_terms)
    dtype = np.complex128 if complex_needed else np.float64
    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [(diag + spec.energy_shift).astype(dtype)]
    for term in spec.cosine_terms:
        w = np.array(term.weights)
        target = charges + w
        ok = np.all(np.abs(target) <= config.n_cut, axis=1)
        src = np.nonzero(ok)[0]
        dst = (target[ok] + config.n_cut) @ radix
        amp = -0.5 * term.amplitude * np.exp(1j * term.phase_offset)
        if dtype is np.float64:
            amp = amp.real
        # raising shift and its Hermitian partner
        rows += [dst, src]
        cols += [src, dst]
        vals += [np.full(len(src), amp, dtype=dtype), np.full(len(src), np.conj(amp), dtype=dtype)]
    mat = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    return mat


def _norm_lower_bound(h: csr_matrix, iterations: int = 12) -> float:
    """Deterministic power-iteration lower bound on the spectral norm."""
    vec = np.ones(h.shape[0]) / np.sqrt(h.shape[0])
    if h.dtype == np.complex128:
        vec = vec.astype(np.complex128)
    estimate = 0.0
    for _ in range(iterations):
        nxt = h @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0:
            return 0.0
        estimate = norm
        vec = nxt / norm
    return float(estimate)


def lowest_eigs(h, k: int) -> np.ndarray:
    """The ``k`` smallest eigenvalues of a Hermitian matrix, ascending.

    Small problems are solved densely; larger ones use implicitly restarted
    Lanczos with a deterministic start vector, and the residuals are checked
    against ``1e-8 * ||H||``.
    """
    dim = h.shape[0]
    if k < 1 or k > dim:
        raise ValueError("k must lie in 1..dim")
    if dim <= max(_DENSE_CUTOFF, 2 * k + 2):
        dense = h.toarray() if hasattr(h, "toarray") else np.asarray(h)
        return np.linalg.eigvalsh(dense)[:k]
    v0 = np.ones(dim) / np.sqrt(dim)
    try:
        vals, vecs = eigsh(
            h,
            k=k,
            which="SA",
            v0=v0,
            ncv=min(dim - 1, max(4 * k + 20, 60)),
            maxiter=20_000,
            tol=1e-12,
        )
    except ArpackNoConvergence as exc:
        raise NoConvergence(
            f"Lanczos stalled with {len(exc.eigenvalues)} of {k} pairs converged"
        ) from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    norm_bound = max(_norm_lower_bound(h), np.abs(vals).max())
    residuals = np.linalg.norm(h @ vecs - vecs * vals, axis=0)
    if residuals.max() > 1e-8 * norm_bound:
        raise NoConvergence(
            f"worst residual {residuals.max():.3e} exceeds 1e-8 * |H| ~ {1e-8 * norm_bound:.3e}"
        )
    return vals


@dataclass(frozen=True)
class EtaReport:
    """Relative deviations of an approximate spectrum from a reference one,
    over the lowest four levels (or all levels when fewer are available)."""

    eta_avg: float
    eta_min: float
    eta_max: float
    deviations: np.ndarray
    n_levels: int

    @property
    def fewer_than_four(self) -> bool:
        return self.n_levels < 4


def eta_metrics(approx, exact) -> EtaReport:
    """Signed relative deviations ``(E_i - eps_i) / eps_i`` and their
    average / extrema over the lowest four levels."""
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape or approx.ndim != 1 or len(approx) < 1:
        raise ValueError("approximate and exact spectra must be equal-length vectors")
    if np.any(exact == 0):
        raise ZeroExactEnergy("reference spectrum contains a zero energy")
    m = min(4, len(exact))
    devs = (approx[:m] - exact[:m]) / exact[:m]
    return EtaReport(
        eta_avg=float(devs.mean()),
        eta_min=float(devs.min()),
        eta_max=float(devs.max()),
        deviations=devs,
        n_levels=m,
    )


def converged_reference(
    spec: CircuitSpec,
    k: int = 4,
    tol: float = 1e-6,
    start_ncut: int = 3,
    max_ncut: int = 16,
    max_dim: int = 2_000_000,
) -> tuple:
    """Charge-basis spectrum at the first cutoff where one further increase
    moves no requested level by more than ``tol`` (GHz).

    Returns ``(eigenvalues, n_cut)`` for the larger of the two agreeing
    cutoffs.
    """
    prev = None
    prev_ncut = None
    for n_cut in range(start_ncut, max_ncut + 1):
        config = ChargeBasisConfig(n_cut=n_cut, k=k, max_dim=max_dim)
        try:
            vals = lowest_eigs(build_sparse_h(spec, config), k)
        except DimensionOverflow:
            if prev is not None:
                raise NoConvergence(
                    f"hit the dimension cap before {tol} GHz agreement "
                    f"(last change at n_cut={prev_ncut})"
                )
            raise
        if prev is not None and np.abs(vals - prev).max() < tol:
            return vals, n_cut
        prev, prev_ncut = vals, n_cut
    raise NoConvergence(f"no {tol} GHz agreement reached by n_cut={max_ncut}")
