"""Location of potential minima in the central unit cell [-pi, pi)^N.

The search runs damped-Newton descents from a regular grid of seeds plus
structured seeds along the cell diagonal (where highly symmetric circuits
place their minima), deduplicates the survivors modulo 2*pi, polishes each
candidate with a trust-region minimizer and classifies it by its Hessian.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .circuit import CircuitSpec, potential, potential_gradient, potential_hessian
from .exceptions import DegenerateHessian, NoMinimaFound

__all__ = ["SearchOptions", "Minimum", "canonicalize", "find_minima"]


@dataclass(frozen=True)
class SearchOptions:
    """Tolerances and seeding for the minima search.

    grid_points defaults to 6 per axis for N <= 4 and 3 per axis above that;
    diagonal_points seeds equal-component vectors c*(1,...,1) which cover the
    high-symmetry stationary points of ring-like circuits.
    """

    grad_tol: float = 1e-9
    dedup_tol: float = 1e-6
    hess_floor: float = 1e-8
    grid_points: int | None = None
    diagonal_points: int = 24
    descent_iterations: int = 80
    extra_seeds: tuple = ()

    def grid_for(self, n_nodes: int) -> int:
        if self.grid_points is not None:
            return self.grid_points
        return 6 if n_nodes <= 4 else 3


@dataclass(frozen=True)
class Minimum:
    """A verified potential minimum.

    Attributes
    ----------
    index:
        Position in the value-sorted list of minima (0 is a global minimum).
    theta:
        Location in the central unit cell.
    value:
        Potential at ``theta`` in GHz.
    hessian:
        Symmetric positive-definite second-derivative matrix at ``theta``.
    """

    index: int
    theta: np.ndarray
    value: float
    hessian: np.ndarray


def canonicalize(theta) -> np.ndarray:
    """Wrap phases componentwise into [-pi, pi); idempotent."""
    theta = np.asarray(theta, dtype=float)
    return np.mod(theta + np.pi, 2 * np.pi) - np.pi


def _seed_points(spec: CircuitSpec, opts: SearchOptions) -> np.ndarray:
    n = spec.n_nodes
    g = opts.grid_for(n)
    axis = np.linspace(-np.pi, np.pi, g, endpoint=False)
    grid = np.array(list(itertools.product(axis, repeat=n)))
    diag = np.linspace(-np.pi, np.pi, opts.diagonal_points, endpoint=False)
    diag_seeds = diag[:, None] * np.ones(n)
    seeds = [grid, diag_seeds]
    if n <= 4:
        sym = (0.0, 2 * np.pi / 3, -2 * np.pi / 3, np.pi)
        seeds.append(np.array(list(itertools.product(sym, repeat=n))))
    if opts.extra_seeds:
        seeds.append(np.atleast_2d(np.asarray(opts.extra_seeds, dtype=float)))
    return np.vstack(seeds)


def _batched_descent(spec: CircuitSpec, seeds: np.ndarray, iterations: int) -> np.ndarray:
    """Levenberg-damped Newton iterations run on all seeds at once."""
    n = seeds.shape[1]
    x = seeds.copy()
    damping = np.full(len(x), 1e-2)
    fx = np.atleast_1d(potential(spec, x))
    eye = np.eye(n)
    for _ in range(iterations):
        grad = potential_gradient(spec, x)
        hess = potential_hessian(spec, x)
        shifted = hess + damping[:, None, None] * eye
        try:
            step = -np.linalg.solve(shifted, grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            damping *= 10.0
            continue
        xn = x + step
        fn = np.atleast_1d(potential(spec, xn))
        accept = fn <= fx
        damping = np.clip(np.where(accept, damping * 0.4, damping * 5.0), 1e-12, 1e8)
        x = np.where(accept[:, None], xn, x)
        fx = np.where(accept, fn, fx)
    return x


def _cluster(points: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group canonicalized points whose minimum-image distance is below tol."""
    reps: list[np.ndarray] = []
    for p in points:
        for r in reps:
            delta = canonicalize(p - r)
            if np.linalg.norm(delta) < tol:
                break
        else:
            reps.append(p)
    return reps


def find_minima(spec: CircuitSpec, opts: SearchOptions | None = None) -> list[Minimum]:
    """Locate all distinct potential minima in the central unit cell.

    Returns minima sorted by value ascending, ties broken lexicographically by
    location, so index 0 is a global minimum.  Raises
    :class:`~sctb.exceptions.NoMinimaFound` when every descent fails and
    :class:`~sctb.exceptions.DegenerateHessian` when a stationary point cannot
    be classified against ``hess_floor``.
    """
    opts = opts or SearchOptions()
    seeds = _seed_points(spec, opts)
    settled = _batched_descent(spec, seeds, opts.descent_iterations)
    grads = np.linalg.norm(potential_gradient(spec, settled), axis=1)
    candidates = canonicalize(settled[grads < 1e-4])
    if len(candidates) == 0:
        raise NoMinimaFound("no descent reached a stationary point")

    minima: list[tuple[np.ndarray, float, np.ndarray]] = []
    for rep in _cluster(candidates, tol=1e-3):
        # Skip plainly saddle-like candidates before polishing; descents parked
        # on symmetric stationary points land here and would be dropped anyway.
        if np.linalg.eigvalsh(potential_hessian(spec, rep)).min() < -10 * opts.hess_floor:
            continue
        try:
            result_x = optimize.minimize(
                lambda x: potential(spec, x),
                rep,
                jac=lambda x: potential_gradient(spec, x),
                hess=lambda x: potential_hessian(spec, x),
                method="trust-exact",
                options={"gtol": 0.1 * opts.grad_tol, "maxiter": 400},
            ).x
        except (ValueError, np.linalg.LinAlgError):
            result_x = rep
        # Plain Newton refinement: the trust-region solver stops on step size,
        # short of grad_tol; near a clean minimum Newton converges quadratically.
        point = result_x
        for _ in range(8):
            grad = potential_gradient(spec, point)
            if np.linalg.norm(grad) < 0.01 * opts.grad_tol:
                break
            try:
                point = point - np.linalg.solve(potential_hessian(spec, point), grad)
            except np.linalg.LinAlgError:
                break
        theta = canonicalize(point)
        if np.linalg.norm(potential_gradient(spec, theta)) >= opts.grad_tol:
            continue
        hess = potential_hessian(spec, theta)
        min_eig = np.linalg.eigvalsh(hess).min()
        if min_eig < -opts.hess_floor:
            continue  # saddle or maximum
        if min_eig <= opts.hess_floor:
            raise DegenerateHessian(
                f"stationary point {theta} has curvature eigenvalue {min_eig:.3e} "
                f"within +/-{opts.hess_floor:g} of zero"
            )
        minima.append((theta, float(potential(spec, theta)), hess))

    if not minima:
        raise NoMinimaFound("descents converged only to saddle points")

    # Deduplicate once more at the final tolerance, then order by value with a
    # lexicographic tie-break on location for deterministic indexing.
    deduped: list[tuple[np.ndarray, float, np.ndarray]] = []
    for cand in minima:
        if all(
            np.linalg.norm(canonicalize(cand[0] - kept[0])) > opts.dedup_tol
            for kept in deduped
        ):
            deduped.append(cand)
    deduped.sort(key=lambda m: (round(m[1], 9),) + tuple(np.round(m[0], 9)))
    return [
        Minimum(index=i, theta=theta, value=value, hessian=hess)
        for i, (theta, value, hess) in enumerate(deduped)
    ]
