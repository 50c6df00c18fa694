"""Circuit Hamiltonian definitions.

A circuit is specified by its charging-energy matrix (the kinetic term is
``sum_ij (n_i - ng_i) 4 EC_ij (n_j - ng_j)``), a list of cosine potential
terms ``-E cos(w . phi + phase)`` with integer weight vectors ``w``, a
constant energy shift, and offset charges.  All energies are frequencies in
GHz (E/h); phases are in radians.  Integer weights make the potential exactly
2*pi-periodic along every node axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "CosineTerm",
    "CircuitSpec",
    "potential",
    "potential_gradient",
    "potential_hessian",
    "flux_qubit_spec",
    "current_mirror_spec",
    "spec_from_dict",
    "spec_to_dict",
    "load_circuit",
]


@dataclass(frozen=True)
class CosineTerm:
    """One potential contribution ``-amplitude * cos(weights . phi + phase_offset)``."""

    amplitude: float
    weights: tuple
    phase_offset: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if not np.allclose(w, np.round(w), atol=1e-12):
            raise ValueError("weights must be integers for a 2*pi-periodic potential")
        if not np.any(np.round(w) != 0):
            raise ValueError("weights must not all be zero")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        object.__setattr__(self, "weights", tuple(int(x) for x in np.round(w)))

    @property
    def weight_vector(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)


@dataclass(frozen=True)
class CircuitSpec:
    """Hamiltonian data for a circuit with periodic degrees of freedom.

    Parameters
    ----------
    n_nodes:
        Number of periodic node variables N.
    ec_matrix:
        N x N symmetric positive-definite charging-energy matrix in GHz.
    cosine_terms:
        Potential terms; see :class:`CosineTerm`.
    offset_charges:
        Offset charge vector in Cooper-pair units.
    energy_shift:
        Constant added to the potential (GHz), conventionally chosen so the
        spectrum is positive.
    """

    n_nodes: int
    ec_matrix: np.ndarray
    cosine_terms: tuple
    offset_charges: np.ndarray = None
    energy_shift: float = 0.0
    name: str = "circuit"

    def __post_init__(self):
        n = int(self.n_nodes)
        if n < 1:
            raise ValueError("n_nodes must be a positive integer")
        ec = np.array(self.ec_matrix, dtype=float)
        if ec.shape != (n, n):
            raise ValueError(f"ec_matrix must be {n}x{n}, got {ec.shape}")
        scale = max(np.abs(ec).max(), 1e-300)
        if np.abs(ec - ec.T).max() > 1e-12 * scale:
            raise ValueError("ec_matrix must be symmetric to 1e-12 relative tolerance")
        ec = 0.5 * (ec + ec.T)
        if np.linalg.eigvalsh(ec).min() <= 0:
            raise ValueError("ec_matrix must be positive definite")
        terms = tuple(
            t if isinstance(t, CosineTerm) else CosineTerm(*t) for t in self.cosine_terms
        )
        for t in terms:
            if len(t.weights) != n:
                raise ValueError("cosine term weight vector has wrong length")
        ng = self.offset_charges
        ng = np.zeros(n) if ng is None else np.array(ng, dtype=float)
        if ng.shape != (n,):
            raise ValueError("offset_charges must have length n_nodes")
        object.__setattr__(self, "n_nodes", n)
        object.__setattr__(self, "ec_matrix", ec)
        object.__setattr__(self, "cosine_terms", terms)
        object.__setattr__(self, "offset_charges", ng)

    @cached_property
    def _weight_matrix(self) -> np.ndarray:
        """Stacked term weights, shape (n_terms, N)."""
        return np.array([t.weights for t in self.cosine_terms], dtype=float)

    @cached_property
    def _amplitudes(self) -> np.ndarray:
        return np.array([t.amplitude for t in self.cosine_terms], dtype=float)

    @cached_property
    def _phases(self) -> np.ndarray:
        return np.array([t.phase_offset for t in self.cosine_terms], dtype=float)

    def with_offset_charges(self, ng) -> "CircuitSpec":
        return CircuitSpec(
            self.n_nodes, self.ec_matrix, self.cosine_terms, ng, self.energy_shift, self.name
        )


def potential(spec: CircuitSpec, phi) -> np.ndarray:
    """Potential energy in GHz at node phases ``phi``.

    ``phi`` may carry leading batch dimensions; the last axis is the node
    axis.  Returns a scalar for a single point.
    """
    phi = np.asarray(phi, dtype=float)
    args = phi @ spec._weight_matrix.T + spec._phases
    val = spec.energy_shift - np.cos(args) @ spec._amplitudes
    return val if val.ndim else float(val)


def potential_gradient(spec: CircuitSpec, phi) -> np.ndarray:
    """Analytic gradient of :func:`potential` with respect to ``phi``."""
    phi = np.asarray(phi, dtype=float)
    args = phi @ spec._weight_matrix.T + spec._phases
    return (spec._amplitudes * np.sin(args)) @ spec._weight_matrix


def potential_hessian(spec: CircuitSpec, phi) -> np.ndarray:
    """Analytic Hessian of :func:`potential`; symmetric by construction."""
    phi = np.asarray(phi, dtype=float)
    args = phi @ spec._weight_matrix.T + spec._phases
    coefs = spec._amplitudes * np.cos(args)
    w = spec._weight_matrix
    return np.einsum("...t,ti,tj->...ij", coefs, w, w)


def flux_qubit_spec(
    ej: float,
    ecj: float,
    ecg: float,
    alpha: float,
    flux_frac: float = 0.0,
    ng1: float = 0.0,
    ng2: float = 0.0,
) -> CircuitSpec:
    """Three-junction flux qubit with two identical junctions and one reduced
    by a factor ``alpha``.

    Parameters
    ----------
    ej, ecj, ecg:
        Junction energy, junction charging energy and island-to-ground
        charging energy, all in GHz.
    alpha:
        Size ratio of the third junction, in (0, 1].
    flux_frac:
        External flux as a fraction of the flux quantum.
    """
    if ej <= 0 or ecj <= 0 or ecg <= 0:
        raise ValueError("energies must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    # Capacitance matrix in units of e^2/2 (entries carry 1/GHz); the two
    # islands see both junction capacitances plus the ground capacitance.
    c = np.array(
        [
            [(1 + alpha) / ecj + 1.0 / ecg, -alpha / ecj],
            [-alpha / ecj, (1 + alpha) / ecj + 1.0 / ecg],
        ]
    )
    ec = np.linalg.inv(c)
    phi_ext = 2 * np.pi * flux_frac
    terms = (
        CosineTerm(ej, (1, 0)),
        CosineTerm(ej, (0, 1)),
        CosineTerm(alpha * ej, (1, -1), phi_ext),
    )
    return CircuitSpec(
        2, ec, terms, (ng1, ng2), energy_shift=ej * (2 + alpha), name="flux_qubit"
    )


def current_mirror_spec(
    n_big: int,
    ecb: float,
    ecj: float,
    ecg: float,
    ej: float,
    flux_frac: float = 0.0,
    ng=0.0,
) -> CircuitSpec:
    """Current-mirror circuit with ``n_big`` big capacitors.

    The circuit is a ring of ``2 n_big`` junctions (each with junction
    capacitance), big capacitors joining diametrically opposite islands, and a
    ground capacitor on every island.  Junction phase differences around the
    ring serve as the ``2 n_big - 1`` independent periodic variables; the
    charging-energy matrix is obtained by inverting the island capacitance
    matrix and conjugating with the difference map.
    """
    if n_big < 2:
        raise ValueError("n_big must be at least 2")
    if min(ecb, ecj, ecg, ej) <= 0:
        raise ValueError("energies must be positive")
    n_islands = 2 * n_big
    n = n_islands - 1
    # Capacitances in units of e^2/2: c_x = 1 / E_Cx.
    cj, cb, cg = 1.0 / ecj, 1.0 / ecb, 1.0 / ecg
    c_node = cg * np.eye(n_islands)
    for k in range(n_islands):
        for other, cap in (((k + 1) % n_islands, cj), ((k + n_big) % n_islands, cb)):
            c_node[k, k] += cap
            c_node[k, other] -= cap
    # phi_i = psi_i - psi_{i-1} for i = 1..2*n_big-1; the ring-closing
    # junction phase is -(phi_1 + ... + phi_{2nb-1}).
    diff = np.zeros((n, n_islands))
    for i in range(1, n_islands):
        diff[i - 1, i] = 1.0
        diff[i - 1, i - 1] = -1.0
    ec = diff @ np.linalg.inv(c_node) @ diff.T
    ec = 0.5 * (ec + ec.T)
    phase = -2 * np.pi * flux_frac / n_islands
    terms = [CosineTerm(ej, tuple(np.eye(n, dtype=int)[i]), phase) for i in range(n)]
    terms.append(CosineTerm(ej, (1,) * n, phase))
    ng_vec = np.full(n, float(ng)) if np.ndim(ng) == 0 else np.asarray(ng, dtype=float)
    return CircuitSpec(
        n, ec, tuple(terms), ng_vec, energy_shift=n_islands * ej, name="current_mirror"
    )


_PRESETS = {"flux_qubit": flux_qubit_spec, "current_mirror": current_mirror_spec}

_PRESET_KEYS = {
    "flux_qubit": ("ej", "ecj", "ecg", "alpha", "flux_frac", "ng1", "ng2"),
    "current_mirror": ("n_big", "ecb", "ecj", "ecg", "ej", "flux_frac", "ng"),
}


def spec_from_dict(data: dict) -> CircuitSpec:
    """Build a :class:`CircuitSpec` from a parsed configuration document.

    Either a ``preset`` key (``flux_qubit`` or ``current_mirror``) with its
    parameter sub-keys, or explicit ``n_nodes`` / ``ec_matrix`` /
    ``cosine_terms`` / ``offset_charges`` / ``energy_shift_ghz`` keys.
    """
    if "preset" in data:
        preset = data["preset"]
        if preset not in _PRESETS:
            raise ValueError(f"unknown preset {preset!r}")
        params = data.get("parameters", {k: v for k, v in data.items() if k != "preset"})
        allowed = _PRESET_KEYS[preset]
        unknown = set(params) - set(allowed)
        if unknown:
            raise ValueError(f"unknown {preset} parameters: {sorted(unknown)}")
        return _PRESETS[preset](**params)
    try:
        terms = tuple(
            CosineTerm(t["amplitude_ghz"], tuple(t["weights"]), t.get("phase_offset", 0.0))
            for t in data["cosine_terms"]
        )
        return CircuitSpec(
            data["n_nodes"],
            np.array(data["ec_matrix"], dtype=float),
            terms,
            data.get("offset_charges"),
            data.get("energy_shift_ghz", 0.0),
            name=data.get("name", "circuit"),
        )
    except KeyError as exc:
        raise ValueError(f"circuit config is missing required key {exc}") from exc


def spec_to_dict(spec: CircuitSpec) -> dict:
    return {
        "name": spec.name,
        "n_nodes": spec.n_nodes,
        "ec_matrix": spec.ec_matrix.tolist(),
        "cosine_terms": [
            {
                "amplitude_ghz": t.amplitude,
                "weights": list(t.weights),
                "phase_offset": t.phase_offset,
            }
            for t in spec.cosine_terms
        ],
        "offset_charges": spec.offset_charges.tolist(),
        "energy_shift_ghz": spec.energy_shift,
    }


def load_circuit(path) -> CircuitSpec:
    """Read a circuit description file (UTF-8 JSON document)."""
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))
