"""Tight-binding spectra of superconducting circuits with periodic potentials.

Build a :class:`~sctb.circuit.CircuitSpec` (directly or from the factory
constructors / config files), then either run the high-level
:func:`~sctb.vtb.solve_spectrum` or drive the individual stages: minima
search, normal modes, Fock-space matrix elements, assembly and the deflated
generalized eigensolve.  :mod:`sctb.chargebasis` provides the independent
charge-basis diagonalization used for validation.
"""

from . import chargebasis, circuit, cli, fock, minima, modes, vtb
from ._kernels import USING_NUMBA
from .chargebasis import (
    ChargeBasisConfig,
    EtaReport,
    build_sparse_h,
    converged_reference,
    eta_metrics,
    lowest_eigs,
)
from .circuit import (
    CircuitSpec,
    CosineTerm,
    current_mirror_spec,
    flux_qubit_spec,
    load_circuit,
    potential,
    potential_gradient,
    potential_hessian,
)
from .fock import FockBasis, SqueezeData, bogoliubov, build_basis
from .minima import Minimum, SearchOptions, canonicalize, find_minima
from .modes import ModeData, normal_modes, rescale
from .vtb import (
    NeighborList,
    Scheme,
    SpectrumResult,
    TBSystem,
    assemble,
    count_nnz,
    gs_overlap,
    localization_ratios,
    lowdin_solve,
    select_neighbors,
    solve_spectrum,
)

__version__ = "0.1.0"
