"""Exception types raised across the package."""


class SctbError(Exception):
    """Base class for all package-specific errors."""


class NoMinimaFound(SctbError):
    """No potential minimum could be located from any descent seed."""


class DegenerateHessian(SctbError):
    """A stationary point has a curvature eigenvalue too close to zero to
    classify reliably."""


class NotPositiveDefinite(SctbError):
    """A matrix required to be symmetric positive definite is not."""


class DimensionOverflow(SctbError):
    """A requested basis or matrix exceeds the configured size cap."""


class SingularU(SctbError):
    """The Bogoliubov u block is singular or has no real logarithm."""


class NearSingularP(SctbError):
    """An intermediate (1 - X X') style matrix in the normal-ordering algebra
    is too ill-conditioned to invert."""


class NeighborExplosion(SctbError):
    """Neighbor search produced more lattice-vector entries than the cap."""


class AllDeflated(SctbError):
    """Every overlap-matrix eigenvalue fell below the deflation cutoff."""


class BlockMismatch(SctbError):
    """Inconsistent dimensions between basis, minima and mode data."""


class OptimizerDiverged(SctbError):
    """Harmonic-length optimization failed to make progress."""


class NoConvergence(SctbError):
    """Iterative eigensolver did not converge to the requested residual."""


class ZeroExactEnergy(SctbError):
    """Relative deviations are undefined for a zero reference energy."""
