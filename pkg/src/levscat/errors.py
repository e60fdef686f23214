"""Exception types shared across the toolkit."""


class LevscatError(Exception):
    """Base class for all toolkit errors."""


class PositivityViolation(LevscatError):
    """Smallest angular eigenvalue fails lambda_1 > -(n-2)^2/4."""


class UnsupportedAngular(LevscatError):
    """Non-constant angular potential requested in dimension n >= 3."""


class DomainError(LevscatError):
    """Argument outside the supported domain of a special function."""


class PoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class StiffnessFailure(LevscatError):
    """Radial integrator step size collapsed."""


class IllConditioned(LevscatError):
    """Zero-energy power matching is too ill conditioned to trust."""


class NoBracket(LevscatError):
    """Root bracketing failed: both endpoints have the same sign."""


class NotResonant(LevscatError):
    """Resonance normalization requested for a non-resonant channel."""


class BranchError(LevscatError):
    """Spectral parameter on the positive real axis (branch cut)."""


class NoConvergence(LevscatError):
    """Richardson/fit extraction did not stabilize to tolerance."""


class TruncationTooCoarse(LevscatError):
    """Channel truncation error bound exceeds the allowed budget."""


class PoorFit(LevscatError):
    """Counterterm fit residual is too large for the window."""


class UnresolvedBranch(LevscatError):
    """Phase-curve refinement exhausted its evaluation budget."""


class OddDimension(LevscatError):
    """Heat-coefficient correction requested for an unsupported dimension."""
