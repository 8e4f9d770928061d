"""Exception hierarchy.

Numerical-guard errors (everything below ``NumericalGuardError``) map to CLI
exit code 3; ``ConfigError`` maps to exit code 2.
"""


class CrmatrixError(Exception):
    """Base class for all package errors."""


class ConfigError(CrmatrixError):
    """Invalid or malformed run configuration. Names the offending key."""


class NumericalGuardError(CrmatrixError):
    """A computation refused to proceed because its preconditions failed."""


class DegenerateRibbon(NumericalGuardError):
    """Band crossing below the gap tolerance; the coefficient field is
    discontinuous there and band indexing is meaningless."""


class NonHermitianInput(NumericalGuardError):
    """An input matrix field violates Hermiticity beyond tolerance."""


class ZeroOverlap(NumericalGuardError):
    """A consecutive overlap in a phase product is numerically zero."""


class UndefinedShift(NumericalGuardError):
    """Off-diagonal position element too small (or its phase unresolved);
    the phase derivative entering the shift vector is meaningless."""


class MissingEnergies(NumericalGuardError):
    """Band energies are required but absent from the field."""


class BranchTrackingError(NumericalGuardError):
    """Branch continuation between parameter slices jumped by more than pi."""


class UnderResolvedGrid(NumericalGuardError):
    """Plaquette invariant rounding residue too large; refine the grid."""
