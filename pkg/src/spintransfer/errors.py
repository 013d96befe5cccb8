"""Exception types shared across the package."""


class SolverError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class FreeFermionError(ValueError):
    """A determinant-based amplitude was requested for a chain it does not describe.

    The minor engine is exact only for chains with zero zz-anisotropy; anything
    else must go through the exact block-evolution engine.
    """


class ResonanceError(RuntimeError):
    """The quasi-degenerate level cluster could not be identified."""


class MapValidationError(ValueError):
    """A dynamical map violates one of its physicality constraints."""


class MapConstructionError(RuntimeError):
    """An internally constructed map failed its own consistency checks (a bug)."""


class DimensionCapError(ValueError):
    """A requested exact computation exceeds the configured size limits."""
