"""Exception types shared across the simulator."""


class XhammerError(Exception):
    """Base class for all simulator errors."""


class GridTooLarge(XhammerError):
    """Voxelization would exceed the voxel budget."""


class GeometryInconsistent(XhammerError):
    """Geometry fields contradict each other (e.g. filament wider than electrode)."""


class NoConvergence(XhammerError):
    """An iterative solve hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class SingularSystem(XhammerError):
    """The linear system has no unique solution (e.g. no Dirichlet voxels)."""


class SingularMatrix(XhammerError):
    """Nodal analysis matrix is singular (disconnected network)."""


class DegenerateFit(XhammerError):
    """Linear regression input has no spread in the independent variable."""


class VoltageOutOfRange(XhammerError):
    """Applied voltage outside the compact model's validity bound."""


class TemperatureOutOfRange(XhammerError):
    """Temperature outside the kinetic model's validity bound."""


class IndexOutOfRange(XhammerError):
    """Cell coordinates outside the crossbar."""


class ShapeMismatch(XhammerError):
    """Array arguments have inconsistent shapes."""


class ConfigInvalid(XhammerError):
    """Attack configuration cannot make progress."""


class FitDiverged(XhammerError):
    """Calibration search failed to bracket or converge."""


class ParseError(XhammerError):
    """Input file is not valid JSON."""


class ValidationError(XhammerError):
    """Config violates one or more invariants; carries all field paths."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__(
            "invalid config:\n" + "\n".join(f"  - {v}" for v in self.violations)
        )
