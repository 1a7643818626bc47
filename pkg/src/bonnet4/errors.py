"""Exception hierarchy.

Everything raised on purpose by the package derives from ``Bonnet4Error`` so
the CLI can map it to exit code 2 (bad input) without swallowing real bugs.
"""


class Bonnet4Error(Exception):
    """Base class for expected, user-facing failures."""


class DegenerateFrameError(Bonnet4Error):
    pass


class NonIsothermalError(Bonnet4Error):
    def __init__(self, msg, node=None):
        super().__init__(msg)
        self.node = node


class ImmersionDegeneracyError(Bonnet4Error):
    def __init__(self, msg, node=None):
        super().__init__(msg)
        self.node = node


class GridFormatError(Bonnet4Error):
    """Malformed or inconsistent Surface Grid JSON."""


class ParameterError(Bonnet4Error):
    """Unknown example or parameter out of range."""


class InconsistencyError(Bonnet4Error):
    """Curvature data violate an inequality they must satisfy."""


class PreconditionError(Bonnet4Error):
    pass


class UnsupportedAmbientError(Bonnet4Error):
    """Operation only implemented for the flat ambient space (c = 0)."""


class NonLagrangianError(Bonnet4Error):
    pass


class NotParallelError(Bonnet4Error):
    """Two-parameter deformation requested on a surface whose H is not parallel."""


class IntegrationInconsistencyError(Bonnet4Error):
    pass


class MeanCurvatureMismatch(Bonnet4Error):
    """The two surfaces of a pair do not share metric and |H|."""


class IsometryUndeterminedError(Bonnet4Error):
    """Normal bundle isometry cannot be pinned down (no usable H region)."""


class InvalidPairError(Bonnet4Error):
    """Distortion ratio off the unit circle about 1: not a same-mean-curvature pair."""
