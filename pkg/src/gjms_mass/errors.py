"""Exception types raised by the library."""


class GJMSError(ValueError):
    """Base class for all domain errors raised by gjms_mass."""


class DimensionError(GJMSError):
    pass


class SingularityError(GJMSError):
    """A kernel was evaluated on (or too close to) its diagonal."""


class ChartPoleError(GJMSError):
    """A point sits at the pole of a stereographic chart or an inversion."""


class NonFreeActionError(GJMSError):
    pass


class MetricUndefinedError(GJMSError):
    """The Habermann-Jost metric needs a strictly positive mass."""


class StencilDomainError(GJMSError):
    """A finite-difference stencil or quadrature region leaves the field's domain."""
