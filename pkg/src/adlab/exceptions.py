"""Exception hierarchy.

Every domain error raised by the library derives from :class:`AdlabError`,
so callers (the CLI in particular) can report the error name and exit with
a domain-error status without catching unrelated bugs.
"""


class AdlabError(ValueError):
    """Base class for all domain errors."""


class InvalidModel(AdlabError):
    pass


class DimError(AdlabError):
    pass


class InvalidBasis(AdlabError):
    pass


class InvalidInput(AdlabError):
    pass


class NotAdmissible(AdlabError):
    """Wavelet with nonzero mean; the Calderon integral diverges at 0."""


class ScaleOutOfRange(AdlabError):
    pass


class DegenerateInput(AdlabError):
    pass


class SingularGram(AdlabError):
    pass


class NumericalFailure(AdlabError):
    pass


class Aliasing(AdlabError):
    pass


class EdgeEnergy(AdlabError):
    pass


class IoError(AdlabError):
    pass


class FormatError(AdlabError):
    pass


class NotFittedError(AdlabError, AttributeError):
    pass
