"""Exception hierarchy shared by all densim modules."""


class DensimError(Exception):
    """Base class for every error raised by densim."""


class ConfigurationError(DensimError, ValueError):
    """Invalid window, scaling rule, sweep grid or configuration file."""


class DomainError(DensimError, ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(DensimError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class NoServingBSError(DensimError):
    """The realization holds no base station to serve the tagged user."""


class InsufficientPointsError(DensimError, IndexError):
    """The realization has fewer points than the requested order statistic."""


class InsufficientDataError(DensimError, ValueError):
    """Too few sweep rows for the requested estimate."""


class UnsupportedConfigurationError(DensimError, ValueError):
    """A scenario configuration outside the modelled regime (e.g. N_r > N_t)."""


class InfeasibleModelError(DensimError):
    """The path-loss model is not physically feasible.

    ``report`` carries the :class:`~densim.pathloss.FeasibilityReport` when
    one was computed.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericError(DensimError, ArithmeticError):
    """Quadrature or iteration failure.

    ``diagnostics`` is a dict with whatever state helps reproduce the failure.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
