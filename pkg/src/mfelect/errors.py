"""Exception hierarchy shared by every stage of the pipeline."""


class MFElectError(Exception):
    """Base class. ``kind`` is the machine-readable error class."""

    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class InputError(MFElectError):
    kind = "input_error"


class ParameterError(MFElectError, ValueError):
    kind = "parameter_error"


class ConvergenceError(MFElectError):
    kind = "convergence_error"

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations

    def to_dict(self):
        d = super().to_dict()
        d["residual"] = self.residual
        d["iterations"] = self.iterations
        return d


class DegenerateDataError(MFElectError, ValueError):
    kind = "degenerate_data"


class SeriesTooShortError(DegenerateDataError):
    kind = "series_too_short"
