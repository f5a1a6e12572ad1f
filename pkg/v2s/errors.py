"""
Exception hierarchy shared by every ``v2s`` module.

The CLI maps these onto process exit codes: user mistakes (bad configuration,
malformed files, failing external tools) exit with 1, numerical blow-ups and
anything unexpected exit with 2.
"""


class V2SError(Exception):
    """Base class for all errors raised by v2s."""


class ConfigurationError(V2SError, ValueError):
    pass


class ShapeError(V2SError, ValueError):
    pass


class FormatError(V2SError, ValueError):
    pass


class ManifestError(V2SError, ValueError):
    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AdapterError(V2SError, RuntimeError):
    def __init__(self, message: str, output: str = ""):
        if output:
            message = f"{message}\n--- tool output ---\n{output.rstrip()}"
        super().__init__(message)
        self.output = output


class MetricError(V2SError, ValueError):
    pass


class GradientError(V2SError, ValueError):
    pass


class CheckpointError(V2SError):
    pass


class CheckpointIntegrityError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class NonFiniteLossError(V2SError, FloatingPointError):
    def __init__(self, term: str, step: int, value: float):
        super().__init__(f"non-finite value {value!r} for loss term '{term}' at step {step}")
        self.term = term
        self.step = step
        self.value = value


USER_ERRORS = (ConfigurationError, ShapeError, FormatError, ManifestError, AdapterError, MetricError, CheckpointError)
