"""Exception hierarchy shared by the toolchain."""


class MMPUError(Exception):
    """Base class for every error raised by this package."""


class SampledParamsInvalid(MMPUError):
    pass


class IndexOutOfBounds(MMPUError, IndexError):
    pass


class EmptyInputs(MMPUError, ValueError):
    pass


class TraceSyntaxError(MMPUError, ValueError):
    """Malformed trace text. ``lineno`` is 1-based, or None when unknown."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DimensionError(TraceSyntaxError):
    pass


class NetlistSyntaxError(MMPUError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class UnsupportedBlifFeature(NetlistSyntaxError):
    pass


class CycleDetected(MMPUError, ValueError):
    pass


class MissingInput(MMPUError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no value assigned to input {name!r}")

    def __str__(self):
        return self.args[0]


class RowCapacityExceeded(MMPUError):
    def __init__(self, needed, available):
        self.needed = needed
        self.available = available
        super().__init__(
            f"row capacity exceeded: schedule needs {needed} cells, row has {available}"
        )


class UninitializedOutput(MMPUError):
    def __init__(self, op_index, cells=()):
        self.op_index = op_index
        self.cells = tuple(cells)
        super().__init__(
            f"op {op_index}: NOR output not initialized to logical 1 at {list(self.cells)[:8]}"
        )


class ArityMismatch(MMPUError, ValueError):
    pass


class ConfigError(MMPUError, ValueError):
    pass
