"""Exception types raised across shiftcast."""


class ShiftcastError(Exception):
    """Base class for all library errors."""


class DataError(ShiftcastError):
    """Problems with input series or window configuration."""


class EmptyFile(DataError):
    pass


class RaggedRows(DataError):
    pass


class NonNumericCell(DataError):
    def __init__(self, row: int, col: int, text: str):
        self.row, self.col, self.text = row, col, text
        super().__init__(f"non-numeric cell at row {row}, column {col}: {text!r}")


class SliceTooShort(DataError):
    def __init__(self, name: str, length: int, required: int):
        self.name, self.length, self.required = name, length, required
        super().__init__(f"{name} slice has {length} steps, needs at least {required}")


class InvalidWindow(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class SingularRegression(DataError):
    pass


class UnstableRegime(DataError):
    def __init__(self, index: int, radius: float):
        self.index, self.radius = index, radius
        super().__init__(f"regime {index} is not stationary (spectral radius {radius:.4f} >= 1)")


class ShapeMismatch(ShiftcastError, ValueError):
    pass


class NegativeVariance(ShiftcastError, ValueError):
    pass


class NonFiniteValue(ShiftcastError, FloatingPointError):
    pass


class NonFiniteGradient(NonFiniteValue):
    pass


class NonFiniteLoss(NonFiniteValue):
    pass


class AlphaOutOfRange(ShiftcastError, ValueError):
    pass


class UnknownAblation(ShiftcastError, ValueError):
    pass


class EmptyDataset(ShiftcastError):
    pass


class DivergedLoss(ShiftcastError):
    pass


class DegenerateVariable(UserWarning):
    """Emitted when a variable is constant on the fitting slice."""
