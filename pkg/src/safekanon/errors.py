"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the range an operation is defined on."""


class ParseError(ValueError):
    """Malformed CSV or hierarchy input."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class RecodingError(ValueError):
    """A tuple value has no image under the generalization hierarchy."""

    def __init__(self, attribute: str, value: str, reason: str = "not covered by hierarchy"):
        self.attribute = attribute
        self.value = value
        super().__init__(f"attribute {attribute!r}: value {value!r} {reason}")
