"""Exception types raised across the package."""


class TetrameshError(Exception):
    """Base class for all package errors."""


class ExprError(TetrameshError):
    """Problem with an arithmetic expression.

    ``offset`` is the byte offset into the UTF-8 source where the problem
    was detected, or ``None`` when it does not refer to a position.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class DomainError(TetrameshError):
    """Division by zero or square root of a negative number."""


class FieldError(TetrameshError):
    """Invalid field parameters or non-finite field values."""


class VanishingGradientError(TetrameshError):
    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class DegenerateTriangleError(TetrameshError):
    pass


class NonManifoldError(TetrameshError):
    pass


class OrientationConflictError(TetrameshError):
    pass
