"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NotPositiveDefiniteError(DomainError):
    """A factorization met a pivot too small for a positive-definite matrix."""


class EnumerationCapError(RuntimeError):
    """Exhaustive enumeration would exceed the configured candidate cap.

    Attributes
    ----------
    required : int
        Number of candidate supports the request needs.
    cap : int
        The configured limit.
    """

    def __init__(self, required, cap):
        self.required = int(required)
        self.cap = int(cap)
        super().__init__(
            f"enumeration needs {self.required} candidate supports, cap is {self.cap}; "
            f"raise the cap to at least {self.required}"
        )
