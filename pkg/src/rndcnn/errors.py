"""Exception types shared across the engine.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message wording.
"""


class ShapeError(ValueError):
    """Operand shapes are inconsistent with an operation's contract."""


class ContractError(ValueError):
    """A precondition other than a shape constraint was violated."""


class ConfigError(ValueError):
    """A run configuration cannot be resolved or validated."""


class DecodeError(ValueError):
    """An image file could not be decoded.

    `offset` is the byte position at which decoding failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte {offset})")
        self.offset = offset


class FormatError(ValueError):
    """A serialized container (checkpoint/cache) is malformed.

    `offset` is the byte position of the offending field, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte {offset})")
        self.offset = offset


class IngestError(RuntimeError):
    """One or more dataset items could not be ingested.

    `failures` itemizes (path-or-row, reason) pairs for every failing entry.
    """

    def __init__(self, message: str, failures: list[tuple[str, str]] | None = None):
        self.failures = failures or []
        if self.failures:
            detail = "; ".join(f"{item}: {why}" for item, why in self.failures)
            message = f"{message}: {detail}"
        super().__init__(message)


class NumericError(ArithmeticError):
    """A non-finite value surfaced where the contract requires finiteness."""
