# lib/errors.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class BrandMatchError(Exception):
    """Base for every error the engine raises on purpose."""

    exit_code = 1


class InputError(BrandMatchError):
    """Bad input data or configuration. The CLI exits with 2."""

    exit_code = 2


class ConfigError(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, message: str, *, line: Optional[int] = None,
                 column: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if field:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class DuplicateId(InputError):
    pass


class InvalidField(InputError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class EmptyDataset(InputError):
    pass


class EmptyProfile(InputError):
    pass


class EmptyDocument(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class KindMismatch(InputError):
    pass


class MissingContext(InputError):
    pass


class UnknownEndpoint(InputError):
    pass


class UnknownNode(InputError):
    pass


class UnknownBrand(InputError):
    pass


class EmptyUserSet(InputError):
    pass


@dataclass(frozen=True)
class Drop:
    """A non-fatal problem: the item was left out and the reason recorded."""

    item: str
    reason: str

    def to_dict(self) -> dict:
        return {"item": self.item, "reason": self.reason}
