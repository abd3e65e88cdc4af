"""Exceptions raised by the simulator and the algorithms built on it."""

from __future__ import annotations


class CapacityError(RuntimeError):
    """A word budget (local or global) would be exceeded."""

    kind = "capacity"

    def __init__(self, message: str, machine: int | None = None, words: int | None = None,
                 capacity: int | None = None):
        super().__init__(message)
        self.machine = machine
        self.words = words
        self.capacity = capacity

    def record(self) -> dict:
        return {"error": self.kind, "message": str(self), "machine": self.machine,
                "words": self.words, "capacity": self.capacity}


class SendOverflow(CapacityError):
    kind = "send_overflow"


class ReceiveOverflow(CapacityError):
    kind = "receive_overflow"


class GlobalCapacityError(CapacityError):
    kind = "global_capacity"


class InvariantError(AssertionError):
    """An algorithmic guarantee failed; always a bug, never an input problem."""


class DegreeTooHigh(ValueError):
    pass
