"""Integer-nanosecond time lattice.

All timing parameters are snapped to whole nanoseconds before any
floor/ceil or coincidence test, so slot, grant and arrival alignment is
exact instead of depending on binary float rounding.  Nine decimal places
in serialized times round-trip the lattice exactly.
"""

NS_PER_S = 10**9


def to_ns(seconds: float) -> int:
    return round(seconds * NS_PER_S)


def to_s(ns: int) -> float:
    return ns / NS_PER_S


def ceil_div(num: int, den: int) -> int:
    return -(-num // den)
