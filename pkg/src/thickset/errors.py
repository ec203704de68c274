"""Exception hierarchy shared across the package."""


class ThicksetError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(ThicksetError):
    """Operands live in different ambient dimensions."""


class InvalidSpec(ThicksetError):
    """A set description violates its parameter constraints."""


class CellCapExceeded(ThicksetError):
    """A construction would produce more cells than the configured cap."""


class SampleCapExceeded(ThicksetError):
    """An enumeration would produce more samples than allowed without subsampling."""


class UndecidableInterior(ThicksetError):
    """A catalog has no bounded gaps and the truncation cannot decide C's interior."""


class DegenerateHull(ThicksetError):
    """A convex hull proxy has empty interior where a solid one is required."""


class DegeneratePin(ThicksetError):
    """A pin coincides with the anchor point it must be rotated around."""


class DomainViolation(ThicksetError):
    """A point lies outside the domain of the distance map."""


class UnderdeterminedFit(ThicksetError):
    """Too few points to fit the requested geometric model."""


class SearchExhausted(ThicksetError):
    """A retry-bounded search (pins, diagonal steps) ran out of candidates."""


class UnsupportedFrame(ThicksetError):
    """Operation requires axis-aligned realizable cells but the frame is rotated."""
