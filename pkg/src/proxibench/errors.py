"""Exception hierarchy shared across the toolkit."""


class ProxibenchError(Exception):
    """Base class for all toolkit errors."""


# -- geometry ---------------------------------------------------------------

class OrthonormalityViolation(ProxibenchError):
    """Rotation matrix drifted away from O(3) beyond tolerance."""


class DegenerateForward(ProxibenchError):
    """Camera forward axis has no usable ground-plane projection."""


class DegenerateTarget(ProxibenchError):
    """Target coincides with the camera position in the ground plane."""


# -- occupancy / navigation -------------------------------------------------

class EmptyScene(ProxibenchError):
    """No boxes available to build an occupancy map."""


class DegenerateHull(ProxibenchError):
    """All footprint points are collinear; no 2D hull exists."""


class NoPath(ProxibenchError):
    """Goal cell unreachable from the start cell."""


class StartOutOfBounds(ProxibenchError):
    """Start position falls outside the grid extent."""


class GoalOutOfBounds(ProxibenchError):
    """Goal position falls outside the grid extent."""


# -- perception -------------------------------------------------------------

class InsufficientSamples(ProxibenchError):
    """Stream too short for the requested detection window."""


class NoFutureEvent(ProxibenchError):
    """No designated future frame exists for the requested answer."""


# -- clip sampling ----------------------------------------------------------

class InsufficientHistory(ProxibenchError):
    """Not enough footage before the anchor event."""


class NoValidWindow(ProxibenchError):
    """No clip window satisfies the visibility constraints."""


class TooFewKeysteps(ProxibenchError):
    """Stream lacks enough keysteps for a chain sample."""


# -- chains -----------------------------------------------------------------

class MissingLocation(ProxibenchError):
    """No skeleton samples available to locate a keystep."""


class ZeroDisplacement(ProxibenchError):
    """Consecutive keystep locations coincide; direction undefined."""


class ConstraintConflict(ProxibenchError):
    """Annotated step order violates the declared order constraints."""


class PoolExhausted(ProxibenchError):
    """Distractor pool too small to fill the candidate set."""


# -- QA forging -------------------------------------------------------------

class DistractorSpaceTooSmall(ProxibenchError):
    """Payload domain has fewer than five distinct values."""


# -- evaluation -------------------------------------------------------------

class UnsupportedK(ProxibenchError):
    """Chain length outside the supported 3..5 range."""


class ParseFailure(ProxibenchError):
    """Model response does not contain a well-formed answer."""


class LengthMismatch(ParseFailure):
    """Parsed chain lists have the wrong lengths for the item's k."""


class EmptySet(ProxibenchError):
    """Metric requested over zero records."""


# -- ingestion / pipeline ---------------------------------------------------

class SchemaViolation(ProxibenchError):
    """Metadata record violates the documented schema."""


class NonMonotoneTimestamps(SchemaViolation):
    """Frame timestamps are not strictly increasing."""


class InvalidRecipe(ProxibenchError):
    """Scene recipe violates its own invariants."""


# -- review service ---------------------------------------------------------

class ReplayMismatch(ProxibenchError):
    """Provenance replay produced a different answer than the stored item."""


class UnknownItem(ProxibenchError):
    """Item id not present in the review set."""


class IllegalTransition(ProxibenchError):
    """Requested verdict is not a legal review-state transition."""


class ConcurrentEditConflict(ProxibenchError):
    """Verdict submitted against a stale version token."""


# -- oracles ----------------------------------------------------------------

class OracleTooLarge(ProxibenchError):
    """Brute-force oracle refused an input above its size guard."""
