"""Exception hierarchy.

Batched kernels report failures as integer status codes (numba cannot raise
rich exceptions cheaply from inside parallel loops); :func:`raise_for_status`
translates them at the Python boundary.
"""


class GradFiberError(Exception):
    """Base class for all package errors."""


class InvalidState(GradFiberError):
    """Non-finite or otherwise malformed input state."""


class InvertedElement(GradFiberError):
    """det F <= 0 (or a non-positive degraded Jacobian)."""


class PlasticStateCorrupt(GradFiberError):
    """Plastic map singular or with det Fp < 1."""


class DegenerateFiber(GradFiberError):
    """Fiber collapsed (zero stretch) or sheared to +-pi/2."""


class YieldSurfaceDegenerate(GradFiberError):
    """The GTN function has no positive root."""


class ReturnMapDiverged(GradFiberError):
    """Local plastic Newton iteration failed; the caller should cut the step."""


class DegenerateGeometry(GradFiberError):
    """Singular geometry Jacobian of the NURBS map."""


class StepFailed(GradFiberError):
    """A staggered step did not converge even after the maximum number of cuts."""


class ConfigError(GradFiberError):
    """Malformed or inconsistent configuration file."""


class AcceptanceFailure(GradFiberError):
    """A benchmark did not meet its acceptance threshold."""


OK = 0
ST_INVALID = 1
ST_INVERTED = 2
ST_DEGENERATE_FIBER = 3
ST_RETURN_MAP = 4
ST_YIELD = 5
ST_PLASTIC = 6

_STATUS = {
    ST_INVALID: InvalidState,
    ST_INVERTED: InvertedElement,
    ST_DEGENERATE_FIBER: DegenerateFiber,
    ST_RETURN_MAP: ReturnMapDiverged,
    ST_YIELD: YieldSurfaceDegenerate,
    ST_PLASTIC: PlasticStateCorrupt,
}


def raise_for_status(status, where=""):
    """Raise the exception matching a kernel status code (0 means success)."""
    status = int(status)
    if status == OK:
        return
    exc = _STATUS.get(status, GradFiberError)
    msg = f"{exc.__name__} (status {status})"
    if where:
        msg += f" in {where}"
    raise exc(msg)
