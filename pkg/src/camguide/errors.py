"""Exception and warning types shared across the pipeline."""

from __future__ import annotations


class CamguideError(Exception):
    """Base class for all pipeline errors."""


# -- geometry -----------------------------------------------------------

class DegenerateLine(CamguideError):
    """A projective line collapsed to the zero vector."""


class ParallelLines(CamguideError):
    """Two lines have no finite intersection within tolerance."""


class PointAtInfinity(CamguideError):
    """Dehomogenization failed: third coordinate below tolerance."""


class NoConsensus(CamguideError):
    """A robust estimator found too few inliers."""


class InsufficientMatches(CamguideError):
    """Fewer correspondences than the minimal sample size."""


class CoincidentCenters(CamguideError):
    """Two-view geometry is undefined: baseline below tolerance."""


# -- correspondence -----------------------------------------------------

class EmptyInput(CamguideError):
    """An operation received no data to work on."""


class DimensionMismatch(CamguideError):
    """Descriptor dimension differs from the dictionary's."""


# -- rank aggregation ---------------------------------------------------

class UnknownBin(CamguideError):
    """A partial order references a bin missing from the full ranking."""


class EmptyGraph(CamguideError):
    """The vote graph has no nodes."""


class EmptyView(CamguideError):
    """A view contributes no observed bins."""


class NotConverged(CamguideError):
    """Power iteration hit the iteration cap.

    Carries the last iterate and its L1 residual so callers can proceed
    with a warning instead of aborting.
    """

    def __init__(self, message: str, last_iterate, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class ConvergenceWarning(UserWarning):
    """Raised as a warning when rank aggregation proceeds past NotConverged."""


# -- planner / sessions -------------------------------------------------

class NoReachableWaypoint(CamguideError):
    """No candidate bin in the rank corridor has a support set."""


class EPTFailure(CamguideError):
    """Epipolar point transfer failed for the chosen waypoint."""


class SessionTerminal(CamguideError):
    """The session already reached a terminal status."""


class UnknownSession(CamguideError):
    """No live session with the given id."""


class UnknownView(CamguideError):
    """A view id does not exist in the scene (or initial == destination)."""


class OfflinePhaseFailure(CamguideError):
    """Dictionary/track/ranking construction failed for a new session."""
