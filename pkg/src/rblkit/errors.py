"""Exception and warning types shared across the toolkit."""

from __future__ import annotations

import numpy as np


class RblError(Exception):
    """Base class for all toolkit errors."""


class InvalidPoseError(RblError):
    """Rotation matrix is not orthonormal with determinant +1."""


class MissingTwistError(RblError):
    """Operation requires a twist but the state carries none."""


class InvalidIntervalError(RblError):
    """Time interval is negative."""


class DegenerateConformationError(RblError):
    """Node set is collinear or otherwise too degenerate to define a body."""


class DegenerateProjectionError(RblError):
    """Matrix is rank deficient; nearest-rotation projection is ambiguous."""


class UndefinedBearingError(RblError):
    """Angle of arrival is undefined (node coincides with an anchor)."""


class UndefinedDirectionError(RblError):
    """Range-rate direction is undefined (node coincides with an anchor)."""


class InsufficientAnchorsError(RblError):
    """Fewer anchors than the operation requires."""


class InvalidPolicyError(RblError):
    """Blockage policy parameters are malformed."""


class IncompleteEdmError(RblError):
    """EDM still has unknown entries where a complete one is required."""


class CompletionInfeasibleError(RblError):
    """EDM completion cannot recover one or more nodes.

    Attributes:
        nodes: indices of body nodes with zero known cross entries.
    """

    def __init__(self, nodes):
        self.nodes = tuple(int(i) for i in nodes)
        super().__init__(
            f"completion infeasible: nodes {self.nodes} have no known cross entries"
        )


class AmbiguousAlignmentError(RblError):
    """Point set is too degenerate for a unique rigid alignment."""


class UnderdeterminedError(RblError):
    """Observation set does not determine the requested parameters."""


class DegenerateEmbeddingError(RblError):
    """Gram matrix lacks three significantly positive eigenvalues."""


class InvalidHeadingError(RblError):
    """Semantic heading vector is not unit norm."""


class UnobservableTwistError(RblError):
    """Range-rate regressor is rank deficient.

    Attributes:
        null_space: (6, m) orthonormal basis of the unobservable directions,
            stacked as (angular 3, linear 3).
    """

    def __init__(self, null_space: np.ndarray, message: str | None = None):
        self.null_space = np.asarray(null_space, dtype=float)
        super().__init__(
            message
            or f"twist unobservable: {self.null_space.shape[1]}-dimensional null space"
        )


class ConfigError(RblError):
    """Scenario or experiment configuration is invalid.

    Attributes:
        field: dotted path of the offending entry, when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class RangeClampWarning(UserWarning):
    """Noisy ranges went negative and were clamped to zero."""


class CoverageWarning(UserWarning):
    """Blockage left one or more nodes without any observed measurement."""
