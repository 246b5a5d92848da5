"""Exception hierarchy for reachset."""

from typing import List, Optional, Tuple


class ReachsetError(Exception):
    """Base class for every error raised by reachset"""


class InvalidIntervalError(ReachsetError, ValueError):
    """Truncation interval with lo >= hi"""


class DegenerateTruncationError(ReachsetError, ValueError):
    """Parent distribution puts no mass on the truncation interval"""


class InvalidMixtureError(ReachsetError, ValueError):
    """Mixture weights outside (0, 1) or not summing to one"""


class SampleFileError(ReachsetError, ValueError):
    """Missing, empty or malformed sample file"""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GridError(ReachsetError, ValueError):
    """Grid that cannot be built (N < 2, no samples, uneven spacing)"""


class DegenerateBandwidthError(ReachsetError, ValueError):
    """Rule-of-thumb bandwidth undefined (too few samples or zero variance)"""


class BandwidthError(ReachsetError, ValueError):
    """Nonpositive kernel bandwidth"""


class AlphaError(ReachsetError, ValueError):
    """Confidence level outside (0, 1]"""


class ParallelLinesError(ReachsetError, ValueError):
    """Two lines without a unique intersection point"""


class InvalidPolygonError(ReachsetError, ValueError):
    """Line set that does not bound an n-sided convex polygon around its anchor"""

    def __init__(self, message: str, violations: Optional[List[Tuple]] = None):
        super().__init__(message)
        self.violations = violations or []


class DegeneratePolygonError(ReachsetError, ValueError):
    """Vertex chain too short or with zero area"""


class ModelError(ReachsetError, ValueError):
    """Invalid optimization model parameters"""


class SamplingError(ReachsetError, ValueError):
    """Sampling request that cannot be honoured"""


class ConfigError(ReachsetError, ValueError):
    """Invalid experiment configuration"""


class ModelFileError(ReachsetError, ValueError):
    """Unreadable exported model file"""


class InfeasibleError(ReachsetError):
    """No feasible polygon where the caller requires one"""
