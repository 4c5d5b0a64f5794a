"""Exception types shared across the package."""


class QnspError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(QnspError, ValueError):
    """Invalid grid/run configuration (odd grid size, bad parameter range, ...)."""


class UsageError(QnspError, ValueError):
    """An operation was called with arguments of the wrong kind or rank."""


class SolvabilityError(QnspError, ValueError):
    """An elliptic solve has no solution (non-zero mean source on the torus)."""

    def __init__(self, msg, mean=None):
        super().__init__(msg)
        self.mean = mean


class DomainError(QnspError, ValueError):
    """Field values outside the operation's admissible range (e.g. n <= 0)."""


class BlowUpError(QnspError, RuntimeError):
    """Density left the admissible corridor during time integration."""

    def __init__(self, t, min_n, max_n):
        super().__init__(
            f"density corridor violated at t={t:.6g}: min(n)={min_n:.6g}, max(n)={max_n:.6g}"
        )
        self.t = t
        self.min_n = min_n
        self.max_n = max_n


class NumericsError(QnspError, RuntimeError):
    """NaN/Inf detected during time integration."""

    def __init__(self, t, what="state"):
        super().__init__(f"non-finite values in {what} at t={t:.6g}")
        self.t = t


class IntegrationTimeout(QnspError, RuntimeError):
    """Wall-clock budget exhausted during time integration."""

    def __init__(self, t, wall_s):
        super().__init__(f"integration exceeded {wall_s:.3g} s at t={t:.6g}")
        self.t = t
        self.wall_s = wall_s


class DependencyError(QnspError, ValueError):
    """A hierarchy operation was asked for an order whose prerequisites are missing."""


class ExtractionError(QnspError, RuntimeError):
    """Taylor-coefficient extraction failed (degenerate or ill-conditioned nodes)."""

    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


class FitError(QnspError, ValueError):
    """Rate fitting impossible (too few points or non-positive errors)."""


class SchemaError(QnspError, ValueError):
    """A persisted artifact does not match the documented schema."""
