"""Physical parameters of the full plasma system."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigurationError


@dataclass(frozen=True)
class PhysParams:
    """Scaled squared Debye length eps, Planck constant hbar, viscosities
    mu/lam, heat conductivity kappa, and the expansion order N."""

    eps: float
    hbar: float = 0.0
    mu: float = 0.1
    lam: float = 0.0
    kappa: float = 0.1
    order: int = 1

    def __post_init__(self):
        if not (self.eps > 0):
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if self.hbar < 0:
            raise ConfigurationError(f"hbar must be >= 0, got {self.hbar}")
        if not (self.mu > 0):
            raise ConfigurationError(f"mu must be positive, got {self.mu}")
        if 2 * self.mu + 3 * self.lam < 0:
            raise ConfigurationError(
                f"need 2*mu + 3*lam >= 0, got {2 * self.mu + 3 * self.lam}"
            )
        if self.kappa < 0:
            raise ConfigurationError(f"kappa must be >= 0, got {self.kappa}")
        if not (isinstance(self.order, int) and self.order >= 0):
            raise ConfigurationError(f"expansion order must be an integer >= 0, got {self.order}")

    def with_eps(self, eps):
        return replace(self, eps=eps)
