"""Drude permittivity for the metallic sphere."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Input outside the physical domain of an operation."""


@dataclass(frozen=True)
class DrudeMaterial:
    """Single-pole Drude metal: eps(w) = eps_inf - wp^2 / (w^2 + i*gamma*w)."""

    eps_inf: float = 1.0
    omega_p: float = 9.0      # eV
    gamma: float = 0.1       # eV

    def __post_init__(self):
        if self.omega_p <= 0:
            raise DomainError("omega_p must be positive")
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")
        if self.eps_inf < 1:
            raise DomainError("eps_inf must be >= 1")


def permittivity(material: DrudeMaterial, omega):
    """Complex relative permittivity at photon energy omega (eV).

    Sign convention: Im[eps] >= 0 (absorbing medium).
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("permittivity requires omega > 0")
    eps = material.eps_inf - material.omega_p**2 / (
        omega**2 + 1j * material.gamma * omega
    )
    return eps if eps.shape else complex(eps)
