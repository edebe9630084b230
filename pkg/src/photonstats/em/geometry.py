"""Scene and source geometry: sphere scenes, dipoles, frequency grids."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..units import UNITS
from .materials import DomainError, DrudeMaterial

_ORIENT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SphereScene:
    """Metallic sphere centered at the origin, embedded in vacuum."""

    radius_nm: float
    material: DrudeMaterial

    def __post_init__(self):
        if self.radius_nm <= 0:
            raise DomainError("sphere radius must be positive")

    def key(self) -> tuple:
        m = self.material
        return (self.radius_nm, m.eps_inf, m.omega_p, m.gamma)


@dataclass(frozen=True, eq=False)
class DipoleSpec:
    """Point dipole: emitter or detector."""

    position: np.ndarray           # nm, shape (3,)
    orientation: np.ndarray        # unit vector
    dipole_debye: float
    role: str                      # "emitter" | "detector"

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        ori = np.asarray(self.orientation, dtype=float).reshape(3)
        n = np.linalg.norm(ori)
        if abs(n - 1.0) > 1e-6:
            raise DomainError("orientation must be a unit vector")
        if n != 1.0:
            ori = ori / n
        if abs(np.linalg.norm(ori) - 1.0) > _ORIENT_TOL:
            raise DomainError("orientation normalization failed")
        if self.dipole_debye <= 0:
            raise DomainError("dipole magnitude must be positive")
        if self.role not in ("emitter", "detector"):
            raise DomainError("role must be 'emitter' or 'detector'")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", ori)

    @property
    def dipole_enm(self) -> float:
        return UNITS.dipole_enm(self.dipole_debye)

    def key(self) -> tuple:
        return (tuple(self.position), tuple(self.orientation),
                self.dipole_debye, self.role)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly ascending positive photon energies (eV)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1)
        if pts.size < 2:
            raise DomainError("grid needs at least two points")
        if np.any(pts <= 0):
            raise DomainError("grid points must be positive")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("grid points must be strictly ascending")
        object.__setattr__(self, "points", pts)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def __len__(self):
        return len(self.points)

    @staticmethod
    def uniform(w_min: float, w_max: float, n: int) -> "FrequencyGrid":
        return FrequencyGrid(np.linspace(w_min, w_max, n))

    @staticmethod
    def for_separation(w_min: float, w_max: float, max_separation_nm: float,
                       points_per_period: int = 12,
                       min_points: int = 400) -> "FrequencyGrid":
        """Uniform grid resolving the cross spectral-density oscillation.

        The emitter-detector block oscillates with period
        2*pi*hbar_c/separation; the grid keeps at least
        `points_per_period` samples per period.
        """
        if max_separation_nm > 0:
            period = 2 * np.pi * UNITS.hbar_c / max_separation_nm
            n_osc = int(np.ceil(points_per_period * (w_max - w_min) / period))
        else:
            n_osc = 0
        n = max(min_points, n_osc + 1)
        return FrequencyGrid.uniform(w_min, w_max, n)

    def key(self) -> tuple:
        return (float(self.points[0]), float(self.points[-1]), len(self.points))
