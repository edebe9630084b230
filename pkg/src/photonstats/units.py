"""Unit conventions: energies in eV, lengths in nm, time in 1/eV, hbar = 1.

All physical constants are CODATA-derived and immutable. A dipole moment
entered in Debye is converted to e*nm; wavenumbers are k = omega / hbar_c.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class UnitsConvention:
    """Frozen constants for the eV/nm natural-unit system."""

    hbar_c: float = 197.3269804          # eV nm
    coulomb_const: float = 1.4399645478  # e^2/(4 pi eps0), eV nm
    debye_to_enm: float = 0.0208194335   # e nm per Debye
    c_nm_fs: float = 299.792458          # nm / fs
    inv_ev_to_fs: float = 0.6582119569   # fs per (1/eV)

    def wavenumber(self, omega_ev: float) -> float:
        """k in nm^-1 for a photon energy in eV."""
        return omega_ev / self.hbar_c

    def dipole_enm(self, dipole_debye: float) -> float:
        return dipole_debye * self.debye_to_enm

    def consistency_error(self) -> float:
        """Relative mismatch between hbar_c/c and the stated time unit."""
        derived = self.hbar_c / self.c_nm_fs  # fs per 1/eV
        return abs(derived - self.inv_ev_to_fs) / self.inv_ev_to_fs


UNITS = UnitsConvention()
