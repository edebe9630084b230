"""Quantum system description: emitters, detectors, fitted mode network."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..em.materials import DomainError
from ..fit.params import FewModeParams


@dataclass(frozen=True)
class EmitterQ:
    omega_ev: float
    drive_ev: float = 0.0        # E_L . mu_e at the emitter position


@dataclass(frozen=True)
class DetectorQ:
    omega_ev: float
    gamma_ev: float
    mu_debye: float
    drive_ev: float = 0.0        # optional classical field seen by the detector

    def __post_init__(self):
        if self.gamma_ev <= 0:
            raise DomainError("detector linewidth must be positive")


@dataclass(eq=False)
class SystemSpec:
    emitters: list               # list[EmitterQ]
    detectors: list              # list[DetectorQ]
    modes: FewModeParams
    laser_omega: float | None = None
    frame: str = "lab"           # "lab" | "rotating"

    def __post_init__(self):
        if len(self.emitters) != self.modes.n_emitters:
            raise DomainError("emitter count mismatch with mode network")
        if len(self.detectors) != self.modes.n_detectors:
            raise DomainError("detector count mismatch with mode network")
        if self.frame not in ("lab", "rotating"):
            raise DomainError("frame must be 'lab' or 'rotating'")
        if self.frame == "rotating" and self.laser_omega is None:
            raise DomainError("rotating frame requires a laser frequency")

    @property
    def driven(self) -> bool:
        return any(e.drive_ev != 0 for e in self.emitters) or \
            any(d.drive_ev != 0 for d in self.detectors)

    def prefactor(self, det_index: int) -> float:
        """(Gamma_d / (2 mu_d))^2 mapping <d^dag d> to field intensity."""
        from ..units import UNITS
        d = self.detectors[det_index]
        mu = UNITS.dipole_enm(d.mu_debye)
        return (d.gamma_ev / (2.0 * mu)) ** 2


def rotating_frame(spec: SystemSpec) -> SystemSpec:
    """Shift all bare frequencies by -omega_laser; drives become static."""
    if spec.laser_omega is None:
        raise DomainError("rotating_frame requires laser on")
    if spec.frame == "rotating":
        return spec
    wl = spec.laser_omega
    emitters = [replace(e, omega_ev=e.omega_ev - wl) for e in spec.emitters]
    detectors = [replace(d, omega_ev=d.omega_ev - wl) for d in spec.detectors]
    m = spec.modes
    Om = m.omega_matrix.copy()
    Om[np.diag_indices_from(Om)] -= wl
    modes = FewModeParams(
        omega_matrix=Om, kappa=m.kappa.copy(), lambda_e=m.lambda_e.copy(),
        lambda_d=m.lambda_d.copy(), block_meta=m.block_meta,
        lamb_shift=m.lamb_shift.copy(), mu_e_debye=m.mu_e_debye,
        mu_d_debye=m.mu_d_debye)
    return SystemSpec(emitters=emitters, detectors=detectors, modes=modes,
                      laser_omega=wl, frame="rotating")
