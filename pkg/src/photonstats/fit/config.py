"""Fit configuration and quality report containers."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..em.materials import DomainError


@dataclass
class OptimizerOptions:
    max_nfev: int = 400
    gtol: float = 1e-10
    xtol: float = 1e-12
    ftol: float = 1e-10

    def validate(self):
        if self.max_nfev < 1 or min(self.gtol, self.xtol, self.ftol) <= 0:
            raise DomainError("optimizer tolerances must be positive")


def _default_weights():
    # re_diag down-weights the emitter-diagonal real part: the scattering-only
    # Re target is not Kramers-Kronig consistent with the full Im target, and
    # the residual mismatch is handled by the static Lamb-shift correction.
    return dict(emitter=10.0, cross=1.0, re_diag=0.25, out_of_band=0.3)


@dataclass
class FitConfig:
    n_emitter_modes: int = 21
    n_detector_modes: int = 17
    window: tuple | None = None          # core fit window (eV); grid window if None
    weights: dict = field(default_factory=_default_weights)
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)
    multistart_count: int = 4
    seed: int = 7
    warm_start: object = None
    kappa_min_factor: float = 2.5        # x grid spacing
    detector_ridge: float = 1e-4
    detector_kappa_seed: float = 1.5     # x pole spacing
    # extra weight around the emitter frequency: the emitter pole amplifies
    # cross-block residuals there, which otherwise leak into the detector
    # signal ahead of the light cone
    focus_omega: float | None = None
    focus_width: float = 0.25
    focus_factor: float = 6.0

    def validate(self):
        if self.n_emitter_modes < 1 or self.n_detector_modes < 1:
            raise DomainError("mode counts must be >= 1")
        if any(v < 0 for v in self.weights.values()):
            raise DomainError("weights must be non-negative")
        self.optimizer.validate()


@dataclass
class FitReport:
    block_rms: dict = field(default_factory=dict)       # relative RMS per block
    block_max_abs: dict = field(default_factory=dict)
    nfev: int = 0
    converged: bool = False
    lamb_shift: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def validate(self):
        for v in self.block_rms.values():
            if v < 0:
                raise DomainError("residuals must be non-negative")
