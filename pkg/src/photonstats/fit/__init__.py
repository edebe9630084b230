from .config import FitConfig, FitReport, OptimizerOptions
from .params import (BlockMeta, FewModeParams, load_params, save_params)
from .model import (model_response, model_spectral_density,
                    perturbative_cross, resolvent_block)
from .emitter import fit_emitter_block
from .detector import DetectorGroupState, detector_groups, fit_detector_block
from .quality import fit_quality, lamb_shift_correction

__all__ = [
    "FitConfig", "FitReport", "OptimizerOptions",
    "BlockMeta", "FewModeParams", "load_params", "save_params",
    "model_response", "model_spectral_density", "perturbative_cross",
    "resolvent_block",
    "fit_emitter_block", "fit_detector_block", "detector_groups",
    "DetectorGroupState",
    "fit_quality", "lamb_shift_correction",
]
