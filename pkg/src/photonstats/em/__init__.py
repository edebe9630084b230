from .materials import DomainError, DrudeMaterial, permittivity
from .geometry import DipoleSpec, FrequencyGrid, SphereScene
from .greens import (ScatterResult, far_field_free_amplitude,
                     far_field_scatter_amplitude, greens_free,
                     greens_scatter_sphere, mie_reflection_coeffs)
from .response import (ResponseTable, load_response_table, response_matrix,
                       save_response_table)
from .radiation import (far_field_pattern, purcell_factors,
                        purcell_partial_waves, radiated_power_quadrature,
                        radiative_channel)
from .calibrate import CalibrationError, CalibrationResult, calibrate_sphere

__all__ = [
    "DomainError", "DrudeMaterial", "permittivity",
    "DipoleSpec", "FrequencyGrid", "SphereScene",
    "ScatterResult", "greens_free", "greens_scatter_sphere",
    "mie_reflection_coeffs", "far_field_free_amplitude",
    "far_field_scatter_amplitude",
    "ResponseTable", "response_matrix", "save_response_table",
    "load_response_table",
    "far_field_pattern", "purcell_factors", "purcell_partial_waves",
    "radiated_power_quadrature", "radiative_channel",
    "CalibrationError", "CalibrationResult", "calibrate_sphere",
]
