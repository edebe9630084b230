from .sensor import (SensorFitError, SensorParams, SensorResult, lorentzian,
                     sensor_driven_g2, sensor_from_table, sensor_spontaneous)
from .markov import (MarkovParams, markov_from_table, markov_liouvillian,
                     markov_spontaneous, markov_steady_g2)
from .ww import WWResult, r_ed_integral, ww_convergence, ww_solve

__all__ = [
    "SensorFitError", "SensorParams", "SensorResult", "lorentzian",
    "sensor_from_table", "sensor_spontaneous", "sensor_driven_g2",
    "MarkovParams", "markov_from_table", "markov_liouvillian",
    "markov_spontaneous", "markov_steady_g2",
    "WWResult", "r_ed_integral", "ww_solve", "ww_convergence",
]
