"""photonstats: photon correlations of emitters near nanophotonic structures."""

__version__ = "0.1.0"

from .units import UNITS, UnitsConvention

__all__ = ["UNITS", "UnitsConvention", "__version__"]
