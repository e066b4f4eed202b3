"""Classification of flocks of the quadratic cone in PG(3,q), q even, via herds of ovals."""

__version__ = "0.1.0"

from .gf2e import GF2e, QuadExt, field
from .opoly import OPoly, interpolate, is_opermutation

__all__ = ["GF2e", "OPoly", "QuadExt", "__version__", "field", "interpolate", "is_opermutation"]
