"""Non-Gaussianity of bosonic states from quadrature statistics."""

from .errors import QNGError
from .fock import FockState
from .states import StateSpec, build, parse_spec

__all__ = ["FockState", "QNGError", "StateSpec", "build", "parse_spec"]
__version__ = "0.1.0"
