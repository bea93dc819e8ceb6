"""Certified lower bounds on multivariate integration errors and the curse of dimensionality."""

from .errors import CursekitError
from .models import Certificate, PointSet, SpaceKind, SpaceSpec

__version__ = "0.1.0"

__all__ = ["Certificate", "CursekitError", "PointSet", "SpaceKind", "SpaceSpec", "__version__"]
