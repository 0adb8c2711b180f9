"""Verification engine for generalized p-Kähler geometry on invariant models."""

from .scalar import GaussianRational
from .exterior import Form, wedge, conjugate, pair_top, is_simple, phi, phibar, sigma, volume_form
from .lie import LieModel, get_model, load_model, verify_model, catalog_names

__version__ = "0.1.0"

__all__ = [
    "GaussianRational",
    "Form",
    "wedge",
    "conjugate",
    "pair_top",
    "is_simple",
    "phi",
    "phibar",
    "sigma",
    "volume_form",
    "LieModel",
    "get_model",
    "load_model",
    "verify_model",
    "catalog_names",
    "__version__",
]
