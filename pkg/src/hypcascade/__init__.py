"""Branching motion at finite speed on the hyperbolic plane.

Submodules: ``hypgeo`` (half-plane and disk geometry), ``cascade``
(simulation), ``analytics`` (closed forms and quadratures), ``verify``
(oracle checks), ``formats``/``svg``/``cli`` (files and command line).
"""
from . import analytics, cascade, hypgeo, verify
from .analytics import RateSpeed, SplinterLaw, mean_cosh_cm
from .cascade import CascadeRun, DirectionPolicy, ModelParams, build_cascade

__version__ = "0.1.0"

__all__ = [
    "analytics", "cascade", "hypgeo", "verify", "RateSpeed", "SplinterLaw",
    "mean_cosh_cm", "CascadeRun", "DirectionPolicy", "ModelParams", "build_cascade",
]
