"""Blowup certification from initial data for 2D rotational gas dynamics."""

from .certify import Certificate, CertifyOptions, certify
from .fields import GriddedData, PhysicalParams, VortexData, grid_from_analytic
from .functionals import FunctionalSet, compute_functionals, momentum_evolution
from .pressureless import bisect_threshold, criterion_pointwise, riccati_oracle, scan_criterion

__all__ = [
    "Certificate",
    "CertifyOptions",
    "FunctionalSet",
    "GriddedData",
    "PhysicalParams",
    "VortexData",
    "bisect_threshold",
    "certify",
    "compute_functionals",
    "criterion_pointwise",
    "grid_from_analytic",
    "momentum_evolution",
    "riccati_oracle",
    "scan_criterion",
]
