"""Toy tracts, the explicit path through them, and full-scale tract data."""

from .alpha import (AlphaPath, alpha_path, gate_integral_closed_form, gate_integral_quadrature, gate_mu,
                    polyline_length)
from .datum import (TractDatum, ValidationReport, WiggleRecord, datum_generate, datum_validate,
                    range_bounds_certify)
from .toy import RegionTag, ToyTract, Wiggle, region_classify, toy_tract_build

__all__ = [
    "AlphaPath", "RegionTag", "ToyTract", "TractDatum", "ValidationReport", "Wiggle", "WiggleRecord",
    "alpha_path", "datum_generate", "datum_validate", "gate_integral_closed_form",
    "gate_integral_quadrature", "gate_mu", "polyline_length", "range_bounds_certify", "region_classify",
    "toy_tract_build",
]
