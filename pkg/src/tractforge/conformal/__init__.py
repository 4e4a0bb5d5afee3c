"""Conformal maps of toy tracts onto the right half-plane."""

from .handle import MapHandle, halfstrip_oracle, map_build
from .metric import (GeodesicTrace, geodesic_trace, half_plane_distance, handle_from_json,
                     handle_to_json, hyp_dist, hyp_length_bounds)


def map_eval(handle: MapHandle, z: complex) -> complex:
    return handle.eval(z)


def map_inverse(handle: MapHandle, w: complex) -> complex:
    return complex(handle.inverse(complex(w)))


__all__ = [
    "GeodesicTrace", "MapHandle", "geodesic_trace", "half_plane_distance", "halfstrip_oracle",
    "handle_from_json", "handle_to_json", "hyp_dist", "hyp_length_bounds", "map_build",
    "map_eval", "map_inverse",
]
