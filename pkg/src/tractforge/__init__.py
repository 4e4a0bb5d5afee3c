"""Tract data at tower scale, conformal maps of toy tracts, gate shooting and certificates."""

__version__ = "0.1.0"

from .tower import Ordering, TowerScalar, tower_cmp, tower_combine, tower_exp, tower_log  # noqa: E402

__all__ = ["Ordering", "TowerScalar", "__version__", "tower_cmp", "tower_combine", "tower_exp", "tower_log"]
