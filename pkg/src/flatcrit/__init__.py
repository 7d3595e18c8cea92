"""Numerical thermodynamic formalism for unimodal maps with flat critical points."""

from .maps import (
    Chart,
    ChartPoint,
    Family,
    FlatUnimodalMap,
    MapSpec,
    make_map,
    misiurewicz_report,
    sample_orbit,
)

__all__ = [
    "Chart",
    "ChartPoint",
    "Family",
    "FlatUnimodalMap",
    "MapSpec",
    "make_map",
    "misiurewicz_report",
    "sample_orbit",
]

__version__ = "0.1.0"
