"""Topological decomposition of 3D voxel microstructures.

The library turns binary voxel volumes into interpretable feature
distributions in five steps:

1. ``volumes``  -- load raw volumes, cut them into cube samples, drop
   pore-dominated cubes.
2. ``distance`` -- signed Manhattan distance transform (the filtration
   function).
3. ``cubical``  -- persistent homology of the sublevel cubical filtration
   in dimensions 0, 1 and 2, with representative cycles.
4. ``images``   -- persistence-image vectorization and concatenation of the
   three per-dimension images.
5. ``factorize`` -- nonnegative matrix factorization of the concatenated
   vectors into coefficients and concatenated feature distributions.

``origins`` maps feature distributions back to voxel space, ``pipeline``
orchestrates everything from a single config file, and ``cli`` exposes the
per-stage subcommands.
"""

from voxtopo.volumes import (
    VolumeMeta,
    CubeSample,
    load_volume,
    save_volume,
    partition_cubes,
    filter_cubes,
)
from voxtopo.distance import signed_manhattan_sdt
from voxtopo.cubical import (
    Cell,
    Pair,
    PersistenceDiagram,
    FilteredComplex,
    build_filtration,
    compute_persistence,
    betti_curve,
    representative_cycle,
)
from voxtopo.images import (
    PIParams,
    Grid,
    ConcatVector,
    fit_grid,
    persistence_image,
    concatenate,
)
from voxtopo.factorize import (
    FactorModel,
    nmf,
    split_components,
    reconstruction_error,
)
from voxtopo.origins import (
    FeatureRegion,
    OriginReport,
    feature_region,
    select_pairs,
    locate_origin,
)
from voxtopo.pipeline import RunConfig, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "VolumeMeta",
    "CubeSample",
    "load_volume",
    "save_volume",
    "partition_cubes",
    "filter_cubes",
    "signed_manhattan_sdt",
    "Cell",
    "Pair",
    "PersistenceDiagram",
    "FilteredComplex",
    "build_filtration",
    "compute_persistence",
    "betti_curve",
    "representative_cycle",
    "PIParams",
    "Grid",
    "ConcatVector",
    "fit_grid",
    "persistence_image",
    "concatenate",
    "FactorModel",
    "nmf",
    "split_components",
    "reconstruction_error",
    "FeatureRegion",
    "OriginReport",
    "feature_region",
    "select_pairs",
    "locate_origin",
    "RunConfig",
    "run_pipeline",
]
