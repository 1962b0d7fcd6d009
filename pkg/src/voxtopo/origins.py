"""Inverse analysis: from feature distributions back to voxel structures.

A feature distribution block is turned into a high-mass region of its
diagram grid; birth-death pairs landing in that region are selected and
localized in the sample cube via their creator/destroyer cells and a
representative cycle.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from voxtopo.cubical import representative_cycle


class OriginError(Exception):
    pass


@dataclass
class FeatureRegion:
    """Top-mass bins of one dimension's grid, capturing at least fraction q."""

    dim: int
    bins: set  # of (ix, iy)
    mass_fraction: float


@dataclass
class OriginReport:
    """Voxel-space localization of one selected birth-death pair."""

    sample_id: int | str
    component: int
    pair: object
    birth_cell: object
    death_cell: object
    cycle: list = field(default_factory=list)


def feature_region(cfd_block, k, grid, q=0.8):
    """Greedy top-mass bins of a feature distribution block.

    Bins are taken in descending value (ties broken by flat index) until
    the captured mass reaches fraction q of the block total.
    """
    if not 0.0 < q <= 1.0:
        raise OriginError(f"q must lie in (0, 1], got {q}")
    block = np.asarray(cfd_block, dtype=float)
    total = block.sum()
    if total <= 0.0:
        raise OriginError("feature distribution block is all zero")
    order = np.lexsort((np.arange(block.size), -block))
    B = grid.bins_per_axis
    bins = set()
    acc = 0.0
    for idx in order:
        if block[idx] <= 0.0:
            break  # sorted descending: only zeros remain
        bins.add((int(idx) % B, int(idx) // B))
        acc += block[idx]
        if acc / total >= q:
            break
    return FeatureRegion(dim=k, bins=bins, mass_fraction=float(acc / total))


def select_pairs(pd, region, grid):
    """Finite pairs of the region's dimension whose bin lies in the region.

    Sorted by descending persistence.
    """
    hits = []
    for p in pd.finite_in_dim(region.dim):
        b = grid.bin_of(p.birth, p.death)
        if b is not None and b in region.bins:
            hits.append(p)
    hits.sort(key=lambda p: -(p.death - p.birth))
    return hits


def locate_origin(sample_id, fc, pd, pair, component=0):
    """Report where a pair lives in the cube: cells plus representative cycle."""
    if pair not in pd.pairs:
        raise OriginError(f"pair {pair} not found in diagram of sample {sample_id}")
    cycle = []
    if not math.isinf(pair.death):
        cycle = representative_cycle(fc, pair)
    return OriginReport(
        sample_id=sample_id,
        component=component,
        pair=pair,
        birth_cell=pair.birth_cell,
        death_cell=pair.death_cell,
        cycle=cycle,
    )
