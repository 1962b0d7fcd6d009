"""Persistence images and concatenated vectors.

A diagram's persistence surface is the Gaussian mixture

    rho(x, y) = sum over finite pairs (b, d) of
                arctan(C * (d - b)^p) * exp(-((x-b)^2 + (y-d)^2) / (2 sigma^2))

evaluated at bin centers of a fixed birth-death grid.  All samples of one
homology dimension share a grid so their vectors are comparable; the three
per-dimension images of a sample are stacked into one nonnegative vector.

Vector layout: bin (ix, iy) (ix indexes birth, iy indexes death) sits at
flat index iy * B + ix.
"""

import math
from dataclasses import dataclass, field

import numpy as np


class VectorizeError(Exception):
    pass


@dataclass(frozen=True)
class PIParams:
    """Persistence image parameters: Gaussian width and arctan weight."""

    sigma: float = 2.0
    C: float = 1.0
    p: float = 1.0
    bins_per_axis: int = 64

    def __post_init__(self):
        if self.sigma <= 0:
            raise VectorizeError(f"sigma must be > 0, got {self.sigma}")
        if self.C <= 0:
            raise VectorizeError(f"C must be > 0, got {self.C}")
        if self.p < 1:
            raise VectorizeError(f"p must be >= 1, got {self.p}")
        if self.bins_per_axis < 1:
            raise VectorizeError(f"bins_per_axis must be >= 1, got {self.bins_per_axis}")


@dataclass(frozen=True)
class Grid:
    """Birth-death rectangle discretized into B x B bins."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    bins_per_axis: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise VectorizeError("grid ranges must be nonempty")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.bins_per_axis

    @property
    def dy(self):
        return (self.y_max - self.y_min) / self.bins_per_axis

    def centers(self):
        B = self.bins_per_axis
        cx = self.x_min + (np.arange(B) + 0.5) * self.dx
        cy = self.y_min + (np.arange(B) + 0.5) * self.dy
        return cx, cy

    def bin_of(self, b, d):
        """Bin indices (ix, iy) containing the point, or None if outside."""
        ix = int(math.floor((b - self.x_min) / self.dx))
        iy = int(math.floor((d - self.y_min) / self.dy))
        if 0 <= ix < self.bins_per_axis and 0 <= iy < self.bins_per_axis:
            return ix, iy
        return None


@dataclass
class ConcatVector:
    """Three per-dimension persistence images stacked into one vector."""

    sample_id: int | str
    values: np.ndarray = field(repr=False)
    offsets: tuple = (0, 0, 0)

    def block(self, k):
        start = self.offsets[k]
        end = self.offsets[k + 1] if k < 2 else self.values.size
        return self.values[start:end]


def weight(b, d, params):
    """Importance weight arctan(C * persistence^p); zero on the diagonal."""
    pers = d - b
    if pers <= 0:
        return 0.0
    return math.atan(params.C * pers**params.p)


def fit_grid(diagrams, k, params):
    """Shared grid for dimension k: finite-pair extent padded by 3 sigma."""
    births = []
    deaths = []
    for pd in diagrams:
        for p in pd.finite_in_dim(k):
            births.append(p.birth)
            deaths.append(p.death)
    if not births:
        raise VectorizeError(f"no finite pairs in dimension {k} across all samples")
    pad = 3.0 * params.sigma
    return Grid(
        x_min=min(births) - pad,
        x_max=max(births) + pad,
        y_min=min(deaths) - pad,
        y_max=max(deaths) + pad,
        bins_per_axis=params.bins_per_axis,
    )


def persistence_image(pd, k, grid, params):
    """Persistence image of dimension k on the shared grid.

    Essential pairs are skipped.  Returns a flat nonnegative vector of
    length bins_per_axis**2 in the layout documented above.
    """
    cx, cy = grid.centers()
    B = grid.bins_per_axis
    img = np.zeros((B, B))
    inv = 1.0 / (2.0 * params.sigma**2)
    for p in pd.finite_in_dim(k):
        w = weight(p.birth, p.death, params)
        if w == 0.0:
            continue
        gx = np.exp(-((cx - p.birth) ** 2) * inv)
        gy = np.exp(-((cy - p.death) ** 2) * inv)
        img += w * np.outer(gy, gx)  # rows = death, cols = birth
    return img.reshape(-1)


def concatenate(pi0, pi1, pi2, sample_id=0):
    """Stack the three per-dimension images into one vector (order 0, 1, 2)."""
    offsets = (0, pi0.size, pi0.size + pi1.size)
    return ConcatVector(
        sample_id=sample_id,
        values=np.concatenate([pi0, pi1, pi2]),
        offsets=offsets,
    )


def split_vector(values, offsets):
    """Inverse of concatenate: recover the three blocks from a flat vector."""
    values = np.asarray(values)
    return (
        values[offsets[0] : offsets[1]],
        values[offsets[1] : offsets[2]],
        values[offsets[2] :],
    )
