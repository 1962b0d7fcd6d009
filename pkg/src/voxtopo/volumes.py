"""Raw voxel volume I/O, cube partitioning and pore filtering.

Volumes are plain numpy arrays indexed ``[x, y, z]``.  Binary volumes are
boolean arrays where ``True`` marks the foreground phase (the segmented
phase of interest).  The on-disk format is headerless raw bytes, one
unsigned 8-bit value per voxel in x-fastest order, with a small YAML
sidecar describing shape and binarization.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

VALUE_KINDS = ("unsigned-8-bit", "boolean")


class VolumeError(Exception):
    """Raised for malformed volume files or inconsistent metadata."""


@dataclass
class VolumeMeta:
    """Shape and binarization rule for a raw volume file.

    ``threshold`` is required for ``unsigned-8-bit`` volumes (voxels with
    byte value >= threshold are foreground) and must be absent for
    ``boolean`` volumes (any nonzero byte is foreground).
    """

    shape: tuple
    value_kind: str = "unsigned-8-bit"
    threshold: int | None = None
    specimen_label: str = ""

    def __post_init__(self):
        self.shape = tuple(int(n) for n in self.shape)
        if len(self.shape) != 3 or any(n < 1 for n in self.shape):
            raise VolumeError(f"shape must be three positive counts, got {self.shape}")
        if self.value_kind not in VALUE_KINDS:
            raise VolumeError(f"unknown value_kind {self.value_kind!r}")
        if self.value_kind == "unsigned-8-bit":
            if self.threshold is None:
                raise VolumeError("unsigned-8-bit volumes need a threshold")
            if not 0 <= self.threshold <= 255:
                raise VolumeError(f"threshold {self.threshold} outside [0, 255]")
        elif self.threshold is not None:
            raise VolumeError("boolean volumes must not carry a threshold")


@dataclass
class CubeSample:
    """One cube cut out of a parent volume.

    ``pore_fraction`` is the background fraction of the cube; the filter
    step removes cubes dominated by pores.
    """

    id: int
    origin: tuple
    mask: np.ndarray = field(repr=False)
    specimen_label: str = ""
    stage_label: str = ""

    @property
    def edge(self):
        return self.mask.shape[0]

    @property
    def pore_fraction(self):
        return float(np.count_nonzero(~self.mask)) / self.mask.size


def load_volume(path, meta):
    """Load a raw volume file and binarize it per ``meta``.

    Returns a boolean array of shape ``meta.shape`` indexed ``[x, y, z]``;
    byte ``k`` of the file maps to ``(x, y, z)`` with x fastest.
    """
    expected = meta.shape[0] * meta.shape[1] * meta.shape[2]
    actual = os.path.getsize(path)
    if actual != expected:
        raise VolumeError(
            f"{path}: expected {expected} bytes for shape {meta.shape}, found {actual}"
        )
    raw = np.fromfile(path, dtype=np.uint8)
    vol = raw.reshape(meta.shape, order="F")
    if meta.value_kind == "unsigned-8-bit":
        return vol >= meta.threshold
    return vol != 0


def save_volume(path, mask):
    """Write a boolean volume as raw bytes (0/255) in x-fastest order."""
    data = np.where(mask, np.uint8(255), np.uint8(0))
    data.flatten(order="F").tofile(path)


def read_meta(path):
    """Read a YAML sidecar into a VolumeMeta."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    known = {"shape", "value_kind", "threshold", "specimen_label"}
    unknown = set(doc) - known
    if unknown:
        raise VolumeError(f"{path}: unknown metadata keys {sorted(unknown)}")
    return VolumeMeta(
        shape=tuple(doc["shape"]),
        value_kind=doc.get("value_kind", "unsigned-8-bit"),
        threshold=doc.get("threshold"),
        specimen_label=doc.get("specimen_label", ""),
    )


def write_meta(path, meta):
    doc = {
        "shape": list(meta.shape),
        "value_kind": meta.value_kind,
        "specimen_label": meta.specimen_label,
    }
    if meta.threshold is not None:
        doc["threshold"] = int(meta.threshold)
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)


def partition_cubes(mask, edge, specimen_label="", stage_label="", id_start=0):
    """Tile a volume into non-overlapping cubes of the given edge.

    Cubes are tiled from the origin; trailing slabs smaller than ``edge``
    are dropped (equal-size samples only).  Returns an empty list when the
    edge exceeds some axis.
    """
    if edge < 1:
        raise ValueError(f"edge must be >= 1, got {edge}")
    nx, ny, nz = mask.shape
    cubes = []
    next_id = id_start
    for x in range(0, nx - edge + 1, edge):
        for y in range(0, ny - edge + 1, edge):
            for z in range(0, nz - edge + 1, edge):
                sub = np.ascontiguousarray(mask[x : x + edge, y : y + edge, z : z + edge])
                cubes.append(
                    CubeSample(
                        id=next_id,
                        origin=(x, y, z),
                        mask=sub,
                        specimen_label=specimen_label,
                        stage_label=stage_label,
                    )
                )
                next_id += 1
    return cubes


def filter_cubes(cubes, pore_threshold):
    """Drop cubes whose pore (background) fraction exceeds the threshold.

    Strictly "more than": a cube at exactly the threshold is kept.  Input
    order is preserved.
    """
    if not 0.0 <= pore_threshold <= 1.0:
        raise ValueError(f"pore_threshold must lie in [0, 1], got {pore_threshold}")
    return [c for c in cubes if c.pore_fraction <= pore_threshold]
