"""Signed Manhattan distance transform of binary volumes.

Background voxels get +(Manhattan distance to the nearest foreground
voxel), foreground voxels get -(Manhattan distance to the nearest
background voxel).  Distances are exact integers and zero never occurs,
so the sign alone recovers the phase.  Uniform volumes (a single phase)
get the sentinel +/-(nx+ny+nz), which exceeds any realizable in-volume
distance.
"""

import numpy as np
from scipy import ndimage


def signed_manhattan_sdt(mask):
    """Signed Manhattan (city-block) distance transform.

    Distances are measured inside the volume only; nothing is assumed
    beyond the boundary.  Returns an int32 array of the mask's shape.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        raise ValueError("empty volume")
    cap = int(sum(mask.shape))
    if mask.all():
        return np.full(mask.shape, -cap, dtype=np.int32)
    if not mask.any():
        return np.full(mask.shape, cap, dtype=np.int32)
    # city-block chamfer transform is exact for the Manhattan metric
    pos = ndimage.distance_transform_cdt(~mask, metric="taxicab")
    neg = ndimage.distance_transform_cdt(mask, metric="taxicab")
    return (pos.astype(np.int32) - neg.astype(np.int32))


def brute_force_sdt(mask):
    """All-pairs O(n^2) reference for the signed Manhattan SDT.

    Exact but quadratic; intended for testing against the fast transform
    on small volumes.
    """
    mask = np.asarray(mask, dtype=bool)
    cap = int(sum(mask.shape))
    if mask.all():
        return np.full(mask.shape, -cap, dtype=np.int32)
    if not mask.any():
        return np.full(mask.shape, cap, dtype=np.int32)
    coords = np.argwhere(np.ones(mask.shape, dtype=bool))
    fg = np.argwhere(mask)
    bg = np.argwhere(~mask)
    out = np.empty(mask.size, dtype=np.int32)
    flat = mask.reshape(-1)
    for i, c in enumerate(coords):
        if flat[i]:
            out[i] = -int(np.abs(bg - c).sum(axis=1).min())
        else:
            out[i] = int(np.abs(fg - c).sum(axis=1).min())
    return out.reshape(mask.shape)


def save_sdt(path, values):
    """Write a ScalarVolume as raw little-endian signed 32-bit integers."""
    np.asarray(values, dtype="<i4").flatten(order="F").tofile(path)


def load_sdt(path, shape):
    raw = np.fromfile(path, dtype="<i4")
    expected = shape[0] * shape[1] * shape[2]
    if raw.size != expected:
        raise ValueError(f"{path}: expected {expected} int32 values, found {raw.size}")
    return raw.reshape(shape, order="F").astype(np.int32)
