"""Synthetic binary volumes for demos and end-to-end tests."""

import numpy as np


def ball_volume(shape, centers, radii):
    """Boolean volume with Euclidean balls as foreground.

    Each ball is painted only inside its bounding box, so many small balls
    stay cheap even in large volumes.
    """
    nx, ny, nz = shape
    mask = np.zeros(shape, dtype=bool)
    for (cx, cy, cz), r in zip(centers, radii):
        ri = int(np.ceil(r))
        x0, x1 = max(0, int(cx) - ri), min(nx, int(cx) + ri + 1)
        y0, y1 = max(0, int(cy) - ri), min(ny, int(cy) + ri + 1)
        z0, z1 = max(0, int(cz) - ri), min(nz, int(cz) + ri + 1)
        if x0 >= x1 or y0 >= y1 or z0 >= z1:
            continue
        dx = (np.arange(x0, x1) - cx) ** 2
        dy = (np.arange(y0, y1) - cy) ** 2
        dz = (np.arange(z0, z1) - cz) ** 2
        ball = dx[:, None, None] + dy[None, :, None] + dz[None, None, :] <= r * r
        mask[x0:x1, y0:y1, z0:z1] |= ball
    return mask


def packed_balls_cube(edge, rng, spacing=8, radius=5.0):
    """Dense lattice packing of overlapping balls with enclosed cavities.

    Balls sit on a cubic lattice with a slight jitter; neighboring balls
    overlap, so the interstitial octants become enclosed cavities and the
    gaps between four balls become tunnels (the "eight ball" motif).
    """
    coords = np.arange(spacing // 2, edge, spacing)
    centers = []
    radii = []
    for x in coords:
        for y in coords:
            for z in coords:
                jit = rng.integers(-1, 2, size=3)
                centers.append((x + jit[0], y + jit[1], z + jit[2]))
                radii.append(radius + 0.5 * rng.random())
    return ball_volume((edge, edge, edge), centers, radii)


def sparse_blobs_cube(edge, rng, n_blobs=3, radius=9.0):
    """A few large well-separated foreground blobs."""
    centers = []
    radii = []
    for _ in range(n_blobs):
        centers.append(tuple(rng.integers(int(radius), edge - int(radius), size=3)))
        radii.append(radius + 2.0 * rng.random())
    return ball_volume((edge, edge, edge), centers, radii)


def random_volume(shape, rng, fg_prob=0.5):
    """Uniform random binary volume (test workloads)."""
    return rng.random(shape) < fg_prob
