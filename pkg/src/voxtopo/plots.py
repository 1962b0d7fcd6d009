"""Figure-style outputs: coefficient scatters (SVG) and feature heatmaps (PGM).

Both formats are written by hand so outputs are byte-reproducible and
suitable for golden-file comparison.
"""

import numpy as np


class PlotError(Exception):
    pass


# a fixed palette cycled over stage labels in first-appearance order
PALETTE = [
    "#2ca02c",
    "#d62728",
    "#1f77b4",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
]

_SIZE = 480
_MARGIN = 48


def emit_scatter(path, coefficients, labels, i, j):
    """2D scatter of coefficient columns (i, j), one color per stage label.

    ``coefficients`` is the N x M coefficient matrix, ``labels`` the per-row
    stage labels.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    M = coefficients.shape[1]
    if i == j or not (0 <= i < M and 0 <= j < M):
        raise PlotError(f"component pair ({i}, {j}) invalid for M={M}")
    xs = coefficients[:, i]
    ys = coefficients[:, j]
    x_max = max(float(xs.max()), 1e-12) if xs.size else 1.0
    y_max = max(float(ys.max()), 1e-12) if ys.size else 1.0
    span = _SIZE - 2 * _MARGIN

    seen = []
    for lab in labels:
        if lab not in seen:
            seen.append(lab)
    color_of = {lab: PALETTE[n % len(PALETTE)] for n, lab in enumerate(seen)}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_SIZE - _MARGIN}" x2="{_SIZE - _MARGIN}" '
        f'y2="{_SIZE - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_SIZE - _MARGIN}" stroke="black"/>',
        f'<text x="{_SIZE // 2}" y="{_SIZE - 12}" text-anchor="middle" '
        f'font-size="14">lambda_{i}</text>',
        f'<text x="16" y="{_SIZE // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 16 {_SIZE // 2})">lambda_{j}</text>',
    ]
    for x, y, lab in zip(xs, ys, labels):
        px = _MARGIN + span * (x / x_max)
        py = _SIZE - _MARGIN - span * (y / y_max)
        parts.append(
            f'<circle cx="{px:.3f}" cy="{py:.3f}" r="3" fill="{color_of[lab]}" '
            f'fill-opacity="0.7"/>'
        )
    for n, lab in enumerate(seen):
        ly = _MARGIN + 16 * n
        parts.append(
            f'<circle cx="{_SIZE - _MARGIN - 90}" cy="{ly}" r="4" fill="{color_of[lab]}"/>'
        )
        parts.append(
            f'<text x="{_SIZE - _MARGIN - 80}" y="{ly + 4}" font-size="12">{lab}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_feature_heatmap(path, block, grid):
    """B x B grayscale PGM of a feature distribution block.

    Values map linearly from [0, max] to [0, 255]; an all-zero block maps
    to all black.  Image rows run from the highest death bin (top) down, so
    the picture reads like a birth-death plot.
    """
    block = np.asarray(block, dtype=float)
    B = grid.bins_per_axis
    if block.size != B * B:
        raise PlotError(f"block length {block.size} does not match grid {B}x{B}")
    img = block.reshape(B, B)  # rows = death bins, ascending
    peak = img.max()
    if peak > 0:
        gray = np.floor(img / peak * 255.0).astype(np.uint8)
        gray = np.minimum(gray, 255)
    else:
        gray = np.zeros((B, B), dtype=np.uint8)
    gray = gray[::-1]  # top row = highest death
    with open(path, "wb") as fh:
        fh.write(f"P5 {B} {B} 255\n".encode())
        fh.write(gray.tobytes())
