import math

import numpy as np
import pytest

from voxtopo.cubical import Cell, Pair, PersistenceDiagram
from voxtopo.images import (
    ConcatVector,
    Grid,
    PIParams,
    VectorizeError,
    concatenate,
    fit_grid,
    persistence_image,
    split_vector,
    weight,
)

V = Cell((0, 0, 0), (0, 0, 0))
E = Cell((0, 0, 0), (1, 0, 0))


def diagram(points, dim=0, sample_id=0):
    pairs = [Pair(dim=dim, birth=b, death=d, birth_cell=V, death_cell=E) for b, d in points]
    return PersistenceDiagram(sample_id=sample_id, pairs=pairs)


# ---------------------------------------------------------------------------
# grids


def test_fit_grid_padding():
    pds = [diagram([(-1.0, 0.0)]), diagram([(1.0, 2.0)])]
    g = fit_grid(pds, 0, PIParams(sigma=0.1, bins_per_axis=4))
    assert (g.x_min, g.x_max) == pytest.approx((-1.3, 1.3))
    assert (g.y_min, g.y_max) == pytest.approx((-0.3, 2.3))
    assert g.bins_per_axis == 4


def test_fit_grid_single_pair():
    g = fit_grid([diagram([(0.0, 1.0)])], 0, PIParams(sigma=1.0, bins_per_axis=3))
    assert (g.x_min, g.x_max) == (-3.0, 3.0)
    assert (g.y_min, g.y_max) == (-2.0, 4.0)


def test_fit_grid_no_finite_pairs():
    ess = PersistenceDiagram(
        sample_id=0,
        pairs=[Pair(dim=0, birth=0.0, death=math.inf, birth_cell=V, death_cell=None)],
    )
    with pytest.raises(VectorizeError):
        fit_grid([ess], 0, PIParams())


def test_grid_bin_of():
    g = Grid(0.0, 4.0, 0.0, 4.0, bins_per_axis=4)
    assert g.bin_of(0.5, 3.5) == (0, 3)
    assert g.bin_of(-1.0, 2.0) is None
    assert g.bin_of(2.0, 5.0) is None


def test_param_validation():
    with pytest.raises(VectorizeError):
        PIParams(sigma=0.0)
    with pytest.raises(VectorizeError):
        PIParams(C=-1.0)
    with pytest.raises(VectorizeError):
        PIParams(p=0.5)


# ---------------------------------------------------------------------------
# persistence images


def test_empty_diagram_zero_vector():
    g = Grid(-1.0, 1.0, -1.0, 1.0, bins_per_axis=4)
    img = persistence_image(diagram([]), 0, g, PIParams())
    assert img.shape == (16,)
    assert (img == 0).all()


def test_diagonal_pair_zero_vector():
    g = Grid(-1.0, 1.0, -1.0, 1.0, bins_per_axis=4)
    img = persistence_image(diagram([(0.5, 0.5)]), 0, g, PIParams())
    assert (img == 0).all()


def test_closed_form_quarter_pi():
    params = PIParams(sigma=1.0, C=1.0, p=1.0, bins_per_axis=3)
    g = fit_grid([diagram([(0.0, 1.0)])], 0, params)
    cx, cy = g.centers()
    ix = int(np.argmin(np.abs(cx - 0.0)))
    iy = int(np.argmin(np.abs(cy - 1.0)))
    assert cx[ix] == 0.0 and cy[iy] == 1.0  # bin centered exactly on the pair
    img = persistence_image(diagram([(0.0, 1.0)]), 0, g, params)
    assert img[iy * 3 + ix] == pytest.approx(math.pi / 4, abs=1e-9)


def test_duplicated_pair_doubles_image():
    params = PIParams(sigma=1.0, bins_per_axis=8)
    g = Grid(-3.0, 3.0, -2.0, 4.0, bins_per_axis=8)
    one = persistence_image(diagram([(0.0, 1.0)]), 0, g, params)
    two = persistence_image(diagram([(0.0, 1.0), (0.0, 1.0)]), 0, g, params)
    assert np.allclose(two, 2.0 * one)


def test_essential_pairs_skipped():
    params = PIParams(sigma=1.0, bins_per_axis=8)
    g = Grid(-3.0, 3.0, -2.0, 4.0, bins_per_axis=8)
    pd = diagram([(0.0, 1.0)])
    pd.pairs.append(Pair(dim=0, birth=0.0, death=math.inf, birth_cell=V, death_cell=None))
    with_ess = persistence_image(pd, 0, g, params)
    without = persistence_image(diagram([(0.0, 1.0)]), 0, g, params)
    assert np.array_equal(with_ess, without)


def test_mass_consistency():
    # quadrature: sum(bins) * bin area ~ 2 pi sigma^2 * sum of weights
    params = PIParams(sigma=1.0, bins_per_axis=64)
    g = Grid(-8.0, 8.0, -7.0, 9.0, bins_per_axis=64)
    assert g.dx <= params.sigma / 2
    points = [(-2.0, 1.0), (0.0, 1.0), (1.5, 4.0)]  # all >= 3 sigma inside
    img = persistence_image(diagram(points), 0, g, params)
    mass = img.sum() * g.dx * g.dy
    expected = 2 * math.pi * params.sigma**2 * sum(weight(b, d, params) for b, d in points)
    assert mass == pytest.approx(expected, rel=0.02)


def test_monotone_in_persistence():
    params = PIParams(sigma=1.0, bins_per_axis=16)
    g = Grid(-4.0, 4.0, -4.0, 8.0, bins_per_axis=16)
    low = persistence_image(diagram([(0.0, 1.0)]), 0, g, params)
    high = persistence_image(diagram([(0.0, 3.0)]), 0, g, params)
    assert high.max() >= low.max()


def test_translation_equivariance():
    # persistence-preserving shift (equal on both axes); a general (db, dd)
    # shift changes d - b and with it the arctan weight
    params = PIParams(sigma=1.0, bins_per_axis=8)
    g = Grid(-3.0, 3.0, -2.0, 4.0, bins_per_axis=8)
    shifted_g = Grid(-1.0, 5.0, 0.0, 6.0, bins_per_axis=8)
    a = persistence_image(diagram([(0.0, 1.0), (-1.0, 2.0)]), 0, g, params)
    b = persistence_image(diagram([(2.0, 3.0), (1.0, 4.0)]), 0, shifted_g, params)
    assert np.allclose(a, b)


def test_nonnegative_entries():
    rng = np.random.default_rng(4)
    points = [(b, b + p) for b, p in zip(rng.normal(size=20), rng.uniform(0.1, 3, 20))]
    params = PIParams(sigma=0.5, bins_per_axis=16)
    g = fit_grid([diagram(points)], 0, params)
    img = persistence_image(diagram(points), 0, g, params)
    assert (img >= 0).all()


# ---------------------------------------------------------------------------
# concatenation


def test_concatenate_offsets():
    cv = concatenate(np.ones(16), np.zeros(16), np.ones(16), sample_id=5)
    assert cv.values.size == 48
    assert cv.offsets == (0, 16, 32)
    assert (cv.block(1) == 0).all()


def test_concat_round_trip():
    rng = np.random.default_rng(6)
    blocks = [rng.random(9), rng.random(16), rng.random(4)]
    cv = concatenate(*blocks)
    back = split_vector(cv.values, cv.offsets)
    for orig, rec in zip(blocks, back):
        assert np.array_equal(orig, rec)
