import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homghost.grid import (
    PixelCoord,
    RotationOp,
    make_grid,
    nearest_pixel,
    permutation_map,
    rotate_continuous,
    rotate_mask,
    sample_rotated,
)


def trig_sample(mask, angle, x, y):
    """Direct per-pixel oracle: plain trig, no snapping, no numpy."""
    h, w = len(mask), len(mask[0])
    cx, cy = (w - 1) / 2, (h - 1) / 2
    dx, dy = x - cx, y - cy
    rx = cx + math.cos(angle) * dx - math.sin(angle) * dy
    ry = cy + math.sin(angle) * dx + math.cos(angle) * dy
    qx, qy = math.floor(rx + 0.5), math.floor(ry + 0.5)
    if 0 <= qx < w and 0 <= qy < h:
        return mask[qy][qx]
    return 0


def test_make_grid_default_center():
    assert make_grid(48, 48).center == (23.5, 23.5)
    assert make_grid(1, 1).center == (0.0, 0.0)
    assert make_grid(960, 960).shape == (960, 960)


def test_make_grid_rejects_zero_dimension():
    with pytest.raises(ValueError):
        make_grid(0, 5)
    with pytest.raises(ValueError):
        make_grid(5, 5, center=(7.0, 1.0))


def test_rotate_continuous_examples():
    op0 = RotationOp(0.0, (3.0, 2.0))
    assert rotate_continuous(op0, (1.25, -4.0)) == (1.25, -4.0)
    half = RotationOp(math.pi, (3.0, 2.0))
    assert rotate_continuous(half, (4.0, 2.0)) == (2.0, 2.0)
    quarter = RotationOp(math.pi / 2, (3.0, 2.0))
    assert rotate_continuous(quarter, (4.0, 2.0)) == (3.0, 3.0)


def test_nearest_pixel_rounds_half_up():
    assert nearest_pixel((0.5, -0.5)) == PixelCoord(1, 0)
    assert nearest_pixel((2.49, 2.51)) == PixelCoord(2, 3)


@pytest.mark.parametrize("angle", [0.0, math.pi / 2, math.pi, -math.pi / 2, 0.3, math.pi / 4, -math.pi / 8])
def test_rotate_mask_matches_trig_oracle_on_8x8(angle):
    gen = np.random.default_rng(5)
    for _ in range(4):
        mask = (gen.random((8, 8)) < 0.5).astype(int)
        got = rotate_mask(mask, RotationOp(angle, (3.5, 3.5)))
        lst = mask.tolist()
        want = [[trig_sample(lst, angle, x, y) for x in range(8)] for y in range(8)]
        assert got.tolist() == want


def test_single_lit_pixel_quarter_turn_every_position():
    # enumerate all 64 single-pixel masks; each must light exactly the oracle pixel
    g = make_grid(8, 8)
    op = RotationOp.for_grid(g, math.pi / 2)
    for y in range(8):
        for x in range(8):
            mask = [[0] * 8 for _ in range(8)]
            mask[y][x] = 1
            want = [[trig_sample(mask, math.pi / 2, u, v) for u in range(8)] for v in range(8)]
            assert rotate_mask(np.array(mask), op).tolist() == want


def test_lit_pixel_right_of_center_lands_below():
    # integer centre so that centre + (2, 0) is a pixel
    g = make_grid(9, 9)
    mask = np.zeros(g.shape, dtype=int)
    mask[4, 6] = 1  # centre + (2, 0)
    out = rotate_mask(mask, RotationOp.for_grid(g, math.pi / 2))
    # out(r) = mask(R r): lit where R r = centre + (2, 0), i.e. r = centre + (0, -2)
    assert np.argwhere(out).tolist() == [[2, 4]]
    # the forward image of the lit pixel is centre + (0, 2)
    assert nearest_pixel(rotate_continuous(RotationOp.for_grid(g, math.pi / 2), (6.0, 4.0))) == (4, 6)


def test_sample_rotated_agrees_with_rotate_mask():
    g = make_grid(10, 7)
    gen = np.random.default_rng(0)
    mask = (gen.random(g.shape) < 0.4).astype(int)
    op = RotationOp.for_grid(g, 0.7)
    img = rotate_mask(mask, op)
    for p in g.pixels():
        assert sample_rotated(mask, op, p) == img[p.y, p.x]


def test_half_turn_invariant_mask():
    g = make_grid(12, 12)
    gen = np.random.default_rng(1)
    m = gen.random(g.shape) < 0.5
    m = (m | m[::-1, ::-1]).astype(int)
    assert np.array_equal(rotate_mask(m, RotationOp.for_grid(g, math.pi)), m)


def test_out_of_grid_reads_blocked():
    g = make_grid(4, 4, center=(0.0, 0.0))
    mask = np.ones(g.shape, dtype=int)
    assert sample_rotated(mask, RotationOp.for_grid(g, math.pi), (2, 2)) == 0


def test_permutation_map_quarter_turns_bijective():
    g = make_grid(48, 48)
    for angle in (0.0, math.pi / 2, math.pi, -math.pi / 2):
        pm = permutation_map(g, RotationOp.for_grid(g, angle))
        assert pm.bijective
        assert pm.collisions() == 0 and pm.out_of_grid() == 0
    ident = permutation_map(g, RotationOp.for_grid(g, 0.0))
    assert all(ident.target(p) == p for p in g.pixels())


def test_permutation_map_eighth_turn_counts():
    # frozen from a pure-python enumeration with math.cos/sin
    g = make_grid(48, 48)
    pm = permutation_map(g, RotationOp.for_grid(g, math.pi / 4))
    assert not pm.bijective
    assert pm.collisions() == 305
    assert pm.out_of_grid() == 420
    g12 = make_grid(12, 12)
    pm12 = permutation_map(g12, RotationOp.for_grid(g12, math.pi / 4))
    assert (pm12.collisions(), pm12.out_of_grid()) == (21, 24)


def test_fibers_partition_in_grid_sources():
    g = make_grid(12, 12)
    pm = permutation_map(g, RotationOp.for_grid(g, math.pi / 4))
    fib = pm.fibers()
    sources = [p for v in fib.values() for p in v]
    assert len(sources) == len(set(sources)) == g.size - pm.out_of_grid()
    assert sum(len(v) - 1 for v in fib.values()) == pm.collisions()


angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
coords = st.floats(-100, 100, allow_nan=False)


@given(angles, coords, coords, coords, coords)
def test_rotation_roundtrip_and_distance(a, cx, cy, px, py):
    op = RotationOp(a, (cx, cy))
    q = rotate_continuous(op, (px, py))
    back = rotate_continuous(op.inverse(), q)
    assert abs(back[0] - px) < 1e-12 * max(1.0, abs(px) + abs(cx)) * 10
    assert abs(back[1] - py) < 1e-12 * max(1.0, abs(py) + abs(cy)) * 10
    d0 = math.hypot(px - cx, py - cy)
    d1 = math.hypot(q[0] - cx, q[1] - cy)
    assert abs(d0 - d1) < 1e-12 * max(1.0, d0) * 10


@given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_identity_rotation_is_pixelwise_equal(w, h, seed):
    mask = (np.random.default_rng(seed).random((h, w)) < 0.5).astype(int)
    assert np.array_equal(rotate_mask(mask, RotationOp(0.0, make_grid(w, h).center)), mask)


@settings(max_examples=50)
@given(st.integers(1, 16), st.sampled_from([0, 1, 2, 3]), st.integers(0, 2**32 - 1))
def test_quarter_turn_round_trip_on_square_grids(n, k, seed):
    g = make_grid(n, n)
    mask = (np.random.default_rng(seed).random(g.shape) < 0.5).astype(int)
    op = RotationOp.for_grid(g, k * math.pi / 2)
    assert np.array_equal(rotate_mask(rotate_mask(mask, op), op.inverse()), mask)


@settings(max_examples=50)
@given(st.integers(1, 12), st.integers(1, 12), angles)
def test_bijective_flag_iff_injective_and_total(w, h, a):
    g = make_grid(w, h)
    pm = permutation_map(g, RotationOp.for_grid(g, a))
    tx, ty = pm.targets_x.ravel(), pm.targets_y.ravel()
    total = all(g.contains((int(x), int(y))) for x, y in zip(tx, ty))
    injective = len(set(zip(tx.tolist(), ty.tolist()))) == g.size
    assert pm.bijective == (total and injective)
