import math

import numpy as np
import pytest

from poisson_sharp import (
    DegenerateDomainError,
    DisconnectedDomainError,
    GridDomain,
    ScalarField,
    cellset_centroid,
    cellset_circularity,
    equivalent_ball_radius,
    make_domain,
    parse_shape,
    rank_ball_domain,
    read_mask_file,
    unit_ball_volume,
    write_mask_file,
)


def test_disk_measure_close_to_pi():
    d = make_domain("disk:1.0", 64)
    assert abs(d.measure - math.pi) < 5e-2


def test_square_measure_exact():
    d = make_domain("square:1.0", 64)
    assert d.measure == 1.0
    assert d.n_cells == 64 * 64


def test_ball_measure():
    d = make_domain("ball:1.0", 16)
    assert abs(d.measure - 4 * math.pi / 3) < 2e-1
    assert d.dim == 3


def test_lshape_measure_exact():
    d = make_domain("l_shape:1.0", 32)
    assert d.measure == pytest.approx(0.75, abs=1e-12)


def test_annulus_connected():
    d = make_domain("annulus:0.5,1.0", 32)
    expected = math.pi * (1.0 - 0.25)
    assert abs(d.measure - expected) < 0.1


def test_measure_converges_first_order():
    errors = [abs(make_domain("disk:1.0", res).measure - math.pi) for res in (16, 32, 64)]
    assert errors[1] < errors[0]
    assert errors[2] < errors[1]


def test_degenerate_domain():
    with pytest.raises(DegenerateDomainError):
        make_domain("annulus:0.01,0.02", 8)  # thinner than one cell


def test_disconnected_mask_rejected():
    mask = np.zeros((7, 7), dtype=bool)
    mask[2, 2] = True
    mask[4, 4] = True  # diagonal touch only: not face-connected
    with pytest.raises(DisconnectedDomainError):
        GridDomain(mask, 1.0)


def test_interior_index_bijection():
    d = make_domain("disk:1.0", 16)
    idx = d.index_map[d.interior_mask]
    assert sorted(idx) == list(range(d.n_cells))


def test_exterior_layer_padding():
    mask = np.ones((3, 3), dtype=bool)  # touches every edge: must be padded
    d = GridDomain(mask, 0.5)
    assert d.extent == (5, 5)
    assert d.n_cells == 9
    assert not d.interior_mask[0].any() and not d.interior_mask[-1].any()


def test_equivalent_ball_radius_square():
    d = make_domain("square:1.0", 32)
    assert equivalent_ball_radius(d) == pytest.approx((1 / math.pi) ** 0.5, rel=1e-12)


def test_equivalent_ball_radius_disk_is_one():
    d = make_domain("disk:1.0", 64)
    assert equivalent_ball_radius(d) == pytest.approx(1.0, abs=1e-2)


def test_equivalent_ball_radius_cube():
    d = make_domain("cube:1.0", 12)
    assert equivalent_ball_radius(d) == pytest.approx((3 / (4 * math.pi)) ** (1 / 3), rel=1e-12)


def test_equivalent_radius_translation_invariant():
    base = make_domain("disk:0.7", 24)
    mask = base.interior_mask
    shifted = np.pad(mask, ((5, 0), (0, 3)))
    d2 = GridDomain(shifted, base.spacing, origin=(-1.0, 2.0))
    assert equivalent_ball_radius(d2) == equivalent_ball_radius(base)


def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)


def test_parse_shape():
    assert parse_shape("disk:1.5") == ("disk", (1.5,))
    assert parse_shape("annulus:0.5,1.0") == ("annulus", (0.5, 1.0))
    assert parse_shape("mask_file:/tmp/d.mask") == ("mask_file", ("/tmp/d.mask",))
    for bad in ("blob:1", "disk:-1", "annulus:1.0,0.5", "disk:a"):
        with pytest.raises(ValueError):
            parse_shape(bad)


def test_mask_file_roundtrip(tmp_path):
    d = make_domain("l_shape:1.0", 16)
    path = tmp_path / "dom.mask"
    write_mask_file(path, d)
    d2 = read_mask_file(path)
    assert d2.dim == d.dim
    assert d2.spacing == d.spacing
    assert d2.n_cells == d.n_cells
    assert np.array_equal(d2.interior_mask, d.interior_mask)


def test_mask_file_roundtrip_3d(tmp_path):
    d = make_domain("ball:1.0", 8)
    path = tmp_path / "ball.mask"
    write_mask_file(path, d)
    d2 = read_mask_file(path)
    assert np.array_equal(d2.interior_mask, d.interior_mask)


def test_make_domain_from_mask_file(tmp_path):
    d = make_domain("disk:1.0", 16)
    path = tmp_path / "disk.mask"
    write_mask_file(path, d)
    d2 = make_domain(f"mask_file:{path}", 999)  # resolution ignored for files
    assert d2.n_cells == d.n_cells


def test_mask_file_truncated(tmp_path):
    path = tmp_path / "bad.mask"
    path.write_text("2 0.5 4 4\n1 0 0\n")
    with pytest.raises(ValueError):
        read_mask_file(path)


def test_scalar_field_norms():
    d = make_domain("square:1.0", 8)
    f = ScalarField(d, np.full(d.n_cells, -2.0))
    assert f.norm_l1 == pytest.approx(2.0, rel=1e-12)
    assert f.norm_linf == 2.0
    assert f.norm_l2 == pytest.approx(2.0, rel=1e-12)


def test_scalar_field_shape_check():
    d = make_domain("square:1.0", 8)
    with pytest.raises(ValueError):
        ScalarField(d, np.zeros(3))


def test_rank_ball_exact_count():
    ball = rank_ball_domain(5000, 1 / 32, 2)
    assert ball.n_cells == 5000
    assert ball.measure == pytest.approx(5000 / 32 ** 2, rel=1e-12)


def test_rank_ball_circularity():
    ball = rank_ball_domain(5000, 1 / 32, 2)
    member = np.ones(ball.n_cells, dtype=bool)
    assert cellset_circularity(ball, member) == pytest.approx(1.0, abs=0.05)
    assert np.linalg.norm(cellset_centroid(ball, member)) < ball.spacing


def test_square_circularity_far_from_one():
    d = make_domain("square:1.0", 64)
    member = np.ones(d.n_cells, dtype=bool)
    assert cellset_circularity(d, member) < 0.9


def test_centermost_cell_of_disk():
    d = make_domain("disk:1.0", 32)
    assert np.linalg.norm(d.center_of(d.centermost_cell())) < 1e-12
