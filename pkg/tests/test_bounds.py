import math

import numpy as np
import pytest

from poisson_sharp import (
    BallModulusParams,
    GreenCache,
    Lcg64,
    ScalarField,
    ball_constants,
    ball_sigma_evaluator,
    peak_bound_l1_linf,
    bound_shifted,
    bound_sign_split,
    indicator_blob,
    optimize_extremal,
    optimizer_sigma_evaluator,
    printed_sigma_ball,
    radial_sigma_ball,
    sign_changing_field,
    solve_poisson,
    torsion_function,
    verify_modulus_bound,
)


def test_radial_sigma_disk_full_mass():
    p = BallModulusParams(2, 1.0)
    assert radial_sigma_ball(p, math.pi) == pytest.approx(0.25, rel=1e-14)


def test_radial_sigma_ball_full_mass():
    p = BallModulusParams(3, 1.0)
    assert radial_sigma_ball(p, 4 * math.pi / 3) == pytest.approx(1 / 6, rel=1e-14)


def test_radial_sigma_hand_integration():
    # -Lap u = chi_{B_r} in B_1, n=3: u(0) = r^2/2 - r^3/3
    p = BallModulusParams(3, 1.0)
    t = 4 * math.pi / 3 * 0.5 ** 3
    assert radial_sigma_ball(p, t) == pytest.approx(0.125 - 0.125 / 3, rel=1e-13)
    assert radial_sigma_ball(p, t) == pytest.approx(1 / 12, rel=1e-13)


def test_radial_sigma_zero():
    assert radial_sigma_ball(BallModulusParams(2, 1.0), 0.0) == 0.0


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
@pytest.mark.parametrize("radius", [0.6, 1.0, 2.3])
def test_radial_sigma_torsion_identity(dim, radius):
    p = BallModulusParams(dim, radius)
    expected = radius ** 2 / (2 * dim)
    assert radial_sigma_ball(p, p.max_mass) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_radial_sigma_monotone_continuous(dim):
    p = BallModulusParams(dim, 1.3)
    ts = np.linspace(0.0, p.max_mass, 1000)
    vals = np.array([radial_sigma_ball(p, t) for t in ts])
    assert vals[0] == 0.0
    assert np.all(np.diff(vals) >= -1e-13 * vals[-1])
    # continuity: no O(1) jumps (slope is unbounded at t=0 for n >= 3,
    # so the first step on a uniform grid is the largest)
    assert np.max(np.diff(vals)) < 0.05 * (vals[-1] - vals[0] + 1e-30)


def test_radial_sigma_range_validation():
    p = BallModulusParams(2, 1.0)
    with pytest.raises(ValueError):
        radial_sigma_ball(p, -0.1)
    with pytest.raises(ValueError):
        radial_sigma_ball(p, p.max_mass * 1.01)


def test_ball_constants_n3():
    p = BallModulusParams(3, 1.0)
    c1, c2 = ball_constants(p)
    assert c1 == pytest.approx(5.0 / (6.0 * (4 * math.pi / 3) ** (2 / 3)), rel=1e-14)
    assert c1 == pytest.approx(0.32070, abs=1e-4)
    assert c2 == pytest.approx(1.0 / (4 * math.pi), rel=1e-14)


def test_printed_sigma_ball_n3_full_mass():
    p = BallModulusParams(3, 1.0)
    # C1 (4pi/3)^(2/3) - C2 (4pi/3) = 5/6 - 1/3 = 1/2
    assert printed_sigma_ball(p, p.max_mass) == pytest.approx(0.5, rel=1e-13)


def test_printed_sigma_n2_needs_positive_t():
    p = BallModulusParams(2, 1.0)
    with pytest.raises(ValueError):
        printed_sigma_ball(p, 0.0)


@pytest.mark.parametrize("dim,radius", [(2, 0.5), (2, 1.0), (2, 2.0), (3, 0.7), (3, 1.0), (3, 1.9)])
def test_printed_dominates_radial(dim, radius):
    p = BallModulusParams(dim, radius)
    ts = np.linspace(p.max_mass * 1e-6, p.max_mass, 400)
    for t in ts:
        assert printed_sigma_ball(p, t) >= radial_sigma_ball(p, t) - 1e-14


def test_peak_bound_l1_linf_matches_printed_sigma_at_unit_linf():
    p = BallModulusParams(2, 1.0)
    for t in (0.1, 1.0, 3.0):
        assert peak_bound_l1_linf(p, t, 1.0) == pytest.approx(printed_sigma_ball(p, t), rel=1e-14)
    p3 = BallModulusParams(3, 1.0)
    for t in (0.1, 1.0, 4.0):
        assert peak_bound_l1_linf(p3, t, 1.0) == pytest.approx(printed_sigma_ball(p3, t), rel=1e-14)


@pytest.mark.parametrize("dim", [2, 3])
def test_peak_bound_l1_linf_homogeneous(dim):
    p = BallModulusParams(dim, 1.0)
    c = 7.3
    base = peak_bound_l1_linf(p, 0.8, 1.0)
    assert peak_bound_l1_linf(p, c * 0.8, c * 1.0) == pytest.approx(c * base, rel=1e-13)


def test_peak_bound_l1_linf_golden_value():
    # frozen from direct evaluation of the printed n=2 branch
    p = BallModulusParams(2, 1.0)
    assert peak_bound_l1_linf(p, math.pi, 1.0) == pytest.approx(2.011955028402229, rel=1e-13)


def test_peak_bound_l1_linf_zero_l1_limit():
    assert peak_bound_l1_linf(BallModulusParams(2, 1.0), 0.0, 1.0) == 0.0


def test_peak_bound_l1_linf_validation():
    p = BallModulusParams(2, 1.0)
    with pytest.raises(ValueError):
        peak_bound_l1_linf(p, 1.0, 0.0)
    with pytest.raises(ValueError):
        peak_bound_l1_linf(p, 10 * p.max_mass, 1.0)


def test_verify_modulus_bound_equality_witness(square32):
    beta = 0.4 * square32.measure
    sp = optimize_extremal(square32, beta)
    report = verify_modulus_bound(square32, sp.extremal.field, sp)
    assert report.passed
    assert abs(report.lhs - report.rhs) <= 1e-10 * report.rhs


def test_verify_modulus_bound_half_extremal_scales_exactly(square32):
    beta = 0.4 * square32.measure
    sp = optimize_extremal(square32, beta)
    half = ScalarField(square32, 0.5 * sp.extremal.weights)
    report = verify_modulus_bound(square32, half, sp)
    assert report.passed
    # halving is exact in floating point: both sides scale to 0.5 sigma
    assert report.lhs == report.rhs
    assert report.lhs == pytest.approx(0.5 * sp.sigma, abs=1e-16)


def test_verify_modulus_bound_random_blob(square32):
    rng = Lcg64(77)
    f = indicator_blob(square32, rng)
    beta = f.norm_l1 / f.norm_linf
    sp = optimize_extremal(square32, beta)
    report = verify_modulus_bound(square32, f, sp)
    assert report.passed
    assert report.margin > 0


def test_verify_modulus_bound_beta_mismatch(square32):
    sp = optimize_extremal(square32, 0.25 * square32.measure)
    f = ScalarField.ones(square32)  # beta = |D|, not 0.25 |D|
    with pytest.raises(ValueError, match="beta mismatch"):
        verify_modulus_bound(square32, f, sp)


def test_verify_modulus_bound_zero_field(square32):
    sp = optimize_extremal(square32, 0.0)
    with pytest.raises(ValueError):
        verify_modulus_bound(square32, ScalarField.zeros(square32), sp)


def test_optimizer_sigma_below_ball_sigma(square32):
    sharp = optimizer_sigma_evaluator(square32)
    ball = ball_sigma_evaluator(square32)
    for frac in (0.25, 0.5, 0.9):
        beta = frac * square32.measure
        assert sharp(beta) <= ball(beta) * 1.03


def test_sign_split_nonnegative_reduces(square32):
    rng = Lcg64(31)
    f = indicator_blob(square32, rng)
    report = bound_sign_split(ball_sigma_evaluator(square32), f)
    assert report.passed
    assert report.context["part_bounds"]["minus"] == 0.0
    assert report.rhs == report.context["part_bounds"]["plus"]


def test_sign_split_sign_symmetry(square32):
    rng = Lcg64(32)
    f = sign_changing_field(square32, rng)
    ev = ball_sigma_evaluator(square32)
    r_plus = bound_sign_split(ev, f)
    r_minus = bound_sign_split(ev, ScalarField(square32, -f.values))
    assert r_plus.rhs == pytest.approx(r_minus.rhs, rel=1e-14)
    assert r_plus.lhs == pytest.approx(r_minus.lhs, rel=1e-12)


def test_sign_split_half_and_half_square(square32):
    x = square32.cell_centers()[:, 0]
    f = ScalarField(square32, np.where(x < 0.5, 1.0, -1.0))
    ev = optimizer_sigma_evaluator(square32)
    report = bound_sign_split(ev, f)
    assert report.passed
    # each part has mass |D|/2 and unit height
    assert report.context["part_bounds"]["plus"] == pytest.approx(
        ev(0.5 * square32.measure), rel=1e-12
    )


def test_sign_split_zero_field_rejected(square32):
    with pytest.raises(ValueError):
        bound_sign_split(ball_sigma_evaluator(square32), ScalarField.zeros(square32))


def test_bound_shifted_constant_one(square32):
    ev = optimizer_sigma_evaluator(square32)
    torsion = torsion_function(square32)
    reports = bound_shifted(square32, ScalarField.ones(square32), ev, torsion)
    by_id = {r.inequality_id: r for r in reports}
    assert set(by_id) == {"shifted_max", "shifted_min", "shifted_abs"}
    assert all(not r.gating for r in reports)
    # min side: u = v so the bound is tight, margin ~ 0
    assert by_id["shifted_min"].margin == pytest.approx(0.0, abs=1e-12)
    # max side as printed: rhs = sigma(|D|) - max v which is ~0 < lhs
    assert by_id["shifted_max"].lhs == pytest.approx(torsion.u.norm_linf, rel=1e-12)
    assert by_id["shifted_max"].rhs < by_id["shifted_max"].lhs


def test_bound_shifted_mirrored(square32):
    ev = ball_sigma_evaluator(square32)
    torsion = torsion_function(square32)
    plus = {r.inequality_id: r for r in bound_shifted(square32, ScalarField.ones(square32), ev, torsion)}
    minus = {r.inequality_id: r for r in bound_shifted(
        square32, ScalarField(square32, -np.ones(square32.n_cells)), ev, torsion)}
    assert plus["shifted_max"].margin == pytest.approx(minus["shifted_min"].margin, abs=1e-12)
    assert plus["shifted_abs"].lhs == pytest.approx(minus["shifted_abs"].lhs, abs=1e-15)


def test_bound_shifted_random_sign(square32):
    rng = Lcg64(33)
    f = sign_changing_field(square32, rng)
    reports = bound_shifted(square32, f, ball_sigma_evaluator(square32))
    assert len(reports) == 3
    for r in reports:
        assert math.isfinite(r.lhs) and math.isfinite(r.rhs)
