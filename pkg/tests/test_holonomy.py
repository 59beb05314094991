import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cuspforge.errors import (BranchJumpError, NonUniqueSolutionError,
                              RepresentationUnavailableError)
from cuspforge.geometry import CONJUGATION, INFINITY, REGULAR_SHAPE, ExtendedIsometry, \
    ShapeAssignment, compose
from cuspforge.gieseking import (deformation_curve, figure_eight_triangulation,
                                 gieseking_triangulation)
from cuspforge.holonomy import (PeripheralState, coordinate_report, dehn_coefficients,
                                evaluate_word, involution_on_coefficients,
                                involution_on_peripheral, log_word, peripheral_state,
                                track_logs)
from cuspforge.triangulation import HolonomyWord, disjoint_union, lift_shapes, \
    orientation_double_cover

from strategies import curve_angles, nonzero

G = gieseking_triangulation()
KLEIN = G.cusp_links[0]


def test_single_factor_word():
    assert abs(evaluate_word(HolonomyWord([(0, 0, 1, False)]), ShapeAssignment((1j,))) - 1j) < 1e-15


def test_gieseking_words_at_complete_structure():
    shapes = ShapeAssignment((REGULAR_SHAPE,))
    assert abs(evaluate_word(KLEIN.curve("l"), shapes) - 1) < 1e-14
    assert abs(evaluate_word(KLEIN.curve("m"), shapes) - 1) < 1e-14


@given(curve_angles)
def test_fold_locus_along_curve(s):
    shapes = ShapeAssignment((deformation_curve(s).shape,))
    L = evaluate_word(KLEIN.curve("l"), shapes)
    M = evaluate_word(KLEIN.curve("m"), shapes)
    assert abs(L.imag) < 1e-9 and L.real > 0
    assert abs(abs(M) - 1) < 1e-9


@given(curve_angles)
def test_lifted_words_agree_on_cover(s):
    z = deformation_curve(s).shape
    cover, _ = orientation_double_cover(G)
    lifted = lift_shapes(ShapeAssignment((z,)))
    link = cover.cusp_links[0]
    for label in ("l", "m"):
        down = evaluate_word(KLEIN.curve(label), ShapeAssignment((z,)))
        up = evaluate_word(link.curve(label), lifted)
        assert abs(down - up) < 1e-10


@given(curve_angles)
def test_exp_log_consistency(s):
    shapes = ShapeAssignment((deformation_curve(s).shape,))
    for label in ("l", "m"):
        w = KLEIN.curve(label)
        assert abs(cmath.exp(log_word(w, shapes)) - evaluate_word(w, shapes)) < 1e-12


def test_track_logs_anchor_and_constant():
    st0 = PeripheralState.complete()
    assert st0.u == 0 and st0.v == 0 and st0.coefficients is INFINITY
    same = track_logs(st0, 1, 1)
    assert same.u == 0 and same.v == 0


def test_track_logs_crosses_negative_axis_continuously():
    # L walks once around the circle of radius 2 through -2; u must keep increasing.
    L0 = 2 + 0j
    state = PeripheralState(L0, 1j, complex(math.log(2), 0), 0.5j * math.pi, None)
    angles = np.linspace(0, 1.5 * math.pi, 61)
    for a in angles[1:]:
        state = track_logs(state, 2 * cmath.exp(1j * a), 1j)
        assert abs(cmath.exp(state.u) - state.L) < 1e-12
    assert abs(state.u - complex(math.log(2), 1.5 * math.pi)) < 1e-12
    assert abs(state.v - 0.5j * math.pi) < 1e-15


def test_track_logs_rejects_large_steps():
    with pytest.raises(BranchJumpError):
        track_logs(PeripheralState.complete(), -1 + 0.01j, 1)


def test_dehn_coefficients_examples():
    assert dehn_coefficients(0, 0) is INFINITY
    p, q = dehn_coefficients(0.7, 0.4j)
    assert abs(p) < 1e-15 and abs(q - 2 * math.pi / 0.4) < 1e-12
    # u = 2 pi i / 5 with a v carrying an independent real part.
    u, v = 2j * math.pi / 5, 0.3 + 0.9j
    p, q = dehn_coefficients(u, v)
    ref = np.linalg.solve([[u.real, v.real], [u.imag, v.imag]], [0, 2 * math.pi])
    assert abs(p - ref[0]) < 1e-12 and abs(q - ref[1]) < 1e-12
    assert abs(p - 5) < 1e-12 and abs(q) < 1e-12


def test_dehn_coefficients_real_proportional():
    with pytest.raises(NonUniqueSolutionError):
        dehn_coefficients(0.3 + 0.6j, 0.6 + 1.2j)


@given(nonzero, nonzero, st.floats(0.1, 10) | st.floats(-10, -0.1))
def test_dehn_coefficients_homogeneous(u, v, lam):
    det = u.real * v.imag - v.real * u.imag
    if abs(det) < 1e-3:
        return
    p, q = dehn_coefficients(u, v)
    assert abs(p * u + q * v - 2j * math.pi) < 1e-9 * (1 + abs(p) + abs(q))
    p2, q2 = dehn_coefficients(lam * u, lam * v)
    assert abs(p2 - p / lam) < 1e-9 * (1 + abs(p)) and abs(q2 - q / lam) < 1e-9 * (1 + abs(q))


@given(nonzero, nonzero)
def test_involution_on_peripheral_is_involution(u, v):
    if abs(u.real * v.imag - v.real * u.imag) < 1e-3:
        return
    s = PeripheralState.from_logs(u, v)
    t = involution_on_peripheral(s)
    assert abs(t.L - s.L.conjugate()) < 1e-12 * abs(s.L)
    assert abs(t.M - 1 / s.M.conjugate()) < 1e-12 * abs(1 / s.M)
    assert abs(cmath.exp(t.u) - t.L) < 1e-10 * abs(t.L)
    assert abs(cmath.exp(t.v) - t.M) < 1e-10 * abs(t.M)
    p, q = s.coefficients
    tp, tq = t.coefficients
    assert abs(tp + p) < 1e-9 * (1 + abs(p)) and abs(tq - q) < 1e-9 * (1 + abs(q))
    back = involution_on_peripheral(t)
    assert back.u == s.u and back.v == s.v and back.L == s.L


def test_involution_fixed_points():
    s = PeripheralState.from_logs(0.4, 0.9j)   # L real, |M| = 1
    t = involution_on_peripheral(s)
    assert abs(t.L - s.L) < 1e-15 and abs(t.M - s.M) < 1e-15
    assert involution_on_coefficients((0.0, 3.0)) == (-0.0, 3.0)
    assert involution_on_coefficients(INFINITY) is INFINITY


@given(curve_angles)
def test_peripheral_state_is_fixed_by_involution(s):
    st_ = peripheral_state(KLEIN, ShapeAssignment((deformation_curve(s).shape,)))
    t = involution_on_peripheral(st_)
    assert abs(t.u - st_.u) < 1e-9 and abs(t.v - st_.v) < 1e-9


def test_coordinate_report_complete():
    rep = coordinate_report(ShapeAssignment((REGULAR_SHAPE,)), G)
    assert rep[0]["kind"] == "klein"
    assert abs(rep[0]["I_b"]) < 1e-10 and abs(rep[0]["I_a2"]) < 1e-10


@given(curve_angles)
def test_coordinate_report_real_along_curve(s):
    rep = coordinate_report(ShapeAssignment((deformation_curve(s).shape,)), G)[0]
    assert abs(complex(rep["I_b"]).imag) < 1e-10
    assert abs(complex(rep["I_a2"]).imag) < 1e-10


def test_coordinate_report_needs_representation():
    with pytest.raises(RepresentationUnavailableError):
        coordinate_report(ShapeAssignment.regular(2), figure_eight_triangulation())


def test_coordinate_report_torus_lifts_are_conjugate():
    mixed = disjoint_union(G, figure_eight_triangulation())
    cover, _ = orientation_double_cover(mixed)
    g = ExtendedIsometry(1 + 0.5j, 0.3, 0.2j, 1.1)
    h = ExtendedIsometry(0.9, 1j, 0, 1 / 0.9)
    mirrored = {k: compose(compose(CONJUGATION, x), CONJUGATION) for k, x in {"l": g, "m": h}.items()}
    klein = {"l": ExtendedIsometry(2, 0, 0, 0.5), "m": ExtendedIsometry(1j, 0, 0, -1j)}
    names = [c.name for c in cover.cusp_links]
    tori = [n for n in names if n.startswith("torus")]
    reps = {names[0]: klein, tori[0]: {"l": g, "m": h}, tori[1]: mirrored}
    report = {r["cusp"]: r for r in coordinate_report(ShapeAssignment.regular(cover.n), cover, reps)}
    a, b = report[tori[0]], report[tori[1]]
    assert abs(a["I_m"] - b["I_m"].conjugate()) < 1e-12
    assert abs(a["I_l"] - b["I_l"].conjugate()) < 1e-12
