import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cuspforge.geometry import INFINITY, ExtendedIsometry, apply, compose, inverse, \
    isometry_distance
from cuspforge.gieseking import (ENDPOINTS, W0, character, classify_character, commutator,
                                 commutator_trace, commutator_trace_from_w, curve_parameter,
                                 curve_parameter_of, curve_t, curve_w, deformation_curve,
                                 edge_relation_residual, fiber_generators, gieseking_triangulation,
                                 isometries, peripheral_representation,
                                 representation_from_character)
from cuspforge.klein import classify, verify_relation

from strategies import curve_angles

# Golden-ratio endpoints and the complete character, computed independently (mpmath).
PHI_MINUS_ONE = 0.61803398874989485
MINUS_PHI = -1.6180339887498948
X_COMPLETE = complex(1.5, 0.86602540378443865)


def circle_point(re):
    return complex(re, math.sqrt(1 - (re - 1) ** 2))


def test_triangulation_shape():
    g = gieseking_triangulation()
    assert g.n == 1 and len(g.edge_cycles[0]) == 6
    assert g.cusp_links[0].kind == "klein"


def test_isometries_at_complete_structure():
    U, V = isometries(W0)
    k = (1 + W0) / abs(W0) ** 2
    assert abs(k - complex(0.5, math.sqrt(3) / 2)) < 1e-15
    assert U.conjugates and V.conjugates
    assert abs(apply(U, -W0) - (-W0)) < 1e-14
    assert abs(apply(U, 0) - 1) < 1e-14
    assert apply(U, INFINITY) == 0
    assert apply(V, INFINITY) is INFINITY


@given(st.builds(complex, st.floats(-3, 3), st.floats(0.05, 3)))
def test_V_sends_zero_to_one(w):
    _, V = isometries(w)
    assert abs(apply(V, 0) - 1) < 1e-14


def test_isometries_reject_bad_w():
    for w in (0, -1.0, complex("nan")):
        with pytest.raises(ValueError):
            isometries(w)


def test_edge_relation():
    assert edge_relation_residual(W0) < 1e-12
    assert edge_relation_residual(1j) > 1e-3
    assert abs(abs(1j * (1 + 1j)) - math.sqrt(2)) < 1e-15


@given(curve_angles)
def test_edge_relation_on_curve(s):
    p = deformation_curve(s)
    assert abs(abs(p.w * (1 + p.w)) - 1) < 1e-12
    assert edge_relation_residual(p.w) < 1e-10


@given(st.builds(complex, st.floats(-2, 1), st.floats(0.05, 2)))
def test_edge_relation_vanishes_only_on_curve(w):
    off = abs(abs(w * (1 + w)) - 1)
    if off > 1e-3:
        assert edge_relation_residual(w) > 1e-8


def test_curve_endpoints():
    assert abs(ENDPOINTS[0] - PHI_MINUS_ONE) < 1e-15 and abs(ENDPOINTS[1] - MINUS_PHI) < 1e-15
    assert abs(curve_w(1e-12) - PHI_MINUS_ONE) < 1e-9
    assert abs(curve_w(2 * math.pi - 1e-12) - MINUS_PHI) < 1e-9


def test_complete_point_on_curve():
    s_star = curve_parameter_of(W0)
    assert abs(s_star - math.pi) < 1e-12
    p = deformation_curve(s_star)
    assert abs(p.w - W0) < 1e-12
    assert abs(p.x - X_COMPLETE) < 1e-12
    assert abs(p.tau + 2) < 1e-12
    assert curve_t(s_star) == pytest.approx(0, abs=1e-12)


def test_curve_parameter_outside_interval():
    with pytest.raises(ValueError):
        curve_w(0)


@given(curve_angles)
def test_curve_is_continuous_and_invertible(s):
    w = curve_w(s)
    assert w.imag > 0
    assert abs(curve_parameter_of(w) - s) < 1e-9
    assert abs(curve_w(s + 1e-7) - w) < 1e-5


def test_fiber_generators():
    r, s, t, rho = fiber_generators(W0)
    x = 1 + W0 + abs(W0) ** 2
    assert abs(np.trace(rho) - x) < 1e-14
    assert abs(np.linalg.det(rho) - 1) < 1e-14
    assert min(abs(r.trace - x), abs(r.trace + x)) < 1e-12
    assert isometry_distance(r, ExtendedIsometry.from_matrix(rho)) < 1e-12


@given(curve_angles)
def test_monodromy(s):
    r, s_, t, _ = fiber_generators(curve_w(s))
    ti = inverse(t)
    assert isometry_distance(compose(compose(t, r), ti), s_) < 1e-9
    assert isometry_distance(compose(compose(t, s_), ti), compose(r, s_)) < 1e-9


@given(curve_angles)
def test_character_and_traces(s):
    p = deformation_curve(s)
    x, res = character(p.w)
    assert res < 1e-10 and abs(abs(x - 1) - 1) < 1e-10
    assert x.real >= 1.5 - 1e-9
    S = 2 * x.real
    assert abs(S * (S - 3) - 2 - commutator_trace_from_w(p.w)) < 1e-9
    assert commutator_trace(w=p.w) >= -2 - 1e-12
    # Fixed-point relation of the monodromy on trace coordinates.
    assert abs(x + x.conjugate() - x * x.conjugate()) < 1e-9


@given(curve_angles)
def test_fold_symmetry(s):
    w = curve_w(s)
    w2 = -1 - w.conjugate()
    assert abs(abs(w2 * (1 + w2)) - 1) < 1e-12
    assert abs(character(w)[0] - character(w2)[0]) < 1e-10
    # w2 is the point with the opposite symmetric parameter.
    assert abs(curve_t(curve_parameter_of(w2)) + curve_t(s)) < 1e-9


def test_fold_counts():
    ts = np.linspace(-0.95, 0.95, 39)
    xs = [deformation_curve(curve_parameter(t)).x for t in ts]
    complete = [i for i, x in enumerate(xs) if abs(x - X_COMPLETE) < 1e-12]
    assert complete == [19]
    for i in range(19):
        assert abs(xs[i] - xs[38 - i]) < 1e-10
        assert abs(xs[i] - xs[i + 1]) > 1e-4


def test_reducible_point_not_attained():
    xs = [deformation_curve(s).x for s in np.linspace(1e-6, 2 * math.pi - 1e-6, 2001)]
    assert min(abs(x - 2) for x in xs) > 0
    with pytest.raises(ValueError):
        classify_character(2)


def test_commutator_trace_examples():
    assert commutator_trace(x=X_COMPLETE) == pytest.approx(-2, abs=1e-12)
    assert commutator_trace(x=0) == -2
    assert commutator_trace(x=2) == 2
    with pytest.raises(ValueError):
        commutator_trace(x=3)
    with pytest.raises(TypeError):
        commutator_trace()


def test_classify_character_examples():
    assert classify_character(X_COMPLETE) == "parabolic"
    assert classify_character(complex(1.9, math.sqrt(1 - 0.81))) == "typeI"
    assert classify_character(complex(0.5, math.sqrt(1 - 0.25))) == "typeII"
    assert commutator_trace(x=complex(0.5, math.sqrt(0.75))) == pytest.approx(-4)


@given(curve_angles)
def test_peripheral_group(s):
    rep = peripheral_representation(curve_w(s))
    assert verify_relation(rep) < 1e-9
    r, s_, t, _ = fiber_generators(curve_w(s))
    assert isometry_distance(rep.B, commutator(r, s_)) < 1e-15


@given(st.floats(1.02, 1.98) | st.floats(0.02, 1.48))
def test_representation_from_character(re):
    x = circle_point(re)
    rep = representation_from_character(x)
    assert verify_relation(rep) < 1e-8
    assert classify(rep).tag == classify_character(x)
