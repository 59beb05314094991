"""The Gieseking manifold: one ideal tetrahedron, one Klein-bottle cusp.

Vertices of the tetrahedron sit at (-w, 1, INFINITY, 0), so the class-0 shape
is z = -1/w.  The two face pairings are the orientation-reversing maps

    U(z) = 1 / (k conj(z) + 1),  k = (1 + w)/|w|^2,   (-w, 0, inf) -> (-w, 1, 0)
    V(z) = -(1 + w) conj(z) + 1,                      (1, 0, inf)  -> (-w, 1, inf)

and the gluing equation reduces to |w (1 + w)| = 1 with Im w > 0.  The
fibered presentation uses r = UV, s = VU and t = U^-1; the peripheral Klein
bottle group is generated by a = t and b = [r, s].

The curve of solutions is parameterized by the angle s of
(w + 1/2)^2 - 1/4 = e^(is) on the unit circle, s in (0, 2 pi); the symmetric
parameter t = s/pi - 1 lies in (-1, 1) and vanishes at the complete structure.
Along the curve the commutator trace is 2 cos s, so the cone angle of the
completion is 2 pi |t|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .geometry import (IDENTITY, ExtendedIsometry, compose, inverse, isometry_distance,
                       trace_invariant)
from .klein import KleinRepresentation, PARABOLIC_BAND
from .triangulation import load_triangulation, orientation_double_cover

W0 = complex(-0.5, math.sqrt(3) / 2)
"""The complete structure."""

ENDPOINTS = ((-1 + math.sqrt(5)) / 2, (-1 - math.sqrt(5)) / 2)
"""Real limits of the curve as s -> 0 and s -> 2 pi."""


@lru_cache(maxsize=None)
def gieseking_triangulation():
    data = resources.files("cuspforge").joinpath("data/gieseking.json").read_bytes()
    return load_triangulation(data)


@lru_cache(maxsize=None)
def figure_eight_triangulation():
    """Orientation double cover of the Gieseking triangulation."""
    data = resources.files("cuspforge").joinpath("data/figure_eight.json").read_bytes()
    return load_triangulation(data)


def gieseking_double_cover():
    return orientation_double_cover(gieseking_triangulation())


def is_gieseking(tri) -> bool:
    return tri.to_document() == gieseking_triangulation().to_document()


def shape_from_w(w: complex) -> complex:
    return -1 / complex(w)


def w_from_shape(z: complex) -> complex:
    return -1 / complex(z)


def _check_w(w):
    w = complex(w)
    if not cmath.isfinite(w) or w == 0:
        raise ValueError(f"w = {w!r} must be finite and nonzero")
    if w.imag <= 0:
        raise ValueError(f"w = {w!r} must lie in the upper half-plane")
    return w


def isometries(w: complex):
    """The face pairings (U, V) as orientation-reversing isometries."""
    w = _check_w(w)
    k = (1 + w) / abs(w) ** 2
    U = ExtendedIsometry(0, 1, k, 1, conjugates=True)
    V = ExtendedIsometry(-(1 + w), 1, 0, 1, conjugates=True)
    return U, V


def edge_relation_residual(w: complex) -> float:
    """Distance of U^-1 V^-1 U^2 V^2 from the identity."""
    U, V = isometries(w)
    Ui, Vi = inverse(U), inverse(V)
    g = compose(compose(Ui, Vi), compose(compose(U, U), compose(V, V)))
    return isometry_distance(g, IDENTITY)


def curve_equation(w: complex) -> float:
    """|w (1 + w)| - 1, zero exactly on the deformation curve."""
    w = complex(w)
    return abs(w * (1 + w)) - 1


@dataclass(frozen=True)
class GiesekingPoint:
    w: complex
    x: complex
    tau: float
    s: float

    @property
    def t(self) -> float:
        return curve_t(self.s)

    @property
    def shape(self) -> complex:
        return shape_from_w(self.w)


def curve_w(s: float) -> complex:
    """w(s) = -1/2 + sqrt(1/4 + e^(is)) on the branch with Im w > 0."""
    if not 0 < s < 2 * math.pi:
        raise ValueError(f"curve parameter {s!r} outside (0, 2 pi)")
    root = cmath.sqrt(0.25 + cmath.exp(1j * s))
    if root.imag < 0:
        root = -root
    if root.imag <= 0:
        raise ArithmeticError(f"square-root branch is discontinuous at s = {s!r}")
    return -0.5 + root


def deformation_curve(s: float) -> GiesekingPoint:
    w = curve_w(s)
    x, _ = character(w)
    return GiesekingPoint(w, x, commutator_trace_from_w(w), float(s))


def curve_parameter(t: float) -> float:
    """Curve angle s for the symmetric parameter t in (-1, 1)."""
    return math.pi * (1 + t)


def curve_t(s: float) -> float:
    return s / math.pi - 1


def curve_parameter_of(w: complex) -> float:
    """Inverse of :func:`curve_w` for a point on the curve."""
    e = (complex(w) + 0.5) ** 2 - 0.25
    s = cmath.phase(e)
    return s if s > 0 else s + 2 * math.pi


def character(w: complex):
    """x = 1 + w + |w|^2 and the circle residual | |x - 1| - 1 |."""
    w = complex(w)
    x = 1 + w + abs(w) ** 2
    return x, abs(abs(x - 1) - 1)


def commutator_trace_from_w(w: complex) -> float:
    w = complex(w)
    return 2 * (w + w * w).real


def _check_on_circle(x, tol):
    x = complex(x)
    if abs(abs(x - 1) - 1) > tol:
        raise ValueError(f"x = {x!r} is not on the circle |x - 1| = 1")
    return x


def commutator_trace_from_x(x: complex, tol: float = 1e-9) -> float:
    """S (S - 3) - 2 with S = x + conj(x)."""
    x = _check_on_circle(x, tol)
    S = 2 * x.real
    return S * (S - 3) - 2


def commutator_trace(*, x=None, w=None) -> float:
    if (x is None) == (w is None):
        raise TypeError("give exactly one of x or w")
    return commutator_trace_from_x(x) if x is not None else commutator_trace_from_w(w)


def classify_character(x: complex, band: float = PARABOLIC_BAND, tol: float = 1e-9) -> str:
    """Type of the peripheral representation with character x on |x - 1| = 1."""
    x = _check_on_circle(x, tol)
    if abs(x - 2) < tol:
        raise ValueError("x = 2 is the reducible character")
    tau = commutator_trace_from_x(x, tol)
    ib = tau * tau - 4
    if abs(ib) < band:
        return "parabolic"
    return "typeI" if ib < 0 else "typeII"


def fiber_generators(w: complex):
    """(r, s, t) = (UV, VU, U^-1) and the matrix of r in its printed form."""
    w = _check_w(w)
    U, V = isometries(w)
    r, s, t = compose(U, V), compose(V, U), inverse(U)
    n2 = abs(w) ** 2
    rho_r = np.array([[0, n2], [-1 / n2, 1 + w + n2]], dtype=complex)
    return r, s, t, rho_r


def commutator(g: ExtendedIsometry, h: ExtendedIsometry) -> ExtendedIsometry:
    return compose(compose(g, h), compose(inverse(g), inverse(h)))


def peripheral_representation(w: complex) -> KleinRepresentation:
    """A = t and B = [r, s] on the cusp of the structure with parameter w."""
    r, s, t, _ = fiber_generators(w)
    return KleinRepresentation(t, commutator(r, s))


def klein_invariants(w: complex):
    rep = peripheral_representation(w)
    return trace_invariant(compose(rep.A, rep.A)), trace_invariant(rep.B)


def representation_from_character(x: complex, tol: float = 1e-9) -> KleinRepresentation:
    """A representation of the fibered group with traces (x, conj x, x) for (r, s, rs).

    r and s are put in a standard form with those traces and t is the
    orientation-reversing map A conj(.) with A conj(R) A^-1 = S and
    A conj(S) A^-1 = RS, found as the null vector of the linear equations.
    Returns the peripheral pair (t, [r, s]).
    """
    x = _check_on_circle(x, tol)
    if abs(x - 2) < tol:
        raise ValueError("x = 2 is the reducible character")
    R = np.array([[x, 1], [-1, 0]], dtype=complex)
    kappa = (-x + cmath.sqrt(x * x - 4)) / 2
    S = np.array([[0, kappa], [-1 / kappa, x.conjugate()]], dtype=complex)
    RS = R @ S
    eye = np.eye(2)
    # vec(A X) = (X^T kron I) vec(A), vec(Y A) = (I kron Y) vec(A), column-major vec.
    rows = []
    for X, Y in ((np.conj(R), S), (np.conj(S), RS)):
        rows.append(np.kron(X.T, eye) - np.kron(eye, Y))
    _, sv, vh = np.linalg.svd(np.vstack(rows))
    a = np.conj(vh[-1]).reshape(2, 2, order="F")
    A = ExtendedIsometry.from_matrix(a, conjugates=True)
    r = ExtendedIsometry.from_matrix(R)
    s = ExtendedIsometry.from_matrix(S)
    return KleinRepresentation(A, commutator(r, s))
