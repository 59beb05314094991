"""Local models of the ends that appear in completions of Klein-bottle cusps.

Points of the cone space H^3(alpha) are given in cylindrical coordinates
(r, theta, h) around the singular axis, with theta in R/2 pi Z and metric

    dr^2 + (alpha / 2 pi)^2 sinh^2(r) dtheta^2 + cosh^2(r) dh^2.

Developing the complement of the axis into upper half-space sends the point to
the boundary coordinate z = exp(h + i alpha theta / 2 pi) of its orthogonal
projection; for alpha = 2 pi this is z = exp(h + i theta).  The functions
below turn identification maps of the models into isometries acting on z,
which is how the completion constants in :mod:`cuspforge.klein` are checked.
"""

from __future__ import annotations

import cmath
import math

from .geometry import apply, from_three_points
from .klein import DiscOrbiBundle, KleinRepresentation, SolidKleinBottle

TWO_PI = 2 * math.pi


def cone_metric(r: float, cone_angle: float):
    """Diagonal coefficients (g_rr, g_theta_theta, g_hh) of the cone metric."""
    return 1.0, (cone_angle / TWO_PI) ** 2 * math.sinh(r) ** 2, math.cosh(r) ** 2


def boundary_coordinate(theta: float, h: float, cone_angle: float = TWO_PI) -> complex:
    return cmath.exp(h + 1j * cone_angle * theta / TWO_PI)


def solid_klein_bottle_generator(length: float):
    """(r, theta, h) -> (r, -theta, h + L)."""
    return lambda r, theta, h: (r, -theta, h + length)


def disc_orbibundle_generators(length: float):
    """The two involutions (r, theta + pi, -h) and (r, theta + pi, 2L - h)."""
    return (lambda r, theta, h: (r, theta + math.pi, -h),
            lambda r, theta, h: (r, theta + math.pi, 2 * length - h))


def meridian(r, theta, h):
    """Once around the singular axis."""
    return r, theta + TWO_PI, h


def meridian_inverse(r, theta, h):
    return r, theta - TWO_PI, h


def chain(*maps):
    """Composite map, applied right to left."""
    def composite(r, theta, h):
        for m in reversed(maps):
            r, theta, h = m(r, theta, h)
        return r, theta, h
    return composite


_SAMPLES = [(0.3, 0.11, -0.2), (0.8, 0.57, 0.35), (1.5, 1.3, 0.05),
            (0.6, 2.2, -0.6), (1.1, 3.7, 0.4), (0.2, 5.1, 0.9)]


def developed_isometry(point_map, cone_angle: float, conjugates: bool):
    """Isometry of the boundary induced by ``point_map`` and its fit error.

    Three sample points fix the (anti-)Möbius map; the error is the largest
    mismatch on the remaining samples.
    """
    src = [boundary_coordinate(th, h, cone_angle) for _, th, h in _SAMPLES]
    dst = []
    for r, th, h in _SAMPLES:
        _, th2, h2 = point_map(r, th, h)
        dst.append(boundary_coordinate(th2, h2, cone_angle))
    g = from_three_points(src[:3], dst[:3], conjugates)
    err = max(abs(apply(g, p) - q) for p, q in zip(src[3:], dst[3:]))
    return g, float(err)


def model_holonomy(geometry):
    """Peripheral pair (A, B) of a completion model, with the fit error.

    Solid Klein bottle: A is the gluing map, B the meridian.  Disc
    orbi-bundle: A is the first involution, B the product of the two
    involutions with one meridian removed.
    """
    if isinstance(geometry, SolidKleinBottle):
        alpha = geometry.cone_angle
        A, ea = developed_isometry(solid_klein_bottle_generator(geometry.soul_length), alpha, True)
        B, eb = developed_isometry(meridian, alpha, False)
    elif isinstance(geometry, DiscOrbiBundle):
        alpha = geometry.cone_angle
        i1, i2 = disc_orbibundle_generators(geometry.interval_length)
        A, ea = developed_isometry(i1, alpha, True)
        B, eb = developed_isometry(chain(i2, i1, meridian_inverse), alpha, False)
    else:
        raise TypeError(f"no local model for {geometry!r}")
    return KleinRepresentation(A, B), max(ea, eb)


__all__ = ["cone_metric", "boundary_coordinate", "solid_klein_bottle_generator",
           "disc_orbibundle_generators", "meridian", "chain", "developed_isometry",
           "model_holonomy"]
