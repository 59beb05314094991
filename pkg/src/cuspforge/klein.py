"""Klein-bottle group representations and the geometry of their completions.

The Klein-bottle group is <a, b | a b a^-1 = b^-1>.  A representation that
preserves orientation type sends a to an orientation-reversing isometry A and
b to an orientation-preserving one B.  Up to conjugation it is one of

* parabolic:   A(z) = conj(z) + 1 (or conj(z)),  B(z) = z + tau i
* type I:      A(z) = e^l conj(z),                B(z) = e^(i alpha) z
* type II:     A(z) = e^(i alpha) / conj(z),      B(z) = e^l z

and the sign pattern of I_{a^2} = tr(A^2)^2 - 4 and I_b = tr(B)^2 - 4 tells
the cases apart.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTypeError, InconsistentClassificationError
from .geometry import (IDENTITY, ExtendedIsometry, compose, inverse, isometry_distance,
                       trace_invariant)

PARABOLIC_BAND = 1e-8

# Completion constants for type II: the cone angle is twice the rotation
# parameter of A and the singular interval is half the translation length of
# B.  Both are checked against the local-model identification maps in the tests.
TYPE_II_ANGLE_FACTOR = 2.0
TYPE_II_LENGTH_FACTOR = 0.5


@dataclass(frozen=True)
class KleinRepresentation:
    A: ExtendedIsometry
    B: ExtendedIsometry

    def __post_init__(self):
        if not self.A.conjugates:
            raise ValueError("A must reverse orientation")
        if self.B.conjugates:
            raise ValueError("B must preserve orientation")

    def conjugated(self, g: ExtendedIsometry) -> "KleinRepresentation":
        gi = inverse(g)
        return KleinRepresentation(compose(compose(g, self.A), gi),
                                   compose(compose(g, self.B), gi))


# --- normal forms -----------------------------------------------------------

def parabolic_representation(tau: float, degenerate: bool = False) -> KleinRepresentation:
    A = ExtendedIsometry(1, 0 if degenerate else 1, 0, 1, conjugates=True)
    return KleinRepresentation(A, ExtendedIsometry(1, tau * 1j, 0, 1))


def type_i_representation(l: float, alpha: float) -> KleinRepresentation:
    A = ExtendedIsometry(math.exp(l / 2), 0, 0, math.exp(-l / 2), conjugates=True)
    B = ExtendedIsometry(cmath.exp(0.5j * alpha), 0, 0, cmath.exp(-0.5j * alpha))
    return KleinRepresentation(A, B)


def type_ii_representation(alpha: float, l: float) -> KleinRepresentation:
    A = ExtendedIsometry(0, cmath.exp(1j * alpha), 1, 0, conjugates=True)
    B = ExtendedIsometry(math.exp(l / 2), 0, 0, math.exp(-l / 2))
    return KleinRepresentation(A, B)


# --- classification ---------------------------------------------------------

@dataclass(frozen=True)
class ParabolicNonDegenerate:
    tau: float
    tag = "parabolic"
    degenerate = False


@dataclass(frozen=True)
class ParabolicDegenerate:
    """A^2 is the identity.  tau is not a conjugacy invariant here; it is reported as 1."""

    tau: float = 1.0
    tag = "parabolic"
    degenerate = True


@dataclass(frozen=True)
class TypeI:
    l: float
    alpha: float
    tag = "typeI"

    @property
    def degenerate(self) -> bool:
        return self.l == 0


@dataclass(frozen=True)
class TypeII:
    """Type II.  ``alpha`` distinguishes the two lifts A and -A (alpha vs pi - alpha)."""

    alpha: float
    l: float
    tag = "typeII"

    @property
    def degenerate(self) -> bool:
        return self.alpha == 0


def verify_relation(rep: KleinRepresentation) -> float:
    """Distance of A B A^-1 B from the identity."""
    A, B = rep.A, rep.B
    g = compose(compose(compose(A, B), inverse(A)), B)
    return isometry_distance(g, IDENTITY)


def canonical_square_trace(A: ExtendedIsometry) -> float:
    """Trace of the sign-free lift M conj(M) of A^2 for orientation-reversing A.

    Replacing M by -M leaves M conj(M) unchanged, so this trace (always real)
    separates a rotation of A^2 by 2 alpha from one by 2 (pi - alpha).
    """
    if not A.conjugates:
        raise ValueError("A must reverse orientation")
    M = A.matrix
    return float(np.trace(M @ np.conj(M)).real)


def _real(value: complex, what: str, tol: float) -> float:
    if abs(value.imag) > tol * max(1.0, abs(value)):
        raise InconsistentClassificationError(
            f"{what} = {value:.6g} is not real: A and B do not preserve orientation type")
    return value.real


def trace_invariants(rep: KleinRepresentation, imag_tol: float = 1e-9):
    """Real pair (I_{a^2}, I_b)."""
    ia2 = _real(trace_invariant(compose(rep.A, rep.A)), "I_{a^2}", imag_tol)
    ib = _real(trace_invariant(rep.B), "I_b", imag_tol)
    return ia2, ib


def classify_from_traces(I_a2: float, I_b: float, band: float = PARABOLIC_BAND) -> str:
    """Type tag from the sign pattern of the trace invariants."""
    za, zb = abs(I_a2) < band, abs(I_b) < band
    if za and zb:
        return "parabolic"
    if I_b <= -band and I_a2 > -band:
        return "typeI"
    if I_b >= band and I_a2 < band:
        return "typeII"
    raise InconsistentClassificationError(
        f"sign pattern I_a2={I_a2:.6g}, I_b={I_b:.6g} is not realized by a Klein-bottle group")


def classify(rep: KleinRepresentation, band: float = PARABOLIC_BAND,
             relation_tol: float = 1e-7, imag_tol: float = 1e-9):
    """Normal-form type and parameters of a Klein-bottle representation."""
    rel = verify_relation(rep)
    if rel > relation_tol:
        raise ValueError(f"A B A^-1 B differs from the identity by {rel:.3g}")
    if isometry_distance(rep.B, IDENTITY) < relation_tol:
        raise ValueError("B is the identity")
    ia2, ib = trace_invariants(rep, imag_tol)
    tag = classify_from_traces(ia2, ib, band)
    if tag == "parabolic":
        return _classify_parabolic(rep)
    if tag == "typeI":
        l = 0.0 if abs(ia2) < band else math.asinh(math.sqrt(ia2) / 2)
        tr_b = abs((rep.B.a + rep.B.d).real)
        alpha = 2 * math.atan2(math.sqrt(-ib), tr_b)
        return TypeI(l, alpha)
    l = 2 * math.asinh(math.sqrt(ib) / 2)
    t2 = canonical_square_trace(rep.A)
    if abs(ia2) < band:
        alpha = 0.0 if t2 > 0 else math.pi
    else:
        alpha = math.atan2(math.sqrt(max(-ia2, 0.0)), t2)
    return TypeII(alpha, l)


def _classify_parabolic(rep):
    A2 = compose(rep.A, rep.A)
    if isometry_distance(A2, IDENTITY) < 1e-6:
        return ParabolicDegenerate()
    # Move the common fixed point to infinity and compare translation lengths.
    B = rep.B
    if abs(B.c) < 1e-12 * max(1.0, abs(B.a), abs(B.b)):
        H = IDENTITY
    else:
        p = (B.a - B.d) / (2 * B.c)
        H = ExtendedIsometry(0, 1, 1, -p)
    Hi = inverse(H)
    tb = compose(compose(H, B), Hi)
    ta = compose(compose(H, A2), Hi)
    beta = tb.b / tb.d
    gamma = ta.b / ta.d
    return ParabolicNonDegenerate(2 * abs(beta) / abs(gamma))


# --- completions ------------------------------------------------------------

@dataclass(frozen=True)
class Cusp:
    kind = "cusp"


@dataclass(frozen=True)
class SolidKleinBottle:
    cone_angle: float
    soul_length: float
    kind = "solid_klein_bottle"


@dataclass(frozen=True)
class DiscOrbiBundle:
    cone_angle: float
    interval_length: float
    kind = "disc_orbibundle"


def completion_geometry(t):
    """Geometry of the metric completion of an end with the given peripheral type."""
    if isinstance(t, (ParabolicNonDegenerate, ParabolicDegenerate)):
        return Cusp()
    if isinstance(t, TypeI):
        if t.degenerate:
            raise DegenerateTypeError("type I with l = 0 has no completion geometry")
        return SolidKleinBottle(cone_angle=t.alpha, soul_length=t.l)
    if isinstance(t, TypeII):
        if t.degenerate:
            raise DegenerateTypeError("type II with alpha = 0 has no completion geometry")
        angle = TYPE_II_ANGLE_FACTOR * t.alpha
        if angle >= 2 * math.pi:
            raise DegenerateTypeError("type II with alpha = pi has no singular soul")
        return DiscOrbiBundle(cone_angle=angle, interval_length=TYPE_II_LENGTH_FACTOR * t.l)
    raise TypeError(f"not a Klein type: {t!r}")
