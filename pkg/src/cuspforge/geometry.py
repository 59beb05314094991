"""Extended Möbius isometries of hyperbolic 3-space and ideal tetrahedron shapes.

An isometry of upper half-space is stored as a normalized ``SL(2, C)`` matrix
together with a flag saying whether complex conjugation is applied first::

    z  ->  (a z' + b) / (c z' + d),    z' = conj(z) if conjugates else z

Points of the Riemann sphere are Python complex numbers or the tagged
:data:`INFINITY` marker.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShapeError

REGULAR_SHAPE = complex(0.5, math.sqrt(3) / 2)


class _Infinity:
    """The point at infinity of the Riemann sphere (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def is_infinity(p) -> bool:
    return p is INFINITY


def _normalize(a, b, c, d):
    det = a * d - b * c
    if det == 0 or not cmath.isfinite(det):
        raise ValueError("isometry matrix must have finite nonzero determinant")
    s = cmath.sqrt(det)
    entries = [a / s, b / s, c / s, d / s]
    # Sign convention: the first clearly nonzero entry has argument in [0, pi).
    scale = max(abs(x) for x in entries)
    for x in entries:
        if abs(x) > 1e-14 * scale:
            ang = math.atan2(x.imag, x.real)
            if ang < 0 or ang >= math.pi:
                entries = [-y for y in entries]
            break
    return tuple(complex(x) for x in entries)


@dataclass(frozen=True)
class ExtendedIsometry:
    """Element of Isom(H^3) as a normalized matrix plus a conjugation flag."""

    a: complex
    b: complex
    c: complex
    d: complex
    conjugates: bool = False

    def __post_init__(self):
        a, b, c, d = _normalize(complex(self.a), complex(self.b),
                                complex(self.c), complex(self.d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "conjugates", bool(self.conjugates))

    @classmethod
    def from_matrix(cls, m, conjugates=False) -> "ExtendedIsometry":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], conjugates)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def preserves_orientation(self) -> bool:
        return not self.conjugates

    @property
    def trace(self) -> complex:
        """Trace of the normalized representative (defined up to sign)."""
        return self.a + self.d

    def __call__(self, p):
        return apply(self, p)

    def __matmul__(self, other):
        return compose(self, other)

    def inverse(self) -> "ExtendedIsometry":
        return inverse(self)


IDENTITY = ExtendedIsometry(1, 0, 0, 1)
CONJUGATION = ExtendedIsometry(1, 0, 0, 1, conjugates=True)


def mobius(a, b, c, d, conjugates=False) -> ExtendedIsometry:
    return ExtendedIsometry(a, b, c, d, conjugates)


def compose(g: ExtendedIsometry, h: ExtendedIsometry) -> ExtendedIsometry:
    """Return g∘h.

    If g conjugates first, then g(h(z)) = Mg·conj(Mh·z') = Mg·conj(Mh)·conj(z').
    """
    mh = np.conj(h.matrix) if g.conjugates else h.matrix
    return ExtendedIsometry.from_matrix(g.matrix @ mh, g.conjugates ^ h.conjugates)


def inverse(g: ExtendedIsometry) -> ExtendedIsometry:
    a, b, c, d = g.a, g.b, g.c, g.d
    m_inv = np.array([[d, -b], [-c, a]], dtype=complex)
    if g.conjugates:
        # g = M∘conj, so g^-1 = conj∘M^-1 = conj(M^-1)∘conj.
        m_inv = np.conj(m_inv)
    return ExtendedIsometry.from_matrix(m_inv, g.conjugates)


def apply(g: ExtendedIsometry, p):
    """Act on a point of the Riemann sphere (complex or INFINITY)."""
    if p is INFINITY:
        return INFINITY if g.c == 0 else g.a / g.c
    z = complex(p)
    if g.conjugates:
        z = z.conjugate()
    den = g.c * z + g.d
    if den == 0:
        return INFINITY
    return (g.a * z + g.b) / den


def isometry_distance(g: ExtendedIsometry, h: ExtendedIsometry) -> float:
    """Frobenius distance between normalized matrices, minimized over sign.

    Returns ``inf`` when the orientation flags differ.
    """
    if g.conjugates != h.conjugates:
        return math.inf
    mg, mh = g.matrix, h.matrix
    return float(min(np.linalg.norm(mg - mh), np.linalg.norm(mg + mh)))


def trace_invariant(g: ExtendedIsometry) -> complex:
    """I(g) = trace(g)^2 - 4 for an orientation-preserving isometry."""
    if g.conjugates:
        raise ValueError("trace invariant is only defined for orientation-preserving isometries")
    return (g.a + g.d) ** 2 - 4


def from_three_points(src, dst, conjugates=False) -> ExtendedIsometry:
    """The unique isometry with the given flag sending src[k] to dst[k].

    Points may include INFINITY.  For ``conjugates=True`` the Möbius part maps
    the conjugated source points to the targets.
    """
    if conjugates:
        src = [p if p is INFINITY else complex(p).conjugate() for p in src]

    def to_standard(p0, p1, p2):
        # Matrix sending (p0, p1, p2) to (0, 1, inf).
        if p0 is INFINITY:
            return np.array([[0, p1 - p2], [1, -p2]], dtype=complex)
        if p1 is INFINITY:
            return np.array([[1, -p0], [1, -p2]], dtype=complex)
        if p2 is INFINITY:
            return np.array([[1, -p0], [0, p1 - p0]], dtype=complex)
        return np.array([[p1 - p2, -p0 * (p1 - p2)],
                         [p1 - p0, -p2 * (p1 - p0)]], dtype=complex)

    ms = to_standard(*src)
    md = to_standard(*dst)
    return ExtendedIsometry.from_matrix(np.linalg.inv(md) @ ms, conjugates)


# --- ideal tetrahedra -------------------------------------------------------

def check_shape(z, allow_real=True) -> complex:
    """Validate a shape parameter; returns it as complex.

    Raises DegenerateShapeError for 0, 1, non-finite values, or (when
    ``allow_real`` is false) values off the open upper half-plane.
    """
    if z is INFINITY:
        raise DegenerateShapeError("shape is infinite")
    z = complex(z)
    if not cmath.isfinite(z):
        raise DegenerateShapeError(f"shape {z!r} is not finite")
    if z == 0 or z == 1:
        raise DegenerateShapeError(f"shape {z!r} is degenerate")
    if not allow_real and z.imag <= 0:
        raise DegenerateShapeError(f"shape {z!r} is not in the upper half-plane")
    return z


def is_geometric(z) -> bool:
    return complex(z).imag > 0


def shape_triple(z):
    """The three edge invariants (z, 1/(1-z), (z-1)/z) of an ideal tetrahedron."""
    z = check_shape(z)
    return z, 1 / (1 - z), (z - 1) / z


def edge_invariant(v0, v1, v2, v3) -> complex:
    """Edge invariant of the edge v2v3 of the ideal tetrahedron (v0, v1, v2, v3).

    The cross-ratio is normalized so that the placement (1, z, INFINITY, 0)
    gives z.  Any vertex may be INFINITY.
    """
    num = [(v1, v3), (v0, v2)]
    den = [(v1, v2), (v0, v3)]

    def prod(pairs):
        out = 1 + 0j
        for p, q in pairs:
            if p is INFINITY or q is INFINITY:
                continue
            out *= complex(p) - complex(q)
        return out

    n, d = prod(num), prod(den)
    if d == 0 or n == 0:
        raise DegenerateShapeError("tetrahedron has coincident vertices")
    return n / d


@dataclass(frozen=True)
class ShapeAssignment:
    """One shape parameter per tetrahedron, indexed by tetrahedron number.

    Shapes on the real axis are allowed but flagged through
    :attr:`degenerate`; 0, 1 and non-finite values are rejected.
    """

    shapes: tuple

    def __post_init__(self):
        vals = tuple(check_shape(z) for z in self.shapes)
        object.__setattr__(self, "shapes", vals)

    @classmethod
    def regular(cls, n: int) -> "ShapeAssignment":
        return cls((REGULAR_SHAPE,) * n)

    def __len__(self):
        return len(self.shapes)

    def __getitem__(self, i):
        return self.shapes[i]

    def __iter__(self):
        return iter(self.shapes)

    @property
    def geometric(self) -> bool:
        return all(z.imag > 0 for z in self.shapes)

    @property
    def degenerate(self) -> tuple:
        """Indices of tetrahedra whose shape is not in the open upper half-plane."""
        return tuple(i for i, z in enumerate(self.shapes) if z.imag <= 0)

    def invariants(self, tet: int):
        return shape_triple(self.shapes[tet])

    def as_array(self) -> np.ndarray:
        return np.array(self.shapes, dtype=complex)
