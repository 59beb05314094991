"""Holonomy derivatives of peripheral curves and generalized Dehn coefficients.

For a cusp with longitude l and meridian m, ``u = log hol'(l)`` and
``v = log hol'(m)``; the Dehn coefficients (p, q) solve ``p u + q v = 2 pi i``
with p, q real, and are the marker :data:`INFINITY` at the complete structure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import (BranchJumpError, DegenerateShapeError, NonUniqueSolutionError,
                     RepresentationUnavailableError)
from .geometry import INFINITY, ShapeAssignment, check_shape, trace_invariant

TWO_PI = 2 * math.pi


def _invariant(z: complex, k: int) -> complex:
    if k == 0:
        return z
    if k == 1:
        return 1 / (1 - z)
    return (z - 1) / z


def _log_invariant(z: complex, k: int) -> complex:
    # Principal logarithm of each invariant; continuous on the upper half-plane.
    if k == 0:
        return cmath.log(z)
    if k == 1:
        return -cmath.log(1 - z)
    return cmath.log((z - 1) / z)


def _dlog_invariant(z: complex, k: int) -> complex:
    """d/dz of log of the class-k invariant."""
    if k == 0:
        return 1 / z
    if k == 1:
        return 1 / (1 - z)
    return 1 / (z * (z - 1))


def evaluate_word(word, shapes) -> complex:
    """Product of the word's edge invariants (conjugated first when flagged)."""
    out = 1 + 0j
    for f in word:
        z = check_shape(shapes[f.tet])
        val = _invariant(z, f.edge_class)
        if f.conj:
            val = val.conjugate()
        out *= val if f.exp > 0 else 1 / val
    if out == 0 or not cmath.isfinite(out):
        raise DegenerateShapeError("holonomy word evaluates to 0 or infinity")
    return out


def log_word(word, shapes) -> complex:
    """Sum of principal logarithms of the factors.

    On geometric shapes this branch is continuous, so it equals the branch
    that vanishes at the complete structure.
    """
    out = 0j
    for f in word:
        g = _log_invariant(check_shape(shapes[f.tet]), f.edge_class)
        if f.conj:
            g = g.conjugate()
        out += f.exp * g
    return out


def word_terms(word):
    """Linear log-form terms (tet, class, holomorphic coeff, antiholomorphic coeff)."""
    return [(f.tet, f.edge_class, 0, f.exp) if f.conj else (f.tet, f.edge_class, f.exp, 0)
            for f in word]


# --- Dehn coefficients ------------------------------------------------------

def dehn_coefficients(u: complex, v: complex, inf_tol: float = 1e-10):
    """Real (p, q) with p u + q v = 2 pi i, or INFINITY when u = v = 0.

    ``inf_tol`` is the absolute size below which u and v count as zero.
    """
    u, v = complex(u), complex(v)
    if abs(u) <= inf_tol and abs(v) <= inf_tol:
        return INFINITY
    det = u.real * v.imag - v.real * u.imag
    if abs(det) <= 1e-12 * abs(u) * abs(v) or abs(u) <= inf_tol or abs(v) <= inf_tol:
        raise NonUniqueSolutionError(f"u={u!r} and v={v!r} are real-proportional")
    p = -TWO_PI * v.real / det
    q = TWO_PI * u.real / det
    return (p, q)


def involution_on_coefficients(coeffs):
    if coeffs is INFINITY:
        return INFINITY
    p, q = coeffs
    return (-p, q)


@dataclass(frozen=True)
class PeripheralState:
    """Holonomy data of one cusp: L, M, their tracked logs u, v, and (p, q)."""

    L: complex
    M: complex
    u: complex
    v: complex
    coefficients: object

    @classmethod
    def from_logs(cls, u: complex, v: complex) -> "PeripheralState":
        u, v = complex(u), complex(v)
        return cls(cmath.exp(u), cmath.exp(v), u, v, dehn_coefficients(u, v))

    @classmethod
    def complete(cls) -> "PeripheralState":
        return cls(1 + 0j, 1 + 0j, 0j, 0j, INFINITY)


def _continue_log(prev_log: complex, prev_val: complex, val: complex, max_step: float) -> complex:
    step = cmath.phase(val / prev_val)
    if abs(step) >= max_step:
        raise BranchJumpError(
            f"argument increment {step:.3g} exceeds {max_step:.3g}; refine the path")
    return complex(math.log(abs(val)), prev_log.imag + step)


def track_logs(previous: PeripheralState, L: complex, M: complex,
               max_step: float = math.pi / 2) -> PeripheralState:
    """Continue u = log L and v = log M from ``previous`` to new values L, M.

    Each argument may move by less than ``max_step`` (radians) per call.
    """
    u = _continue_log(previous.u, previous.L, complex(L), max_step)
    v = _continue_log(previous.v, previous.M, complex(M), max_step)
    return PeripheralState(complex(L), complex(M), u, v, dehn_coefficients(u, v))


def involution_on_peripheral(state: PeripheralState) -> PeripheralState:
    """Deck involution on the lift of a Klein cusp, with l = a^2 and m = b."""
    return PeripheralState(
        state.L.conjugate(), 1 / state.M.conjugate(),
        state.u.conjugate(), -state.v.conjugate(),
        involution_on_coefficients(state.coefficients))


def peripheral_state(link, shapes: ShapeAssignment) -> PeripheralState:
    """State of one cusp at ``shapes``, logs on the branch anchored at the complete structure."""
    wl, wm = link.curve("l"), link.curve("m")
    L, M = evaluate_word(wl, shapes), evaluate_word(wm, shapes)
    u, v = log_word(wl, shapes), log_word(wm, shapes)
    return PeripheralState(L, M, u, v, dehn_coefficients(u, v))


def peripheral_states(tri, shapes: ShapeAssignment):
    """States of all cusps that declare both an ``l`` and an ``m`` curve."""
    out = []
    for link in tri.cusp_links:
        d = link.declaration
        if d is not None and "l" in d.curves and "m" in d.curves:
            out.append(peripheral_state(link, shapes))
    return tuple(out)


# --- trace coordinates ------------------------------------------------------

def coordinate_report(shapes: ShapeAssignment, tri, representation=None):
    """Trace invariants of the distinguished peripheral elements, per cusp.

    ``representation`` maps a cusp name to a dict of orientation-preserving
    isometries keyed by ``"l"`` and ``"m"`` (for a Klein cusp: a^2 and b).  When
    omitted, holonomy matrices are available only for the built-in Gieseking
    triangulation, where they come from its explicit face-pairing maps.
    """
    if representation is None:
        from . import gieseking
        if not gieseking.is_gieseking(tri):
            raise RepresentationUnavailableError(
                f"no holonomy matrices for {tri.name or 'this triangulation'}; "
                "pass representation=")
        w = gieseking.w_from_shape(shapes[0])
        rep = gieseking.peripheral_representation(w)
        from .geometry import compose
        representation = {tri.cusp_links[0].name: {"l": compose(rep.A, rep.A), "m": rep.B}}
    report = []
    for link in tri.cusp_links:
        mats = representation.get(link.name)
        if mats is None:
            raise RepresentationUnavailableError(f"no matrices for cusp {link.name!r}")
        il, im = trace_invariant(mats["l"]), trace_invariant(mats["m"])
        if link.orientable:
            report.append({"cusp": link.name, "kind": "torus", "I_l": il, "I_m": im})
        else:
            report.append({"cusp": link.name, "kind": "klein", "I_a2": il, "I_b": im})
    return report
