"""Gluing equations of (possibly non-orientable) ideal triangulations and a damped
Gauss-Newton solver with path continuation.

Unknowns are the real and imaginary parts of one shape per tetrahedron.  Each
edge cycle contributes the complex log-form equation

    sum_l [eps_l log z_l - (1 - eps_l) log conj(z_l)] - 2 pi i = 0,

whose real part is the modulus condition and whose imaginary part is the
angle sum.  Each cusp adds either log hol'(l) = 0 (complete) or
(p u + q v - 2 pi i) / |(p, q)| = 0 (Dehn filling); the normalization by
|(p, q)| keeps residuals comparable along a sweep and does not change the
solution set.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (BranchJumpError, CaptureRadiusError, DegenerationError, DivergenceError,
                     SingularJacobianError, StepTooLargeError)
from .geometry import INFINITY, ShapeAssignment, check_shape
from .holonomy import (PeripheralState, _dlog_invariant, _log_invariant, peripheral_states,
                       track_logs, word_terms)

log = logging.getLogger(__name__)

TWO_PI_I = 2j * math.pi
DEFAULT_TOL = 1e-11
DEFAULT_MAX_ITERS = 50
DEFAULT_CAPTURE_RADIUS = 2.0
MAX_HALVINGS = 20


class BranchWarning(UserWarning):
    """A factor's argument left (0, pi), so principal logs may jump."""


def default_tolerance() -> float:
    """Convergence tolerance, overridable through the CUSPFORGE_TOL variable."""
    env = os.environ.get("CUSPFORGE_TOL")
    return float(env) if env else DEFAULT_TOL


@dataclass(frozen=True)
class SolveTarget:
    """Complete structure, or per-cusp Dehn coefficients.

    ``coefficients`` is a tuple of (cusp index, value) pairs where value is
    :data:`INFINITY` or a real pair (p, q).  Cusps not listed are complete.
    """

    coefficients: tuple = ()

    @classmethod
    def complete(cls) -> "SolveTarget":
        return cls(())

    @classmethod
    def dehn(cls, mapping) -> "SolveTarget":
        """Build from {cusp index: q | (p, q) | INFINITY}; a bare q means (0, q)."""
        items = []
        for idx, val in sorted(mapping.items()):
            if val is INFINITY:
                items.append((int(idx), INFINITY))
                continue
            if isinstance(val, (int, float)):
                val = (0.0, float(val))
            p, q = float(val[0]), float(val[1])
            if math.isinf(q) and p == 0:
                items.append((int(idx), INFINITY))
            elif not (math.isfinite(p) and math.isfinite(q)) or (p == 0 and q == 0):
                raise ValueError(f"invalid Dehn coefficients {val!r} for cusp {idx}")
            else:
                items.append((int(idx), (p, q)))
        return cls(tuple(items))

    @property
    def is_complete(self) -> bool:
        return all(v is INFINITY for _, v in self.coefficients)

    def coefficient(self, cusp_index: int):
        for idx, val in self.coefficients:
            if idx == cusp_index:
                return val
        return INFINITY

    def validate(self, tri) -> None:
        known = {c.index for c in tri.cusp_links}
        for idx, val in self.coefficients:
            if idx not in known:
                raise ValueError(f"target names unknown cusp {idx}")
            link = tri.cusp_links[idx]
            if val is not INFINITY and not link.orientable and val[0] != 0:
                raise ValueError(f"Klein cusp {link.name!r} only admits coefficients (0, q)")
        for link in tri.cusp_links:
            needed = ("l",) if self.coefficient(link.index) is INFINITY else ("l", "m")
            for label in needed:
                link.curve(label)


@dataclass
class _Row:
    const: complex
    terms: list  # (tet, class, holomorphic coeff, antiholomorphic coeff)


def _rows(tri, target: SolveTarget, edges_only=False):
    rows = []
    for cyc in tri.edge_cycles:
        terms = [(t, k, 1, 0) if eps else (t, k, 0, -1) for t, k, eps in cyc.steps]
        rows.append(_Row(-TWO_PI_I, terms))
    if edges_only:
        return rows
    for link in tri.cusp_links:
        coeff = target.coefficient(link.index)
        if coeff is INFINITY:
            rows.append(_Row(0j, word_terms(link.curve("l"))))
        else:
            p, q = coeff
            scale = 1.0 / math.hypot(p, q)
            terms = [(t, k, a * p * scale, b * p * scale)
                     for t, k, a, b in word_terms(link.curve("l"))]
            terms += [(t, k, a * q * scale, b * q * scale)
                      for t, k, a, b in word_terms(link.curve("m"))]
            rows.append(_Row(-TWO_PI_I * scale, terms))
    return rows


def _evaluate(rows, zs, n, want_jacobian):
    """Complex residuals and, optionally, the real Jacobian in (Re z, Im z) pairs."""
    res = np.empty(len(rows), dtype=complex)
    jac = np.zeros((2 * len(rows), 2 * n)) if want_jacobian else None
    logs, dlogs = {}, {}
    for r, row in enumerate(rows):
        val = row.const
        dz = np.zeros(n, dtype=complex)
        dzbar = np.zeros(n, dtype=complex)
        for t, k, a, b in row.terms:
            key = (t, k)
            if key not in logs:
                logs[key] = _log_invariant(zs[t], k)
                dlogs[key] = _dlog_invariant(zs[t], k)
            g, dg = logs[key], dlogs[key]
            val += a * g + b * g.conjugate()
            dz[t] += a * dg
            dzbar[t] += b * dg.conjugate()
        res[r] = val
        if want_jacobian:
            dx = dz + dzbar
            dy = 1j * (dz - dzbar)
            jac[2 * r, 0::2] = dx.real
            jac[2 * r, 1::2] = dy.real
            jac[2 * r + 1, 0::2] = dx.imag
            jac[2 * r + 1, 1::2] = dy.imag
    real = np.empty(2 * len(rows))
    real[0::2] = res.real
    real[1::2] = res.imag
    return real, jac


def _check_shapes(shapes):
    zs = [check_shape(z) for z in shapes]
    if any(z.imag <= 0 for z in zs):
        warnings.warn("shape outside the upper half-plane: a factor's argument left (0, pi)",
                      BranchWarning, stacklevel=3)
    return zs


def residual(tri, shapes: ShapeAssignment, target: SolveTarget | None = None) -> np.ndarray:
    """Real residual vector: (Re, Im) of each edge row, then of each cusp row."""
    target = target or SolveTarget.complete()
    zs = _check_shapes(shapes)
    vec, _ = _evaluate(_rows(tri, target), zs, tri.n, False)
    return vec


def jacobian(tri, shapes: ShapeAssignment, target: SolveTarget | None = None,
             edges_only: bool = False) -> np.ndarray:
    """Real Jacobian of :func:`residual` with columns (Re z_0, Im z_0, Re z_1, ...)."""
    target = target or SolveTarget.complete()
    zs = _check_shapes(shapes)
    _, jac = _evaluate(_rows(tri, target, edges_only), zs, tri.n, True)
    return jac


def edge_residual(tri, shapes: ShapeAssignment) -> np.ndarray:
    zs = _check_shapes(shapes)
    vec, _ = _evaluate(_rows(tri, SolveTarget.complete(), True), zs, tri.n, False)
    return vec


def angle_sum_defects(tri, shapes: ShapeAssignment) -> np.ndarray:
    """Angle sum minus 2 pi around each edge cycle (diagnostic only)."""
    return edge_residual(tri, shapes)[1::2]


@dataclass(frozen=True)
class SolveResult:
    shapes: ShapeAssignment
    residual_norm: float
    iterations: int
    history: tuple = ()
    peripheral: tuple = field(default=(), compare=False)


def newton_solve(tri, initial: ShapeAssignment | None = None,
                 target: SolveTarget | None = None, *, tol: float | None = None,
                 max_iters: int = DEFAULT_MAX_ITERS,
                 capture_radius: float = DEFAULT_CAPTURE_RADIUS,
                 verbose: bool = False) -> SolveResult:
    """Damped Gauss-Newton solve of the gluing and cusp equations.

    Steps come from a least-squares solve (the edge equations are globally
    dependent), followed by backtracking on the residual norm that also keeps
    every shape in the open upper half-plane.
    """
    target = target or SolveTarget.complete()
    target.validate(tri)
    tol = default_tolerance() if tol is None else tol
    n = tri.n
    rows = _rows(tri, target)
    zs = np.array(list(initial if initial is not None else ShapeAssignment.regular(n)),
                  dtype=complex)
    if len(zs) != n:
        raise ValueError(f"expected {n} shapes, got {len(zs)}")
    if any(z.imag <= 0 for z in zs):
        raise DegenerationError("initial shapes must lie in the upper half-plane")
    F, J = _evaluate(rows, zs, n, True)
    r = float(np.linalg.norm(F))
    if r > capture_radius:
        raise CaptureRadiusError(f"initial residual {r:.3g} exceeds capture radius "
                                 f"{capture_radius:.3g}")
    history = [r]
    it = 0
    while r >= tol:
        if it >= max_iters:
            raise DivergenceError(f"no convergence after {max_iters} iterations "
                                  f"(residual {r:.3g})")
        step, _, rank, sv = np.linalg.lstsq(J, -F, rcond=None)
        if rank < 2 * n:
            cond = sv[0] / sv[-1] if sv[-1] > 0 else math.inf
            raise SingularJacobianError(
                f"Jacobian rank {rank} < {2 * n} (condition estimate {cond:.3g})", cond)
        dz = step[0::2] + 1j * step[1::2]
        lam, accepted, left_domain = 1.0, False, False
        for _ in range(MAX_HALVINGS + 1):
            cand = zs + lam * dz
            if np.all(cand.imag > 0):
                Fc, Jc = _evaluate(rows, cand, n, True)
                rc = float(np.linalg.norm(Fc))
                if rc < r:
                    accepted = True
                    break
            else:
                left_domain = True
            lam *= 0.5
        it += 1
        if not accepted:
            if left_domain:
                raise DegenerationError(
                    f"damped step keeps leaving the upper half-plane (iteration {it})")
            raise DivergenceError(f"line search failed at iteration {it} (residual {r:.3g})")
        zs, F, J, r = cand, Fc, Jc, rc
        history.append(r)
        if verbose:
            log.info("iteration %d: residual %.3e, damping %.3g", it, r, lam)
    shapes = ShapeAssignment(tuple(complex(z) for z in zs))
    return SolveResult(shapes, r, it, tuple(history), peripheral_states(tri, shapes))


def solve_path(tri, targets, initial: ShapeAssignment | None = None, **kwargs):
    """Solve a sequence of nearby targets, each seeded by the previous solution.

    Peripheral logs are continued along the path, anchored at the first
    solution's principal values.
    """
    shapes = initial
    out = []
    prev_states = None
    for i, target in enumerate(targets):
        try:
            res = newton_solve(tri, shapes, target, **kwargs)
        except (CaptureRadiusError, DivergenceError, DegenerationError) as exc:
            hint = "" if i == 0 else f"; insert intermediate targets between steps {i - 1} and {i}"
            raise StepTooLargeError(f"continuation step {i} failed: {exc}{hint}", i) from exc
        states = res.peripheral
        if prev_states is not None:
            states = tuple(track_logs(prev, s.L, s.M) for prev, s in zip(prev_states, states))
        res = SolveResult(res.shapes, res.residual_norm, res.iterations, res.history, states)
        out.append(res)
        shapes, prev_states = res.shapes, states
    return out


def _inverse_vectors(target: SolveTarget, tri):
    # Dehn coefficients c correspond to c / |c|^2, so the complete structure is 0.
    out = []
    for link in tri.cusp_links:
        c = target.coefficient(link.index)
        if c is INFINITY:
            out.append((0.0, 0.0))
        else:
            n2 = c[0] ** 2 + c[1] ** 2
            out.append((c[0] / n2, c[1] / n2))
    return np.array(out)


def _target_from_vectors(vecs) -> SolveTarget:
    mapping = {}
    for idx, (a, b) in enumerate(vecs):
        n2 = a * a + b * b
        mapping[idx] = INFINITY if n2 == 0 else (a / n2, b / n2)
    return SolveTarget.dehn(mapping)


def continue_to(tri, target: SolveTarget, initial: SolveResult | None = None,
                start: SolveTarget | None = None, max_depth: int = 10, **kwargs):
    """Solve for ``target`` starting from the solution ``initial`` of ``start``.

    The straight segment between the two targets in inverse coefficients
    (c / |c|^2, so that infinity is the origin) is bisected wherever a Newton
    solve fails.  Returns the list of solutions along the segment, ending at
    ``target``; peripheral logs are continued across all of them.
    """
    start = start or SolveTarget.complete()
    if initial is None:
        initial = newton_solve(tri, None, start, **kwargs)
    v0, v1 = _inverse_vectors(start, tri), _inverse_vectors(target, tri)
    path = []

    def advance(prev, a, b, depth):
        tgt = target if b == 1.0 else _target_from_vectors(v0 + b * (v1 - v0))
        try:
            res = newton_solve(tri, prev.shapes, tgt, **kwargs)
            states = tuple(track_logs(p, s.L, s.M)
                           for p, s in zip(prev.peripheral, res.peripheral))
            res = SolveResult(res.shapes, res.residual_norm, res.iterations, res.history, states)
        except (CaptureRadiusError, DivergenceError, DegenerationError, BranchJumpError) as exc:
            if depth >= max_depth:
                raise StepTooLargeError(
                    f"continuation stalled between fractions {a:.6g} and {b:.6g}: {exc}") from exc
            mid = 0.5 * (a + b)
            prev = advance(prev, a, mid, depth + 1)
            return advance(prev, mid, b, depth + 1)
        path.append(res)
        return res

    advance(initial, 0.0, 1.0, 0)
    return path


__all__ = [
    "BranchWarning", "SolveTarget", "SolveResult", "PeripheralState", "residual", "jacobian",
    "edge_residual", "angle_sum_defects", "newton_solve", "solve_path", "continue_to", "default_tolerance",
]
