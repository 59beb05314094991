"""Command-line front end: ``cuspforge solve | sweep | classify | verify``.

Exit codes: 0 success, 1 input error, 2 solver failure, 3 inconsistent
classification.  Output files are written atomically; floats carry 17
significant digits so identical runs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import gieseking as gk
from .errors import (CuspforgeError, DegenerateTypeError, InconsistentClassificationError,
                     ParseError, SolverError, ValidationError)
from .geometry import INFINITY, ShapeAssignment
from .holonomy import peripheral_state
from .klein import (Cusp, DiscOrbiBundle, SolidKleinBottle, classify, classify_from_traces,
                    completion_geometry)
from .solver import SolveTarget, continue_to, default_tolerance, newton_solve
from .triangulation import load_triangulation, orient, orientation_double_cover

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_INCONSISTENT = 0, 1, 2, 3
SWEEP_COLUMNS = ("t", "w_re", "w_im", "x_re", "x_im", "tau", "type", "cone_angle",
                 "sing_length", "p", "q", "residual_norm")
BUILTIN = {"gieseking": gk.gieseking_triangulation,
           "figure-eight": gk.figure_eight_triangulation}


# --- formatting -------------------------------------------------------------

def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in output")
    if x == 0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".17g")


def to_json(obj, indent=0) -> str:
    """JSON text with every float printed to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + to_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cuspforge-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _complex_doc(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _coeff_doc(c) -> dict:
    if c is INFINITY:
        return {"p": None, "q": None, "infinite": True}
    return {"p": float(c[0]), "q": float(c[1]), "infinite": False}


def _error(msg: str) -> None:
    print(f"cuspforge: {msg}", file=sys.stderr)


# --- argument parsing -------------------------------------------------------

def _pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _load(args):
    if getattr(args, "tri", None):
        return load_triangulation(Path(args.tri))
    return BUILTIN[args.manifold]()


def parse_target(tokens, tri) -> SolveTarget:
    """``complete`` or ``dehn CUSP=Q ...`` / ``dehn CUSP=P,Q ...`` (Q may be inf)."""
    if not tokens or tokens == ["complete"]:
        return SolveTarget.complete()
    if tokens[0] != "dehn" or len(tokens) < 2:
        raise ValueError("target must be 'complete' or 'dehn CUSP=P,Q ...'")
    names = {c.name: c.index for c in tri.cusp_links}
    mapping = {}
    for spec in tokens[1:]:
        cusp, _, value = spec.partition("=")
        if not value:
            raise ValueError(f"bad Dehn specification {spec!r}")
        idx = names[cusp] if cusp in names else int(cusp)
        nums = [float(v) for v in value.split(",")]
        if len(nums) == 1:
            nums = [0.0, nums[0]]
        if len(nums) != 2:
            raise ValueError(f"bad Dehn specification {spec!r}")
        mapping[idx] = INFINITY if math.isinf(nums[1]) and nums[0] == 0 else tuple(nums)
    target = SolveTarget.dehn(mapping)
    target.validate(tri)
    return target


# --- solve ------------------------------------------------------------------

def solve_document(tri, target: SolveTarget, tol: float, verbose=False) -> dict:
    if target.is_complete:
        res = newton_solve(tri, None, target, tol=tol, verbose=verbose)
    else:
        res = continue_to(tri, target, tol=tol, verbose=verbose)[-1]
    cusps = []
    state_iter = iter(res.peripheral)
    for link in tri.cusp_links:
        entry = {"name": link.name, "kind": link.kind}
        d = link.declaration
        if d is not None and "l" in d.curves and "m" in d.curves:
            st = next(state_iter)
            entry.update({"L": _complex_doc(st.L), "M": _complex_doc(st.M),
                          "u": _complex_doc(st.u), "v": _complex_doc(st.v)})
            entry.update(_coeff_doc(st.coefficients))
        cusps.append(entry)
    if target.is_complete:
        tdoc = {"kind": "complete"}
    else:
        tdoc = {"kind": "dehn", "cusps": [
            {"cusp": tri.cusp_links[i].name, **_coeff_doc(c)} for i, c in target.coefficients]}
    return {
        "schema_version": SCHEMA_VERSION,
        "manifold": tri.name,
        "target": tdoc,
        "converged": True,
        "residual_norm": float(res.residual_norm),
        "iterations": int(res.iterations),
        "shapes": [{"tet": i, **_complex_doc(z)} for i, z in enumerate(res.shapes)],
        "cusps": cusps,
    }


def cmd_solve(args) -> int:
    try:
        tri = _load(args)
        target = parse_target(args.target, tri)
    except (OSError, CuspforgeError, ValueError, KeyError) as exc:
        _error(f"input error: {exc}")
        return EXIT_INPUT
    try:
        doc = solve_document(tri, target, default_tolerance(), args.verbose)
    except SolverError as exc:
        _error(f"solver failure: {exc}")
        return EXIT_SOLVER
    text = to_json(doc) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- sweep ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    t: float
    w_re: float
    w_im: float
    x_re: float
    x_im: float
    tau: float
    type: str
    cone_angle: float
    sing_length: float
    p: object
    q: object
    residual_norm: float
    shape_error: float = 0.0
    consistent: bool = True
    solver_shape: complex = 0j

    def csv_fields(self):
        vals = [fmt_float(self.t), fmt_float(self.w_re), fmt_float(self.w_im),
                fmt_float(self.x_re), fmt_float(self.x_im), fmt_float(self.tau), self.type,
                fmt_float(self.cone_angle), fmt_float(self.sing_length)]
        if self.p is INFINITY:
            vals += ["inf", "inf"]
        else:
            vals += [fmt_float(self.p), fmt_float(self.q)]
        vals.append(fmt_float(self.residual_norm))
        return vals


def sweep_parameters(samples: int):
    """Symmetric t values in the open interval (-1, 1); t = 0 is hit for odd counts."""
    return [-1 + 2 * (k + 1) / (samples + 1) for k in range(samples)]


def _chain(tri, ts, tol):
    """Solve along ts (ordered away from the complete structure), one row per t."""
    rows = []
    prev, prev_target = None, SolveTarget.complete()
    for t in ts:
        point = gk.deformation_curve(gk.curve_parameter(t))
        state = peripheral_state(tri.cusp_links[0], ShapeAssignment((point.shape,)))
        coeff = state.coefficients
        if coeff is not INFINITY:
            # p vanishes identically on a Klein cusp; drop its rounding noise.
            coeff = (0.0, coeff[1])
        target = SolveTarget.complete() if coeff is INFINITY else SolveTarget.dehn({0: coeff})
        if prev is None and target.is_complete:
            res = newton_solve(tri, None, target, tol=tol)
        else:
            res = continue_to(tri, target, initial=prev, start=prev_target, tol=tol)[-1]
        rows.append(_sweep_row(t, point, res))
        prev, prev_target = res, target
    return rows


def _sweep_row(t, point, res):
    rep = gk.peripheral_representation(point.w)
    kt = classify(rep)
    st = res.peripheral[0]
    if kt.tag == "parabolic":
        cone, length = 0.0, 0.0
    else:
        cone, length = abs(st.v.imag), abs(st.u.real) / 2
    shape_error = abs(res.shapes[0] - point.shape)
    consistent = gk.classify_character(point.x) == kt.tag
    if kt.tag == "typeI":
        # The normal form only sees the cone angle modulo reflection: alpha or 2 pi - alpha.
        consistent &= min(abs(kt.alpha - cone), abs(2 * math.pi - cone - kt.alpha)) < 1e-8
        consistent &= abs(kt.l - length) < 1e-8
    c = st.coefficients
    p, q = (INFINITY, INFINITY) if c is INFINITY else c
    return SweepRow(t, point.w.real, point.w.imag, point.x.real, point.x.imag, point.tau,
                    kt.tag, cone, length, p, q, res.residual_norm, shape_error, consistent,
                    res.shapes[0])


def sweep_rows(samples: int, tol: float | None = None, workers: int = 2):
    """Closed-form Gieseking curve samples, each cross-checked by the solver.

    Two continuation chains start at the complete structure and run towards
    t = 1 and t = -1; they are independent and run concurrently.
    """
    if samples < 3:
        raise ValueError("need at least 3 samples")
    tol = default_tolerance() if tol is None else tol
    tri = gk.gieseking_triangulation()
    ts = sweep_parameters(samples)
    up = [t for t in ts if t >= 0]
    down = [t for t in reversed(ts) if t < 0]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        fu = pool.submit(_chain, tri, up, tol)
        fd = pool.submit(_chain, tri, down, tol)
        rows = list(reversed(fd.result())) + fu.result()
    return rows


def sweep_csv(rows) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(r.csv_fields()) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    if args.samples < 3:
        _error("input error: --samples must be at least 3")
        return EXIT_INPUT
    tol = default_tolerance()
    try:
        rows = sweep_rows(args.samples, tol)
    except SolverError as exc:
        _error(f"solver failure: {exc}")
        return EXIT_SOLVER
    bad = [r for r in rows if r.shape_error > 1e-9 or not r.consistent]
    if bad:
        _error(f"cross-check failed at t = {bad[0].t:.6g} "
               f"(shape error {bad[0].shape_error:.3g})")
        return EXIT_SOLVER
    text = sweep_csv(rows)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- classify ---------------------------------------------------------------

def _geometry_doc(geom):
    if isinstance(geom, Cusp):
        return {"kind": "cusp"}
    if isinstance(geom, SolidKleinBottle):
        return {"kind": geom.kind, "cone_angle": geom.cone_angle, "soul_length": geom.soul_length}
    if isinstance(geom, DiscOrbiBundle):
        return {"kind": geom.kind, "cone_angle": geom.cone_angle,
                "interval_length": geom.interval_length}
    return {"kind": "none"}


def classify_traces_document(ia2: float, ib: float) -> dict:
    tag = classify_from_traces(ia2, ib)
    doc = {"schema_version": SCHEMA_VERSION, "input": {"I_a2": ia2, "I_b": ib}, "type": tag}
    if tag == "parabolic":
        doc["completion"] = {"kind": "cusp"}
    elif tag == "typeI":
        l = math.asinh(math.sqrt(max(ia2, 0.0)) / 2)
        alpha = 2 * math.asin(min(1.0, math.sqrt(-ib) / 2))
        doc["parameters"] = {"l": l, "alpha": alpha}
        doc["completion"] = ({"kind": "none"} if l == 0 else
                             _geometry_doc(SolidKleinBottle(alpha, l)))
    else:
        l = 2 * math.asinh(math.sqrt(ib) / 2)
        a0 = math.asin(min(1.0, math.sqrt(max(-ia2, 0.0)) / 2))
        # Traces cannot tell alpha from pi - alpha; both candidates are listed.
        doc["parameters"] = {"l": l, "alpha_candidates": [a0, math.pi - a0]}
        doc["completion"] = {"kind": DiscOrbiBundle.kind, "interval_length": l / 2,
                             "cone_angle_candidates": [2 * a0, 2 * (math.pi - a0)]}
    return doc


def classify_character_document(x: complex) -> dict:
    tag = gk.classify_character(x)
    kt = classify(gk.representation_from_character(x))
    if kt.tag != tag:
        raise InconsistentClassificationError(
            f"character gives {tag} but the representation classifies as {kt.tag}")
    doc = {"schema_version": SCHEMA_VERSION, "input": {"x": _complex_doc(x)}, "type": tag}
    if tag == "parabolic":
        doc["parameters"] = {"tau": kt.tau}
    else:
        doc["parameters"] = {"l": kt.l, "alpha": kt.alpha}
    try:
        doc["completion"] = _geometry_doc(completion_geometry(kt))
    except DegenerateTypeError:
        doc["completion"] = {"kind": "none"}
    return doc


def _fmt_value(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(fmt_float(a) for a in v) + "]"
    return fmt_float(v)


def _print_classification(doc):
    print(f"type: {doc['type']}")
    for k, v in doc.get("parameters", {}).items():
        print(f"{k}: {_fmt_value(v)}")
    comp = dict(doc["completion"])
    kind = comp.pop("kind")
    extra = ", ".join(f"{k}={_fmt_value(v)}" for k, v in comp.items())
    print(f"completion: {kind}" + (f" ({extra})" if extra else ""))


def cmd_classify(args) -> int:
    try:
        if args.traces is not None:
            ia2, ib = _pair(args.traces)
        else:
            x = complex(*_pair(args.x))
    except ValueError as exc:
        _error(f"input error: {exc}")
        return EXIT_INPUT
    try:
        doc = (classify_traces_document(ia2, ib) if args.traces is not None
               else classify_character_document(x))
    except InconsistentClassificationError as exc:
        _error(f"inconsistent classification: {exc}")
        return EXIT_INCONSISTENT
    except ValueError as exc:
        _error(f"input error: {exc}")
        return EXIT_INPUT
    if args.json:
        sys.stdout.write(to_json(doc) + "\n")
    else:
        _print_classification(doc)
    return EXIT_OK


# --- verify -----------------------------------------------------------------

def verify_report(tri) -> list:
    lines = []
    head = tri.summary().replace(", orientable", "").replace(", non-orientable", "")
    cover = None
    if not tri.orientable:
        cover, _ = orientation_double_cover(tri)
        tori = sum(1 for c in cover.cusp_links if c.orientable)
        head += f", cover: {cover.n} tets/{tori} torus cusp" + ("s" if tori != 1 else "")
    lines.append(head)
    lines.append(f"name: {tri.name}")
    lines.append(f"orientable: {'yes' if tri.orientable else 'no'}")
    for i, cyc in enumerate(tri.edge_cycles):
        eps = "".join(str(e) for _, _, e in cyc.steps)
        lines.append(f"edge cycle {i}: length {len(cyc)}, eps {eps}")
    for link in tri.cusp_links:
        curves = ", ".join(sorted(link.declaration.curves)) if link.declaration else "none"
        lines.append(f"cusp {link.index} ({link.name}): {'torus' if link.orientable else 'Klein bottle'}, "
                     f"euler characteristic {link.euler_characteristic}, curves: {curves}")
    if tri.orientable:
        bare = type(tri)(tri.n, tri.gluings, (), tri.name)
        ok = all(c.all_positive for c in orient(bare).edge_cycles)
        lines.append(f"coherent orientation: eps = 1 on every cycle {'achieved' if ok else 'FAILED'}")
    else:
        ok = all(c.all_positive for c in cover.edge_cycles)
        lines.append(f"double cover: {cover.summary()}; eps = 1 on every cycle: "
                     f"{'yes' if ok else 'no'}")
    return lines


def cmd_verify(args) -> int:
    try:
        tri = _load(args)
    except ParseError as exc:
        _error(f"parse error: {exc}")
        return EXIT_INPUT
    except ValidationError as exc:
        _error(f"invariant violated: {exc.invariant}: {exc}")
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        _error(f"input error: {exc}")
        return EXIT_INPUT
    print("\n".join(verify_report(tri)))
    if args.cover_out:
        if tri.orientable:
            _error("input error: triangulation is orientable; no double cover written")
            return EXIT_INPUT
        cover, _ = orientation_double_cover(tri)
        atomic_write(args.cover_out, cover.dumps())
    return EXIT_OK


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuspforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p, required=True):
        g = p.add_mutually_exclusive_group(required=required)
        g.add_argument("--tri", metavar="PATH", help="triangulation document")
        g.add_argument("--manifold", choices=sorted(BUILTIN), help="built-in triangulation")

    p = sub.add_parser("solve", help="solve the gluing equations")
    source(p)
    p.add_argument("--target", nargs="+", default=["complete"], metavar="SPEC",
                   help="'complete' or 'dehn CUSP=P,Q ...' (Klein cusps: CUSP=0,Q or CUSP=Q)")
    p.add_argument("--out", metavar="PATH", help="output JSON (default: stdout)")
    p.add_argument("--verbose", action="store_true", help="log Newton iterations")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sample the Gieseking deformation curve")
    p.add_argument("--manifold", choices=["gieseking"], default="gieseking")
    p.add_argument("--samples", type=int, required=True, metavar="N")
    p.add_argument("--out", metavar="CSV", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="classify a Klein-bottle representation")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--traces", metavar="IA2,IB", help="trace invariants I_a2 and I_b")
    g.add_argument("--x", metavar="RE,IM", help="Gieseking character x on |x - 1| = 1")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="check a triangulation and report its structure")
    source(p)
    p.add_argument("--cover-out", metavar="PATH", help="write the orientation double cover")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
