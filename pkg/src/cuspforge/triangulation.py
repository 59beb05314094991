"""Combinatorial ideal triangulations.

Document format (JSON, UTF-8)::

    {
      "format": 1,
      "name": "gieseking",
      "tetrahedra_count": 1,
      "gluings": [
        {"tet": 0, "face": 1, "to_tet": 0, "to_face": 2, "vertex_map": [0, 2, 3, 1]},
        ...
      ],
      "cusps": [
        {"name": "c0", "vertex": [0, 0],
         "curves": {"l": [{"tet": 0, "edge_class": 0, "exp": -1, "conj": true}, ...],
                    "m": [...]}}
      ]
    }

Faces are numbered by the opposite vertex.  ``vertex_map[v]`` is the vertex of
``to_tet`` that vertex ``v`` of ``tet`` is glued to, so ``vertex_map[face]``
equals ``to_face``.  Both directions of every gluing may be listed; a missing
reverse record is filled in, a contradictory one is an error.

Edge classes: class 0 is the pair {01, 23}, class 1 is {02, 13}, class 2 is
{03, 12}.  With vertices placed at (1, z, INFINITY, 0) the classes carry the
invariants z, 1/(1-z) and (z-1)/z.

A face gluing preserves orientation exactly when ``vertex_map`` is an odd
permutation.  Worked example: the identity-like map [0, 1, 2, 3] glues face 3
of one tetrahedron to face 3 of another with both tetrahedra lying on the same
side of the face, which reverses orientation; swapping two vertices of the face,
e.g. [1, 0, 2, 3], produces a mirror-image gluing that preserves it.

The optional ``vertex`` of a cusp names one (tet, vertex) corner of the cusp;
without it cusps are matched to vertex classes in order.  The curve labels
``l`` and ``m`` are the longitude and meridian used for Dehn filling.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

from .errors import OrientableInputError, ParseError, ValidationError
from .geometry import ShapeAssignment

FORMAT_VERSION = 1

_CLASS_OF_PAIR = {(0, 1): 0, (2, 3): 0, (0, 2): 1, (1, 3): 1, (0, 3): 2, (1, 2): 2}
EDGE_CLASS = {**_CLASS_OF_PAIR, **{(j, i): k for (i, j), k in _CLASS_OF_PAIR.items()}}

TAU = (1, 0, 2, 3)
"""Relabeling used for the mirror copies in the double cover."""


def edge_class(i: int, j: int) -> int:
    return EDGE_CLASS[(i, j)]


def perm_parity(p) -> int:
    """0 for even, 1 for odd permutations of range(len(p))."""
    p = list(p)
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


def perm_compose(a, b):
    """(a∘b)[i] = a[b[i]]."""
    return tuple(a[x] for x in b)


def perm_inverse(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def preserves_orientation(p) -> bool:
    return perm_parity(p) == 1


class Factor(NamedTuple):
    tet: int
    edge_class: int
    exp: int
    conj: bool = False


class HolonomyWord(tuple):
    """Nonempty product of edge invariants with exponents ±1."""

    def __new__(cls, factors):
        fs = tuple(Factor(int(f[0]), int(f[1]), int(f[2]), bool(f[3]) if len(f) > 3 else False)
                   for f in factors)
        if not fs:
            raise ValueError("holonomy word must be nonempty")
        for f in fs:
            if f.edge_class not in (0, 1, 2):
                raise ValueError(f"edge class {f.edge_class} out of range")
            if f.exp not in (1, -1):
                raise ValueError(f"exponent {f.exp} must be +1 or -1")
        return super().__new__(cls, fs)

    def to_document(self):
        return [{"tet": f.tet, "edge_class": f.edge_class, "exp": f.exp, "conj": f.conj}
                for f in self]


@dataclass(frozen=True)
class CuspDeclaration:
    name: str
    vertex: tuple | None
    curves: dict

    def to_document(self):
        doc = {"name": self.name}
        if self.vertex is not None:
            doc["vertex"] = list(self.vertex)
        doc["curves"] = {k: w.to_document() for k, w in self.curves.items()}
        return doc


@dataclass(frozen=True)
class EdgeCycle:
    """An edge of the triangulation with the tetrahedron edges around it.

    ``steps`` holds (tet, edge_class, eps) triples; ``slots`` the matching
    (tet, i, j) edges with i < j.
    """

    steps: tuple
    slots: tuple

    def __len__(self):
        return len(self.steps)

    @property
    def all_positive(self) -> bool:
        return all(e == 1 for _, _, e in self.steps)


@dataclass(frozen=True)
class CuspLink:
    index: int
    corners: tuple  # (tet, vertex) pairs, sorted
    orientable: bool
    euler_characteristic: int
    declaration: CuspDeclaration | None = None

    @property
    def name(self) -> str:
        return self.declaration.name if self.declaration else f"cusp{self.index}"

    @property
    def kind(self) -> str:
        return "torus" if self.orientable else "klein"

    def curve(self, label):
        if self.declaration is None or label not in self.declaration.curves:
            raise KeyError(f"cusp {self.name!r} has no curve {label!r}")
        return self.declaration.curves[label]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


class Triangulation:
    """Validated ideal triangulation with eagerly computed derived data.

    ``gluings`` maps (tet, face) to (to_tet, to_face, vertex_map) and contains
    both directions of every face pairing.  Instances are treated as immutable.
    """

    def __init__(self, n, gluings, cusps=(), name=""):
        self.n = int(n)
        self.name = str(name)
        self.gluings = _validate_gluings(self.n, gluings)
        self.edge_cycles = _edge_cycles(self.n, self.gluings)
        if len(self.edge_cycles) != self.n:
            raise ValidationError(
                "edge-count", f"{len(self.edge_cycles)} edge cycles for {self.n} tetrahedra")
        self.tet_signs = _tet_signs(self.n, self.gluings)
        links = _cusp_links(self.n, self.gluings)
        self.cusp_links = _attach_declarations(self.n, links, tuple(cusps))

    @property
    def orientable(self) -> bool:
        return self.tet_signs is not None

    @property
    def cusps(self):
        return self.cusp_links

    @property
    def declarations(self):
        return tuple(c.declaration for c in self.cusp_links if c.declaration is not None)

    def gluing(self, tet, face):
        return self.gluings[(tet, face)]

    def to_document(self) -> dict:
        """Canonical document: gluings sorted, both directions listed."""
        gl = [{"tet": t, "face": f, "to_tet": t2, "to_face": f2, "vertex_map": list(p)}
              for (t, f), (t2, f2, p) in sorted(self.gluings.items())]
        return {
            "format": FORMAT_VERSION,
            "name": self.name,
            "tetrahedra_count": self.n,
            "gluings": gl,
            "cusps": [d.to_document() for d in self.declarations],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2) + "\n"

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.to_document() == other.to_document()

    def __hash__(self):
        return hash(self.dumps())

    def __repr__(self):
        return f"Triangulation(name={self.name!r}, n={self.n}, cusps={len(self.cusp_links)})"

    def summary(self) -> str:
        lengths = ", ".join(str(len(c)) for c in self.edge_cycles)
        klein = sum(1 for c in self.cusp_links if not c.orientable)
        tori = len(self.cusp_links) - klein
        parts = [f"{self.n} tet" + ("s" if self.n != 1 else ""),
                 f"{len(self.edge_cycles)} edge cycle" + ("s" if len(self.edge_cycles) != 1 else "")
                 + f" (len {lengths})"]
        if klein:
            parts.append(f"{klein} Klein cusp" + ("s" if klein != 1 else ""))
        if tori:
            parts.append(f"{tori} torus cusp" + ("s" if tori != 1 else ""))
        parts.append("orientable" if self.orientable else "non-orientable")
        return ", ".join(parts)


# --- validation and derived data -------------------------------------------

def _validate_gluings(n, gluings):
    if n < 1:
        raise ValidationError("tetrahedra-count", "need at least one tetrahedron")
    out = {}

    def put(key, val):
        if key in out and out[key] != val:
            raise ValidationError(
                "gluing-involution", f"face {key} is glued inconsistently ({out[key]} vs {val})")
        out[key] = val

    for (t, f), (t2, f2, p) in gluings.items():
        for x, what in ((t, "tet"), (t2, "to_tet")):
            if not 0 <= x < n:
                raise ValidationError("tet-range", f"{what} {x} out of range 0..{n - 1}")
        for x, what in ((f, "face"), (f2, "to_face")):
            if not 0 <= x < 4:
                raise ValidationError("face-range", f"{what} {x} out of range 0..3")
        p = tuple(int(x) for x in p)
        if sorted(p) != [0, 1, 2, 3]:
            raise ValidationError("vertex-map", f"vertex_map {list(p)} is not a permutation")
        if p[f] != f2:
            raise ValidationError(
                "vertex-map", f"vertex_map of face ({t}, {f}) sends {f} to {p[f]}, expected {f2}")
        if (t, f) == (t2, f2):
            raise ValidationError("gluing-involution", f"face ({t}, {f}) is glued to itself")
        put((t, f), (t2, f2, p))
        put((t2, f2), (t, f, perm_inverse(p)))
    missing = [(t, f) for t in range(n) for f in range(4) if (t, f) not in out]
    if missing:
        raise ValidationError("all-faces-glued", f"unglued faces: {missing}")
    return out


def _edge_cycles(n, gluings):
    visited = set()
    cycles = []
    for t in range(n):
        for i, j in combinations(range(4), 2):
            if (t, i, j) in visited:
                continue
            cycles.append(_walk_edge(gluings, t, i, j, visited))
    return tuple(cycles)


def _walk_edge(gluings, t, i, j, visited):
    k, l = sorted(set(range(4)) - {i, j})
    start = (t, i, j, k, l)
    state, sigma = start, 1
    steps, slots = [], []
    while True:
        t, i, j, k, l = state
        slot = (t, min(i, j), max(i, j))
        if slot in visited:
            raise ValidationError("edge-cycle", f"edge slot {slot} revisited inconsistently")
        visited.add(slot)
        slots.append(slot)
        steps.append((t, edge_class(i, j), 1 if sigma > 0 else 0))
        t2, _, p = gluings[(t, l)]
        if perm_parity(p) == 0:
            sigma = -sigma
        state = (t2, p[i], p[j], p[l], p[k])
        if state[0] == start[0] and {state[1], state[2]} == {start[1], start[2]}:
            if state != start or sigma != 1:
                raise ValidationError(
                    "edge-cycle", f"edge ({start[0]}, {start[1]}{start[2]}) is identified "
                    "with itself in reverse")
            break
    return EdgeCycle(tuple(steps), tuple(slots))


def _tet_signs(n, gluings):
    """Consistent orientation signs of the tetrahedra, or None if non-orientable."""
    sign = {}
    for t in range(n):
        if t not in sign:
            sub = _component_signs(gluings, t)
            if sub is None:
                return None
            sign.update(sub)
    return tuple(sign[t] for t in range(n))


def _component_signs(gluings, root):
    sign = {root: 1}
    queue = deque([root])
    while queue:
        t = queue.popleft()
        for f in range(4):
            t2, _, p = gluings[(t, f)]
            s2 = sign[t] * (1 if perm_parity(p) else -1)
            if t2 not in sign:
                sign[t2] = s2
                queue.append(t2)
            elif sign[t2] != s2:
                return None
    return sign


def _cusp_links(n, gluings):
    verts = _UnionFind()
    corners = _UnionFind()
    for t in range(n):
        for v in range(4):
            verts.find((t, v))
            for u in range(4):
                if u != v:
                    corners.find((t, v, u))
    for (t, f), (t2, _, p) in gluings.items():
        for v in range(4):
            if v == f:
                continue
            verts.union((t, v), (t2, p[v]))
            for u in range(4):
                if u not in (v, f):
                    corners.union((t, v, u), (t2, p[v], p[u]))
    classes = {}
    for t in range(n):
        for v in range(4):
            classes.setdefault(verts.find((t, v)), []).append((t, v))
    links = []
    for idx, members in enumerate(sorted(classes.values())):
        faces = len(members)
        edges = 3 * faces // 2
        vertices = len({corners.find((t, v, u)) for t, v in members for u in range(4) if u != v})
        chi = vertices - edges + faces
        if chi != 0:
            raise ValidationError(
                "cusp-euler-characteristic",
                f"vertex link of {members[0]} has Euler characteristic {chi}")
        links.append(CuspLink(idx, tuple(members), _link_orientable(members, gluings), chi))
    return links


def _link_orientable(members, gluings):
    sign = {members[0]: 1}
    queue = deque([members[0]])
    while queue:
        t, v = queue.popleft()
        for f in range(4):
            if f == v:
                continue
            t2, _, p = gluings[(t, f)]
            nb = (t2, p[v])
            s2 = sign[(t, v)] * (1 if perm_parity(p) else -1)
            if nb not in sign:
                sign[nb] = s2
                queue.append(nb)
            elif sign[nb] != s2:
                return False
    return True


def _attach_declarations(n, links, decls):
    if not decls:
        return tuple(links)
    assigned = {}
    for pos, d in enumerate(decls):
        for word in d.curves.values():
            for f in word:
                if not 0 <= f.tet < n:
                    raise ValidationError(
                        "holonomy-word", f"cusp {d.name!r} refers to tetrahedron {f.tet}")
        if d.vertex is not None:
            hits = [c.index for c in links if tuple(d.vertex) in c.corners]
            if not hits:
                raise ValidationError("cusp-vertex", f"cusp {d.name!r}: no vertex {d.vertex}")
            idx = hits[0]
        else:
            if len(decls) != len(links):
                raise ValidationError(
                    "cusp-count", f"{len(decls)} cusp declarations for {len(links)} cusps; "
                    "give 'vertex' to match them explicitly")
            idx = pos
        if idx in assigned:
            raise ValidationError("cusp-count", f"two declarations for cusp {idx}")
        assigned[idx] = CuspDeclaration(d.name, links[idx].corners[0], d.curves)
    return tuple(
        CuspLink(c.index, c.corners, c.orientable, c.euler_characteristic, assigned.get(c.index))
        for c in links)


# --- document I/O -----------------------------------------------------------

def triangulation_from_document(doc) -> Triangulation:
    if not isinstance(doc, dict):
        raise ValidationError("document", "top level must be an object")
    if doc.get("format") != FORMAT_VERSION:
        raise ValidationError("format", f"unsupported format {doc.get('format')!r}, expected 1")
    try:
        n = doc["tetrahedra_count"]
        records = doc["gluings"]
    except KeyError as exc:
        raise ValidationError("document", f"missing field {exc.args[0]!r}") from None
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValidationError("tetrahedra-count", "tetrahedra_count must be an integer")
    gluings = {}
    for rec in records:
        try:
            key = (rec["tet"], rec["face"])
            val = (rec["to_tet"], rec["to_face"], tuple(rec["vertex_map"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError("gluing-record", f"malformed gluing record {rec!r}") from exc
        if not all(isinstance(x, int) for x in (*key, *val[:2], *val[2])) or len(val[2]) != 4:
            raise ValidationError("gluing-record", f"malformed gluing record {rec!r}")
        if key in gluings and gluings[key] != val:
            raise ValidationError("gluing-involution", f"face {key} listed twice")
        gluings[key] = val
    cusps = []
    for c in doc.get("cusps", []):
        try:
            curves = {str(label): HolonomyWord(
                [(f["tet"], f["edge_class"], f["exp"], f.get("conj", False)) for f in word])
                for label, word in c.get("curves", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("holonomy-word", f"bad curve in cusp {c.get('name')!r}: {exc}") \
                from exc
        vertex = tuple(c["vertex"]) if "vertex" in c else None
        cusps.append(CuspDeclaration(str(c.get("name", f"cusp{len(cusps)}")), vertex, curves))
    return Triangulation(n, gluings, cusps, doc.get("name", ""))


def load_triangulation(source) -> Triangulation:
    """Load a triangulation from bytes, text, a path-like or a binary/text stream."""
    if hasattr(source, "read"):
        source = source.read()
    elif not isinstance(source, (bytes, str)):
        with open(source, "rb") as fh:
            source = fh.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return triangulation_from_document(doc)


# --- constructions ----------------------------------------------------------

def relabel(tri: Triangulation, perms) -> Triangulation:
    """Renumber the vertices of each tetrahedron: old vertex v of tet t becomes perms[t][v].

    Holonomy words are carried along only for even relabelings (which keep
    every edge invariant); odd ones require a word-free triangulation.
    """
    perms = [tuple(p) for p in perms]
    gl = {}
    for (t, f), (t2, f2, p) in tri.gluings.items():
        gl[(t, perms[t][f])] = (t2, perms[t2][f2],
                                perm_compose(perms[t2], perm_compose(p, perm_inverse(perms[t]))))
    decls = []
    for d in tri.declarations:
        if any(perm_parity(perms[f.tet]) for w in d.curves.values() for f in w):
            raise ValueError("odd relabeling of a tetrahedron used by a holonomy word")
        curves = {k: HolonomyWord([(f.tet, _map_class(perms[f.tet], f.edge_class), f.exp, f.conj)
                                   for f in w]) for k, w in d.curves.items()}
        t, v = d.vertex
        decls.append(CuspDeclaration(d.name, (t, perms[t][v]), curves))
    return Triangulation(tri.n, gl, decls, tri.name)


def _map_class(p, k):
    i, j = {0: (0, 1), 1: (0, 2), 2: (0, 3)}[k]
    return edge_class(p[i], p[j])


def permute_tetrahedra(tri: Triangulation, order) -> Triangulation:
    """Renumber tetrahedra: old tet t becomes order[t]."""
    gl = {(order[t], f): (order[t2], f2, p) for (t, f), (t2, f2, p) in tri.gluings.items()}
    decls = [CuspDeclaration(d.name, (order[d.vertex[0]], d.vertex[1]),
                             {k: HolonomyWord([(order[f.tet], f.edge_class, f.exp, f.conj)
                                               for f in w]) for k, w in d.curves.items()})
             for d in tri.declarations]
    return Triangulation(tri.n, gl, decls, tri.name)


def disjoint_union(*tris, name=None) -> Triangulation:
    gl, decls, offset = {}, [], 0
    for k, tri in enumerate(tris):
        for (t, f), (t2, f2, p) in tri.gluings.items():
            gl[(t + offset, f)] = (t2 + offset, f2, p)
        for d in tri.declarations:
            decls.append(CuspDeclaration(
                f"{d.name}.{k}", (d.vertex[0] + offset, d.vertex[1]),
                {lab: HolonomyWord([(f.tet + offset, f.edge_class, f.exp, f.conj) for f in w])
                 for lab, w in d.curves.items()}))
        offset += tri.n
    return Triangulation(offset, gl, decls, name or "+".join(t.name for t in tris))


def orient(tri: Triangulation) -> Triangulation:
    """Relabel negatively oriented tetrahedra so every gluing preserves orientation."""
    if not tri.orientable:
        raise ValueError("triangulation is not orientable")
    if tri.declarations:
        raise ValueError("orient() does not transport holonomy words")
    perms = [TAU if s < 0 else (0, 1, 2, 3) for s in tri.tet_signs]
    return relabel(tri, perms)


def _lift_word(word, n):
    """Lift a word on N to the cover: conjugated factors move to the mirror copy."""
    out = []
    for f in word:
        if f.conj:
            out.append((f.tet + n, _map_class(TAU, f.edge_class), -f.exp, False))
        else:
            out.append((f.tet, f.edge_class, f.exp, False))
    return HolonomyWord(out)


def partner_map(n_cover: int):
    half = n_cover // 2
    return tuple(t + half if t < half else t - half for t in range(n_cover))


def involution_on_word(word, correspondence):
    """Image of a cover word under the deck involution.

    Each factor z^e on tetrahedron t becomes w^(-e) on the partner of t, at
    the corresponding edge.
    """
    return HolonomyWord([(correspondence[f.tet], _map_class(TAU, f.edge_class), -f.exp, f.conj)
                         for f in word])


def orientation_double_cover(tri: Triangulation):
    """Orientation double cover and its deck correspondence.

    Tetrahedron t + n is the mirror copy of t, relabeled by swapping vertices
    0 and 1 so that its shape is 1/conj(z).  Returns (cover, correspondence)
    where correspondence[t] is the partner of t.
    """
    if tri.orientable:
        raise OrientableInputError(f"{tri.name or 'triangulation'} is already orientable")
    n = tri.n
    gl = {}
    for (t, f), (t2, f2, p) in tri.gluings.items():
        if perm_parity(p):
            gl[(t, f)] = (t2, f2, p)
            gl[(t + n, TAU[f])] = (t2 + n, TAU[f2], perm_compose(TAU, perm_compose(p, TAU)))
        else:
            gl[(t, f)] = (t2 + n, TAU[f2], perm_compose(TAU, p))
            gl[(t + n, TAU[f])] = (t2, f2, perm_compose(p, TAU))
    correspondence = partner_map(2 * n)
    decls = []
    for link in tri.cusp_links:
        d = link.declaration
        if d is None:
            continue
        lifted = {k: _lift_word(w, n) for k, w in d.curves.items()}
        t, v = d.vertex
        if link.orientable:
            decls.append(CuspDeclaration(f"{d.name}#1", (t, v), lifted))
            decls.append(CuspDeclaration(
                f"{d.name}#2", (t + n, TAU[v]),
                {k: involution_on_word(w, correspondence) for k, w in lifted.items()}))
        else:
            decls.append(CuspDeclaration(d.name, (t, v), lifted))
    cover = Triangulation(2 * n, gl, decls, f"{tri.name}-double-cover" if tri.name else "")
    return cover, correspondence


def lift_shapes(shapes: ShapeAssignment) -> ShapeAssignment:
    """Shapes on N to the symmetric shapes (z, 1/conj z) on the double cover."""
    zs = tuple(shapes)
    return ShapeAssignment(zs + tuple(1 / z.conjugate() for z in zs))


def involution_on_shapes(shapes: ShapeAssignment, correspondence=None) -> ShapeAssignment:
    """Deck involution (z, w) -> (1/conj w, 1/conj z) on cover shapes."""
    if correspondence is None:
        correspondence = partner_map(len(shapes))
    zs = tuple(shapes)
    return ShapeAssignment(tuple(1 / zs[correspondence[i]].conjugate() for i in range(len(zs))))
