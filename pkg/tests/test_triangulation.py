import io
import itertools
import json

import pytest
from hypothesis import given, strategies as st

from cuspforge.errors import OrientableInputError, ParseError, ValidationError
from cuspforge.geometry import ShapeAssignment
from cuspforge.gieseking import figure_eight_triangulation, gieseking_triangulation
from cuspforge.triangulation import (EDGE_CLASS, TAU, Triangulation, disjoint_union,
                                     involution_on_shapes, lift_shapes, load_triangulation,
                                     orient, orientation_double_cover, perm_compose,
                                     perm_parity, permute_tetrahedra, preserves_orientation,
                                     relabel)

from strategies import upper_half_plane

PERMS = list(itertools.permutations(range(4)))
EVEN = [p for p in PERMS if perm_parity(p) == 0]


def bare(tri):
    """Copy without cusp declarations (so arbitrary relabelings are allowed)."""
    return Triangulation(tri.n, tri.gluings, (), tri.name)


def gieseking_doc():
    return gieseking_triangulation().to_document()


def test_gieseking_structure():
    g = gieseking_triangulation()
    assert g.n == 1
    assert [len(c) for c in g.edge_cycles] == [6]
    assert [e for _, _, e in g.edge_cycles[0].steps] == [1, 0, 1, 0, 1, 0]
    assert len(g.cusp_links) == 1
    link = g.cusp_links[0]
    assert not link.orientable and link.euler_characteristic == 0
    assert not g.orientable


def test_figure_eight_document():
    f = figure_eight_triangulation()
    assert f.n == 2 and len(f.edge_cycles) == 2
    assert f.orientable
    assert all(c.all_positive for c in f.edge_cycles)
    assert [c.orientable for c in f.cusp_links] == [True]


def test_cover_equals_figure_eight_document():
    cover, _ = orientation_double_cover(gieseking_triangulation())
    f = figure_eight_triangulation()
    assert cover.gluings == f.gluings


def test_parity_convention():
    assert preserves_orientation((1, 0, 2, 3))
    assert not preserves_orientation((0, 1, 2, 3))
    assert EDGE_CLASS[(0, 1)] == EDGE_CLASS[(2, 3)] == 0


def test_inconsistent_self_gluing_rejected():
    doc = gieseking_doc()
    doc["gluings"].append({"tet": 0, "face": 2, "to_tet": 0, "to_face": 0,
                           "vertex_map": [2, 1, 0, 3]})
    with pytest.raises(ValidationError) as exc:
        load_triangulation(json.dumps(doc))
    assert exc.value.invariant == "gluing-involution"


def test_unglued_face_rejected():
    doc = gieseking_doc()
    doc["gluings"] = [g for g in doc["gluings"] if g["face"] in (1, 2)][:1]
    with pytest.raises(ValidationError) as exc:
        load_triangulation(json.dumps(doc))
    assert exc.value.invariant == "all-faces-glued"


def test_vertex_map_must_send_face_to_face():
    doc = gieseking_doc()
    doc["gluings"][0]["vertex_map"] = [1, 0, 2, 3]
    with pytest.raises(ValidationError):
        load_triangulation(json.dumps(doc))


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        load_triangulation('{"format": 1,\n  "gluings": [,]}')
    assert exc.value.line == 2


def test_format_version_required():
    doc = gieseking_doc()
    del doc["format"]
    with pytest.raises(ValidationError) as exc:
        load_triangulation(json.dumps(doc))
    assert exc.value.invariant == "format"


def test_load_from_stream_and_path(tmp_path):
    text = gieseking_triangulation().dumps()
    path = tmp_path / "g.json"
    path.write_text(text)
    assert load_triangulation(path) == gieseking_triangulation()
    assert load_triangulation(io.BytesIO(text.encode())) == gieseking_triangulation()


def test_round_trip_canonical():
    for tri in (gieseking_triangulation(), figure_eight_triangulation()):
        again = load_triangulation(tri.dumps())
        assert again == tri
        assert again.dumps() == tri.dumps()


def test_summary_line():
    assert gieseking_triangulation().summary() == (
        "1 tet, 1 edge cycle (len 6), 1 Klein cusp, non-orientable")


def test_cover_properties():
    g = gieseking_triangulation()
    cover, corr = orientation_double_cover(g)
    assert cover.n == 2 and cover.orientable
    assert all(corr[corr[t]] == t for t in range(cover.n))
    assert [c.kind for c in cover.cusp_links] == ["torus"]
    assert all(c.all_positive for c in cover.edge_cycles)
    with pytest.raises(OrientableInputError):
        orientation_double_cover(cover)


def test_disjoint_union_has_two_klein_cusps():
    g = gieseking_triangulation()
    u = disjoint_union(g, g)
    assert [c.kind for c in u.cusp_links] == ["klein", "klein"]
    cover, _ = orientation_double_cover(u)
    assert [c.kind for c in cover.cusp_links] == ["torus", "torus"]


def test_cusp_lifting_rule_with_mixed_cusps():
    # k Klein cusps and l torus cusps lift to k + 2l tori.
    for k, l in ((1, 1), (2, 1), (1, 2)):
        parts = [gieseking_triangulation()] * k + [figure_eight_triangulation()] * l
        u = disjoint_union(*parts)
        cover, _ = orientation_double_cover(u)
        assert cover.orientable
        assert len(cover.cusp_links) == k + 2 * l
        assert all(c.orientable for c in cover.cusp_links)
        names = sorted(c.name for c in cover.cusp_links)
        assert len(set(names)) == len(names)


def test_involution_on_shapes_example():
    out = involution_on_shapes(ShapeAssignment((1j, 2j)))
    assert abs(out[0] - 0.5j) < 1e-15 and abs(out[1] - 1j) < 1e-15


@given(st.lists(upper_half_plane, min_size=1, max_size=4))
def test_involution_on_shapes_is_involution(zs):
    ws = [1j + z * 0.5 for z in zs]
    shapes = ShapeAssignment(tuple(zs) + tuple(ws))
    back = involution_on_shapes(involution_on_shapes(shapes))
    assert all(abs(a - b) < 1e-12 * max(1, abs(a)) for a, b in zip(back, shapes))


@given(st.lists(upper_half_plane, min_size=1, max_size=4))
def test_lifted_shapes_are_fixed(zs):
    lifted = lift_shapes(ShapeAssignment(tuple(zs)))
    fixed = involution_on_shapes(lifted)
    assert all(abs(a - b) < 1e-12 * max(1, abs(a)) for a, b in zip(fixed, lifted))


def _brute_force_orientable(tri):
    """Exhaustive search for tetrahedron signs making every gluing orientation-preserving."""
    for signs in itertools.product((1, -1), repeat=tri.n):
        if all(signs[t] * signs[t2] == (1 if preserves_orientation(p) else -1)
               for (t, _), (t2, _, p) in tri.gluings.items()):
            return signs
    return None


@given(st.lists(st.sampled_from(PERMS), min_size=2, max_size=2), st.booleans())
def test_relabelings_keep_structure(perms, swap):
    f = bare(figure_eight_triangulation())
    t = relabel(f, perms)
    if swap:
        t = permute_tetrahedra(t, [1, 0])
    assert sum(len(c) for c in t.edge_cycles) == 6 * t.n
    assert len(t.edge_cycles) == t.n
    assert t.orientable
    assert [c.orientable for c in t.cusp_links] == [True]
    # Brute-force search agrees with the propagated orientation.
    assert _brute_force_orientable(t) is not None
    oriented = orient(t)
    assert all(c.all_positive for c in oriented.edge_cycles)
    assert all(preserves_orientation(p) for _, _, p in oriented.gluings.values())


@given(st.sampled_from(PERMS))
def test_gieseking_relabelings(p):
    g = relabel(bare(gieseking_triangulation()), [p])
    assert [len(c) for c in g.edge_cycles] == [6]
    assert not g.orientable and _brute_force_orientable(g) is None
    cover, _ = orientation_double_cover(g)
    assert cover.orientable and _brute_force_orientable(cover) is not None
    assert all(c.all_positive for c in orient(cover).edge_cycles)


@given(st.sampled_from(EVEN))
def test_even_relabeling_keeps_words(p):
    g = relabel(gieseking_triangulation(), [p])
    assert g.cusp_links[0].declaration is not None


def test_odd_relabeling_with_words_rejected():
    with pytest.raises(ValueError):
        relabel(gieseking_triangulation(), [TAU])


def test_perm_compose():
    assert perm_compose(TAU, TAU) == (0, 1, 2, 3)
