import json
import random
from math import comb

import pytest

from pi_coindex.models import ComplexError, ComplexParseError
from pi_coindex.simplicial import Face, SimplicialComplex, discrete, join_power


def random_complex(rng: random.Random, n: int) -> SimplicialComplex:
    facets = [rng.sample(range(n), rng.randint(1, n)) for _ in range(rng.randint(1, 4))]
    return SimplicialComplex.from_facets(n, facets)


def extended(counts: tuple[int, ...]) -> list[int]:
    """f-vector with the empty face counted in front."""
    return [1] + list(counts)


@pytest.fixture
def boundary3():
    return SimplicialComplex.from_facets(4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])


@pytest.fixture
def k33():
    return discrete(3).join(discrete(3))


def test_from_facets_drops_non_maximal():
    complex_ = SimplicialComplex.from_facets(4, [[0, 1], [0, 1, 2]])
    assert [f.vertices for f in complex_.facets] == [(0, 1, 2)]


def test_from_facets_canonical_order():
    complex_ = SimplicialComplex.from_facets(5, [[3, 4], [0], [2, 1], [1, 2]])
    assert [f.vertices for f in complex_.facets] == [(0,), (1, 2), (3, 4)]


def test_from_facets_discrete():
    complex_ = SimplicialComplex.from_facets(3, [[0], [1], [2]])
    assert complex_.f_vector().counts == (3,)
    assert complex_.same_faces(discrete(3))


@pytest.mark.parametrize("facets", [[[0, 4]], [[-1, 0]], [[0, 0, 1]]])
def test_from_facets_rejects_bad_vertices(facets):
    with pytest.raises(ComplexError):
        SimplicialComplex.from_facets(4, facets)


def test_void_complex_must_be_explicit():
    with pytest.raises(ComplexError):
        SimplicialComplex.from_facets(3, [])
    void = SimplicialComplex.from_facets(3, [], void=True)
    assert void.is_void
    assert void.minimal_nonfaces() == [Face(0)]
    assert void.f_vector().counts == ()


def test_is_face_accepts_masks_faces_and_vertex_lists(boundary3):
    assert boundary3.is_face(0b0111)
    assert not boundary3.is_face(0b1111)
    assert boundary3.is_face(Face.from_vertices([1, 3]))
    assert boundary3.is_face((0, 2, 3))
    assert boundary3.minimal_nonfaces() == [Face(0b1111)]
    assert not boundary3.bipartition_property()


def test_empty_face_belongs_to_nonvoid_complex():
    empty = SimplicialComplex.from_facets(2, [[]])
    assert empty.is_face([])
    assert [f.vertices for f in empty.minimal_nonfaces()] == [(0,), (1,)]


def test_simplex_skeleton_complete_graph():
    k5 = SimplicialComplex.simplex_skeleton(5, 1)
    assert k5.f_vector().counts == (5, 10)
    assert len(k5.minimal_nonfaces()) == 10
    assert all(len(f) == 3 for f in k5.minimal_nonfaces())


def test_simplex_skeleton_boundary(boundary3):
    assert SimplicialComplex.simplex_skeleton(4, 2).same_faces(boundary3)


def test_simplex_skeleton_full_simplex_has_no_nonfaces():
    full = SimplicialComplex.simplex_skeleton(6, 5)
    assert len(full.facets) == 1
    assert full.minimal_nonfaces() == []


@pytest.mark.parametrize("nv,k", [(4, 4), (4, -1), (0, 0)])
def test_simplex_skeleton_range(nv, k):
    with pytest.raises(ComplexError):
        SimplicialComplex.simplex_skeleton(nv, k)


def test_join_of_two_triples_is_k33(k33):
    assert k33.n == 6
    assert k33.f_vector().counts == (6, 9)


def test_join_of_points_is_edge():
    point = SimplicialComplex.simplex_skeleton(1, 0)
    edge = point.join(point)
    assert edge.same_faces(SimplicialComplex.simplex_skeleton(2, 1))


def test_join_power_matches_repeated_join():
    power = join_power(discrete(3), 3)
    assert power.n == 9
    assert power.f_vector().counts == (9, 27, 27)


def test_join_overflow():
    big = SimplicialComplex.simplex_skeleton(40, 0)
    with pytest.raises(ComplexError):
        big.join(big)


def test_join_f_vector_convolution():
    rng = random.Random(7)
    for _ in range(40):
        a = random_complex(rng, rng.randint(1, 5))
        b = random_complex(rng, rng.randint(1, 5))
        fa, fb = extended(a.f_vector().counts), extended(b.f_vector().counts)
        expected = [0] * (len(fa) + len(fb) - 1)
        for i, x in enumerate(fa):
            for j, y in enumerate(fb):
                expected[i + j] += x * y
        assert extended(a.join(b).f_vector().counts) == expected


def test_deleted_join_of_edge_is_square():
    square = SimplicialComplex.simplex_skeleton(2, 1).deleted_join()
    assert square.f_vector().counts == (4, 4)


def test_deleted_join_of_two_points():
    result = discrete(2).deleted_join()
    assert result.f_vector().counts == (4, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_deleted_join_of_simplex_is_crosspolytope(n):
    result = SimplicialComplex.simplex_skeleton(n + 1, n).deleted_join()
    expected = tuple(2 ** (k + 1) * comb(n + 1, k + 1) for k in range(n + 1))
    assert result.f_vector().counts == expected


def test_deleted_join_overflow():
    with pytest.raises(ComplexError):
        SimplicialComplex.simplex_skeleton(33, 0).deleted_join()


def test_minimal_nonfaces_examples(boundary3, k33):
    assert [f.vertices for f in boundary3.minimal_nonfaces()] == [(0, 1, 2, 3)]
    assert [f.vertices for f in k33.minimal_nonfaces()] == [
        (0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)
    ]


def test_minimal_nonfaces_match_brute_force():
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(1, 10)
        complex_ = random_complex(rng, n)
        brute = [
            mask
            for mask in range(1 << n)
            if not complex_.is_face(mask_vertices(mask))
            and all(complex_.is_face(mask_vertices(mask & ~(1 << v))) for v in mask_vertices(mask))
        ]
        assert sorted(f.mask for f in complex_.minimal_nonfaces()) == sorted(brute)


def mask_vertices(mask: int) -> list[int]:
    return [v for v in range(mask.bit_length()) if mask >> v & 1]


def test_faces_are_closed_under_subsets():
    rng = random.Random(3)
    for _ in range(20):
        complex_ = random_complex(rng, rng.randint(1, 8))
        faces = {f.mask for f in complex_.faces(include_empty=True)}
        for mask in faces:
            for v in mask_vertices(mask):
                assert mask & ~(1 << v) in faces


def test_all_nonfaces_contain_minimal_ones(boundary3):
    nonfaces = boundary3.all_nonfaces()
    assert [f.vertices for f in nonfaces] == [(0, 1, 2, 3)]
    assert len(discrete(3).all_nonfaces()) == 4


def test_f_vector_and_euler_characteristic(boundary3):
    assert boundary3.f_vector().counts == (4, 6, 4)
    assert boundary3.euler_characteristic() == 2


def test_bipartition_property_fails_on_sphere(boundary3):
    assert not boundary3.bipartition_property()


def test_bipartition_property_of_simplex_boundary_on_three_vertices():
    # a vertex and the opposite edge are both faces
    assert not SimplicialComplex.simplex_skeleton(3, 1).bipartition_property()
    assert SimplicialComplex.simplex_skeleton(1, 0).bipartition_property()


def test_intersect(k33):
    complete_graph = SimplicialComplex.simplex_skeleton(6, 1)
    meet = k33.intersect(complete_graph)
    assert meet.same_faces(k33)
    with pytest.raises(ComplexError):
        k33.intersect(discrete(3))


def test_from_minimal_nonfaces_recovers_complex():
    rng = random.Random(5)
    for _ in range(40):
        complex_ = random_complex(rng, rng.randint(1, 7))
        rebuilt = SimplicialComplex.from_minimal_nonfaces(complex_.n, complex_.minimal_nonfaces())
        assert rebuilt.same_faces(complex_)


def test_store_and_load(tmp_path, k33):
    named = SimplicialComplex(k33.n, k33.facets, name="K33", embed_dim=3)
    path = named.store(tmp_path / "k33.json")
    loaded = SimplicialComplex.load(path)
    assert loaded == named


def test_load_rejects_vertex_out_of_range(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 3, "facets": [[0, 1], [1, 3]]}))
    with pytest.raises(ComplexParseError, match=r"facets\[1\]\[1\]"):
        SimplicialComplex.load(path)


def test_load_reports_line_of_bad_facet(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n": 3,\n  "facets": [\n    [0, 1],\n    [1, 3]\n  ]\n}\n')
    with pytest.raises(ComplexParseError) as info:
        SimplicialComplex.load(path)
    assert info.value.line == 5
    assert "line 5" in str(info.value)


def test_load_reports_line_of_mistyped_entry(tmp_path):
    path = tmp_path / "typed.json"
    path.write_text('{\n  "facets": [[0],\n    ["a"]],\n  "n": 2\n}\n')
    with pytest.raises(ComplexParseError) as info:
        SimplicialComplex.load(path)
    assert info.value.field == "facets.1.0"
    assert info.value.line == 3


def test_load_reports_line_of_bad_scalar(tmp_path):
    path = tmp_path / "scalar.json"
    path.write_text('{\n  "facets": [[0]],\n  "n": 99\n}\n')
    with pytest.raises(ComplexParseError) as info:
        SimplicialComplex.load(path)
    assert info.value.field == "n"
    assert info.value.line == 3


def test_load_reports_json_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "n": 3,\n  "facets": [[0, 1]\n}\n')
    with pytest.raises(ComplexParseError) as info:
        SimplicialComplex.load(path)
    assert info.value.line is not None


def test_load_reports_missing_field(tmp_path):
    path = tmp_path / "missing.json"
    path.write_text(json.dumps({"facets": [[0]]}))
    with pytest.raises(ComplexParseError) as info:
        SimplicialComplex.load(path)
    assert info.value.field == "n"


def test_face_helpers():
    face = Face.from_vertices([2, 0])
    assert face.vertices == (0, 2)
    assert len(face) == 2
    assert 2 in face and 1 not in face
    assert face.issubset(Face.from_vertices([0, 1, 2]))
    assert face.isdisjoint(Face.from_vertices([1, 3]))
    assert str(face) == "{0,2}"


if __name__ == "__main__":
    pytest.main([__file__])
