from unittest.mock import patch

import pytest

from pi_coindex import library
from pi_coindex.library import (
    cp2_9,
    pseudomanifold_problems,
    resolve,
    rp2_6,
    simplex,
    simplex_boundary,
    surface_problems,
    three_point_join,
    van_kampen_flores,
)
from pi_coindex.models import ComplexError, TriangulationError
from pi_coindex.simplicial import Face, SimplicialComplex


def test_rp2_invariants():
    rp2 = rp2_6()
    assert rp2.n == 6
    assert rp2.embed_dim == 4
    assert rp2.f_vector().counts == (6, 15, 10)
    assert rp2.euler_characteristic() == 1
    assert surface_problems(rp2) == []
    assert rp2.bipartition_property()


def test_cp2_invariants():
    cp2 = cp2_9()
    assert cp2.n == 9
    assert cp2.embed_dim == 7
    assert cp2.f_vector().counts == (9, 36, 84, 90, 36)
    assert cp2.euler_characteristic() == 3
    assert pseudomanifold_problems(cp2) == []
    assert cp2.bipartition_property()


def test_cp2_edge_links_are_spheres():
    cp2 = cp2_9()
    for edge in [(0, 1), (2, 7), (5, 8)]:
        link = cp2.link(Face.from_vertices(edge))
        assert pseudomanifold_problems(link) == []
        assert link.euler_characteristic() == 2


def test_simplex_boundary_is_a_surface():
    assert surface_problems(simplex_boundary(3)) == []


def test_surface_problems_flags_a_disc():
    disc = SimplicialComplex.from_facets(3, [[0, 1, 2]])
    assert surface_problems(disc)


def test_pseudomanifold_problems_flags_branching():
    # three triangles on a common edge
    book = SimplicialComplex.from_facets(5, [[0, 1, 2], [0, 1, 3], [0, 1, 4]])
    problems = pseudomanifold_problems(book)
    assert any("{0,1} lies in 3 facets" in p for p in problems)


def test_named_generators():
    assert simplex(3).f_vector().counts == (4, 6, 4, 1)
    assert simplex(0).embed_dim == 1
    assert simplex_boundary(3).embed_dim == 3
    vkf = van_kampen_flores(1)
    assert vkf.n == 5 and vkf.embed_dim == 3
    join = three_point_join(1)
    assert join.f_vector().counts == (6, 9)
    assert join.embed_dim == 3


@pytest.mark.parametrize(
    "spec,n,dim",
    [
        ("simplex:3", 4, 3),
        ("boundary:4", 5, 3),
        ("skeleton:7,2", 7, 2),
        ("vkf:2", 7, 2),
        ("join3:2", 9, 2),
        ("discrete:4", 4, 0),
        ("rp2_6", 6, 2),
        ("cp2_9", 9, 4),
    ],
)
def test_resolve_specs(spec, n, dim):
    complex_ = resolve(spec)
    assert complex_.n == n
    assert complex_.dim == dim


def test_resolve_file(tmp_path):
    path = simplex_boundary(2).store(tmp_path / "triangle.json")
    assert resolve(str(path)).same_faces(simplex_boundary(2))


@pytest.mark.parametrize("spec", ["torus", "simplex:", "simplex:1,2", "mystery:3", "boundary:0"])
def test_resolve_rejects_unknown(spec):
    with pytest.raises(ComplexError):
        resolve(spec)


def test_bundled_triangulation_is_validated():
    with patch("pi_coindex.library._load_bundled", return_value=simplex_boundary(3)):
        with pytest.raises(TriangulationError, match="Euler characteristic"):
            library.rp2_6.__wrapped__()
        with pytest.raises(TriangulationError):
            library.cp2_9.__wrapped__()


if __name__ == "__main__":
    pytest.main([__file__])
