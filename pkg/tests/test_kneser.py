import random

import pytest

from pi_coindex.kneser import (
    ChromaticSolver,
    ColoringCertificate,
    KneserGraph,
    SarkariaDecomposition,
    chromatic_number,
    kneser_graph,
    sarkaria_decomposition,
    verify_coloring,
    verify_decomposition,
)
from pi_coindex.library import cp2_9, rp2_6, simplex, simplex_boundary, three_point_join
from pi_coindex.models import CertificateError
from pi_coindex.simplicial import Face, SimplicialComplex, discrete


def random_complex(rng: random.Random, n: int) -> SimplicialComplex:
    facets = [rng.sample(range(n), rng.randint(1, n)) for _ in range(rng.randint(1, 4))]
    return SimplicialComplex.from_facets(n, facets)


def random_graph(rng: random.Random, size: int, density: float) -> KneserGraph:
    neighbors = [0] * size
    for i in range(size):
        for j in range(i + 1, size):
            if rng.random() < density:
                neighbors[i] |= 1 << j
                neighbors[j] |= 1 << i
    return KneserGraph(tuple(Face(1 << i) for i in range(size)), tuple(neighbors))


def chromatic_oracle(graph: KneserGraph) -> int:
    """Exact chromatic number by dynamic programming over vertex subsets."""
    size = len(graph)
    independent = [True] * (1 << size)
    for mask in range(1, 1 << size):
        low = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << low)
        independent[mask] = independent[rest] and not graph.neighbors[low] & rest
    best = [0] + [size + 1] * ((1 << size) - 1)
    for mask in range(1, 1 << size):
        low = mask & -mask
        sub = mask
        while sub:
            if sub & low and independent[sub]:
                best[mask] = min(best[mask], best[mask & ~sub] + 1)
            sub = (sub - 1) & mask
    return best[(1 << size) - 1]


@pytest.fixture
def k33():
    return three_point_join(1)


def test_kneser_graph_of_k33(k33):
    graph = kneser_graph(k33)
    assert len(graph) == 6
    assert graph.num_edges == 9
    assert all(graph.degree(i) == 3 for i in range(6))
    assert graph.is_edge(0, 3) and not graph.is_edge(0, 1)


def test_kneser_graph_networkx_export(k33):
    nx_graph = kneser_graph(k33).to_networkx()
    assert nx_graph.number_of_nodes() == 6
    assert nx_graph.number_of_edges() == 9
    assert nx_graph.nodes[0]["face"] == (0, 1)


@pytest.mark.parametrize(
    "complex_,chi",
    [
        (simplex_boundary(3), 1),
        (three_point_join(1), 2),
        (rp2_6(), 1),
        (cp2_9(), 1),
        (simplex(4), 0),
        (three_point_join(2), 3),
    ],
)
def test_chromatic_numbers(complex_, chi):
    graph = kneser_graph(complex_)
    cert = chromatic_number(graph)
    assert cert.exact
    assert cert.num_colors == chi
    assert verify_coloring(graph, cert)


def test_petersen_graph():
    graph = kneser_graph(discrete(5))
    assert len(graph) == 10
    assert graph.num_edges == 15
    cert = chromatic_number(graph)
    assert cert.exact and cert.num_colors == 3
    assert verify_coloring(graph, cert)


def test_budget_exhaustion_reports_interval():
    graph = kneser_graph(discrete(5))
    cert = ChromaticSolver(node_budget=1).solve(graph)
    assert not cert.exact
    assert cert.lower == 2
    assert cert.upper == 3
    assert verify_coloring(graph, cert)
    assert cert.to_dict()["chromatic_number"] is None


def test_solver_matches_oracle():
    rng = random.Random(13)
    for _ in range(150):
        graph = random_graph(rng, rng.randint(1, 10), rng.choice([0.2, 0.5, 0.8]))
        cert = chromatic_number(graph)
        assert cert.exact
        assert verify_coloring(graph, cert)
        assert cert.num_colors == chromatic_oracle(graph)


def test_solver_is_deterministic():
    graph = random_graph(random.Random(4), 10, 0.5)
    assert chromatic_number(graph) == chromatic_number(graph)


def facet_antichains(n: int):
    """Every nonempty antichain of nonempty subsets of [n], i.e. every nonvoid complex without {∅}."""
    masks = range(1, 1 << n)

    def extend(start: int, chosen: tuple[int, ...]):
        if chosen:
            yield chosen
        for i in range(start, len(masks)):
            mask = masks[i]
            if all(mask & ~c and c & ~mask for c in chosen):
                yield from extend(i + 1, chosen + (mask,))

    yield from extend(0, ())


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_minimal_and_all_nonfaces_agree(n):
    for facets in facet_antichains(n):
        complex_ = SimplicialComplex(n, tuple(Face(m) for m in facets))
        minimal = chromatic_number(kneser_graph(complex_)).num_colors
        full = chromatic_number(kneser_graph(complex_, minimal=False)).num_colors
        assert minimal == full, facets


def test_bipartition_property_means_no_edges():
    rng = random.Random(19)
    seen = 0
    for _ in range(300):
        complex_ = random_complex(rng, rng.randint(1, 6))
        if complex_.bipartition_property():
            seen += 1
            assert kneser_graph(complex_).num_edges == 0
    assert kneser_graph(rp2_6()).num_edges == 0
    assert seen > 0


def test_certificate_validation():
    with pytest.raises(CertificateError):
        ColoringCertificate(2, (0, 2), lower=2)
    with pytest.raises(CertificateError):
        ColoringCertificate(3, (0, 1, 2), lower=2)
    with pytest.raises(CertificateError):
        ColoringCertificate(0, (0,), lower=0)


def test_verify_coloring_rejects_conflicts(k33):
    graph = kneser_graph(k33)
    assert not verify_coloring(graph, ColoringCertificate(1, (0,) * 6, lower=1))
    assert not verify_coloring(graph, ColoringCertificate(1, (0,) * 5, lower=1))


def test_coloring_to_dict_lists_faces(k33):
    graph = kneser_graph(k33)
    data = chromatic_number(graph).to_dict(graph)
    assert data["chromatic_number"] == 2
    assert data["coloring"][0] == {"face": [0, 1], "color": 0}


def test_sarkaria_decomposition(k33):
    graph = kneser_graph(k33)
    cert = chromatic_number(graph)
    decomposition = sarkaria_decomposition(k33, cert)
    assert len(decomposition.subcomplexes) == 2
    assert verify_decomposition(k33, decomposition)
    assert [part["color"] for part in decomposition.to_dict()] == [0, 1]


def test_sarkaria_decomposition_of_sphere():
    sphere = simplex_boundary(3)
    decomposition = sarkaria_decomposition(sphere, chromatic_number(kneser_graph(sphere)))
    assert len(decomposition.subcomplexes) == 1
    assert verify_decomposition(sphere, decomposition)


def test_sarkaria_rejects_improper_coloring(k33):
    with pytest.raises(CertificateError):
        sarkaria_decomposition(k33, ColoringCertificate(1, (0,) * 6, lower=1))


def test_verify_decomposition_rejects_bad_parts(k33):
    full = SimplicialComplex.simplex_skeleton(6, 5)
    assert not verify_decomposition(k33, SarkariaDecomposition(6, (full,)))
    assert not verify_decomposition(k33, SarkariaDecomposition(6, (k33,)))
    assert not verify_decomposition(k33, SarkariaDecomposition(6, (simplex_boundary(3),)))


if __name__ == "__main__":
    pytest.main([__file__])
