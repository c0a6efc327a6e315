from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Iterator, Optional, Sequence

import networkx as nx

from pi_coindex.models import CertificateError
from pi_coindex.simplicial import Face, SimplicialComplex
from pi_coindex.utils.bits import popcount, vertices_of
from pi_coindex.utils.logging_utils import get_logger
from pi_coindex.utils.settings import get_settings

log = get_logger(__name__)


@dataclass(frozen=True)
class KneserGraph:
    """Graph on faces with an edge between every two disjoint ones.

    ``neighbors[i]`` is a bit mask over vertex indices.
    """

    vertices: tuple[Face, ...]
    neighbors: tuple[int, ...]

    @staticmethod
    def from_faces(faces: Sequence[Face]) -> "KneserGraph":
        faces = tuple(faces)
        neighbors = [0] * len(faces)
        for i, u in enumerate(faces):
            for j in range(i + 1, len(faces)):
                if u.isdisjoint(faces[j]):
                    neighbors[i] |= 1 << j
                    neighbors[j] |= 1 << i
        return KneserGraph(faces, tuple(neighbors))

    def __len__(self) -> int:
        return len(self.vertices)

    def is_edge(self, i: int, j: int) -> bool:
        return bool(self.neighbors[i] >> j & 1)

    def degree(self, i: int) -> int:
        return popcount(self.neighbors[i])

    def adjacent(self, i: int) -> tuple[int, ...]:
        return vertices_of(self.neighbors[i])

    def edges(self) -> Iterator[tuple[int, int]]:
        for i, mask in enumerate(self.neighbors):
            for j in vertices_of(mask >> (i + 1)):
                yield i, i + 1 + j

    @property
    def num_edges(self) -> int:
        return sum(popcount(m) for m in self.neighbors) // 2

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for i, face in enumerate(self.vertices):
            graph.add_node(i, face=face.vertices)
        graph.add_edges_from(self.edges())
        return graph


def kneser_graph(complex_: SimplicialComplex, minimal: bool = True) -> KneserGraph:
    """Kneser graph of the minimal nonfaces, or of all nonfaces when ``minimal`` is False."""
    faces = complex_.minimal_nonfaces() if minimal else complex_.all_nonfaces()
    return KneserGraph.from_faces(faces)


@dataclass(frozen=True)
class ColoringCertificate:
    """A proper coloring with ``num_colors`` colors.

    When ``exact`` is False the search ran out of budget and the chromatic
    number is only known to lie in ``[lower, num_colors]``.
    """

    num_colors: int
    assignment: tuple[int, ...]
    lower: int
    exact: bool = True
    nodes: int = 0

    def __post_init__(self):
        if (self.num_colors == 0) != (len(self.assignment) == 0):
            raise CertificateError("A coloring uses 0 colors iff the graph has no vertices")
        if any(not 0 <= c < self.num_colors for c in self.assignment):
            raise CertificateError(f"Color outside [0, {self.num_colors}) in {self.assignment}")
        if self.exact and self.lower != self.num_colors:
            raise CertificateError(f"Exact coloring with lower {self.lower} != {self.num_colors}")

    @property
    def upper(self) -> int:
        return self.num_colors

    def classes(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.num_colors)]
        for vertex, color in enumerate(self.assignment):
            groups[color].append(vertex)
        return groups

    def to_dict(self, graph: Optional[KneserGraph] = None) -> dict[str, Any]:
        data: dict[str, Any] = {
            "chromatic_number": self.num_colors if self.exact else None,
            "lower": self.lower,
            "upper": self.num_colors,
            "exact": self.exact,
            "nodes": self.nodes,
        }
        if graph is not None:
            data["coloring"] = [
                {"face": list(face.vertices), "color": color}
                for face, color in zip(graph.vertices, self.assignment)
            ]
        else:
            data["assignment"] = list(self.assignment)
        return data


def verify_coloring(graph: KneserGraph, cert: ColoringCertificate) -> bool:
    if len(cert.assignment) != len(graph):
        return False
    return all(cert.assignment[i] != cert.assignment[j] for i, j in graph.edges())


@dataclass
class ChromaticSolver:
    """Exact chromatic number by DSATUR branch and bound.

    Ties go to the lowest vertex index and colors are tried lowest first, so
    the witness is the same on every run.
    """

    node_budget: Optional[int] = None
    nodes: int = field(default=0, init=False)

    def solve(self, graph: KneserGraph) -> ColoringCertificate:
        self.nodes = 0
        size = len(graph)
        if size == 0:
            return ColoringCertificate(0, (), lower=0)
        if graph.num_edges == 0:
            return ColoringCertificate(1, (0,) * size, lower=1)

        upper, best = self._greedy(graph)
        clique = self._max_clique(graph)
        lower = len(clique)
        log.debug(f"Chromatic search on {size} vertices: clique bound {lower}, greedy bound {upper}")
        if lower == upper:
            return ColoringCertificate(upper, tuple(best), lower=lower)

        budget = self.node_budget if self.node_budget is not None else get_settings().node_budget
        degrees = [graph.degree(v) for v in range(size)]
        colors = [-1] * size
        saturation: list[set[int]] = [set() for _ in range(size)]
        exhausted = False

        def assign(v: int, c: int) -> list[int]:
            colors[v] = c
            touched = []
            for u in graph.adjacent(v):
                if colors[u] == -1 and c not in saturation[u]:
                    saturation[u].add(c)
                    touched.append(u)
            return touched

        def backtrack(used: int) -> None:
            nonlocal upper, best, exhausted
            if exhausted or upper == lower or used >= upper:
                return
            if self.nodes >= budget:
                exhausted = True
                return
            self.nodes += 1
            uncolored = [v for v in range(size) if colors[v] == -1]
            if not uncolored:
                upper, best = used, colors[:]
                log.debug(f"Improved coloring to {used} colors after {self.nodes} nodes")
                return
            v = max(uncolored, key=lambda u: (len(saturation[u]), degrees[u], -u))
            log.trace(f"node {self.nodes}: branching on vertex {v} with {used} colors in use")
            for c in range(min(used + 1, upper - 1)):
                if c + 1 >= upper:
                    break
                if c in saturation[v]:
                    continue
                touched = assign(v, c)
                backtrack(max(used, c + 1))
                colors[v] = -1
                for u in touched:
                    saturation[u].discard(c)

        # any optimal coloring can be permuted to color the clique 0, 1, 2, ...
        for c, v in enumerate(clique):
            assign(v, c)
        backtrack(lower)

        if exhausted:
            log.warning(f"Node budget {budget} exhausted; chromatic number lies in [{lower}, {upper}]")
            return ColoringCertificate(upper, tuple(best), lower=lower, exact=False, nodes=self.nodes)
        return ColoringCertificate(upper, tuple(best), lower=upper, nodes=self.nodes)

    @staticmethod
    def _greedy(graph: KneserGraph) -> tuple[int, list[int]]:
        size = len(graph)
        colors = [-1] * size
        saturation: list[set[int]] = [set() for _ in range(size)]
        degrees = [graph.degree(v) for v in range(size)]
        for _ in range(size):
            v = max(
                (u for u in range(size) if colors[u] == -1),
                key=lambda u: (len(saturation[u]), degrees[u], -u),
            )
            c = 0
            while c in saturation[v]:
                c += 1
            colors[v] = c
            for u in graph.adjacent(v):
                saturation[u].add(c)
        return max(colors) + 1, colors

    @staticmethod
    def _max_clique(graph: KneserGraph) -> list[int]:
        best: list[int] = []
        for clique in nx.find_cliques(graph.to_networkx()):
            if len(clique) > len(best) or (len(clique) == len(best) and sorted(clique) < best):
                best = sorted(clique)
        return best


def chromatic_number(graph: KneserGraph, node_budget: Optional[int] = None) -> ColoringCertificate:
    return ChromaticSolver(node_budget=node_budget).solve(graph)


@dataclass(frozen=True)
class SarkariaDecomposition:
    """Subcomplexes, one per color, whose intersection is the original complex."""

    n: int
    subcomplexes: tuple[SimplicialComplex, ...]

    def to_dict(self) -> list[dict[str, Any]]:
        return [
            {"color": j, "facets": [list(f.vertices) for f in sub.facets]}
            for j, sub in enumerate(self.subcomplexes)
        ]


def sarkaria_decomposition(complex_: SimplicialComplex, cert: ColoringCertificate) -> SarkariaDecomposition:
    """Split the complex by the color classes of its minimal nonfaces.

    Subcomplex j is the largest complex whose minimal nonfaces are the
    nonfaces colored j.

    Raises:
        CertificateError: If ``cert`` is not a proper coloring of the Kneser graph.
    """
    graph = kneser_graph(complex_)
    if not verify_coloring(graph, cert):
        raise CertificateError(f"Coloring is not a proper coloring of the Kneser graph of {complex_.label}")
    subcomplexes = tuple(
        SimplicialComplex.from_minimal_nonfaces(
            complex_.n,
            [graph.vertices[i] for i in members],
            name=f"{complex_.label}[color {j}]",
        )
        for j, members in enumerate(cert.classes())
    )
    return SarkariaDecomposition(complex_.n, subcomplexes)


def verify_decomposition(complex_: SimplicialComplex, decomposition: SarkariaDecomposition) -> bool:
    """The intersection is the complex, and each part's minimal nonfaces pairwise intersect."""
    if any(sub.n != complex_.n for sub in decomposition.subcomplexes):
        return False
    full = SimplicialComplex.simplex_skeleton(complex_.n, complex_.n - 1) if complex_.n else complex_
    meet = reduce(lambda a, b: a.intersect(b), decomposition.subcomplexes, full)
    if not meet.same_faces(complex_):
        log.debug(f"Decomposition of {complex_.label} intersects to a different complex")
        return False
    for j, sub in enumerate(decomposition.subcomplexes):
        nonfaces = sub.minimal_nonfaces()
        for a in range(len(nonfaces)):
            for b in range(a + 1, len(nonfaces)):
                if nonfaces[a].isdisjoint(nonfaces[b]):
                    log.debug(f"Part {j} has disjoint minimal nonfaces {nonfaces[a]} and {nonfaces[b]}")
                    return False
    return True
