"""Named complexes: simplices, skeleta, joins and the bundled triangulations."""

import re
from collections import Counter
from functools import lru_cache
from importlib import resources
from pathlib import Path

from pi_coindex.models import ComplexError, TriangulationError
from pi_coindex.simplicial import Face, SimplicialComplex, discrete, join_power
from pi_coindex.utils.bits import iter_submasks, popcount
from pi_coindex.utils.logging_utils import get_logger

log = get_logger(__name__)

BUNDLED = ("rp2_6", "cp2_9")

_GENERATOR = re.compile(r"^(?P<kind>[a-z0-9]+):(?P<args>\d+(?:,\d+)*)$")


def simplex(k: int) -> SimplicialComplex:
    """The full k-simplex on k+1 vertices; embeds in R^k."""
    return _named(SimplicialComplex.simplex_skeleton(k + 1, k), f"Δ_{k}", max(k, 1))


def simplex_boundary(k: int) -> SimplicialComplex:
    """Boundary of the k-simplex, a (k-1)-sphere; embeds in R^k."""
    if k < 1:
        raise ComplexError(f"Boundary of a simplex needs k >= 1, got {k}")
    return _named(SimplicialComplex.simplex_skeleton(k + 1, k - 1), f"∂Δ_{k}", k)


def skeleton(nv: int, k: int) -> SimplicialComplex:
    return _named(SimplicialComplex.simplex_skeleton(nv, k), f"Δ_{nv - 1}^({k})", 2 * k + 1)


def van_kampen_flores(k: int) -> SimplicialComplex:
    """The k-skeleton of the (2k+2)-simplex."""
    if k < 0:
        raise ComplexError(f"k must be nonnegative, got {k}")
    return skeleton(2 * k + 3, k)


def three_point_join(k: int) -> SimplicialComplex:
    """The (k+1)-fold join of three points."""
    if k < 0:
        raise ComplexError(f"k must be nonnegative, got {k}")
    return _named(join_power(discrete(3), k + 1), f"[3]^*{k + 1}", 2 * k + 1)


def _named(complex_: SimplicialComplex, name: str, embed_dim: int) -> SimplicialComplex:
    return SimplicialComplex(complex_.n, complex_.facets, name=name, embed_dim=embed_dim)


def pseudomanifold_problems(complex_: SimplicialComplex) -> list[str]:
    """Pure, and every ridge lies in exactly two facets."""
    problems = []
    if complex_.is_void or not complex_.is_pure():
        return [f"{complex_.label} is not pure"]
    ridges: Counter[int] = Counter()
    for facet in complex_.facets:
        for v in facet.vertices:
            ridges[facet.mask & ~(1 << v)] += 1
    for ridge, count in sorted(ridges.items()):
        if count != 2:
            problems.append(f"ridge {Face(ridge)} lies in {count} facets")
    return problems


def surface_problems(complex_: SimplicialComplex) -> list[str]:
    """A closed surface: pseudomanifold of dimension 2 with every vertex link one cycle."""
    if complex_.dim != 2:
        return [f"{complex_.label} has dimension {complex_.dim}, not 2"]
    problems = pseudomanifold_problems(complex_)
    for v in range(complex_.n):
        link = complex_.link(Face(1 << v))
        edges = [f.mask for f in link.facets if popcount(f.mask) == 2]
        if not edges or len(edges) != len(link.facets):
            problems.append(f"link of vertex {v} is not a graph of edges")
            continue
        if not _is_single_cycle(edges):
            problems.append(f"link of vertex {v} is not a single cycle")
    return problems


def _is_single_cycle(edges: list[int]) -> bool:
    degree: Counter[int] = Counter()
    for e in edges:
        for sub in iter_submasks(e):
            if popcount(sub) == 1:
                degree[sub] += 1
    if any(d != 2 for d in degree.values()):
        return False
    # every vertex has degree two, so it is one cycle iff it is connected
    reached = edges[0]
    grew = True
    while grew:
        grew = False
        for e in edges:
            if e & reached and e & ~reached:
                reached |= e
                grew = True
    return popcount(reached) == len(degree)


def _load_bundled(name: str) -> SimplicialComplex:
    resource = resources.files("pi_coindex") / "data" / f"{name}.json"
    return SimplicialComplex.loads(resource.read_text(), path=f"pi_coindex/data/{name}.json")


@lru_cache(maxsize=None)
def rp2_6() -> SimplicialComplex:
    """Six-vertex real projective plane, validated on every load."""
    rp2 = _load_bundled("rp2_6")
    problems = surface_problems(rp2)
    if rp2.euler_characteristic() != 1:
        problems.append(f"Euler characteristic {rp2.euler_characteristic()} != 1")
    if not rp2.bipartition_property():
        problems.append("bipartition property fails")
    _raise_on(rp2, problems)
    return rp2


@lru_cache(maxsize=None)
def cp2_9() -> SimplicialComplex:
    """Nine-vertex complex projective plane, validated on every load."""
    cp2 = _load_bundled("cp2_9")
    problems = pseudomanifold_problems(cp2)
    if cp2.dim != 4 or len(cp2.facets) != 36:
        problems.append(f"expected 36 four-dimensional facets, got {len(cp2.facets)} of dimension {cp2.dim}")
    if cp2.euler_characteristic() != 3:
        problems.append(f"Euler characteristic {cp2.euler_characteristic()} != 3")
    if not cp2.bipartition_property():
        problems.append("bipartition property fails")
    _raise_on(cp2, problems)
    return cp2


def _raise_on(complex_: SimplicialComplex, problems: list[str]) -> None:
    if problems:
        log.error(f"Bundled triangulation {complex_.label} failed validation: {problems}")
        raise TriangulationError(f"{complex_.label}: " + "; ".join(problems))
    log.debug(f"Bundled triangulation {complex_.label} validated")


def resolve(spec: str) -> SimplicialComplex:
    """Turn a command-line complex argument into a complex.

    Accepts an existing file path, a bundled name (``rp2_6``, ``cp2_9``) or a
    generator such as ``simplex:3``, ``boundary:3``, ``skeleton:5,1``,
    ``vkf:2``, ``join3:2`` or ``discrete:3``.
    """
    path = Path(spec).expanduser()
    if path.is_file():
        return SimplicialComplex.load(path)
    if spec == "rp2_6":
        return rp2_6()
    if spec == "cp2_9":
        return cp2_9()
    match = _GENERATOR.match(spec)
    if match is None:
        raise ComplexError(f"'{spec}' is neither a file, a bundled complex {BUNDLED}, nor a generator spec")
    args = [int(a) for a in match["args"].split(",")]
    generators = {
        "simplex": (simplex, 1),
        "boundary": (simplex_boundary, 1),
        "skeleton": (skeleton, 2),
        "vkf": (van_kampen_flores, 1),
        "join3": (three_point_join, 1),
        "discrete": (lambda n: discrete(n), 1),
    }
    if match["kind"] not in generators:
        raise ComplexError(f"Unknown generator '{match['kind']}', expected one of {sorted(generators)}")
    func, arity = generators[match["kind"]]
    if len(args) != arity:
        raise ComplexError(f"Generator '{match['kind']}' takes {arity} argument(s), got {len(args)}")
    return func(*args)
