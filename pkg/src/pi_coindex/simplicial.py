import json
import re
from dataclasses import dataclass
from functools import cached_property
from math import comb
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from pi_coindex.models import ComplexError, ComplexParseError, PathType
from pi_coindex.utils.bits import (
    WORD_BITS,
    canonical_key,
    iter_submasks,
    mask_of,
    minimal_transversals,
    popcount,
    reduce_to_maximal,
    top_vertex,
    vertices_of,
)
from pi_coindex.utils.logging_utils import get_logger

log = get_logger(__name__)

BIPARTITION_LIMIT = 24
ALL_NONFACES_LIMIT = 20


@dataclass(frozen=True)
class Face:
    """A vertex set stored as a bit mask over a ground set of at most 64 vertices."""

    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask.bit_length() > WORD_BITS:
            raise ComplexError(f"Face mask {self.mask} does not fit a {WORD_BITS}-vertex ground set")

    @staticmethod
    def from_vertices(vertices: Iterable[int]) -> "Face":
        vertices = list(vertices)
        if len(set(vertices)) != len(vertices):
            raise ComplexError(f"Duplicate vertex in face {vertices}")
        if any(v < 0 or v >= WORD_BITS for v in vertices):
            raise ComplexError(f"Vertex out of range in face {vertices}")
        return Face(mask_of(vertices))

    @property
    def vertices(self) -> tuple[int, ...]:
        return vertices_of(self.mask)

    @property
    def dim(self) -> int:
        return popcount(self.mask) - 1

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return canonical_key(self.mask)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(self.vertices)

    def __contains__(self, vertex: object) -> bool:
        return isinstance(vertex, int) and vertex >= 0 and bool(self.mask >> vertex & 1)

    def issubset(self, other: "Face") -> bool:
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: "Face") -> bool:
        return self.mask & other.mask == 0

    def __str__(self) -> str:
        return "{" + ",".join(str(v) for v in self.vertices) + "}"


@dataclass(frozen=True)
class FVector:
    """Entry i counts the i-dimensional faces; the empty face is not counted."""

    counts: tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        return self.counts[i]

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** i * f for i, f in enumerate(self.counts))


class ComplexFile(BaseModel):
    """On-disk form of a complex: 0-based facets over ``n`` vertices."""

    model_config = ConfigDict(extra="forbid")

    n: int
    facets: list[list[int]]
    name: Optional[str] = None
    embed_dim: Optional[int] = None
    void: bool = False

    @field_validator("n")
    @classmethod
    def _check_n(cls, n: int) -> int:
        if not 0 <= n <= WORD_BITS:
            raise ValueError(f"n must lie in [0, {WORD_BITS}], got {n}")
        return n

    @field_validator("embed_dim")
    @classmethod
    def _check_embed_dim(cls, embed_dim: Optional[int]) -> Optional[int]:
        if embed_dim is not None and embed_dim < 1:
            raise ValueError(f"embed_dim must be positive, got {embed_dim}")
        return embed_dim

    @model_validator(mode="after")
    def _check_facets(self) -> "ComplexFile":
        for i, facet in enumerate(self.facets):
            for j, v in enumerate(facet):
                if not 0 <= v < self.n:
                    raise ValueError(f"facets[{i}][{j}]: vertex {v} not in [0, {self.n})")
            if len(set(facet)) != len(facet):
                raise ValueError(f"facets[{i}]: duplicate vertex in {facet}")
        if not self.facets and not self.void:
            raise ValueError("facets: empty facet list on a complex not marked void")
        return self


@dataclass(frozen=True)
class SimplicialComplex:
    """A simplicial complex on the ground set {0, ..., n-1}, stored by its facets.

    A face is any subset of a facet. The void complex has no facets at all;
    the complex {∅} has the single facet ``Face(0)``.
    """

    n: int
    facets: tuple[Face, ...]
    name: Optional[str] = None
    embed_dim: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.n <= WORD_BITS:
            raise ComplexError(f"Ground set size {self.n} is outside [0, {WORD_BITS}]")
        limit = 1 << self.n
        for facet in self.facets:
            if facet.mask >= limit:
                raise ComplexError(f"Facet {facet} uses a vertex >= n={self.n}")
        masks = reduce_to_maximal(f.mask for f in self.facets)
        object.__setattr__(self, "facets", tuple(Face(m) for m in masks))

    @staticmethod
    def from_facets(
        n: int,
        facets: Iterable[Iterable[int]],
        name: Optional[str] = None,
        embed_dim: Optional[int] = None,
        void: bool = False,
    ) -> "SimplicialComplex":
        """Build a complex from vertex lists.

        Args:
            n: Ground set size.
            facets: Vertex lists; duplicates and non-maximal sets are dropped.
            name: Optional label.
            embed_dim: Known Euclidean embedding dimension, if any.
            void: Must be set to accept an empty facet list.

        Raises:
            ComplexError: On out-of-range or repeated vertices, or an empty
                facet list without ``void``.
        """
        faces = []
        for facet in facets:
            facet = list(facet)
            for v in facet:
                if not 0 <= v < n:
                    raise ComplexError(f"Vertex {v} of facet {facet} is not in [0, {n})")
            faces.append(Face.from_vertices(facet))
        if not faces and not void:
            raise ComplexError("Empty facet list; pass void=True for the void complex")
        return SimplicialComplex(n, tuple(faces), name=name, embed_dim=embed_dim)

    @staticmethod
    def simplex_skeleton(nv: int, k: int, name: Optional[str] = None) -> "SimplicialComplex":
        """The k-skeleton of the simplex on ``nv`` vertices (all sets of size <= k+1)."""
        if not 1 <= nv <= WORD_BITS:
            raise ComplexError(f"Simplex needs 1..{WORD_BITS} vertices, got {nv}")
        if not 0 <= k <= nv - 1:
            raise ComplexError(f"Skeleton dimension {k} not in [0, {nv - 1}]")
        if k == nv - 1:
            facets: Iterable[int] = [(1 << nv) - 1]
        else:
            facets = _masks_of_size(nv, k + 1)
        return SimplicialComplex(nv, tuple(Face(m) for m in facets), name=name)

    @staticmethod
    def from_minimal_nonfaces(
        n: int, nonfaces: Iterable[Face], name: Optional[str] = None
    ) -> "SimplicialComplex":
        """The largest complex on [n] containing none of ``nonfaces``.

        Its facets are the complements of the minimal transversals of the
        nonfaces. When ``nonfaces`` is an antichain they are exactly the
        minimal nonfaces of the result.
        """
        full = (1 << n) - 1
        masks = [f.mask for f in nonfaces]
        if any(m & ~full for m in masks):
            raise ComplexError(f"Nonface uses a vertex >= n={n}")
        return SimplicialComplex(
            n, tuple(Face(full & ~t) for t in minimal_transversals(masks)), name=name
        )

    @property
    def is_void(self) -> bool:
        return not self.facets

    @property
    def dim(self) -> int:
        return max((len(f) for f in self.facets), default=0) - 1

    @property
    def label(self) -> str:
        return self.name or f"complex[n={self.n}, facets={len(self.facets)}]"

    def is_face(self, face: Face | int | Iterable[int]) -> bool:
        """``face`` may be a Face, a bit mask, or an iterable of vertices."""
        if isinstance(face, Face):
            mask = face.mask
        elif isinstance(face, int):
            mask = face
        else:
            mask = mask_of(face)
        return any(mask & ~f.mask == 0 for f in self.facets)

    def is_pure(self) -> bool:
        return len({len(f) for f in self.facets}) <= 1

    @cached_property
    def _face_masks(self) -> frozenset[int]:
        faces: set[int] = set()
        for facet in self.facets:
            faces.update(iter_submasks(facet.mask))
        return frozenset(faces)

    def faces(self, include_empty: bool = False) -> tuple[Face, ...]:
        masks = (m for m in self._face_masks if include_empty or m)
        return tuple(Face(m) for m in sorted(masks, key=canonical_key))

    @cached_property
    def _minimal_nonface_masks(self) -> tuple[int, ...]:
        if self.is_void:
            return (0,)
        found: list[int] = []
        level = [0]
        for size in range(1, self.n + 1):
            previous = set(level)
            level = []
            for base in sorted(previous):
                for v in range(top_vertex(base) + 1, self.n):
                    candidate = base | (1 << v)
                    if any(candidate & ~(1 << u) not in previous for u in vertices_of(base)):
                        continue
                    if self.is_face(candidate):
                        level.append(candidate)
                    else:
                        found.append(candidate)
            log.trace(f"{self.label}: size {size}, {len(level)} faces, {len(found)} minimal nonfaces so far")
            if not level:
                break
        return tuple(sorted(found, key=canonical_key))

    def minimal_nonfaces(self) -> list[Face]:
        """Nonfaces all of whose proper subsets are faces, in canonical order."""
        return [Face(m) for m in self._minimal_nonface_masks]

    def all_nonfaces(self) -> list[Face]:
        if self.n > ALL_NONFACES_LIMIT:
            raise ComplexError(f"Refusing to enumerate 2^{self.n} subsets (limit n <= {ALL_NONFACES_LIMIT})")
        nonfaces = [m for m in range(1 << self.n) if m not in self._face_masks]
        return [Face(m) for m in sorted(nonfaces, key=canonical_key)]

    def f_vector(self) -> FVector:
        if self.is_void:
            return FVector(())
        if len(self.facets) == 1:
            size = len(self.facets[0])
            return FVector(tuple(comb(size, i + 1) for i in range(size)))
        counts = [0] * (self.dim + 1)
        for m in self._face_masks:
            if m:
                counts[popcount(m) - 1] += 1
        return FVector(tuple(counts))

    def euler_characteristic(self) -> int:
        return self.f_vector().euler_characteristic

    def bipartition_property(self) -> bool:
        """True iff for every split of the vertex set into two nonempty parts exactly one part is a face."""
        if self.n > BIPARTITION_LIMIT:
            raise ComplexError(f"Bipartition check is limited to {BIPARTITION_LIMIT} vertices, got {self.n}")
        full = (1 << self.n) - 1
        # subsets containing vertex 0 enumerate each unordered split once
        for rest in range(1 << (self.n - 1)) if self.n else ():
            part = (rest << 1) | 1
            if part == full:
                continue
            if self.is_face(part) == self.is_face(full & ~part):
                return False
        return True

    def link(self, face: Face) -> "SimplicialComplex":
        masks = [f.mask & ~face.mask for f in self.facets if face.mask & ~f.mask == 0]
        return SimplicialComplex(self.n, tuple(Face(m) for m in masks))

    def join(self, other: "SimplicialComplex") -> "SimplicialComplex":
        """Join with ``other``; its vertices are shifted up by ``self.n``."""
        n = self.n + other.n
        if n > WORD_BITS:
            raise ComplexError(f"Join needs {n} vertices, more than {WORD_BITS}")
        facets = tuple(Face(f.mask | (g.mask << self.n)) for f in self.facets for g in other.facets)
        name = f"{self.name}*{other.name}" if self.name and other.name else None
        return SimplicialComplex(n, facets, name=name)

    def deleted_join(self) -> "SimplicialComplex":
        """Faces σ×{1} ∪ τ×{2} with σ, τ disjoint faces; copy 2 is shifted by n."""
        if 2 * self.n > WORD_BITS:
            raise ComplexError(f"Deleted join needs {2 * self.n} vertices, more than {WORD_BITS}")
        masks: set[int] = set()
        for f in self.facets:
            for g in self.facets:
                common = f.mask & g.mask
                for split in iter_submasks(common):
                    sigma = (f.mask & ~g.mask) | split
                    tau = (g.mask & ~f.mask) | (common & ~split)
                    masks.add(sigma | (tau << self.n))
        name = f"{self.name}^*2_Δ" if self.name else None
        return SimplicialComplex(2 * self.n, tuple(Face(m) for m in masks), name=name)

    def intersect(self, other: "SimplicialComplex") -> "SimplicialComplex":
        if self.n != other.n:
            raise ComplexError(f"Cannot intersect complexes on {self.n} and {other.n} vertices")
        masks = {f.mask & g.mask for f in self.facets for g in other.facets}
        return SimplicialComplex(self.n, tuple(Face(m) for m in masks))

    def same_faces(self, other: "SimplicialComplex") -> bool:
        return self.n == other.n and self.facets == other.facets

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"n": self.n, "facets": [list(f.vertices) for f in self.facets]}
        if self.name is not None:
            data["name"] = self.name
        if self.embed_dim is not None:
            data["embed_dim"] = self.embed_dim
        if self.is_void:
            data["void"] = True
        return data

    @staticmethod
    def from_dict(
        data: dict[str, Any], path: Optional[PathType] = None, text: Optional[str] = None
    ) -> "SimplicialComplex":
        """Validate ``data``; with the source ``text`` errors also carry a line number."""
        try:
            parsed = ComplexFile.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(part) for part in first["loc"]) or None
            line = _error_line(text, field, first["msg"]) if text is not None else None
            log.error(f"Invalid complex data in {path} (line {line}): {first['msg']}")
            raise ComplexParseError(first["msg"], path=path, line=line, field=field) from e
        return SimplicialComplex.from_facets(
            parsed.n, parsed.facets, name=parsed.name, embed_dim=parsed.embed_dim, void=parsed.void
        )

    @staticmethod
    def loads(text: str, path: Optional[PathType] = None) -> "SimplicialComplex":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ComplexParseError(e.msg, path=path, line=e.lineno) from e
        if not isinstance(data, dict):
            raise ComplexParseError("top level must be an object", path=path, line=1)
        return SimplicialComplex.from_dict(data, path=path, text=text)

    @staticmethod
    def load(path: PathType) -> "SimplicialComplex":
        path = Path(path).expanduser()
        log.debug(f"Loading complex from {path}")
        return SimplicialComplex.loads(path.read_text(), path=path)

    def store(self, path: PathType) -> Path:
        path = Path(path).expanduser()
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


def _masks_of_size(n: int, size: int) -> Iterator[int]:
    """All masks over n bits with exactly ``size`` bits set (Gosper's hack)."""
    if size == 0:
        yield 0
        return
    if size > n:
        return
    mask = (1 << size) - 1
    limit = 1 << n
    while mask < limit:
        yield mask
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple


def discrete(n: int, name: Optional[str] = None) -> SimplicialComplex:
    """``n`` isolated points."""
    return SimplicialComplex.from_facets(n, [[v] for v in range(n)], name=name or f"[{n}]", void=n == 0)


def join_power(base: SimplicialComplex, k: int) -> SimplicialComplex:
    if k < 1:
        raise ComplexError(f"Join power needs k >= 1, got {k}")
    result = base
    for _ in range(k - 1):
        result = result.join(base)
    if base.name:
        result = SimplicialComplex(result.n, result.facets, name=f"{base.name}^*{k}")
    return result



_FACET_REF = re.compile(r"facets\[(\d+)\]")


def _error_line(text: str, field: Optional[str], message: str) -> Optional[int]:
    """Line of the entry a validation error points at, if it can be found in ``text``."""
    parts = field.split(".") if field else []
    if parts and parts[0] == "facets" and len(parts) > 1 and parts[1].isdigit():
        return _key_line(text, "facets", int(parts[1]))
    match = _FACET_REF.search(message)
    if match:
        return _key_line(text, "facets", int(match.group(1)))
    if parts:
        return _key_line(text, parts[0])
    return _key_line(text, "facets") if "facets" in message else None


def _key_line(text: str, key: str, index: Optional[int] = None) -> Optional[int]:
    """Line of ``"key"`` in a JSON text, or of the index-th list inside its value."""
    start = text.find(f'"{key}"')
    if start < 0:
        return None
    if index is None:
        return text.count("\n", 0, start) + 1
    depth, seen = 0, -1
    for pos in range(start + len(key) + 2, len(text)):
        char = text[pos]
        if char == "[":
            depth += 1
            if depth == 2:
                seen += 1
                if seen == index:
                    return text.count("\n", 0, pos) + 1
        elif char == "]":
            depth -= 1
            if depth == 0:
                break
    return None
