import re
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Any, Iterable, Iterator, Optional, Sequence

import numpy as np

from pi_coindex.models import TensorError
from pi_coindex.utils.linalg import full_column_rank_mod, rational_rank
from pi_coindex.utils.logging_utils import get_logger

log = get_logger(__name__)

Entry = tuple[int, int, int, Fraction]
Rational = Fraction | int

_NAME = re.compile(r"^\s*(?P<kind>[a-z0-9_]+)\s*(?:\((?P<paren>[\d,\s]*)\)|:(?P<colon>[\d,]*))?\s*$")

# Probe inputs are n/m with |n| <= 9 and 1 <= m <= 4; scaling by 12 makes them integers.
_PROBE_NUMERATOR = 9
_PROBE_DENOMINATORS = 4
_PROBE_SCALE = 12
_INT64_HEADROOM = 1 << 62


class Kind(StrEnum):
    SCALAR = "scalar"
    COMPLEX_BLOCK = "complex_block"
    QUATERNION_BLOCK = "quaternion_block"
    OCTONION_BLOCK = "octonion_block"
    POLY_MULT = "poly_mult"
    COMPLEX_POLY_MULT = "complex_poly_mult"
    HR16 = "hr16"
    HR16_BLOCK = "hr16_block"


_ALGEBRA_DIM = {
    Kind.SCALAR: 1,
    Kind.COMPLEX_BLOCK: 2,
    Kind.QUATERNION_BLOCK: 4,
    Kind.OCTONION_BLOCK: 8,
    Kind.HR16_BLOCK: 16,
}
_KIND_RANK = {kind: rank for rank, kind in enumerate(Kind)}


@dataclass(frozen=True)
class BilinearTensor:
    """Exact bilinear map B: Q^a x Q^b -> Q^d with B(x, y)_k = sum T[i][j][k] x_i y_j.

    Coefficients are stored sparsely as sorted ``(i, j, k, value)`` entries
    with nonzero ``Fraction`` values.
    """

    a: int
    b: int
    d: int
    coeffs: tuple[Entry, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        if min(self.a, self.b, self.d) < 1:
            raise TensorError(f"Tensor dimensions must be positive, got {self.dims}")
        merged: dict[tuple[int, int, int], Fraction] = {}
        for i, j, k, value in self.coeffs:
            if not (0 <= i < self.a and 0 <= j < self.b and 0 <= k < self.d):
                raise TensorError(f"Coefficient index ({i}, {j}, {k}) outside dims {self.dims}")
            merged[(i, j, k)] = merged.get((i, j, k), Fraction(0)) + Fraction(value)
        canonical = tuple((i, j, k, v) for (i, j, k), v in sorted(merged.items()) if v)
        object.__setattr__(self, "coeffs", canonical)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.a, self.b, self.d

    def entries(self) -> dict[tuple[int, int, int], Fraction]:
        return {(i, j, k): v for i, j, k, v in self.coeffs}

    def coefficient(self, i: int, j: int, k: int) -> Fraction:
        return self.entries().get((i, j, k), Fraction(0))

    def integer_entries(self) -> list[tuple[int, int, int, int]]:
        """Entries scaled by a common positive factor so they are integers."""
        scale = lcm(*(v.denominator for *_, v in self.coeffs)) if self.coeffs else 1
        return [(i, j, k, int(v * scale)) for i, j, k, v in self.coeffs]

    def to_dict(self) -> dict[str, Any]:
        return {
            "dims": list(self.dims),
            "provenance": self.provenance,
            "coeffs": [[i, j, k, str(v)] for i, j, k, v in self.coeffs],
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "BilinearTensor":
        try:
            a, b, d = (int(v) for v in data["dims"])
            coeffs = tuple((int(i), int(j), int(k), Fraction(v)) for i, j, k, v in data.get("coeffs", []))
        except (KeyError, TypeError, ValueError) as e:
            raise TensorError(f"Malformed tensor data: {e}") from e
        return BilinearTensor(a, b, d, coeffs, str(data.get("provenance", "")))


def apply(tensor: BilinearTensor, x: Sequence[Rational], y: Sequence[Rational]) -> list[Fraction]:
    if len(x) != tensor.a or len(y) != tensor.b:
        raise TensorError(f"Inputs of length ({len(x)}, {len(y)}) do not match {tensor.provenance or 'tensor'} dims {tensor.dims}")
    xs = [Fraction(v) for v in x]
    ys = [Fraction(v) for v in y]
    out = [Fraction(0)] * tensor.d
    for i, j, k, t in tensor.coeffs:
        if xs[i] and ys[j]:
            out[k] += t * xs[i] * ys[j]
    return out


def restrict(tensor: BilinearTensor, a: int, b: int) -> BilinearTensor:
    """Restrict both inputs to their leading coordinates."""
    if not (1 <= a <= tensor.a and 1 <= b <= tensor.b):
        raise TensorError(f"Cannot restrict {tensor.dims} to inputs ({a}, {b})")
    coeffs = tuple(e for e in tensor.coeffs if e[0] < a and e[1] < b)
    return BilinearTensor(a, b, tensor.d, coeffs, f"restrict({tensor.provenance}, {a}, {b})")


def include_codomain(tensor: BilinearTensor, d: int) -> BilinearTensor:
    """Pad the output with zero coordinates."""
    if d < tensor.d:
        raise TensorError(f"Cannot include codomain of dimension {tensor.d} into {d}")
    return BilinearTensor(tensor.a, tensor.b, d, tensor.coeffs, f"include_codomain({tensor.provenance}, {d})")


def swap(tensor: BilinearTensor) -> BilinearTensor:
    coeffs = tuple((j, i, k, v) for i, j, k, v in tensor.coeffs)
    return BilinearTensor(tensor.b, tensor.a, tensor.d, coeffs, f"swap({tensor.provenance})")


def cd_conjugate(x: Sequence[Rational]) -> list[Rational]:
    return [x[0]] + [-v for v in x[1:]]


def cd_multiply(x: Sequence[Rational], y: Sequence[Rational]) -> list[Rational]:
    """Cayley-Dickson product (a, b)(c, d) = (ac - d*b, da + bc*) in dimension 2^k."""
    m = len(x)
    if m != len(y) or m & (m - 1):
        raise TensorError(f"Cayley-Dickson operands need equal power-of-two length, got {len(x)} and {len(y)}")
    if m == 1:
        return [x[0] * y[0]]
    h = m // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    left = [p - q for p, q in zip(cd_multiply(a, c), cd_multiply(cd_conjugate(d), b))]
    right = [p + q for p, q in zip(cd_multiply(d, a), cd_multiply(b, cd_conjugate(c)))]
    return left + right


@lru_cache(maxsize=None)
def build_multiplication_table(m: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """``table[i][j] == (sign, k)`` when e_i e_j = sign * e_k."""
    basis = [[int(i == j) for j in range(m)] for i in range(m)]
    table = []
    for i in range(m):
        row = []
        for j in range(m):
            product = cd_multiply(basis[i], basis[j])
            k = next(idx for idx, v in enumerate(product) if v)
            row.append((int(product[k]), k))
        table.append(tuple(row))
    return tuple(table)


def left_multiplication(m: int, i: int) -> np.ndarray:
    matrix = np.zeros((m, m), dtype=np.int64)
    for j, (sign, k) in enumerate(build_multiplication_table(m)[i]):
        matrix[k, j] = sign
    return matrix


@dataclass(frozen=True, eq=False)
class HRFamily:
    """Integer matrices with A_i^T A_j + A_j^T A_i = 2 δ_ij I."""

    dim: int
    matrices: tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        for matrix in self.matrices:
            if matrix.shape != (self.dim, self.dim):
                raise TensorError(f"Matrix of shape {matrix.shape} in a dimension-{self.dim} family")
            matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.matrices)

    def tensor(self, blocks: int = 1) -> BilinearTensor:
        """Map R^r x R^(m*blocks) -> R^(m*blocks) applying sum y_i A_i blockwise."""
        m = self.dim
        coeffs = []
        for i, matrix in enumerate(self.matrices):
            rows, cols = np.nonzero(matrix)
            for r, j in zip(rows.tolist(), cols.tolist()):
                for blk in range(blocks):
                    coeffs.append((i, blk * m + j, blk * m + r, Fraction(int(matrix[r, j]))))
        return BilinearTensor(len(self), m * blocks, m * blocks, tuple(coeffs), self.name)


@lru_cache(maxsize=None)
def hr_family(m: int) -> HRFamily:
    """Left multiplications by the basis units for m in (1, 2, 4, 8); m = 16 doubles the octonion family."""
    if m == 16:
        return double_family(hr_family(8))
    if m not in (1, 2, 4, 8):
        raise TensorError(f"No Hurwitz-Radon family is built in dimension {m}")
    names = {1: "real", 2: "complex", 4: "quaternion", 8: "octonion"}
    return HRFamily(m, tuple(left_multiplication(m, i) for i in range(m)), names[m])


def double_family(family: HRFamily) -> HRFamily:
    """[I, E_1..E_r] in dimension m gives [I, diag(E_i, -E_i), [[0, I], [-I, 0]]] in dimension 2m."""
    m = family.dim
    identity = np.eye(m, dtype=np.int64)
    if not np.array_equal(family.matrices[0], identity):
        raise TensorError("Doubling needs a family whose first matrix is the identity")
    zero = np.zeros((m, m), dtype=np.int64)
    doubled = [np.eye(2 * m, dtype=np.int64)]
    doubled += [np.block([[e, zero], [zero, -e]]) for e in family.matrices[1:]]
    doubled.append(np.block([[zero, identity], [-identity, zero]]))
    return HRFamily(2 * m, tuple(doubled), f"doubled {family.name}".strip())


def verify_hr(family: HRFamily) -> bool:
    identity = np.eye(family.dim, dtype=np.int64)
    for i, a_i in enumerate(family.matrices):
        for j in range(i, len(family)):
            a_j = family.matrices[j]
            expected = 2 * identity if i == j else 0 * identity
            if not np.array_equal(a_i.T @ a_j + a_j.T @ a_i, expected):
                log.debug(f"Hurwitz-Radon identity fails for pair ({i}, {j}) in {family.name}")
                return False
    return True


def _check_params(kind: Kind, params: tuple[int, ...]) -> None:
    arity = 0 if kind == Kind.HR16 else 2 if kind in (Kind.POLY_MULT, Kind.COMPLEX_POLY_MULT) else 1
    if len(params) != arity:
        raise TensorError(f"{kind} takes {arity} parameter(s), got {list(params)}")
    if kind == Kind.POLY_MULT and min(params) < 0:
        raise TensorError(f"poly_mult degrees must be nonnegative, got {list(params)}")
    if kind == Kind.COMPLEX_POLY_MULT and any(v < 1 or v % 2 == 0 for v in params):
        raise TensorError(f"complex_poly_mult needs odd positive p and q, got {list(params)}")
    if arity == 1 and params[0] < 1:
        raise TensorError(f"{kind} needs k >= 1, got {params[0]}")


def catalog_dims(kind: Kind, params: tuple[int, ...]) -> tuple[int, int, int]:
    _check_params(kind, params)
    if kind == Kind.HR16:
        return 9, 16, 16
    if kind == Kind.POLY_MULT:
        p, q = params
        return p + 1, q + 1, p + q + 1
    if kind == Kind.COMPLEX_POLY_MULT:
        p, q = params
        return p + 1, q + 1, p + q
    m, (k,) = _ALGEBRA_DIM[kind], params
    return (9 if kind == Kind.HR16_BLOCK else m), m * k, m * k


def _poly_entries(p: int, q: int) -> dict[tuple[int, int, int], Fraction]:
    return {(i, j, i + j): Fraction(1) for i in range(p + 1) for j in range(q + 1)}


def _complex_poly_entries(p: int, q: int) -> dict[tuple[int, int, int], Fraction]:
    # coordinates interleave (re, im) of complex coefficients
    out = {}
    for s in range((p + 1) // 2):
        for r in range((q + 1) // 2):
            t = s + r
            out[(2 * s, 2 * r, 2 * t)] = Fraction(1)
            out[(2 * s + 1, 2 * r + 1, 2 * t)] = Fraction(-1)
            out[(2 * s, 2 * r + 1, 2 * t + 1)] = Fraction(1)
            out[(2 * s + 1, 2 * r, 2 * t + 1)] = Fraction(1)
    return out


def construct(kind: Kind | str, *params: int) -> BilinearTensor:
    """Build one catalog map exactly.

    Raises:
        TensorError: On an unknown kind or parameters outside its range.
    """
    try:
        kind = Kind(kind)
    except ValueError as e:
        raise TensorError(f"Unknown construction '{kind}', expected one of {[k.value for k in Kind]}") from e
    a, b, d = catalog_dims(kind, params)
    name = _label(kind, params)
    if kind == Kind.POLY_MULT:
        entries = _poly_entries(*params)
    elif kind == Kind.COMPLEX_POLY_MULT:
        entries = _complex_poly_entries(*params)
    elif kind == Kind.HR16:
        return _renamed(hr_family(16).tensor(), name)
    else:
        return _renamed(hr_family(_ALGEBRA_DIM[kind]).tensor(params[0]), name)
    coeffs = tuple((i, j, k, v) for (i, j, k), v in entries.items())
    return BilinearTensor(a, b, d, coeffs, name)


def _renamed(tensor: BilinearTensor, name: str) -> BilinearTensor:
    return BilinearTensor(tensor.a, tensor.b, tensor.d, tensor.coeffs, name)


def _label(kind: Kind, params: Iterable[int]) -> str:
    params = tuple(params)
    return f"{kind}({','.join(str(p) for p in params)})" if params else str(kind)


def has_poly_structure(tensor: BilinearTensor, p: int, q: int) -> bool:
    """T[i][j][i+j] = 1 and nothing else: real polynomial multiplication."""
    return tensor.dims == (p + 1, q + 1, p + q + 1) and tensor.entries() == _poly_entries(p, q)


def has_complex_poly_structure(tensor: BilinearTensor, p: int, q: int) -> bool:
    return tensor.dims == (p + 1, q + 1, p + q) and tensor.entries() == _complex_poly_entries(p, q)


def _random_vectors(rng: np.random.Generator, count: int, size: int) -> np.ndarray:
    """``count`` nonzero rational vectors, scaled to integers, one per row."""
    out = np.zeros((count, size), dtype=np.int64)
    pending = np.arange(count)
    while pending.size:
        numerators = rng.integers(-_PROBE_NUMERATOR, _PROBE_NUMERATOR + 1, (pending.size, size))
        denominators = rng.integers(1, _PROBE_DENOMINATORS + 1, (pending.size, size))
        out[pending] = numerators * (_PROBE_SCALE // denominators)
        pending = pending[~out[pending].any(axis=1)]
    return out


def _dense_integer(tensor: BilinearTensor) -> np.ndarray:
    entries = tensor.integer_entries()
    largest = max((abs(t) for *_, t in entries), default=0)
    bound = largest * (_PROBE_NUMERATOR * _PROBE_SCALE) ** 2 * tensor.a * tensor.b
    out = np.zeros(tensor.dims, dtype=np.int64 if bound < _INT64_HEADROOM else object)
    for i, j, k, t in entries:
        out[i, j, k] = t
    return out


def nonsingularity_probe(tensor: BilinearTensor, trials: int, seed: int) -> bool:
    """Randomized evidence that B(x, y) = 0 forces x = 0 or y = 0.

    Checks ``trials`` random pairs for a nonzero product, then ``2 * trials``
    random x for full column rank of y -> B(x, y). All arithmetic is exact.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    dense = _dense_integer(tensor)
    xs = _random_vectors(rng, trials, tensor.a).astype(dense.dtype)
    ys = _random_vectors(rng, trials, tensor.b).astype(dense.dtype)
    # partial[t, j, k] = sum_i x_t[i] T[i][j][k]
    partial = np.tensordot(xs, dense, axes=(1, 0))
    products = (ys[:, :, None] * partial).sum(axis=1)
    vanishing = np.flatnonzero(~(products != 0).any(axis=1))
    if vanishing.size:
        trial = int(vanishing[0])
        log.debug(f"{tensor.provenance}: B(x, y) = 0 on trial {trial} for x={xs[trial]}, y={ys[trial]}")
        return False
    if tensor.b > tensor.d:
        return False
    xs = _random_vectors(rng, 2 * trials, tensor.a).astype(dense.dtype)
    # one d x b matrix per x: rows index outputs, columns index the second input
    matrices = np.tensordot(xs, dense, axes=(1, 0)).transpose(0, 2, 1)
    for trial in np.flatnonzero(~full_column_rank_mod(matrices)):
        if rational_rank(matrices[trial].tolist()) < tensor.b:
            log.debug(f"{tensor.provenance}: y -> B(x, y) is rank deficient on rank trial {trial}")
            return False
    return True


class Construction:
    """A recipe: a catalog map, optionally swapped, then restricted, then padded."""

    kind: Kind
    params: tuple[int, ...] = ()
    swapped: bool = False
    restrict_to: Optional[tuple[int, int]] = None
    codomain: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "params", tuple(int(p) for p in self.params))
        a, b, d = self.swapped_dims
        if self.restrict_to is not None:
            ra, rb = self.restrict_to
            if not (1 <= ra <= a and 1 <= rb <= b):
                raise TensorError(f"Cannot restrict {self.base_label} with inputs ({a}, {b}) to ({ra}, {rb})")
        if self.codomain is not None and self.codomain < d:
            raise TensorError(f"Cannot include codomain of dimension {d} into {self.codomain}")

    @property
    def base_dims(self) -> tuple[int, int, int]:
        return catalog_dims(self.kind, self.params)

    @property
    def swapped_dims(self) -> tuple[int, int, int]:
        a, b, d = self.base_dims
        return (b, a, d) if self.swapped else (a, b, d)

    @property
    def dims(self) -> tuple[int, int, int]:
        a, b, d = self.swapped_dims
        if self.restrict_to is not None:
            a, b = self.restrict_to
        return a, b, self.codomain if self.codomain is not None else d

    @property
    def base_label(self) -> str:
        return _label(self.kind, self.params)

    @property
    def label(self) -> str:
        text = self.base_label
        if self.swapped:
            text = f"swap({text})"
        if self.restrict_to is not None:
            text = f"restrict({text}, {self.restrict_to[0]}, {self.restrict_to[1]})"
        if self.codomain is not None:
            text = f"include_codomain({text}, {self.codomain})"
        return text

    def base(self) -> BilinearTensor:
        return construct(self.kind, *self.params)

    def build(self) -> BilinearTensor:
        tensor = self.base()
        if self.swapped:
            tensor = swap(tensor)
        if self.restrict_to is not None:
            tensor = restrict(tensor, *self.restrict_to)
        if self.codomain is not None:
            tensor = include_codomain(tensor, self.codomain)
        return tensor

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": str(self.kind),
            "params": list(self.params),
            "swapped": self.swapped,
            "restrict": list(self.restrict_to) if self.restrict_to else None,
            "codomain": self.codomain,
            "label": self.label,
            "dims": list(self.dims),
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "Construction":
        try:
            restrict_to = data.get("restrict")
            return Construction(
                kind=Kind(data["kind"]),
                params=tuple(data.get("params", ())),
                swapped=bool(data.get("swapped", False)),
                restrict_to=(int(restrict_to[0]), int(restrict_to[1])) if restrict_to else None,
                codomain=data.get("codomain"),
            )
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise TensorError(f"Malformed construction {data!r}: {e}") from e

    @staticmethod
    def parse(name: str) -> "Construction":
        """Read ``poly_mult(1,1)``, ``poly_mult:1,1`` or ``hr16``."""
        match = _NAME.match(name)
        if match is None:
            raise TensorError(f"Cannot parse construction name '{name}'")
        raw = match["paren"] if match["paren"] is not None else match["colon"] or ""
        params = tuple(int(v) for v in raw.replace(" ", "").split(",") if v)
        try:
            kind = Kind(match["kind"])
        except ValueError as e:
            raise TensorError(f"Unknown construction '{match['kind']}', expected one of {[k.value for k in Kind]}") from e
        _check_params(kind, params)
        return Construction(kind, params)


def catalog(max_dim: int) -> Iterator[Construction]:
    """Catalog maps with output dimension at most ``max_dim``, in kind order then by parameters."""
    for kind in Kind:
        if kind == Kind.HR16:
            if max_dim >= 16:
                yield Construction(kind)
        elif kind == Kind.POLY_MULT:
            for p in range(max_dim):
                for q in range(max_dim - p):
                    yield Construction(kind, (p, q))
        elif kind == Kind.COMPLEX_POLY_MULT:
            for p in range(1, max_dim, 2):
                for q in range(1, max_dim - p + 1, 2):
                    yield Construction(kind, (p, q))
        else:
            m = _ALGEBRA_DIM[kind]
            # hr16_block(1) is hr16 itself
            first = 2 if kind == Kind.HR16_BLOCK else 1
            for k in range(first, max_dim // m + 1):
                yield Construction(kind, (k,))


def kind_rank(kind: Kind) -> int:
    return _KIND_RANK[kind]


@dataclass(frozen=True)
class Evidence:
    method: str
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {"method": self.method, "passed": self.passed}


def certify(construction: Construction) -> Evidence:
    """Exact nonsingularity evidence for the catalog map behind a recipe.

    Swapping, restricting and padding all preserve nonsingularity, so the
    certificate is about the base map.
    """
    kind, params = construction.kind, construction.params
    base = construction.base()
    if kind == Kind.POLY_MULT:
        return Evidence("polynomial-structure", has_poly_structure(base, *params))
    if kind == Kind.COMPLEX_POLY_MULT:
        return Evidence("complex-polynomial-structure", has_complex_poly_structure(base, *params))
    m = 16 if kind == Kind.HR16 else _ALGEBRA_DIM[kind]
    family = hr_family(m)
    blocks = 1 if kind == Kind.HR16 else params[0]
    matches = base.coeffs == family.tensor(blocks).coeffs
    return Evidence("hurwitz-radon-identity", matches and verify_hr(family))
