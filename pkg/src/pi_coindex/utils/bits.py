from typing import Iterable, Iterator

WORD_BITS = 64


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def vertices_of(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return mask.bit_count()


def top_vertex(mask: int) -> int:
    """Highest set bit of ``mask``, or -1 for the empty mask."""
    return mask.bit_length() - 1


def iter_submasks(mask: int) -> Iterator[int]:
    """Every submask of ``mask``, from ``mask`` itself down to 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def canonical_key(mask: int) -> tuple[int, tuple[int, ...]]:
    return popcount(mask), vertices_of(mask)


def binary(x: int) -> str:
    if x < 0:
        raise ValueError(f"binary expansion needs a nonnegative integer, got {x}")
    return format(x, "b")


def reduce_to_maximal(masks: Iterable[int]) -> list[int]:
    """Drop duplicates and every mask contained in another one.

    Returns the survivors in canonical order (cardinality, then sorted vertices).
    """
    unique = sorted(set(masks), key=popcount, reverse=True)
    kept: list[int] = []
    for m in unique:
        if not any(m & ~k == 0 for k in kept):
            kept.append(m)
    return sorted(kept, key=canonical_key)


def reduce_to_minimal(masks: Iterable[int]) -> list[int]:
    unique = sorted(set(masks), key=popcount)
    kept: list[int] = []
    for m in unique:
        if not any(k & ~m == 0 for k in kept):
            kept.append(m)
    return sorted(kept, key=canonical_key)


def minimal_transversals(edges: Iterable[int]) -> list[int]:
    """Minimal vertex sets meeting every edge of a hypergraph (Berge's method).

    An empty edge cannot be hit, so it yields no transversals at all.
    """
    transversals = [0]
    for edge in reduce_to_minimal(edges):
        grown: set[int] = set()
        for t in transversals:
            if t & edge:
                grown.add(t)
            else:
                for v in vertices_of(edge):
                    grown.add(t | (1 << v))
        transversals = reduce_to_minimal(grown)
        if not transversals:
            break
    return transversals
