from fractions import Fraction
from typing import Sequence

import numpy as np

# Mersenne prime used for the modular rank fast path. Products of two residues
# stay below 2**62, so the elimination is exact in int64.
RANK_PRIME = 2_147_483_647


def rational_rank(rows: Sequence[Sequence[Fraction | int]]) -> int:
    """Rank over Q by Gaussian elimination on Fractions."""
    matrix = [[Fraction(v) for v in row] for row in rows]
    if not matrix:
        return 0
    n_rows, n_cols = len(matrix), len(matrix[0])
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if matrix[r][col] != 0), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        head = matrix[rank]
        for r in range(rank + 1, n_rows):
            factor = matrix[r][col] / head[col]
            if factor:
                row = matrix[r]
                for c in range(col, n_cols):
                    row[c] -= factor * head[c]
        rank += 1
        if rank == n_rows:
            break
    return rank


def full_column_rank_mod(stack: np.ndarray, prime: int = RANK_PRIME) -> np.ndarray:
    """For each matrix of ``stack`` (count x rows x cols), whether its rank over GF(prime) is cols.

    The rank over GF(prime) never exceeds the rank over Q, so True proves full
    rational column rank. False only means the exact rank has to be checked.
    """
    work = np.mod(np.asarray(stack), prime).astype(np.int64)
    count, rows, cols = work.shape
    full = np.full(count, cols <= rows)
    if not full.any():
        return full
    index = np.arange(count)
    for col in range(cols):
        nonzero = work[:, col:, col] != 0
        full &= nonzero.any(axis=1)
        pivot = col + nonzero.argmax(axis=1)
        head = work[index, pivot].copy()
        work[index, pivot] = work[:, col].copy()
        work[:, col] = head
        # fraction-free step: row <- lead * row - below * head, products stay below 2**62
        lead = head[:, col][:, None, None]
        below = work[:, col + 1 :, col][:, :, None]
        tail = head[:, None, col:]
        work[:, col + 1 :, col:] = (work[:, col + 1 :, col:] * lead - below * tail) % prime
    return full
