from math import comb, factorial

import pytest

from pi_coindex.arith import HRDecomposition, hurwitz_radon, multinomial_is_even, ones_disjoint


def multinomial(parts: list[int]) -> int:
    value = factorial(sum(parts))
    for part in parts:
        value //= factorial(part)
    return value


@pytest.mark.parametrize(
    "x,y,expected",
    [(0, 0, True), (1, 2, True), (3, 1, False), (4, 3, True), (5, 5, False), (8, 7, True), (6, 9, True)],
)
def test_ones_disjoint(x, y, expected):
    assert ones_disjoint(x, y) is expected


def test_ones_disjoint_matches_binomial_parity():
    for x in range(1025):
        for y in range(1025):
            assert ones_disjoint(x, y) == (comb(x + y, x) % 2 == 1), (x, y)


def compositions(limit: int):
    """Every ordered list of positive parts with sum <= limit, with its multinomial coefficient."""
    stack = [((), 0, 1)]
    while stack:
        parts, total, value = stack.pop()
        yield parts, value
        for part in range(1, limit - total + 1):
            stack.append((parts + (part,), total + part, value * comb(total + part, part)))


def test_multinomial_parity_matches_big_integers():
    count = 0
    for parts, value in compositions(20):
        assert multinomial_is_even(parts) == (value % 2 == 0), parts
        count += 1
    assert count == 2**20


def test_multinomial_parity_ignores_zero_parts():
    for parts in [[0], [0, 5], [3, 0, 4], [6, 0, 0, 1]]:
        assert multinomial_is_even(parts) == (multinomial(parts) % 2 == 0)


def test_negative_inputs_are_rejected():
    with pytest.raises(ValueError):
        ones_disjoint(-1, 2)
    with pytest.raises(ValueError):
        multinomial_is_even([1, -2])


@pytest.mark.parametrize("n,rho", [(1, 1), (2, 2), (4, 4), (8, 8), (12, 4), (16, 9), (32, 10), (48, 9), (256, 17)])
def test_hurwitz_radon_examples(n, rho):
    assert hurwitz_radon(n) == rho


def test_hurwitz_radon_table():
    for n in range(1, 65):
        v = (n & -n).bit_length() - 1
        assert hurwitz_radon(n) == [1, 2, 4, 8][v % 4] + 8 * (v // 4)
        if n % 2:
            assert hurwitz_radon(n) == 1
        if n % 16 == 0:
            assert hurwitz_radon(n) >= 9


def test_hurwitz_radon_rejects_zero():
    with pytest.raises(ValueError):
        hurwitz_radon(0)


def test_decomposition():
    hr = HRDecomposition.from_int(96)
    assert (hr.a, hr.b, hr.c) == (1, 1, 1)
    assert hr.n == 96
    assert hr.to_dict()["binary"] == "1100000"
    with pytest.raises(ValueError):
        HRDecomposition(a=0, b=4, c=0)


if __name__ == "__main__":
    pytest.main([__file__])
