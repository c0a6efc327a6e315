from dataclasses import dataclass
from typing import Iterable

from pi_coindex.utils.bits import binary


def ones_disjoint(x: int, y: int) -> bool:
    """True iff x and y share no 1-bit, i.e. C(x+y, x) is odd."""
    if x < 0 or y < 0:
        raise ValueError(f"ones_disjoint needs nonnegative integers, got ({x}, {y})")
    return x & y == 0


def multinomial_is_even(parts: Iterable[int]) -> bool:
    """Parity of the multinomial coefficient (sum(parts); parts).

    It is odd exactly when the binary additions of the parts never carry,
    which is the case iff no two parts share a 1-bit.
    """
    seen = 0
    for part in parts:
        if part < 0:
            raise ValueError(f"multinomial parts must be nonnegative, got {part}")
        if seen & part:
            return True
        seen |= part
    return False


@dataclass(frozen=True)
class HRDecomposition:
    """n = 2^(b + 4c) * (2a + 1) with 0 <= b < 4."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a < 0 or self.c < 0 or not 0 <= self.b < 4:
            raise ValueError(f"Invalid Hurwitz-Radon decomposition a={self.a}, b={self.b}, c={self.c}")

    @staticmethod
    def from_int(n: int) -> "HRDecomposition":
        if n < 1:
            raise ValueError(f"Hurwitz-Radon decomposition needs n >= 1, got {n}")
        two_power = (n & -n).bit_length() - 1
        odd = n >> two_power
        c, b = divmod(two_power, 4)
        return HRDecomposition(a=(odd - 1) // 2, b=b, c=c)

    @property
    def n(self) -> int:
        return (2 * self.a + 1) << (self.b + 4 * self.c)

    @property
    def rho(self) -> int:
        return 2**self.b + 8 * self.c

    def to_dict(self) -> dict[str, int | str]:
        return {"n": self.n, "binary": binary(self.n), "a": self.a, "b": self.b, "c": self.c, "rho": self.rho}


def hurwitz_radon(n: int) -> int:
    return HRDecomposition.from_int(n).rho
