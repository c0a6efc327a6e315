import csv
import io
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Optional

PathType = str | Path

SCHEMA_VERSION = "1"


class CoindexError(Exception):
    pass


class ComplexError(CoindexError, ValueError):
    pass


class ComplexParseError(ComplexError):
    def __init__(
        self,
        message: str,
        path: Optional[PathType] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.path = str(path) if path is not None else None
        self.line = line
        self.field = field
        where = [part for part in (self.path, f"line {line}" if line else None, field) if part]
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


class TriangulationError(ComplexError):
    pass


class TensorError(CoindexError, ValueError):
    pass


class CertificateError(CoindexError):
    pass


class Rule(StrEnum):
    """Rule identifiers as they appear in serialized derivations."""

    COLORING_BOUND = "THM-1.6"
    SEPARATING_MAP_BOUND = "THM-4.1"
    MONOTONE_D = "MONOTONE-d"
    DIAGONAL_MONOTONE = "DIAGONAL-MONOTONE"
    SIMPLEX_EXTENSION = "SIMPLEX-EXTENSION"
    BILINEAR_LOWER = "LEMMA-5.1"
    EMBEDDING_EXISTS = "EMBEDDING-EXISTS"


class Side(StrEnum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class DerivationStep:
    rule: Rule
    side: Side
    bound: int
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        """The rule, suffixed with the construction id for bilinear lower bounds."""
        if self.rule == Rule.BILINEAR_LOWER and "construction_id" in self.params:
            return f"{self.rule}+{self.params['construction_id']}"
        return str(self.rule)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule": self.name,
            "side": str(self.side),
            "bound": self.bound,
            "params": self.params,
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "DerivationStep":
        try:
            return DerivationStep(
                rule=Rule(str(data["rule"]).split("+", 1)[0]),
                side=Side(data["side"]),
                bound=int(data["bound"]),
                params=dict(data.get("params", {})),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise CertificateError(f"Malformed derivation step {data!r}: {e}") from e


@dataclass(frozen=True)
class BoundCertificate:
    """Certified interval for the coindex of a space of (almost-)embeddings.

    ``upper == -1`` asserts the space is empty. ``lower`` is only set when a
    nonempty space is established, so it is never below 0.
    """

    lower: Optional[int]
    upper: Optional[int]
    derivation: tuple[DerivationStep, ...] = ()
    query: dict[str, Any] = field(default_factory=dict)
    budget_exceeded: bool = False

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise CertificateError(
                f"Inconsistent bounds: lower {self.lower} exceeds upper {self.upper} for {self.query}"
            )

    @property
    def exact(self) -> bool:
        return self.lower is not None and self.lower == self.upper

    @property
    def upper_steps(self) -> tuple[DerivationStep, ...]:
        return tuple(s for s in self.derivation if s.side == Side.UPPER)

    @property
    def lower_steps(self) -> tuple[DerivationStep, ...]:
        return tuple(s for s in self.derivation if s.side == Side.LOWER)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "budget_exceeded": self.budget_exceeded,
            "query": self.query,
            "derivation": [step.to_dict() for step in self.derivation],
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "BoundCertificate":
        try:
            return BoundCertificate(
                lower=data.get("lower"),
                upper=data.get("upper"),
                derivation=tuple(DerivationStep.from_dict(s) for s in data.get("derivation", [])),
                query=dict(data.get("query", {})),
                budget_exceeded=bool(data.get("budget_exceeded", False)),
            )
        except AttributeError as e:
            raise CertificateError(f"Malformed certificate: {e}") from e


class CellKind(StrEnum):
    EMPTY = "empty"
    EXACT = "exact"
    INTERVAL = "interval"


@dataclass(frozen=True)
class TableCell:
    p: int
    d: int
    kind: CellKind
    lower: Optional[int]
    upper: Optional[int]
    # coloring bound applied at d itself, no monotone step needed
    direct: bool = False
    certificate: Optional[BoundCertificate] = field(default=None, compare=False, repr=False)

    @property
    def value(self) -> str:
        if self.kind == CellKind.EMPTY:
            return ""
        if self.kind == CellKind.EXACT:
            return str(self.upper)
        lo = "?" if self.lower is None else str(self.lower)
        hi = "?" if self.upper is None else str(self.upper)
        return f"{lo}..{hi}"

    def to_dict(self, include_certificate: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "p": self.p,
            "d": self.d,
            "kind": str(self.kind),
            "lower": self.lower,
            "upper": self.upper,
            "direct": self.direct,
        }
        if include_certificate and self.certificate is not None:
            data["certificate"] = self.certificate.to_dict()
        return data


@dataclass(frozen=True)
class RadonTable:
    """Coindex of almost-embeddings of the boundary of a (p+1)-simplex into R^d."""

    p_max: int
    d_max: int
    cells: tuple[TableCell, ...]

    def cell(self, p: int, d: int) -> TableCell:
        if not (1 <= p <= self.p_max and 1 <= d <= self.d_max):
            raise KeyError(f"({p}, {d}) is outside the {self.p_max}x{self.d_max} table")
        return self.cells[(p - 1) * self.d_max + (d - 1)]

    def row(self, p: int) -> tuple[TableCell, ...]:
        start = (p - 1) * self.d_max
        return self.cells[start : start + self.d_max]

    def to_ascii(self) -> str:
        width = max([4] + [len(c.value) + 2 for c in self.cells])
        lines = ["p\\d |" + "".join(f"{d:>{width}}" for d in range(1, self.d_max + 1))]
        lines.append("-" * 4 + "+" + "-" * (width * self.d_max))
        for p in range(1, self.p_max + 1):
            entries = []
            for c in self.row(p):
                text = c.value + ("*" if c.direct else " ") if c.value else ""
                entries.append(f"{text:>{width}}")
            lines.append(f"{p:>3} |" + "".join(entries))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["p"] + [str(d) for d in range(1, self.d_max + 1)])
        for p in range(1, self.p_max + 1):
            writer.writerow([str(p)] + [c.value for c in self.row(p)])
        return buffer.getvalue()

    def to_dict(self, include_certificates: bool = False) -> dict[str, Any]:
        return {
            "p_max": self.p_max,
            "d_max": self.d_max,
            "cells": [c.to_dict(include_certificates) for c in self.cells],
        }
