"""Structural data of the half-space elliptic system and its validation.

A system is described by the dimension ``N``, the component count ``m``,
the interior exponent matrix ``A``, the boundary exponent matrix ``B`` and
the boundary coefficient vector ``c``:

    lap(u_i) + prod_j u_j**A[i,j] = 0          for y_N > 0,
    d(u_i)/d(y_N) = c[i] * prod_j u_j**B[i,j]  on y_N = 0.

The structural constraints (row sums pinned to the scale-critical values,
non-negative exponents, irreducibility of ``A``, diagonal boundary rows
wherever ``c[i] >= 0``) are exact identities in exact arithmetic.  Inputs
arrive as decimal text, so this module checks them to a relative tolerance
``tol_row`` instead; the tolerance policy is an artifact of floating-point
input handling, not part of the mathematical structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import MalformedSpec

__all__ = [
    "EllipticSystemSpec",
    "ValidationReport",
    "Violation",
    "interior_row_target",
    "boundary_row_target",
    "is_irreducible",
    "validate_spec",
    "load_spec",
    "save_spec",
]


def interior_row_target(N: int) -> float:
    """Required row sum of the interior exponent matrix, (N+2)/(N-2)."""
    return (N + 2) / (N - 2)


def boundary_row_target(N: int) -> float:
    """Required row sum of the boundary exponent matrix, N/(N-2)."""
    return N / (N - 2)


@dataclass
class EllipticSystemSpec:
    """Dimension, component count, exponent matrices and boundary coefficients."""

    N: int
    m: int
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.c = np.asarray(self.c, dtype=float)

    def to_dict(self) -> dict:
        return {
            "N": int(self.N),
            "m": int(self.m),
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "c": self.c.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EllipticSystemSpec":
        try:
            spec = cls(
                N=int(data["N"]),
                m=int(data["m"]),
                A=np.asarray(data["A"], dtype=float),
                B=np.asarray(data["B"], dtype=float),
                c=np.asarray(data["c"], dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedSpec(f"cannot build system data: {exc}") from exc
        ensure_well_formed(spec)
        return spec


class Violation(NamedTuple):
    """One violated structural rule: identifier, offending index, measured vs expected."""

    rule: str
    index: tuple | int | None
    measured: float
    expected: float


@dataclass
class ValidationReport:
    """Outcome of a structural validation; ``passed`` iff ``violations`` is empty."""

    passed: bool
    violations: list[Violation] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "violations": [
                {
                    "rule": v.rule,
                    "index": list(v.index) if isinstance(v.index, tuple) else v.index,
                    "measured": float(v.measured),
                    "expected": float(v.expected),
                }
                for v in self.violations
            ],
        }


def ensure_well_formed(spec: EllipticSystemSpec) -> None:
    """Raise :class:`MalformedSpec` on shape or finiteness defects."""
    if int(spec.m) < 1:
        raise MalformedSpec(f"component count m={spec.m} must be >= 1")
    if int(spec.N) < 3:
        raise MalformedSpec(f"dimension N={spec.N} must be >= 3")
    m = int(spec.m)
    if spec.A.shape != (m, m):
        raise MalformedSpec(f"interior exponent matrix has shape {spec.A.shape}, expected {(m, m)}")
    if spec.B.shape != (m, m):
        raise MalformedSpec(f"boundary exponent matrix has shape {spec.B.shape}, expected {(m, m)}")
    if spec.c.shape != (m,):
        raise MalformedSpec(f"boundary coefficient vector has shape {spec.c.shape}, expected {(m,)}")
    for name, arr in (("A", spec.A), ("B", spec.B), ("c", spec.c)):
        if not np.all(np.isfinite(arr)):
            raise MalformedSpec(f"non-finite entry in {name}")


def is_irreducible(A: np.ndarray) -> bool:
    """True iff no nontrivial index partition produces an all-zero block of ``A``.

    Equivalent formulation: the digraph with an edge i -> j whenever
    ``A[i, j] > 0`` is strongly connected.  Strict positivity is used on
    purpose; exponents are inputs, not computed quantities.  A 1x1 matrix
    is irreducible unconditionally (no nontrivial partition exists).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise MalformedSpec(f"irreducibility requires a square matrix, got shape {A.shape}")
    m = A.shape[0]
    if m == 1:
        return True
    graph = csr_matrix((A > 0.0).astype(np.int8))
    n_components, _ = connected_components(graph, directed=True, connection="strong")
    return bool(n_components == 1)


def validate_spec(spec: EllipticSystemSpec, tol_row: float = 1e-9) -> ValidationReport:
    """Check every structural rule and report all violations.

    Row sums are compared to their targets with relative tolerance
    ``tol_row``.  The check is pure and deterministic: identical inputs
    produce identical reports.
    """
    if tol_row <= 0:
        raise ValueError("tol_row must be positive")
    ensure_well_formed(spec)
    m = int(spec.m)
    violations: list[Violation] = []

    for i in range(m):
        for j in range(m):
            if spec.A[i, j] < 0:
                violations.append(Violation("A_nonnegative", (i, j), spec.A[i, j], 0.0))
    for i in range(m):
        for j in range(m):
            if spec.B[i, j] < 0:
                violations.append(Violation("B_nonnegative", (i, j), spec.B[i, j], 0.0))

    target_a = interior_row_target(spec.N)
    target_b = boundary_row_target(spec.N)
    row_a = spec.A.sum(axis=1)
    row_b = spec.B.sum(axis=1)
    for i in range(m):
        if abs(row_a[i] - target_a) > tol_row * max(1.0, abs(target_a)):
            violations.append(Violation("A_row_sum", i, row_a[i], target_a))
    for i in range(m):
        if abs(row_b[i] - target_b) > tol_row * max(1.0, abs(target_b)):
            violations.append(Violation("B_row_sum", i, row_b[i], target_b))

    # Rows with non-negative coefficient must couple to their own component only.
    for i in range(m):
        if spec.c[i] >= 0:
            for j in range(m):
                expected = target_b if i == j else 0.0
                if abs(spec.B[i, j] - expected) > tol_row * max(1.0, target_b):
                    violations.append(
                        Violation("B_diagonal_when_c_nonnegative", (i, j), spec.B[i, j], expected)
                    )

    if not is_irreducible(spec.A):
        violations.append(Violation("A_irreducible", None, 0.0, 1.0))

    return ValidationReport(passed=not violations, violations=violations)


def load_spec(path: str | Path) -> EllipticSystemSpec:
    """Read system data from a JSON file with keys N, m, A, B, c (row-major matrices)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedSpec(f"invalid JSON in {path}: {exc}") from exc
    return EllipticSystemSpec.from_dict(data)


def save_spec(spec: EllipticSystemSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")
