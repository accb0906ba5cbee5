"""Problem representation, validation, instance generation, and file IO.

The standard form throughout the package is

    min c^T x   s.t.  A x = b,  x >= 0,

with every cost component strictly positive and A having at least as many
columns as rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import PortableRng
from .errors import DimensionMismatch, NonFiniteData, ParseError

RANK_TOL_DEFAULT = 1e-8


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Immutable LP data (a, b, c) with m rows and n >= m columns, c > 0."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = _frozen_array(self.a)
        b = _frozen_array(self.b)
        c = _frozen_array(self.c)
        if a.ndim != 2 or b.ndim != 1 or c.ndim != 1:
            raise DimensionMismatch("a must be a matrix, b and c vectors")
        m, n = a.shape
        if m < 1 or n < 1:
            raise DimensionMismatch("need m >= 1 and n >= 1")
        if m > n:
            raise DimensionMismatch(f"need m <= n, got m={m}, n={n}")
        if b.shape != (m,) or c.shape != (n,):
            raise DimensionMismatch(
                f"b must have length {m} and c length {n}, "
                f"got {b.shape[0]} and {c.shape[0]}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise NonFiniteData("LP data must be finite")
        if not np.all(c > 0):
            raise NonFiniteData("every cost component must be strictly positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class InstanceSeedSpec:
    """Size and seed of a generated random instance."""

    m: int
    n: int
    rng_seed: int

    def __post_init__(self):
        if self.m < 1:
            raise DimensionMismatch("need m >= 1")
        if self.m > self.n:
            raise DimensionMismatch(f"need m <= n, got m={self.m}, n={self.n}")


@dataclass(frozen=True, eq=False)
class FeasibilityCheckReport:
    """Outcome of numerically probing rank and strict feasibility.

    The witness, when present, is strictly positive with
    ||A witness - b||_2 <= tol at the tolerance validate_lp was given.
    A missing witness is informational, never fatal.
    """

    row_rank_estimate: int
    is_full_row_rank: bool
    strictly_feasible_witness: Optional[np.ndarray]
    residual_of_witness: float


def validate_lp(lp: LinearProgram, tol: float = RANK_TOL_DEFAULT) -> FeasibilityCheckReport:
    """Estimate row rank and search for a strictly feasible point.

    Rank counts singular values above tol * sigma_max.  Strict feasibility
    is probed by running the reparametrized solver itself on the residual
    objective from the all-ones start (its iterates stay positive), keeping
    the best interior point found within a small iteration budget.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not (np.all(np.isfinite(lp.a)) and np.all(np.isfinite(lp.b))):
        raise NonFiniteData("LP data must be finite")

    sigma = np.linalg.svd(lp.a, compute_uv=False)
    rank = int(np.sum(sigma > tol * sigma[0])) if sigma[0] > 0 else 0

    # Late import: the solver module depends on this one.
    from .dln_solver import UniformAlpha, Adaptive, solve_dln

    state, _trace = solve_dln(
        lp,
        init=UniformAlpha(1.0),
        rule=Adaptive(),
        max_iters=2000,
        loss_tol=0.5 * tol * tol,
    )
    x = state.u * state.u
    residual = float(np.linalg.norm(lp.a @ x - lp.b))
    witness = None
    if residual <= tol and np.all(x > 0):
        witness = _frozen_array(x)
    return FeasibilityCheckReport(
        row_rank_estimate=rank,
        is_full_row_rank=(rank == lp.m),
        strictly_feasible_witness=witness,
        residual_of_witness=residual,
    )


def gen_instance(spec: InstanceSeedSpec) -> tuple[LinearProgram, np.ndarray]:
    """Random instance: Gaussian A, planted x uniform on [0,1], b = A x, c = 1.

    Draws m*n normals (row-major into A) and then n uniforms from the
    portable generator, so identical seeds give bit-identical instances.
    """
    rng = PortableRng(spec.rng_seed)
    a = rng.normals(spec.m * spec.n).reshape(spec.m, spec.n)
    planted_x = rng.uniforms(spec.n)
    b = a @ planted_x
    lp = LinearProgram(a=a, b=b, c=np.ones(spec.n))
    return lp, _frozen_array(planted_x)


# ---------------------------------------------------------------------------
# File IO.  Format: line `lp <m> <n>`, then m rows of A (n floats each),
# then b (m floats), then c (n floats).  `#` starts a comment line.
# Floats are written with 17 significant digits, which round-trips doubles.
# ---------------------------------------------------------------------------


def format_floats(values) -> str:
    return " ".join("%.17g" % v for v in np.asarray(values, dtype=np.float64))


def data_lines(path: str) -> list[tuple[int, str]]:
    """Non-comment, non-blank lines of a text file with 1-based numbers."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            out.append((lineno, stripped))
    return out


def parse_float_row(lineno: int, line: str, expect: int, what: str) -> np.ndarray:
    parts = line.split()
    if len(parts) != expect:
        raise ParseError(f"expected {expect} values for {what}, got {len(parts)}", lineno)
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ParseError(f"bad float in {what}: {exc}", lineno) from None


def write_lp(lp: LinearProgram, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"lp {lp.m} {lp.n}\n")
        for row in lp.a:
            fh.write(format_floats(row) + "\n")
        fh.write(format_floats(lp.b) + "\n")
        fh.write(format_floats(lp.c) + "\n")


def read_lp(path: str) -> LinearProgram:
    lines = data_lines(path)
    if not lines:
        raise ParseError("empty file", 1)
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "lp":
        raise ParseError("header must be `lp <m> <n>`", lineno)
    try:
        m, n = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError("header dimensions must be integers", lineno) from None
    if m < 1 or n < 1:
        raise ParseError("dimensions must be positive", lineno)
    if m > n:
        raise ParseError(f"need m <= n, got m={m}, n={n}", lineno)
    body = lines[1:]
    if len(body) != m + 2:
        raise ParseError(
            f"expected {m + 2} data lines after the header, got {len(body)}",
            body[-1][0] if body else lineno,
        )
    rows = [parse_float_row(no, text, n, f"row {i} of A") for i, (no, text) in enumerate(body[:m])]
    b = parse_float_row(body[m][0], body[m][1], m, "b")
    c = parse_float_row(body[m + 1][0], body[m + 1][1], n, "c")
    if not np.all(np.isfinite(rows)) or not np.all(np.isfinite(b)) or not np.all(np.isfinite(c)):
        raise ParseError("non-finite value in file", body[0][0])
    if not np.all(c > 0):
        raise ParseError("costs must be strictly positive", body[m + 1][0])
    try:
        return LinearProgram(a=np.array(rows), b=b, c=c)
    except (DimensionMismatch, NonFiniteData) as exc:
        raise ParseError(str(exc), lineno) from None


def loss_residual_norm(lp: LinearProgram, x: np.ndarray) -> float:
    """||Ax - b||_2, shared convenience for reports."""
    return float(np.linalg.norm(lp.a @ x - lp.b))


def relative_gap(x_hat: np.ndarray, x_star: np.ndarray) -> float:
    """1^T(x_hat - x_star) / max(1, 1^T x_star)."""
    s_star = float(np.sum(x_star))
    return float((np.sum(x_hat) - s_star) / max(1.0, s_star))
