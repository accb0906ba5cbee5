"""Reductions of basis pursuit, optimal transport, and general LPs to the
standard form  min c^T x : Ax = b, x >= 0  with strictly positive costs.

Each reduction returns the standard-form problem together with a back_map
that recovers a solution of the original problem from x.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, MarginalMismatch, ParseError, ShiftTooSmall
from .lp_core import (
    LinearProgram,
    data_lines,
    format_floats,
    parse_float_row,
)

MARGINAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BasisPursuitInstance:
    """Exact-fit l1 minimization data: min ||beta||_1 s.t. X beta = y."""

    x_data: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x_data = np.asarray(self.x_data, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x_data.ndim != 2 or y.ndim != 1:
            raise DimensionMismatch("x_data must be a matrix and y a vector")
        if x_data.shape[0] != y.shape[0]:
            raise DimensionMismatch("x_data and y row counts differ")
        if x_data.shape[0] < 1 or x_data.shape[1] < 1:
            raise DimensionMismatch("need at least one sample and one feature")
        if not (np.all(np.isfinite(x_data)) and np.all(np.isfinite(y))):
            raise DimensionMismatch("basis pursuit data must be finite")
        object.__setattr__(self, "x_data", x_data)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True, eq=False)
class OtInstance:
    """Discrete transport data: positive cost matrix and two simplex marginals."""

    cost: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=np.float64)
        w = np.asarray(self.row_marginal, dtype=np.float64)
        v = np.asarray(self.col_marginal, dtype=np.float64)
        if cost.ndim != 2:
            raise DimensionMismatch("cost must be a matrix")
        mr, nc = cost.shape
        if w.shape != (mr,) or v.shape != (nc,):
            raise DimensionMismatch("marginal lengths must match the cost shape")
        if not np.all(cost > 0):
            raise ValueError("cost entries must be strictly positive")
        if np.any(w < 0) or np.any(v < 0):
            raise MarginalMismatch("marginals must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > MARGINAL_TOL or abs(float(np.sum(v)) - 1.0) > MARGINAL_TOL:
            raise MarginalMismatch("marginals must sum to 1 within 1e-12")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "row_marginal", w)
        object.__setattr__(self, "col_marginal", v)

    @property
    def m_rows(self) -> int:
        return self.cost.shape[0]

    @property
    def n_cols(self) -> int:
        return self.cost.shape[1]


@dataclass(frozen=True, eq=False)
class GeneralLp:
    """Equality-form LP whose costs may be negative, plus the big-M budget
    and the cost shift multiple that make it reducible to standard form."""

    a_tilde: np.ndarray
    b_tilde: np.ndarray
    c_tilde: np.ndarray
    big_m: float
    shift_lambda: float

    def __post_init__(self):
        a = np.asarray(self.a_tilde, dtype=np.float64)
        b = np.asarray(self.b_tilde, dtype=np.float64)
        c = np.asarray(self.c_tilde, dtype=np.float64)
        if a.ndim != 2 or b.shape != (a.shape[0],) or c.shape != (a.shape[1],):
            raise DimensionMismatch("inconsistent general LP shapes")
        if self.big_m <= 0:
            raise ValueError("big_m must be positive")
        if self.shift_lambda <= 0:
            raise ValueError("shift_lambda must be positive")
        if np.any(c + self.shift_lambda <= 0):
            raise ShiftTooSmall(
                "shift_lambda must exceed -min(c_tilde) to keep costs positive"
            )
        object.__setattr__(self, "a_tilde", a)
        object.__setattr__(self, "b_tilde", b)
        object.__setattr__(self, "c_tilde", c)


def reduce_basis_pursuit(
    bp: BasisPursuitInstance,
) -> tuple[LinearProgram, Callable[[np.ndarray], np.ndarray]]:
    """Split beta = w - z with w, z >= 0: A = [X, -X], b = y, c = 1_{2p}.

    Any optimum has w o z = 0, so 1^T(w + z) equals ||beta||_1 there.
    """
    x_data, y = bp.x_data, bp.y
    p = x_data.shape[1]
    lp = LinearProgram(
        a=np.hstack([x_data, -x_data]),
        b=y,
        c=np.ones(2 * p),
    )

    def back_map(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (2 * p,):
            raise DimensionMismatch(f"expected length {2 * p}")
        return x[:p] - x[p:]

    return lp, back_map


def reduce_ot(
    ot: OtInstance,
) -> tuple[LinearProgram, Callable[[np.ndarray], np.ndarray]]:
    """Transport polytope in standard form over vec(X), row-major.

    Stacks the m row-sum constraints then the column-sum constraints and
    drops the last column-sum row: the full system always has one redundant
    equation (both marginal families sum the whole plan), and dropping it
    restores full row rank m + n - 1.
    """
    mr, nc = ot.m_rows, ot.n_cols
    n_var = mr * nc
    rows = np.zeros((mr + nc, n_var))
    for i in range(mr):
        rows[i, i * nc : (i + 1) * nc] = 1.0
    for j in range(nc):
        rows[mr + j, j::nc] = 1.0
    a = rows[: mr + nc - 1]
    b = np.concatenate([ot.row_marginal, ot.col_marginal[:-1]])
    lp = LinearProgram(a=a, b=b, c=ot.cost.reshape(-1))

    def back_map(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (n_var,):
            raise DimensionMismatch(f"expected length {n_var}")
        return x.reshape(mr, nc)

    return lp, back_map


def reduce_general_lp(
    g: GeneralLp,
) -> tuple[LinearProgram, Callable[[np.ndarray], np.ndarray]]:
    """Big-M reduction: cap total mass by 1^T z + t = M with a slack t, and
    shift costs by lambda along the new constraint.

    Optimal values relate by c_tilde^T z* = c^T x* - lambda * M.
    """
    m, n = g.a_tilde.shape
    a = np.zeros((m + 1, n + 1))
    a[:m, :n] = g.a_tilde
    a[m, :] = 1.0
    b = np.concatenate([g.b_tilde, [g.big_m]])
    c = np.concatenate([g.c_tilde + g.shift_lambda, [g.shift_lambda]])
    lp = LinearProgram(a=a, b=b, c=c)

    def back_map(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (n + 1,):
            raise DimensionMismatch(f"expected length {n + 1}")
        return x[:n]

    return lp, back_map


# --------------------------------------------------------------------------
# OT file format: header `ot <m> <n>`, m cost rows, row marginal, col marginal
# --------------------------------------------------------------------------


def write_ot(ot: OtInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"ot {ot.m_rows} {ot.n_cols}\n")
        for row in ot.cost:
            fh.write(format_floats(row) + "\n")
        fh.write(format_floats(ot.row_marginal) + "\n")
        fh.write(format_floats(ot.col_marginal) + "\n")


def read_ot(path: str) -> OtInstance:
    lines = data_lines(path)
    if not lines:
        raise ParseError("empty file", 1)
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "ot":
        raise ParseError("header must be `ot <m> <n>`", lineno)
    try:
        mr, nc = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError("header dimensions must be integers", lineno) from None
    if mr < 1 or nc < 1:
        raise ParseError("dimensions must be positive", lineno)
    body = lines[1:]
    if len(body) != mr + 2:
        raise ParseError(
            f"expected {mr + 2} data lines after the header, got {len(body)}",
            body[-1][0] if body else lineno,
        )
    cost = [parse_float_row(no, text, nc, f"cost row {i}") for i, (no, text) in enumerate(body[:mr])]
    w = parse_float_row(body[mr][0], body[mr][1], mr, "row marginal")
    v = parse_float_row(body[mr + 1][0], body[mr + 1][1], nc, "column marginal")
    try:
        return OtInstance(cost=np.array(cost), row_marginal=w, col_marginal=v)
    except (MarginalMismatch, ValueError, DimensionMismatch) as exc:
        raise ParseError(str(exc), lineno) from None
