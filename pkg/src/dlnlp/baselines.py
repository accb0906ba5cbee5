"""Baselines the reparametrized solver is compared against.

Mirror descent with the entropy reference function (exponentiated gradient)
attacks the same feasibility objective g(x) = 1/2 ||Ax - b||^2 through the
multiplicative update

    x+ = x o exp(-grad g(x) / L_k),

which stays positive for any stepsize.  For vanishing stepsizes the two
methods follow the same trajectory; at practical stepsizes they genuinely
differ, which is exactly what the comparison experiments measure.

The Sinkhorn algorithm solves the entropy-regularized transport problem by
alternating row/column rescalings of the Gibbs kernel K = exp(-C/lambda).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .dln_solver import (
    SolverTrace,
    TerminationReason,
    _TraceBuilder,
    adaptive_stepsize,
    make_state,
    op_norm_sq,
)
from .errors import DimensionMismatch, KernelUnderflow
from .lp_core import LinearProgram
from .reductions import OtInstance

_EXP_LIMIT = 700.0  # |exponent| beyond this overflows float64


@dataclass(frozen=True, eq=False)
class MirrorState:
    """Strictly positive iterate with its cached loss."""

    x_tilde: np.ndarray
    k: int
    loss: float


def make_mirror_state(lp: LinearProgram, x_tilde: np.ndarray, k: int = 0) -> MirrorState:
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    if x_tilde.shape != (lp.n,):
        raise DimensionMismatch(f"x must have length {lp.n}")
    if np.any(x_tilde <= 0):
        raise ValueError("mirror iterates must be strictly positive")
    r = lp.a @ x_tilde - lp.b
    return MirrorState(x_tilde=x_tilde, k=k, loss=0.5 * float(r @ r))


def mirror_step(lp: LinearProgram, state: MirrorState, l_k: float) -> MirrorState:
    """x+ = x o exp(-grad g(x) / l_k); positive by construction.

    Raises OverflowError when the exponent magnitude exceeds 700, the
    float64 overflow edge — the stepsize (1/l_k) is too large for this
    residual scale.
    """
    if l_k <= 0:
        raise ValueError("l_k must be positive")
    grad = lp.a.T @ (lp.a @ state.x_tilde - lp.b)
    exponent = -grad / l_k
    if float(np.max(np.abs(exponent))) > _EXP_LIMIT:
        raise OverflowError(
            f"mirror exponent exceeds {_EXP_LIMIT:g} at k={state.k}; stepsize too large"
        )
    return make_mirror_state(lp, state.x_tilde * np.exp(exponent), state.k + 1)


LSchedule = Union[float, Callable[[MirrorState], float]]


def matched_l_schedule(lp: LinearProgram, scale: float = 1.0) -> Callable[[MirrorState], float]:
    """The stepsize map used for paired comparisons: evaluate the adaptive
    bound eta at the mirror's own iterate (with sqrt(x) playing u) and set
    L_k = 1 / (2 eta), optionally scaling eta first."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    l_op = op_norm_sq(lp)

    def schedule(state: MirrorState) -> float:
        grad = lp.a.T @ (lp.a @ state.x_tilde - lp.b)
        g_inf = float(np.max(np.abs(grad)))
        term1 = math.inf if g_inf == 0.0 else 1.0 / (4.0 * g_inf)
        term2 = 1.0 / (5.0 * l_op * float(np.max(state.x_tilde)))
        eta = scale * min(term1, term2)
        return 1.0 / (2.0 * eta)

    return schedule


def solve_mirror(
    lp: LinearProgram,
    x0: np.ndarray,
    l_schedule: LSchedule,
    max_iters: int = 5000,
    loss_tol: float = 0.0,
    snapshot_stride: int | None = None,
) -> tuple[MirrorState, SolverTrace]:
    """Iterate mirror_step with L_k from a constant or per-state schedule.

    The trace shares the gradient-descent CSV schema; its eta column stores
    the equivalent stepsize 1/(2 L_k).
    """
    from .dln_solver import default_snapshot_stride

    stride = default_snapshot_stride(lp.n) if snapshot_stride is None else snapshot_stride
    state = make_mirror_state(lp, x0)
    builder = _TraceBuilder(stride)
    builder.record_row(0, state.loss, math.sqrt(2.0 * state.loss), 0.0, np.sqrt(state.x_tilde))
    reason = TerminationReason.MAX_ITERS
    for _ in range(max_iters):
        if state.loss <= loss_tol:
            reason = TerminationReason.LOSS_BELOW_TOL
            break
        l_k = l_schedule(state) if callable(l_schedule) else float(l_schedule)
        state = mirror_step(lp, state, l_k)
        builder.record_row(
            state.k,
            state.loss,
            math.sqrt(2.0 * state.loss),
            1.0 / (2.0 * l_k),
            np.sqrt(state.x_tilde),
        )
    else:
        if state.loss <= loss_tol:
            reason = TerminationReason.LOSS_BELOW_TOL
    return state, builder.finish(reason, state.k, np.sqrt(state.x_tilde))


# --------------------------------------------------------------------------
# Sinkhorn
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SinkhornState:
    """Row/column scalings of the Gibbs kernel; the plan is D(p) K D(q)."""

    p: np.ndarray
    q: np.ndarray
    kernel: np.ndarray
    t: int

    @property
    def plan(self) -> np.ndarray:
        return self.p[:, None] * self.kernel * self.q[None, :]


def make_sinkhorn_state(ot: OtInstance, lam: float) -> SinkhornState:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    kernel = np.exp(-ot.cost / lam)
    if np.any(kernel == 0.0):
        raise KernelUnderflow(
            f"exp(-cost/lambda) underflowed for lambda={lam:g}; "
            "increase lambda (log-domain rescue is out of scope)"
        )
    return SinkhornState(
        p=np.ones(ot.m_rows), q=np.ones(ot.n_cols), kernel=kernel, t=0
    )


def sinkhorn_row_scale(state: SinkhornState, w: np.ndarray) -> SinkhornState:
    """p <- w / (K q): afterwards the plan's row sums equal w exactly."""
    return SinkhornState(
        p=w / (state.kernel @ state.q), q=state.q, kernel=state.kernel, t=state.t
    )


def sinkhorn_col_scale(state: SinkhornState, v: np.ndarray) -> SinkhornState:
    """q <- v / (K^T p): afterwards the plan's column sums equal v exactly."""
    return SinkhornState(
        p=state.p, q=v / (state.kernel.T @ state.p), kernel=state.kernel, t=state.t + 1
    )


def solve_sinkhorn(
    ot: OtInstance,
    lam: float,
    max_iters: int = 10_000,
    marginal_tol: float = 1e-9,
) -> tuple[np.ndarray, int]:
    """Alternate row/column rescalings until both marginal residuals
    ||X 1 - w||_1 and ||X^T 1 - v||_1 fall below marginal_tol.

    Returns (plan, sweeps_used).  If the budget runs out the current plan is
    returned with sweeps_used == max_iters; callers detect truncation by
    comparing the two.
    """
    w, v = ot.row_marginal, ot.col_marginal
    state = make_sinkhorn_state(ot, lam)
    for _ in range(max_iters):
        state = sinkhorn_col_scale(sinkhorn_row_scale(state, w), v)
        plan = state.plan
        res_rows = float(np.sum(np.abs(plan.sum(axis=1) - w)))
        res_cols = float(np.sum(np.abs(plan.sum(axis=0) - v)))
        if res_rows <= marginal_tol and res_cols <= marginal_tol:
            return plan, state.t
    return state.plan, state.t
