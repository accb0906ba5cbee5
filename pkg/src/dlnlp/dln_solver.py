"""Reparametrized gradient descent for the feasibility objective.

Writing x = u o u turns  min_x>=0  g(x) = 1/2 ||Ax - b||^2  into the
unconstrained problem  f(u) = 1/2 ||A(u o u) - b||^2, whose gradient step

    u+ = u o (1_n - 2 eta A^T r),    r = A(u o u) - b,

is a componentwise rescaling.  With the stepsize bound

    eta <= min{ 1 / (4 ||A^T r||_inf),  1 / (5 L ||u||_inf^2) },  L = ||A||_2^2,

each step keeps u+ within [u/2, 3u/2] componentwise (so positivity is
preserved) and decreases f by at least (eta/2)||grad f||^2.

The module also provides the continuous-time limit (an explicit embedded
Runge-Kutta 4(5) integrator for du/dt = -2 u o (A^T r)) and a runtime check
of the trajectory inequality sandwiching log(u^K / u^0).
"""
from __future__ import annotations

import enum
import math
import weakref
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._rng import PortableRng
from .errors import (
    DimensionMismatch,
    MissingSnapshots,
    NonFinite,
    PositivityLost,
    StepUnderflow,
)
from .lp_core import LinearProgram, format_floats

# --------------------------------------------------------------------------
# Stepsize policies and initializations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Adaptive:
    """The per-iteration bound, shrunk by a safety factor in (0, 1]."""

    safety: float = 1.0

    def __post_init__(self):
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")


@dataclass(frozen=True)
class Constant:
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class ScaledAdaptive:
    """The adaptive bound multiplied by a factor (> 1 voids the guarantees)."""

    factor: float

    def __post_init__(self):
        if self.factor <= 0:
            raise ValueError("factor must be positive")


StepsizeRule = Union[Adaptive, Constant, ScaledAdaptive]


@dataclass(frozen=True)
class UniformAlpha:
    """u0 = alpha * 1_n."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class CostScaled:
    """u0_i = exp(-c_i / (2 lambda)); the run's limit then approximately
    minimizes c^T x + lambda * sum x_i (log x_i - 1) over the feasible set."""

    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")


InitSpec = Union[UniformAlpha, CostScaled]


def initial_u(lp: LinearProgram, init: InitSpec) -> np.ndarray:
    if isinstance(init, UniformAlpha):
        return np.full(lp.n, init.alpha)
    if isinstance(init, CostScaled):
        return np.exp(-lp.c / (2.0 * init.lam))
    raise TypeError(f"unknown init spec: {init!r}")


# --------------------------------------------------------------------------
# State, loss, gradient
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolverState:
    """One iterate with its cached derived quantities."""

    u: np.ndarray
    k: int
    r: np.ndarray
    f: float
    grad_f: np.ndarray
    last_stepsize: float

    @property
    def x(self) -> np.ndarray:
        return self.u * self.u


def make_state(lp: LinearProgram, u: np.ndarray, k: int = 0, last_stepsize: float = 0.0) -> SolverState:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (lp.n,):
        raise DimensionMismatch(f"u must have length {lp.n}")
    # Overflowed iterates are represented (and later rejected) rather than
    # warned about: dln_step raises NonFinite when it sees the inf.
    with np.errstate(over="ignore", invalid="ignore"):
        r = lp.a @ (u * u) - lp.b
        f = 0.5 * float(r @ r)
        grad = 2.0 * u * (lp.a.T @ r)
    return SolverState(u=u, k=k, r=r, f=f, grad_f=grad, last_stepsize=last_stepsize)


def loss_g(lp: LinearProgram, x: np.ndarray) -> float:
    """1/2 ||Ax - b||_2^2."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (lp.n,):
        raise DimensionMismatch(f"x must have length {lp.n}")
    r = lp.a @ x - lp.b
    return 0.5 * float(r @ r)


def grad_f(lp: LinearProgram, u: np.ndarray) -> np.ndarray:
    """Gradient of f(u) = 1/2 ||A(u o u) - b||^2, namely 2 u o (A^T r)."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (lp.n,):
        raise DimensionMismatch(f"u must have length {lp.n}")
    r = lp.a @ (u * u) - lp.b
    return 2.0 * u * (lp.a.T @ r)


# --------------------------------------------------------------------------
# Operator norm, computed once per problem
# --------------------------------------------------------------------------

_OP_NORM_SQ_CACHE: "weakref.WeakKeyDictionary[LinearProgram, float]" = weakref.WeakKeyDictionary()
_POWER_ITER_SEED = 0x0DD5EED
_POWER_ITER_TOL = 1e-10
_POWER_ITER_CAP = 10_000


def op_norm_sq(lp: LinearProgram) -> float:
    """L = ||A||_2^2 by power iteration on A^T A (cached per problem)."""
    cached = _OP_NORM_SQ_CACHE.get(lp)
    if cached is not None:
        return cached
    rng = PortableRng(_POWER_ITER_SEED)
    v = rng.uniforms(lp.n) - 0.5
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(_POWER_ITER_CAP):
        w = lp.a.T @ (lp.a @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:  # A == 0 is excluded by instance invariants, but be safe
            lam = 0.0
            break
        v = w / norm
        if abs(norm - lam) <= _POWER_ITER_TOL * norm:
            lam = norm
            break
        lam = norm
    _OP_NORM_SQ_CACHE[lp] = lam
    return lam


# --------------------------------------------------------------------------
# Stepping
# --------------------------------------------------------------------------


def adaptive_stepsize(lp: LinearProgram, state: SolverState, safety: float = 1.0) -> float:
    """safety * min{ 1/(4||A^T r||_inf), 1/(5 L ||u||_inf^2) }.

    A zero residual makes the first term +inf, so only the curvature term
    binds there.
    """
    atr = lp.a.T @ state.r
    atr_inf = float(np.max(np.abs(atr)))
    term1 = math.inf if atr_inf == 0.0 else 1.0 / (4.0 * atr_inf)
    u_inf = float(np.max(np.abs(state.u)))
    term2 = 1.0 / (5.0 * op_norm_sq(lp) * u_inf * u_inf)
    return safety * min(term1, term2)


def dln_step(
    lp: LinearProgram,
    state: SolverState,
    eta: float,
    allow_sign_flip: bool = False,
) -> SolverState:
    """One update u+ = u o (1 - 2 eta A^T r).

    Raises PositivityLost if a component of u+ is nonpositive, unless the
    caller opts in to continuing (x = u o u keeps the dynamics meaningful);
    raises NonFinite on overflow.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        atr = lp.a.T @ state.r
        u_next = state.u * (1.0 - 2.0 * eta * atr)
    if not np.all(np.isfinite(u_next)):
        raise NonFinite(f"iterate overflowed at k={state.k}")
    if not allow_sign_flip and np.any(u_next <= 0):
        raise PositivityLost(
            f"stepsize {eta:g} flipped a component sign at k={state.k}"
        )
    return make_state(lp, u_next, state.k + 1, eta)


# --------------------------------------------------------------------------
# Traces and the driver
# --------------------------------------------------------------------------


class TerminationReason(enum.Enum):
    LOSS_BELOW_TOL = "loss_below_tol"
    MAX_ITERS = "max_iters"
    NON_FINITE = "non_finite"
    POSITIVITY_LOST = "positivity_lost"


#: Reasons indicating the run stopped abnormally rather than by budget/target.
ABNORMAL_TERMINATIONS = frozenset(
    {TerminationReason.NON_FINITE, TerminationReason.POSITIVITY_LOST}
)


@dataclass(eq=False)
class SolverTrace:
    """Per-iteration scalars plus u snapshots at a stride.

    Row j describes state j: `eta[j]` is the stepsize that *produced* it
    (0.0 for the initial state).  `first_sign_flip_at` records the first
    iterate with a nonpositive component when a rule that permits sign
    flips was in use; it is None for clean runs.
    """

    ks: np.ndarray
    f: np.ndarray
    res_norm: np.ndarray
    eta: np.ndarray
    snapshot_ks: np.ndarray
    snapshots: np.ndarray
    termination_reason: TerminationReason
    first_sign_flip_at: Optional[int] = None

    def __len__(self) -> int:
        return len(self.ks)

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("k,f,res_norm,eta\n")
            for k, fv, rv, ev in zip(self.ks, self.f, self.res_norm, self.eta):
                fh.write("%d,%s,%s,%s\n" % (k, "%.17g" % fv, "%.17g" % rv, "%.17g" % ev))

    def write_snapshots(self, path: str) -> None:
        """Sidecar format: each line is `k` followed by the n components."""
        with open(path, "w", encoding="utf-8") as fh:
            for k, u in zip(self.snapshot_ks, self.snapshots):
                fh.write("%d %s\n" % (k, format_floats(u)))


def default_snapshot_stride(n: int) -> int:
    return 1 if n <= 64 else 10


class _TraceBuilder:
    def __init__(self, stride: int):
        self.stride = stride
        self.ks: list[int] = []
        self.f: list[float] = []
        self.res: list[float] = []
        self.eta: list[float] = []
        self.snap_ks: list[int] = []
        self.snaps: list[np.ndarray] = []
        self.first_flip: Optional[int] = None

    def record_row(self, k: int, f: float, res_norm: float, eta: float, u: np.ndarray) -> None:
        self.ks.append(k)
        self.f.append(f)
        self.res.append(res_norm)
        self.eta.append(eta)
        if k % self.stride == 0:
            self.snap_ks.append(k)
            self.snaps.append(u.copy())
        if self.first_flip is None and np.any(u <= 0):
            self.first_flip = k

    def record_state(self, state: SolverState) -> None:
        self.record_row(
            state.k,
            state.f,
            float(np.linalg.norm(state.r)),
            state.last_stepsize,
            state.u,
        )

    def finish(self, reason: TerminationReason, final_k: int, final_u: np.ndarray) -> SolverTrace:
        if self.snap_ks and self.snap_ks[-1] != final_k:
            self.snap_ks.append(final_k)
            self.snaps.append(final_u.copy())
        return SolverTrace(
            ks=np.array(self.ks, dtype=np.int64),
            f=np.array(self.f),
            res_norm=np.array(self.res),
            eta=np.array(self.eta),
            snapshot_ks=np.array(self.snap_ks, dtype=np.int64),
            snapshots=np.array(self.snaps) if self.snaps else np.empty((0, len(final_u))),
            termination_reason=reason,
            first_sign_flip_at=self.first_flip,
        )


def solve_dln(
    lp: LinearProgram,
    init: InitSpec,
    rule: StepsizeRule,
    max_iters: int = 5000,
    loss_tol: float = 0.0,
    snapshot_stride: Optional[int] = None,
) -> tuple[SolverState, SolverTrace]:
    """Iterate dln_step until f <= loss_tol or the budget is exhausted.

    Under the Adaptive rule positivity is guaranteed, and a (numerically
    impossible) sign flip terminates with POSITIVITY_LOST.  Constant and
    ScaledAdaptive rules may legitimately flip signs; the run continues
    and the first flip iteration is recorded on the trace — callers that
    surface results must surface that diagnostic too.
    """
    stride = default_snapshot_stride(lp.n) if snapshot_stride is None else snapshot_stride
    if stride < 1:
        raise ValueError("snapshot_stride must be >= 1")
    state = make_state(lp, initial_u(lp, init))
    builder = _TraceBuilder(stride)
    builder.record_state(state)
    reason = TerminationReason.MAX_ITERS
    for _ in range(max_iters):
        if state.f <= loss_tol:
            reason = TerminationReason.LOSS_BELOW_TOL
            break
        if isinstance(rule, Adaptive):
            eta = adaptive_stepsize(lp, state, rule.safety)
            allow_flip = False
        elif isinstance(rule, Constant):
            eta = rule.eta
            allow_flip = True
        elif isinstance(rule, ScaledAdaptive):
            eta = rule.factor * adaptive_stepsize(lp, state)
            allow_flip = True
        else:
            raise TypeError(f"unknown stepsize rule: {rule!r}")
        try:
            state = dln_step(lp, state, eta, allow_sign_flip=allow_flip)
        except PositivityLost:
            reason = TerminationReason.POSITIVITY_LOST
            break
        except NonFinite:
            reason = TerminationReason.NON_FINITE
            break
        builder.record_state(state)
    else:
        if state.f <= loss_tol:
            reason = TerminationReason.LOSS_BELOW_TOL
    return state, builder.finish(reason, state.k, state.u)


# --------------------------------------------------------------------------
# Gradient flow:  du/dt = -2 u o (A^T (A(u o u) - b))
# --------------------------------------------------------------------------

# Dormand-Prince 4(5) pair with the first-same-as-last property.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_FLOW_SAFETY = 0.9
_FLOW_MIN_FACTOR = 0.2
_FLOW_MAX_FACTOR = 10.0
_FLOW_MIN_STEP = 1e-15


def _flow_rhs(lp: LinearProgram, u: np.ndarray) -> np.ndarray:
    return -2.0 * u * (lp.a.T @ (lp.a @ (u * u) - lp.b))


def integrate_flow(
    lp: LinearProgram,
    alpha: np.ndarray,
    t_end: float,
    rtol: float = 1e-8,
) -> np.ndarray:
    """u(t_end) of the gradient flow started at u(0) = alpha > 0.

    Embedded 4(5) pair with error-based step control; steps that lose
    positivity or exceed the tolerance are rejected and retried smaller.
    Raises StepUnderflow when the step cannot shrink further.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (lp.n,):
        raise DimensionMismatch(f"alpha must have length {lp.n}")
    if np.any(alpha <= 0):
        raise ValueError("alpha must be strictly positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    u = alpha.copy()
    t = 0.0
    k1 = _flow_rhs(lp, u)
    # initial step heuristic: aim the first increment at ~1% relative change
    scale_0 = float(np.max(np.abs(k1) / (np.abs(u) + 1e-300)))
    dt = min(t_end, 1e-2 / scale_0) if scale_0 > 0 else t_end
    if dt == 0.0:
        return u
    atol = 1e-300  # pure relative control; u stays positive and bounded
    # Overflowing trial stages are expected near the stability limit and are
    # rejected below; keep numpy quiet about them.
    with np.errstate(over="ignore", invalid="ignore"):
        while t < t_end:
            dt = min(dt, t_end - t)
            if dt < _FLOW_MIN_STEP:
                raise StepUnderflow(f"flow step underflow at t={t:g}")
            ks = [k1]
            for stage in range(1, 6):
                increment = dt * sum(a * k for a, k in zip(_DP_A[stage], ks))
                ks.append(_flow_rhs(lp, u + increment))
            u_new = u + dt * sum(b * k for b, k in zip(_DP_B, ks))
            if np.any(u_new <= 0) or not np.all(np.isfinite(u_new)):
                dt *= 0.5
                continue
            k_new = _flow_rhs(lp, u_new)
            ks.append(k_new)
            err_vec = dt * sum(e * k for e, k in zip(_DP_E, ks))
            scale = atol + rtol * np.maximum(np.abs(u), np.abs(u_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
            if not np.isfinite(err):
                dt *= 0.5
                continue
            if err <= 1.0:
                t += dt
                u = u_new
                k1 = k_new
                factor = _FLOW_MAX_FACTOR if err == 0 else _FLOW_SAFETY * err ** -0.2
                dt *= min(_FLOW_MAX_FACTOR, max(_FLOW_MIN_FACTOR, factor))
            else:
                dt *= max(_FLOW_MIN_FACTOR, _FLOW_SAFETY * err ** -0.2)
    return u


# --------------------------------------------------------------------------
# Trajectory inequality check
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LogBoundReport:
    """Componentwise violations of the log-ratio sandwich

        -2 S1 - 8 S2  <=  log(u^K / u^0)  <=  -2 S1,

    where S1 = sum_j eta_j A^T r^j and S2 = sum_j eta_j^2 (A^T r^j)^2
    over steps j = 0..K-1 of a rule honoring the stepsize bound.
    """

    steps: int
    lower_violation: float
    upper_violation: float

    @property
    def max_violation(self) -> float:
        return max(self.lower_violation, self.upper_violation)


def check_log_bound(
    trace: SolverTrace,
    lp: LinearProgram,
    constant_eta: Optional[float] = None,
) -> LogBoundReport:
    """Evaluate the sandwich along a fully snapshotted trace.

    `constant_eta`, when given, replaces the recorded stepsizes (useful for
    traces of constant-stepsize runs written by older tools that omitted
    the eta column).
    """
    want = np.arange(len(trace.ks))
    if len(trace.snapshot_ks) != len(want) or np.any(trace.snapshot_ks != want):
        raise MissingSnapshots(
            "log-bound check needs a snapshot at every iteration (stride 1)"
        )
    if len(trace.ks) < 2:
        raise MissingSnapshots("need at least one step")
    u0 = trace.snapshots[0]
    uK = trace.snapshots[-1]
    if np.any(u0 <= 0) or np.any(uK <= 0):
        raise PositivityLost("log ratio undefined for nonpositive iterates")
    s1 = np.zeros(lp.n)
    s2 = np.zeros(lp.n)
    n_steps = len(trace.ks) - 1
    for j in range(n_steps):
        u_j = trace.snapshots[j]
        r_j = lp.a @ (u_j * u_j) - lp.b
        atr = lp.a.T @ r_j
        eta_j = constant_eta if constant_eta is not None else float(trace.eta[j + 1])
        s1 += eta_j * atr
        s2 += (eta_j * eta_j) * atr * atr
    log_ratio = np.log(uK / u0)
    lower = -2.0 * s1 - 8.0 * s2
    upper = -2.0 * s1
    return LogBoundReport(
        steps=n_steps,
        lower_violation=float(max(0.0, np.max(lower - log_ratio))),
        upper_violation=float(max(0.0, np.max(log_ratio - upper))),
    )
