"""Independent ground-truth solvers and certified constants.

Nothing here shares iteration machinery with the gradient-descent solver;
these routes exist so its behavior can be checked against something that
fails differently.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import PortableRng
from .errors import (
    DimensionMismatch,
    Infeasible,
    NoConvergence,
    SingularHessian,
    TooLarge,
)
from .lp_core import LinearProgram
from .dln_solver import op_norm_sq


# --------------------------------------------------------------------------
# Entropy-regularized LP via the dual
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EntropyRegularizedLp:
    """min sum_i x_i log(x_i / alpha_i^2) - x_i  s.t.  Ax = b, x >= 0.

    The cost/weight form  min c^T x + lambda sum_i x_i (log x_i - 1)  over the
    same feasible set is the special case alpha_i = exp(-c_i / (2 lambda)),
    up to the constant factor lambda in the objective.
    """

    lp: LinearProgram
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.shape != (self.lp.n,):
            raise DimensionMismatch(f"alpha must have length {self.lp.n}")
        if not np.all(alpha > 0):
            raise ValueError("alpha must be strictly positive")
        arr = alpha.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)

    @classmethod
    def from_lambda(cls, lp: LinearProgram, lam: float) -> "EntropyRegularizedLp":
        if lam <= 0:
            raise ValueError("lambda must be positive")
        return cls(lp=lp, alpha=np.exp(-lp.c / (2.0 * lam)))

    def objective(self, x: np.ndarray) -> float:
        """sum x log(x / alpha^2) - x with the 0 log 0 = 0 convention."""
        x = np.asarray(x, dtype=np.float64)
        terms = np.where(x > 0, x * (np.log(np.maximum(x, 1e-300)) - 2.0 * np.log(self.alpha)) - x, 0.0)
        return float(np.sum(terms))


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Multipliers nu with the primal x(nu) = alpha^2 exp(A^T nu)."""

    nu: np.ndarray
    x: np.ndarray
    kkt_residual: float
    newton_iters: int


def _dual_value(prob: EntropyRegularizedLp, nu: np.ndarray, log_alpha_sq: np.ndarray) -> float:
    # Trial points far out along the Newton direction can overflow exp; the
    # resulting inf is rejected by the Armijo test, so keep numpy quiet.
    with np.errstate(over="ignore"):
        return float(np.sum(np.exp(log_alpha_sq + prob.lp.a.T @ nu)) - prob.lp.b @ nu)


def solve_entropy_lp(
    prob: EntropyRegularizedLp,
    tol: float = 1e-10,
    max_newton_iters: int = 200,
    nu0: Optional[np.ndarray] = None,
) -> DualSolution:
    """Damped Newton on the smooth convex dual

        D(nu) = sum_i alpha_i^2 exp((A^T nu)_i) - b^T nu,

    whose gradient is A x(nu) - b and Hessian A diag(x(nu)) A^T.  Stops when
    ||A x(nu) - b||_2 <= tol.  Backtracks by halving with an Armijo constant
    of 1e-4; D decreases on every accepted step up to a roundoff allowance of
    ~10 eps |D| — near the optimum the predicted decrease drops below one ulp
    of D and a strict test would stall the line search at machine precision.
    """
    a, b = prob.lp.a, prob.lp.b
    log_alpha_sq = 2.0 * np.log(prob.alpha)
    nu = np.zeros(prob.lp.m) if nu0 is None else np.asarray(nu0, dtype=np.float64).copy()
    d_val = _dual_value(prob, nu, log_alpha_sq)
    for it in range(max_newton_iters):
        x = np.exp(log_alpha_sq + a.T @ nu)
        grad = a @ x - b
        res = float(np.linalg.norm(grad))
        if res <= tol:
            return DualSolution(nu=nu, x=x, kkt_residual=res, newton_iters=it)
        hess = (a * x) @ a.T
        try:
            direction = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            raise SingularHessian(
                "dual Hessian is numerically singular; A may lack full row rank"
            ) from None
        slope = float(grad @ direction)
        if not math.isfinite(slope) or slope >= 0:
            raise SingularHessian("Newton direction is not a descent direction")
        noise = 10.0 * np.finfo(np.float64).eps * max(1.0, abs(d_val))
        t = 1.0
        while True:
            candidate = nu + t * direction
            cand_val = _dual_value(prob, candidate, log_alpha_sq)
            if math.isfinite(cand_val) and cand_val <= d_val + 1e-4 * t * slope + noise:
                break
            t *= 0.5
            if t < 1e-18:
                raise NoConvergence("backtracking underflow in dual Newton")
        nu = candidate
        d_val = cand_val
    x = np.exp(log_alpha_sq + a.T @ nu)
    res = float(np.linalg.norm(a @ x - b))
    if res <= tol:
        return DualSolution(nu=nu, x=x, kkt_residual=res, newton_iters=max_newton_iters)
    raise NoConvergence(
        f"dual Newton did not reach tol={tol:g} in {max_newton_iters} iterations "
        f"(residual {res:g})"
    )


def solve_entropy_lp_homotopy(
    lp: LinearProgram,
    lam: float,
    tol: float = 1e-10,
    max_newton_iters: int = 200,
    lam_start: float = 1.0,
    lam_factor: float = 0.5,
) -> DualSolution:
    """Cost-form entropy LP at small lambda via warm-started continuation.

    A cold Newton start at, say, lambda = 0.01 puts x(0) ~ exp(-c/lambda)
    at 1e-40 scale and the first Hessians near singular; walking lambda
    down geometrically and reusing nu keeps every solve well conditioned.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    lam_path = [lam]
    current = max(lam, min(lam_start, 1.0))
    while current > lam * (1 + 1e-12):
        lam_path.append(current)
        current *= lam_factor
    lam_path = sorted(set(lam_path), reverse=True)
    nu = None
    sol = None
    for step_lam in lam_path:
        prob = EntropyRegularizedLp.from_lambda(lp, step_lam)
        # loose tolerance on the way down, full tolerance at the target
        step_tol = tol if step_lam == lam_path[-1] else max(tol, 1e-8)
        sol = solve_entropy_lp(prob, tol=step_tol, max_newton_iters=max_newton_iters, nu0=nu)
        nu = sol.nu
    assert sol is not None
    return sol


# --------------------------------------------------------------------------
# Exact tiny-scale LP by vertex enumeration
# --------------------------------------------------------------------------

VERTEX_MAX_N = 24
VERTEX_MAX_SUBSETS = 10**6
_FEAS_TOL = 1e-9
_SINGULAR_REL_TOL = 1e-12


def _invertible(sub: np.ndarray) -> bool:
    s = np.linalg.svd(sub, compute_uv=False)
    return s[-1] > _SINGULAR_REL_TOL * max(1.0, s[0])


def lp_vertex_oracle(lp: LinearProgram) -> tuple[np.ndarray, float]:
    """Minimize c^T x over basic feasible solutions, enumerated exhaustively.

    Basic solutions with components above -1e-9 are accepted (and clipped to
    zero); value ties are broken by the lexicographically smallest support
    index set.
    """
    m, n = lp.m, lp.n
    if n > VERTEX_MAX_N or math.comb(n, m) > VERTEX_MAX_SUBSETS:
        raise TooLarge(
            f"vertex enumeration capped at n <= {VERTEX_MAX_N} and "
            f"C(n, m) <= {VERTEX_MAX_SUBSETS}"
        )
    best_value = math.inf
    best_x = None
    best_support: Optional[tuple[int, ...]] = None
    for cols in itertools.combinations(range(n), m):
        sub = lp.a[:, cols]
        if not _invertible(sub):
            continue
        x_basis = np.linalg.solve(sub, lp.b)
        if np.any(x_basis < -_FEAS_TOL):
            continue
        x_basis = np.maximum(x_basis, 0.0)
        value = float(lp.c[list(cols)] @ x_basis)
        x = np.zeros(n)
        x[list(cols)] = x_basis
        support = tuple(i for i in range(n) if x[i] > 0)
        if best_x is None:
            accept = True
        else:
            margin = 1e-12 * max(1.0, abs(best_value))
            tie = abs(value - best_value) <= margin
            accept = value < best_value - margin or (tie and support < best_support)
        if accept:
            best_value = value
            best_x = x
            best_support = support
    if best_x is None:
        raise Infeasible("no basic feasible solution")
    return best_x, best_value


# --------------------------------------------------------------------------
# Trajectory-bound constants
# --------------------------------------------------------------------------

CONSTANTS_MAX_EXACT_N = 24
_HEURISTIC_SAMPLES = 20_000
_HEURISTIC_SEED = 0


@dataclass(frozen=True)
class PaperConstants:
    """R^2 bounding ||u^k||_2^2 along valid runs, and a constant stepsize
    eta_bar certified for the whole ball ||u||_2 <= R.

    `exact` is False when the submatrix maximum was sampled rather than
    enumerated (n above the enumeration cap), making r_squared a heuristic
    stand-in rather than a proven bound.
    """

    r_squared: float
    eta_bar: float
    submatrix_count: int
    exact: bool


def _max_inverse_norm_exact(a: np.ndarray) -> tuple[float, int]:
    m, n = a.shape
    best = 0.0
    count = 0
    for cols in itertools.combinations(range(n), m):
        sub = a[:, cols]
        s = np.linalg.svd(sub, compute_uv=False)
        if s[-1] <= _SINGULAR_REL_TOL * max(1.0, s[0]):
            continue
        count += 1
        best = max(best, 1.0 / s[-1])
    return best, count


def _max_inverse_norm_sampled(a: np.ndarray, samples: int) -> tuple[float, int]:
    m, n = a.shape
    rng = PortableRng(_HEURISTIC_SEED)
    best = 0.0
    count = 0
    for _ in range(samples):
        # Floyd-style distinct sampling via sorting uniform keys
        keys = rng.uniforms(n)
        cols = np.argsort(keys)[:m]
        sub = a[:, np.sort(cols)]
        s = np.linalg.svd(sub, compute_uv=False)
        if s[-1] <= _SINGULAR_REL_TOL * max(1.0, s[0]):
            continue
        count += 1
        best = max(best, 1.0 / s[-1])
    return best, count


def compute_constants(
    lp: LinearProgram,
    u0: np.ndarray,
    r0: np.ndarray,
    heuristic: bool = False,
    samples: int = _HEURISTIC_SAMPLES,
) -> PaperConstants:
    """R^2 = sqrt(n) max_I ||A_I^-1||_2 (||r0||_2 + ||b||_2) + e n ||u0||_2^2
    over invertible m x m column submatrices A_I, and

        eta_bar = min{ 1 / (4 ||A||_2 (||A||_2 R^2 + ||b||_2)),
                       1 / (5 L max(R^2, 1)) },    L = ||A||_2^2,

    a closed-form lower bound for the worst case of the stepsize rule over
    the ball ||u||_2 <= R (conservative by construction).  Exact enumeration
    requires n <= 24; pass heuristic=True beyond that to sample submatrices
    instead.
    """
    u0 = np.asarray(u0, dtype=np.float64)
    r0 = np.asarray(r0, dtype=np.float64)
    if u0.shape != (lp.n,) or r0.shape != (lp.m,):
        raise DimensionMismatch("u0 must have length n and r0 length m")
    if lp.n <= CONSTANTS_MAX_EXACT_N:
        max_inv, count = _max_inverse_norm_exact(lp.a)
        exact = True
    elif heuristic:
        max_inv, count = _max_inverse_norm_sampled(lp.a, samples)
        exact = False
    else:
        raise TooLarge(
            f"submatrix enumeration capped at n <= {CONSTANTS_MAX_EXACT_N}; "
            "pass heuristic=True for a sampled bound"
        )
    norm_b = float(np.linalg.norm(lp.b))
    r_squared = (
        math.sqrt(lp.n) * max_inv * (float(np.linalg.norm(r0)) + norm_b)
        + math.e * lp.n * float(u0 @ u0)
    )
    op_sq = op_norm_sq(lp)
    op = math.sqrt(op_sq)
    eta_bar = min(
        1.0 / (4.0 * op * (op * r_squared + norm_b)),
        1.0 / (5.0 * op_sq * max(r_squared, 1.0)),
    )
    return PaperConstants(
        r_squared=r_squared,
        eta_bar=eta_bar,
        submatrix_count=count,
        exact=exact,
    )
