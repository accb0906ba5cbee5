"""Squared-parametrization gradient descent: steps, traces, flow, log bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlnlp import (
    Adaptive,
    Constant,
    CostScaled,
    DimensionMismatch,
    EntropyRegularizedLp,
    InstanceSeedSpec,
    MissingSnapshots,
    NonFinite,
    PositivityLost,
    ScaledAdaptive,
    TerminationReason,
    UniformAlpha,
    adaptive_stepsize,
    check_log_bound,
    default_snapshot_stride,
    dln_step,
    gen_instance,
    initial_u,
    integrate_flow,
    loss_g,
    make_state,
    op_norm_sq,
    solve_dln,
    solve_entropy_lp,
)
from dlnlp.lp_core import LinearProgram


def lp_1d(a=1.0, b=0.0):
    return LinearProgram(a=np.array([[a]]), b=np.array([b]), c=np.array([1.0]))


# ---------------------------------------------------------------------------
# Loss and gradient
# ---------------------------------------------------------------------------


def test_loss_zero_at_planted_point():
    lp, planted = gen_instance(InstanceSeedSpec(m=4, n=13, rng_seed=8))
    assert loss_g(lp, planted) == 0.0


def test_loss_simple_value():
    assert loss_g(lp_1d(b=2.0), np.array([0.0])) == pytest.approx(2.0)


def test_grad_zero_at_feasible_point():
    lp, planted = gen_instance(InstanceSeedSpec(m=4, n=13, rng_seed=8))
    state = make_state(lp, np.sqrt(planted))
    np.testing.assert_allclose(state.grad_f, np.zeros(13), atol=1e-12)


def test_grad_simple_value():
    state = make_state(lp_1d(), np.array([1.0]))
    np.testing.assert_array_equal(state.grad_f, [2.0])


def test_grad_matches_finite_differences():
    lp, _ = gen_instance(InstanceSeedSpec(m=4, n=9, rng_seed=3))
    u = 0.5 + 0.1 * np.arange(9)
    state = make_state(lp, u)
    h = 1e-6
    fd = np.zeros(9)
    for i in range(9):
        up, um = u.copy(), u.copy()
        up[i] += h
        um[i] -= h
        fd[i] = (loss_g(lp, up * up) - loss_g(lp, um * um)) / (2 * h)
    rel = np.linalg.norm(fd - state.grad_f) / np.linalg.norm(state.grad_f)
    assert rel <= 1e-6


def test_op_norm_sq_matches_svd():
    lp, _ = gen_instance(InstanceSeedSpec(m=6, n=21, rng_seed=10))
    exact = float(np.linalg.norm(lp.a, ord=2) ** 2)
    assert op_norm_sq(lp) == pytest.approx(exact, rel=1e-6)


# ---------------------------------------------------------------------------
# Stepsize rule
# ---------------------------------------------------------------------------


def test_adaptive_stepsize_curvature_bound_binds():
    # residual term 1/4, curvature term 1/5: the smaller one wins
    state = make_state(lp_1d(), np.array([1.0]))
    assert adaptive_stepsize(lp_1d(), state) == pytest.approx(0.2)


def test_adaptive_stepsize_negative_residual_same_magnitude():
    lp = lp_1d(b=2.0)
    state = make_state(lp, np.array([1.0]))
    assert adaptive_stepsize(lp, state) == pytest.approx(0.2)


def test_adaptive_stepsize_safety_scales():
    lp = lp_1d()
    state = make_state(lp, np.array([1.0]))
    assert adaptive_stepsize(lp, state, safety=0.5) == pytest.approx(0.1)


def test_adaptive_stepsize_zero_residual_uses_curvature_only():
    lp = lp_1d(a=2.0, b=2.0)
    state = make_state(lp, np.array([1.0]))  # 2*1^2 = 2 = b, r = 0
    assert adaptive_stepsize(lp, state) == pytest.approx(1.0 / 20.0)


@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=2, max_value=5))
@settings(max_examples=20, deadline=None)
def test_adaptive_stepsize_honors_both_terms(seed, m):
    lp, _ = gen_instance(InstanceSeedSpec(m=m, n=3 * m, rng_seed=seed))
    state = make_state(lp, np.full(3 * m, 0.7))
    eta = adaptive_stepsize(lp, state)
    atr_inf = float(np.max(np.abs(lp.a.T @ state.r)))
    if atr_inf > 0:
        assert eta <= 1.0 / (4.0 * atr_inf) * (1 + 1e-12)
    assert eta <= 1.0 / (5.0 * op_norm_sq(lp) * np.max(state.u) ** 2) * (1 + 1e-12)
    # multiplier magnitude stays below 1/2, so factors stay in [1/2, 3/2]
    assert 2.0 * eta * atr_inf <= 0.5 + 1e-12


# ---------------------------------------------------------------------------
# Single step
# ---------------------------------------------------------------------------


def test_step_fixed_point_at_zero_residual():
    lp = lp_1d(a=2.0, b=2.0)
    state = make_state(lp, np.array([1.0]))
    nxt = dln_step(lp, state, 0.05)
    np.testing.assert_array_equal(nxt.u, state.u)
    assert nxt.k == 1


def test_step_simple_value():
    state = make_state(lp_1d(), np.array([1.0]))
    nxt = dln_step(lp_1d(), state, 0.1)
    np.testing.assert_allclose(nxt.u, [0.8])
    assert nxt.last_stepsize == 0.1


def test_step_rejects_sign_flip_by_default():
    state = make_state(lp_1d(), np.array([1.0]))
    with pytest.raises(PositivityLost):
        dln_step(lp_1d(), state, 0.5)  # multiplier exactly 0


def test_step_sign_flip_opt_in():
    state = make_state(lp_1d(), np.array([1.0]))
    nxt = dln_step(lp_1d(), state, 0.6, allow_sign_flip=True)
    np.testing.assert_allclose(nxt.u, [-0.2])


def test_step_rejects_nonpositive_eta():
    state = make_state(lp_1d(), np.array([1.0]))
    with pytest.raises(ValueError):
        dln_step(lp_1d(), state, 0.0)


def test_step_overflow_raises_non_finite():
    lp = lp_1d()
    state = make_state(lp, np.array([1e200]))  # r overflows to inf downstream
    with pytest.raises(NonFinite):
        dln_step(lp, dln_step(lp, state, 1e10, allow_sign_flip=True), 1e10, allow_sign_flip=True)


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=25, deadline=None)
def test_step_sandwich_and_decrease_under_adaptive_rule(seed):
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=9, rng_seed=seed))
    state = make_state(lp, np.full(9, 0.4))
    for _ in range(5):
        eta = adaptive_stepsize(lp, state)
        nxt = dln_step(lp, state, eta)
        assert np.all(nxt.u >= 0.5 * state.u - 1e-15)
        assert np.all(nxt.u <= 1.5 * state.u + 1e-15)
        grad_sq = float(state.grad_f @ state.grad_f)
        assert state.f - nxt.f >= 0.5 * eta * grad_sq - 1e-12 * max(1.0, state.f)
        state = nxt


# ---------------------------------------------------------------------------
# Initialization specs
# ---------------------------------------------------------------------------


def test_uniform_alpha_init():
    lp, _ = gen_instance(InstanceSeedSpec(m=2, n=6, rng_seed=0))
    np.testing.assert_array_equal(initial_u(lp, UniformAlpha(alpha=0.1)), np.full(6, 0.1))


def test_cost_scaled_init():
    lp, _ = gen_instance(InstanceSeedSpec(m=2, n=6, rng_seed=0))
    u0 = initial_u(lp, CostScaled(lam=0.5))
    np.testing.assert_allclose(u0, np.full(6, math.exp(-1.0)))


# ---------------------------------------------------------------------------
# Full solves
# ---------------------------------------------------------------------------


def test_solve_one_dimensional_converges_to_one():
    lp = lp_1d(b=1.0)
    state, trace = solve_dln(lp, UniformAlpha(alpha=0.5), Adaptive(), max_iters=2000, loss_tol=1e-18)
    assert trace.termination_reason == TerminationReason.LOSS_BELOW_TOL
    assert state.f <= 1e-18
    np.testing.assert_allclose(state.x, [1.0], atol=1e-8)


def test_solve_seeded_instance_reaches_small_loss():
    lp, _ = gen_instance(InstanceSeedSpec(m=10, n=40, rng_seed=0))
    state, trace = solve_dln(lp, UniformAlpha(alpha=1e-3), Adaptive(), max_iters=5000)
    assert state.f < 1e-8
    assert trace.first_sign_flip_at is None


def test_solve_loss_never_increases_under_adaptive_rule():
    lp, _ = gen_instance(InstanceSeedSpec(m=5, n=18, rng_seed=4))
    _, trace = solve_dln(lp, UniformAlpha(alpha=0.05), Adaptive(), max_iters=800)
    assert np.all(np.diff(trace.f) <= 1e-15)


def test_solve_trace_rows_align_with_states():
    lp = lp_1d(b=1.0)
    state, trace = solve_dln(lp, UniformAlpha(alpha=0.5), Adaptive(), max_iters=3)
    assert trace.ks.tolist() == [0, 1, 2, 3]
    assert trace.eta[0] == 0.0
    assert np.all(trace.eta[1:] > 0)
    assert trace.f[-1] == state.f
    # every recorded f is recomputable from the snapshot at the same k
    for k, u in zip(trace.snapshot_ks, trace.snapshots):
        assert trace.f[list(trace.ks).index(k)] == pytest.approx(loss_g(lp, u * u))


def test_solve_constant_rule_continues_through_sign_flip():
    state, trace = solve_dln(lp_1d(), UniformAlpha(alpha=1.0), Constant(eta=0.6), max_iters=50)
    assert trace.first_sign_flip_at == 1
    assert trace.termination_reason in (
        TerminationReason.MAX_ITERS,
        TerminationReason.LOSS_BELOW_TOL,
    )
    assert len(trace) > 2  # kept stepping after the flip


def test_solve_constant_rule_flip_to_exact_zero_finishes():
    # multiplier hits exactly zero: x jumps to the optimum of Ax = 0
    state, trace = solve_dln(lp_1d(), UniformAlpha(alpha=1.0), Constant(eta=0.5), max_iters=50)
    assert trace.termination_reason == TerminationReason.LOSS_BELOW_TOL
    assert state.f == 0.0
    assert trace.first_sign_flip_at == 1


def test_solve_overflow_terminates_with_reason():
    state, trace = solve_dln(lp_1d(), UniformAlpha(alpha=1.0), Constant(eta=1e150), max_iters=50)
    assert trace.termination_reason == TerminationReason.NON_FINITE
    # the recorded tail is still finite history
    assert np.all(np.isfinite(trace.snapshots[0]))


def test_solve_scaled_adaptive_runs():
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=10, rng_seed=2))
    state, trace = solve_dln(lp, UniformAlpha(alpha=0.01), ScaledAdaptive(factor=10.0), max_iters=400)
    assert trace.termination_reason in (
        TerminationReason.MAX_ITERS,
        TerminationReason.LOSS_BELOW_TOL,
    )
    assert len(trace) == trace.ks[-1] + 1


def test_solve_snapshot_stride():
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=10, rng_seed=2))
    _, trace = solve_dln(lp, UniformAlpha(alpha=0.05), Adaptive(), max_iters=12, snapshot_stride=5)
    assert trace.snapshot_ks.tolist() == [0, 5, 10, 12]
    with pytest.raises(ValueError):
        solve_dln(lp, UniformAlpha(alpha=0.05), Adaptive(), max_iters=2, snapshot_stride=0)


def test_default_snapshot_stride_threshold():
    assert default_snapshot_stride(64) == 1
    assert default_snapshot_stride(65) == 10


def test_trace_csv_round_trip(tmp_path):
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=10, rng_seed=2))
    _, trace = solve_dln(lp, UniformAlpha(alpha=0.05), Adaptive(), max_iters=20)
    csv_path = tmp_path / "t.csv"
    snap_path = tmp_path / "s.txt"
    trace.write_csv(str(csv_path))
    trace.write_snapshots(str(snap_path))

    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "k,f,res_norm,eta"
    assert len(lines) == len(trace) + 1
    row0 = lines[1].split(",")
    assert int(row0[0]) == 0 and float(row0[3]) == 0.0
    # 17 significant digits round-trip doubles exactly
    assert [float(l.split(",")[1]) for l in lines[1:]] == trace.f.tolist()

    snaps = [l.split() for l in snap_path.read_text().strip().splitlines()]
    assert [int(s[0]) for s in snaps] == trace.snapshot_ks.tolist()
    last = np.array([float(v) for v in snaps[-1][1:]])
    np.testing.assert_array_equal(last, trace.snapshots[-1])


# ---------------------------------------------------------------------------
# Gradient flow
# ---------------------------------------------------------------------------


def test_flow_stays_at_equilibrium():
    lp = LinearProgram(a=np.array([[1.0]]), b=np.array([0.25]), c=np.array([1.0]))
    u = integrate_flow(lp, np.array([0.5]), t_end=3.0)
    np.testing.assert_allclose(u, [0.5], rtol=1e-10)


def test_flow_one_dimensional_monotone_approach():
    lp = lp_1d(b=1.0)
    u_mid = integrate_flow(lp, np.array([0.5]), t_end=1.0)
    u_late = integrate_flow(lp, np.array([0.5]), t_end=20.0)
    assert 0.5 < u_mid[0] < u_late[0] <= 1.0 + 1e-9
    np.testing.assert_allclose(u_late, [1.0], atol=1e-6)


def test_flow_limit_matches_entropy_oracle():
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=8, rng_seed=6))
    alpha = np.full(8, 0.3)
    u = integrate_flow(lp, alpha, t_end=400.0, rtol=1e-10)
    sol = solve_entropy_lp(EntropyRegularizedLp(lp=lp, alpha=alpha))
    np.testing.assert_allclose(u * u, sol.x, atol=1e-4)


def test_flow_input_validation():
    lp = lp_1d()
    with pytest.raises(ValueError):
        integrate_flow(lp, np.array([0.0]), t_end=1.0)
    with pytest.raises(ValueError):
        integrate_flow(lp, np.array([1.0]), t_end=-1.0)
    with pytest.raises(DimensionMismatch):
        integrate_flow(lp, np.ones(2), t_end=1.0)


def test_flow_zero_time_returns_start():
    lp = lp_1d(b=1.0)
    np.testing.assert_array_equal(integrate_flow(lp, np.array([0.5]), t_end=0.0), [0.5])


# ---------------------------------------------------------------------------
# Log-ratio sandwich
# ---------------------------------------------------------------------------


def test_log_bound_single_step_by_hand():
    # u: 1 -> 0.8 at eta = 0.1; S1 = 0.1, S2 = 0.01
    # bounds: -0.28 <= log 0.8 = -0.2231 <= -0.2
    _, trace = solve_dln(
        lp_1d(), UniformAlpha(alpha=1.0), Constant(eta=0.1), max_iters=1, snapshot_stride=1
    )
    report = check_log_bound(trace, lp_1d())
    assert report.steps == 1
    assert report.max_violation == 0.0


def test_log_bound_holds_along_adaptive_run():
    lp, _ = gen_instance(InstanceSeedSpec(m=5, n=12, rng_seed=1))
    _, trace = solve_dln(lp, UniformAlpha(alpha=0.1), Adaptive(), max_iters=200, snapshot_stride=1)
    report = check_log_bound(trace, lp)
    assert report.max_violation <= 1e-8


def test_log_bound_zero_residual_run_is_tight():
    lp = LinearProgram(a=np.array([[1.0]]), b=np.array([0.25]), c=np.array([1.0]))
    _, trace = solve_dln(
        lp, UniformAlpha(alpha=0.5), Constant(eta=0.1), max_iters=3,
        loss_tol=-1.0, snapshot_stride=1,
    )
    report = check_log_bound(trace, lp)
    assert report.steps == 3
    assert report.max_violation == 0.0


def test_log_bound_constant_eta_override_matches_recorded():
    _, trace = solve_dln(
        lp_1d(b=1.0), UniformAlpha(alpha=0.5), Constant(eta=0.05), max_iters=10, snapshot_stride=1
    )
    a = check_log_bound(trace, lp_1d(b=1.0))
    b = check_log_bound(trace, lp_1d(b=1.0), constant_eta=0.05)
    assert a.lower_violation == b.lower_violation
    assert a.upper_violation == b.upper_violation


def test_log_bound_requires_full_snapshots():
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=10, rng_seed=2))
    _, trace = solve_dln(lp, UniformAlpha(alpha=0.05), Adaptive(), max_iters=10, snapshot_stride=2)
    with pytest.raises(MissingSnapshots):
        check_log_bound(trace, lp)


# ---------------------------------------------------------------------------
# Scalar inequalities used by the bound constants
# ---------------------------------------------------------------------------


@given(
    st.floats(min_value=1e-8, max_value=1e8),
    st.floats(min_value=1e-8, max_value=1e8),
)
@settings(max_examples=200, deadline=None)
def test_entropy_lower_bound_scalar(t, alpha):
    assert t * math.log(t / alpha) >= -alpha / math.e * (1 + 1e-12) - 1e-300


@given(st.floats(min_value=1e-12, max_value=1e12))
@settings(max_examples=200, deadline=None)
def test_exponential_ratio_scalar(t):
    # (1 + t)^(1 + 1/t) >= e, in log form for numerical stability
    assert (1.0 + 1.0 / t) * math.log1p(t) >= 1.0 - 1e-12
