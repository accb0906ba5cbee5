"""LP container, feasibility checking, instance generation, and file IO."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlnlp import (
    DimensionMismatch,
    InstanceSeedSpec,
    LinearProgram,
    NonFiniteData,
    ParseError,
    PortableRng,
    gen_instance,
    loss_residual_norm,
    read_lp,
    relative_gap,
    validate_lp,
    write_lp,
)


def simple_lp(a, b, c=None):
    a = np.asarray(a, dtype=np.float64)
    if c is None:
        c = np.ones(a.shape[1])
    return LinearProgram(a=a, b=np.asarray(b, dtype=np.float64), c=np.asarray(c, dtype=np.float64))


# ---------------------------------------------------------------------------
# Container invariants
# ---------------------------------------------------------------------------


def test_rejects_more_rows_than_columns():
    with pytest.raises(DimensionMismatch):
        simple_lp(np.ones((2, 1)), [1.0, 1.0])


def test_rejects_zero_cost():
    with pytest.raises(NonFiniteData):
        simple_lp(np.eye(2), [1.0, 1.0], c=[1.0, 0.0])


def test_rejects_negative_cost():
    with pytest.raises(NonFiniteData):
        simple_lp(np.eye(2), [1.0, 1.0], c=[1.0, -3.0])


def test_rejects_nan():
    with pytest.raises(NonFiniteData):
        simple_lp(np.eye(2), [1.0, np.nan])


def test_rejects_wrong_vector_lengths():
    with pytest.raises(DimensionMismatch):
        LinearProgram(a=np.eye(2), b=np.ones(3), c=np.ones(2))


# ---------------------------------------------------------------------------
# validate_lp
# ---------------------------------------------------------------------------


def test_validate_finds_symmetric_witness():
    report = validate_lp(simple_lp([[1.0, 1.0]], [1.0]))
    assert report.is_full_row_rank
    assert report.row_rank_estimate == 1
    assert report.strictly_feasible_witness is not None
    # x1 + x2 = 1 from a symmetric start stays symmetric.
    np.testing.assert_allclose(report.strictly_feasible_witness, [0.5, 0.5], atol=1e-6)
    assert report.residual_of_witness <= 1e-8
    assert np.all(report.strictly_feasible_witness > 0)


def test_validate_flags_duplicated_row():
    report = validate_lp(simple_lp([[1.0, 2.0], [1.0, 2.0]], [1.0, 1.0]))
    assert report.row_rank_estimate == 1
    assert not report.is_full_row_rank


def test_validate_generated_instance_full_rank():
    lp, _ = gen_instance(InstanceSeedSpec(m=5, n=20, rng_seed=7))
    report = validate_lp(lp)
    assert report.is_full_row_rank
    # independent rank route
    assert np.linalg.matrix_rank(lp.a) == 5


def test_validate_witness_respects_equalities():
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=9, rng_seed=1))
    report = validate_lp(lp)
    if report.strictly_feasible_witness is not None:
        res = np.linalg.norm(lp.a @ report.strictly_feasible_witness - lp.b)
        assert res <= 1e-8
        assert np.min(report.strictly_feasible_witness) > 0


# ---------------------------------------------------------------------------
# gen_instance
# ---------------------------------------------------------------------------


def test_gen_single_cell():
    lp, planted = gen_instance(InstanceSeedSpec(m=1, n=1, rng_seed=3))
    assert lp.b[0] == lp.a[0, 0] * planted[0]


def test_gen_paper_scale_shape():
    lp, planted = gen_instance(InstanceSeedSpec(m=300, n=3000, rng_seed=0))
    assert lp.a.shape == (300, 3000)
    assert lp.b.shape == (300,)
    assert planted.shape == (3000,)
    assert np.all(lp.c == 1.0)


def test_gen_is_deterministic():
    spec = InstanceSeedSpec(m=4, n=11, rng_seed=99)
    lp1, x1 = gen_instance(spec)
    lp2, x2 = gen_instance(spec)
    assert lp1.a.tobytes() == lp2.a.tobytes()
    assert lp1.b.tobytes() == lp2.b.tobytes()
    assert x1.tobytes() == x2.tobytes()


def test_gen_planted_point_is_feasible():
    lp, planted = gen_instance(InstanceSeedSpec(m=6, n=17, rng_seed=5))
    np.testing.assert_array_equal(lp.a @ planted, lp.b)
    assert np.all(planted >= 0.0) and np.all(planted < 1.0)


def test_gen_draw_order_matches_generator():
    spec = InstanceSeedSpec(m=2, n=3, rng_seed=11)
    lp, planted = gen_instance(spec)
    rng = PortableRng(11)
    np.testing.assert_array_equal(lp.a, rng.normals(6).reshape(2, 3))
    np.testing.assert_array_equal(planted, rng.uniforms(3))


# ---------------------------------------------------------------------------
# File IO
# ---------------------------------------------------------------------------


def test_write_read_round_trip(tmp_path):
    lp, _ = gen_instance(InstanceSeedSpec(m=3, n=7, rng_seed=21))
    path = str(tmp_path / "inst.txt")
    write_lp(lp, path)
    back = read_lp(path)
    np.testing.assert_array_equal(back.a, lp.a)
    np.testing.assert_array_equal(back.b, lp.b)
    np.testing.assert_array_equal(back.c, lp.c)


@given(
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=4, max_value=8),
    st.integers(min_value=0, max_value=2**32),
)
@settings(max_examples=25, deadline=None)
def test_round_trip_is_exact_for_random_instances(tmp_path_factory, m, n, seed):
    lp, _ = gen_instance(InstanceSeedSpec(m=m, n=n, rng_seed=seed))
    path = str(tmp_path_factory.mktemp("io") / "lp.txt")
    write_lp(lp, path)
    back = read_lp(path)
    assert back.a.tobytes() == lp.a.tobytes()
    assert back.b.tobytes() == lp.b.tobytes()
    assert back.c.tobytes() == lp.c.tobytes()


def test_read_rejects_zero_cost(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("lp 1 2\n1 1\n1\n1 0\n")
    with pytest.raises(ParseError, match="positive"):
        read_lp(str(path))


def test_read_rejects_wide_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("lp 2 1\n1\n1\n1 1\n1\n")
    with pytest.raises(ParseError, match="m <= n"):
        read_lp(str(path))


def test_read_rejects_short_row(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("lp 1 3\n1 2\n1\n1 1 1\n")
    with pytest.raises(ParseError):
        read_lp(str(path))


def test_read_skips_comments_and_blank_lines(tmp_path):
    path = tmp_path / "ok.txt"
    path.write_text("# instance\n\nlp 1 2\n1 1\n# b next\n1\n1 1\n")
    lp = read_lp(str(path))
    assert lp.m == 1 and lp.n == 2


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("lp 1 2\n1 junk\n1\n1 1\n")
    with pytest.raises(ParseError) as err:
        read_lp(str(path))
    assert err.value.line_number == 2


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def test_relative_gap_is_zero_at_reference():
    x = np.array([0.3, 0.7, 1.1])
    assert relative_gap(x, x) == 0.0


def test_relative_gap_formula():
    x_hat = np.array([2.0, 1.0])
    x_star = np.array([1.0, 1.0])
    # (sum 3 - sum 2) / max(1, 2)
    assert relative_gap(x_hat, x_star) == pytest.approx(0.5)


def test_relative_gap_small_reference_uses_floor():
    x_hat = np.array([0.4])
    x_star = np.array([0.1])
    assert relative_gap(x_hat, x_star) == pytest.approx(0.3)


def test_loss_residual_norm():
    lp = simple_lp([[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0])
    x = np.array([1.0, 0.0])
    assert loss_residual_norm(lp, x) == pytest.approx(2.0)
