import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disklab.errors import DimensionError, InvalidSpecError, OrbitOverflowError
from disklab.operators import (OperatorSpec, Weights, adjoint, adjoint_spec, apply, backward_shift,
                               canonical_basis_vector, dense_matrix, diagonal, direct_sum_scalar,
                               forward_shift, inner, make_operator, matrix_power,
                               operator_norm_estimate, scalar_multiple, support_end)
from oracles import spectral_norm


def e(n, k):
    return canonical_basis_vector(n, k)


def test_backward_shift_matrix():
    m = make_operator(backward_shift(4, 2.0)).matrix
    expected = np.zeros((4, 4))
    for i in range(3):
        expected[i, i + 1] = 2
    assert np.array_equal(m, expected)


def test_forward_shift_matrix_truncates_top_index():
    op = make_operator(forward_shift(4, [1, 2, 3]))
    assert np.array_equal(apply(op, e(4, 1)), e(4, 2))
    assert np.array_equal(apply(op, e(4, 3)), 3 * e(4, 4))
    assert np.array_equal(apply(op, e(4, 4)), np.zeros(4))


def test_diagonal_ones_is_identity():
    assert np.array_equal(make_operator(diagonal([1, 1, 1])).matrix, np.eye(3))


def test_direct_sum_block():
    spec = direct_sum_scalar(backward_shift(4, 2.0), 2.0)
    m = make_operator(spec).matrix
    assert m.shape == (5, 5)
    assert m[4, 4] == 2
    assert np.array_equal(m[:4, :4], make_operator(backward_shift(4, 2.0)).matrix)
    assert np.all(m[4, :4] == 0) and np.all(m[:4, 4] == 0)


@pytest.mark.parametrize("weights", [0.0, [1, 0, 2], float("inf"), float("nan")])
def test_bad_weights_rejected(weights):
    with pytest.raises(InvalidSpecError):
        backward_shift(4, weights)


def test_small_dim_rejected():
    with pytest.raises(InvalidSpecError):
        backward_shift(1, 2.0)


def test_short_weight_list_rejected():
    with pytest.raises(InvalidSpecError):
        backward_shift(5, [1, 2])


def test_rule_weights():
    w = Weights.from_rule("affine", a=0.0, b=1.0).take(4)
    assert np.array_equal(w, [1, 2, 3, 4])
    assert np.allclose(Weights.from_rule("geometric", a=1.0, r=2.0).take(3), [2, 4, 8])
    assert np.allclose(Weights.from_rule("power", a=1.0, p=2.0).take(3), [1, 4, 9])
    with pytest.raises(InvalidSpecError):
        Weights.from_rule("cubic")


def test_apply_examples():
    op = make_operator(backward_shift(4, 2.0))
    assert np.array_equal(apply(op, e(4, 1)), np.zeros(4))
    assert np.array_equal(apply(op, e(4, 3)), 2 * e(4, 2))
    x = np.array([1 + 2j, -3, 0.5j, 7])
    assert np.array_equal(apply(make_operator(diagonal([1] * 4)), x), x)


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply(make_operator(backward_shift(4, 2.0)), np.ones(3))


def test_linearity():
    rng = np.random.default_rng(3)
    op = make_operator(dense_matrix(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))))
    for _ in range(50):
        x, y = (rng.standard_normal(6) + 1j * rng.standard_normal(6) for _ in range(2))
        a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        lhs = apply(op, a * x + b * y)
        rhs = a * apply(op, x) + b * apply(op, y)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(lhs))


def test_adjoint_of_backward_shift_is_forward_shift():
    adj = adjoint(make_operator(backward_shift(6, 2.0)))
    assert adj.spec.kind == "weighted_forward_shift"
    assert np.array_equal(adj.matrix, make_operator(forward_shift(6, 2.0)).matrix)


def test_adjoint_of_diagonal_conjugates():
    d = [1 + 1j, 2, -3j]
    adj = adjoint(make_operator(diagonal(d)))
    assert np.array_equal(np.diag(adj.matrix), np.conj(d))


def test_adjoint_involution():
    rng = np.random.default_rng(0)
    for spec in [backward_shift(5, [1, 2j, 3, 4]), diagonal([1j, 2, 3]),
                 dense_matrix(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))),
                 direct_sum_scalar(scalar_multiple(backward_shift(3, 2.0), 1j), 2.0)]:
        op = make_operator(spec)
        assert np.array_equal(adjoint(adjoint(op)).matrix, op.matrix)


@pytest.mark.parametrize("spec", [
    backward_shift(8, Weights.from_rule("affine", a=1.0, b=0.5)),
    forward_shift(8, 3.0),
    diagonal([1, 2j, -1, 0.5]),
    dense_matrix(np.arange(16).reshape(4, 4) * (1 + 0.5j)),
    direct_sum_scalar(backward_shift(6, 4.0), 2.0),
    scalar_multiple(backward_shift(6, 1.0), 3j),
])
def test_adjoint_pairing(spec):
    op = make_operator(spec)
    adj = adjoint(op)
    rng = np.random.default_rng(1)
    n = op.dim
    for _ in range(100):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        gap = abs(inner(apply(op, x), y) - inner(x, apply(adj, y)))
        assert gap <= 1e-10 * (1 + np.linalg.norm(x) * np.linalg.norm(y))


def test_adjoint_spec_families():
    assert adjoint_spec(backward_shift(4, 2j)).kind == "weighted_forward_shift"
    s = adjoint_spec(direct_sum_scalar(backward_shift(4, 2.0), 2 + 1j))
    assert s.kind == "direct_sum_scalar" and s.scalar == 2 - 1j


def test_norm_examples():
    assert operator_norm_estimate(make_operator(diagonal([1, 1, 1]))) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm_estimate(make_operator(diagonal([0, 3]))) == pytest.approx(3.0, abs=1e-12)


def test_norm_of_shift_matches_singular_value_oracle():
    op = make_operator(backward_shift(16, 2.0))
    oracle = spectral_norm(op.matrix)
    assert oracle == pytest.approx(2.0, abs=1e-10)
    assert abs(operator_norm_estimate(op) - oracle) <= 1e-8


def test_norm_estimate_is_lower_bound_and_monotone():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    op = make_operator(dense_matrix(m))
    true = spectral_norm(m)
    prev = 0.0
    for it in (1, 2, 4, 8, 16, 64, 200):
        est = operator_norm_estimate(op, it)
        assert est <= true * (1 + 1e-12)
        assert est >= prev
        prev = est
    assert prev == pytest.approx(true, rel=1e-8)


def test_norm_estimate_bounds_test_vectors():
    op = make_operator(backward_shift(12, Weights.from_rule("affine", a=1.0, b=1.0)))
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        assert np.linalg.norm(apply(op, x)) / np.linalg.norm(x) <= op.norm_estimate * (1 + 1e-12)


def test_canonical_basis():
    assert np.array_equal(e(4, 1), [1, 0, 0, 0])
    assert np.array_equal(e(4, 4), [0, 0, 0, 1])
    for k in range(1, 8):
        assert np.linalg.norm(e(7, k)) == 1
    with pytest.raises(IndexError):
        e(4, 0)
    with pytest.raises(IndexError):
        e(4, 5)


def _infinite_backward(x, w, n):
    # (Bx)_k = w_k x_{k+1} on a long zero-padded copy
    long = np.concatenate([x, np.zeros(len(x) + n, dtype=complex)])
    ws = w.take(len(long))
    for _ in range(n):
        nxt = np.zeros_like(long)
        nxt[:-1] = ws[:-1] * long[1:]
        long = nxt
    return long


def _infinite_forward(x, w, n):
    long = np.concatenate([x, np.zeros(len(x) + n, dtype=complex)])
    ws = w.take(len(long))
    for _ in range(n):
        nxt = np.zeros_like(long)
        nxt[1:] = ws[:-1] * long[:-1]
        long = nxt
    return long


@pytest.mark.parametrize("w", [Weights.constant(2.0), Weights.from_rule("affine", a=1.0, b=1.0),
                               Weights.from_rule("geometric", a=1j, r=1.1)])
def test_shift_exactness_no_boundary_leakage(w):
    dim = 20
    bop = make_operator(backward_shift(dim, w))
    fop = make_operator(forward_shift(dim, w))
    rng = np.random.default_rng(0)
    for n in range(1, 8):
        x = np.zeros(dim, dtype=complex)
        x[: dim - n] = rng.standard_normal(dim - n) + 1j * rng.standard_normal(dim - n)
        vb, vf = x, x
        for _ in range(n):
            vb, vf = apply(bop, vb), apply(fop, vf)
        exact_b, exact_f = _infinite_backward(x, w, n), _infinite_forward(x, w, n)
        assert np.array_equal(vb, exact_b[:dim]) and not np.any(exact_b[dim:])
        assert np.array_equal(vf, exact_f[:dim]) and not np.any(exact_f[dim:])


def test_backward_power_kills_support():
    op = make_operator(backward_shift(10, 3.0))
    x = np.zeros(10, dtype=complex)
    x[:4] = [1, 2, 3, 4]
    assert np.array_equal(matrix_power(op, 4) @ x, np.zeros(10))
    assert np.count_nonzero(matrix_power(op, 3) @ x) == 1


def test_matrix_power_overflow():
    op = make_operator(backward_shift(4, 1e200))
    with pytest.raises(OrbitOverflowError):
        matrix_power(op, 2)


def test_support_end():
    assert support_end([0, 0, 0]) == 0
    assert support_end([1, 0, 2, 0]) == 3


def test_json_round_trip():
    specs = [backward_shift(6, 2.0), forward_shift(5, [1, 2j, 3, 4]),
             backward_shift(7, Weights.from_rule("geometric", a=1.0, r=1.5)),
             diagonal([1, 1j]), dense_matrix([[0, 1], [0, 0]]),
             scalar_multiple(backward_shift(4, 1.0), 3),
             direct_sum_scalar(backward_shift(4, 4.0), 2.0)]
    for spec in specs:
        doc = json.loads(json.dumps(spec.to_json()))
        back = OperatorSpec.from_json(doc)
        assert np.array_equal(make_operator(back).matrix, make_operator(spec).matrix)
        assert back.to_json() == spec.to_json()


def test_json_field_names():
    doc = direct_sum_scalar(backward_shift(4, 2.0), 2.0).to_json()
    assert set(doc) >= {"kind", "dim", "inner", "alpha"}
    assert doc["dim"] == 5 and doc["alpha"] == {"re": 2.0, "im": 0.0}
    assert doc["inner"]["weights"] == {"mode": "constant", "value": {"re": 2.0, "im": 0.0}}


def test_from_json_errors():
    with pytest.raises(InvalidSpecError):
        OperatorSpec.from_json({"kind": "bilateral_shift", "dim": 4})
    with pytest.raises(InvalidSpecError):
        OperatorSpec.from_json({"kind": "weighted_backward_shift", "dim": 4})
    with pytest.raises(InvalidSpecError):
        OperatorSpec.from_json({"kind": "direct_sum_scalar", "inner": {"kind": "diagonal", "dim": 2,
                                                                      "weights": {"mode": "constant", "value": 1}}})


def test_matrix_is_read_only():
    op = make_operator(backward_shift(4, 2.0))
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.floats(0.1, 10), st.floats(-3, 3))
def test_direct_sum_adds_one_dimension(n, w, a):
    spec = direct_sum_scalar(backward_shift(n, w), a)
    assert spec.truncation_dim == n + 1
    assert make_operator(spec).dim == n + 1
