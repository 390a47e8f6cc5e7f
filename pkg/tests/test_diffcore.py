import numpy as np
import pytest
import scipy.sparse as sp
import torch
from hypothesis import given, settings, strategies as st

from src.core.errors import ContractError, NumericError
from src.diffcore import DTYPE, SparseMatrix, gradient_check, ops, tensor


def test_sigmoid_zero():
    assert ops.sigmoid(tensor([0.0])).item() == pytest.approx(0.5)


def test_abs_sum_gradient():
    x = tensor([-1.0, 2.0], requires_grad=True)
    loss = ops.sum(ops.abs(x))
    loss.backward()
    assert loss.item() == pytest.approx(3.0)
    assert x.grad.tolist() == [-1.0, 1.0]


def test_spmm_identity():
    x = torch.randn(3, 4, dtype=DTYPE)
    assert torch.allclose(ops.spmm(SparseMatrix.identity(3), x), x)


def test_spmm_gradient_reaches_sparse_values():
    values = tensor([1.0, 2.0], requires_grad=True)
    s = SparseMatrix.symmetric(np.array([[0, 1]]), values[:1], 2)
    out = ops.sum(ops.spmm(s, tensor([[1.0], [3.0]])))
    out.backward()
    # d/dw of (w*3 + w*1)
    assert values.grad.tolist() == [4.0, 0.0]


@pytest.mark.parametrize(
    "op, args",
    [
        (ops.add, (torch.zeros(2, dtype=DTYPE), torch.zeros(3, dtype=DTYPE))),
        (ops.mul, (torch.zeros(2, 2, dtype=DTYPE), torch.zeros(2, dtype=DTYPE))),
        (ops.matmul, (torch.zeros(2, 3, dtype=DTYPE), torch.zeros(2, 3, dtype=DTYPE))),
        (ops.row_mean, (torch.zeros(0, 3, dtype=DTYPE),)),
    ],
)
def test_shape_errors(op, args):
    with pytest.raises(ContractError):
        op(*args)


def test_log_rejects_non_positive():
    with pytest.raises(ContractError):
        ops.log(tensor([1.0, 0.0]))


def test_exp_overflow_is_numeric_error():
    with pytest.raises(NumericError) as excinfo:
        ops.exp(tensor([1000.0]))
    assert excinfo.value.op == "exp"


def test_tensor_rejects_nan():
    with pytest.raises(NumericError):
        tensor([float("nan")])


def test_row_max_routes_gradient_to_first_max():
    a = tensor([[1.0, 5.0], [1.0, 2.0]], requires_grad=True)
    ops.sum(ops.row_max(a)).backward()
    assert a.grad.tolist() == [[1.0, 1.0], [0.0, 0.0]]


def test_clamp_probability():
    p = ops.clamp_probability(tensor([0.0, 1.0, 0.3]))
    assert p[0].item() == pytest.approx(1e-12)
    assert p[1].item() == 1.0 - 1e-12
    assert p[2].item() == pytest.approx(0.3)


class TestSparseMatrix:
    def test_rejects_unsorted_entries(self):
        with pytest.raises(ContractError):
            SparseMatrix(
                rows=np.array([1, 0]), cols=np.array([0, 1]), values=torch.ones(2, dtype=DTYPE), shape=(2, 2)
            )

    def test_from_triplets_sorts(self):
        s = SparseMatrix.from_triplets(np.array([1, 0]), np.array([0, 1]), torch.tensor([2.0, 3.0]), (2, 2))
        assert s.rows.tolist() == [0, 1]
        assert s.values.tolist() == [3.0, 2.0]

    def test_scipy_round_trip(self):
        matrix = sp.random(6, 6, density=0.4, random_state=0, format="csr")
        s = SparseMatrix.from_scipy(matrix)
        assert np.allclose(s.to_scipy().toarray(), matrix.toarray())
        assert np.allclose(s.to_dense().numpy(), matrix.toarray())
        assert s.indptr.tolist() == matrix.indptr.tolist()

    def test_row_sums(self):
        s = SparseMatrix.symmetric(np.array([[0, 1], [1, 2]]), tensor([1.0, 0.5]), 3)
        assert s.row_sums().tolist() == [1.0, 1.5, 0.5]


class TestGradientCheck:
    def test_sigmoid_sum(self):
        x = torch.randn(4, dtype=DTYPE, generator=torch.Generator().manual_seed(0)).requires_grad_()
        report = gradient_check(lambda: ops.sum(ops.sigmoid(x)), [x], eps=1e-4)
        assert report.passed
        assert report.max_rel_error < 1e-5
        assert report.checked == 4

    def test_linear_function_is_exact(self):
        x = tensor([0.3, -2.0, 7.0], requires_grad=True)
        report = gradient_check(lambda: ops.sum(x), [x])
        assert report.max_rel_error < 1e-8

    def test_abs_kink_is_skipped(self):
        x = tensor([0.0, 1.5, -2.0], requires_grad=True)
        report = gradient_check(lambda: ops.sum(ops.abs(x)), [x])
        assert report.skipped == 1
        assert report.checked == 2
        assert report.passed

    def test_detects_wrong_gradient(self):
        x = tensor([0.5, 1.0], requires_grad=True)

        def f():
            # forward value x^2, backward pretends the derivative is 1
            return ops.sum(x.detach() ** 2 + x - x.detach())

        report = gradient_check(f, [x])
        assert not report.passed

    def test_max_coords(self):
        x = torch.randn(8, 8, dtype=DTYPE).requires_grad_()
        report = gradient_check(lambda: ops.sum(ops.exp(x)), [x], max_coords=10)
        assert report.checked + report.skipped == 10


def test_softmax_rows_sum_to_one():
    a = tensor([[1000.0, 0.0, -1000.0], [0.5, 0.5, 0.5]])
    out = ops.softmax_rows(a)
    assert out.sum(dim=1).tolist() == pytest.approx([1.0, 1.0])
    assert out[0].tolist() == pytest.approx([1.0, 0.0, 0.0])
    assert out[1].tolist() == pytest.approx([1 / 3] * 3)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.integers(1, 8))
def test_differentiable_ops_pass_gradient_check(seed, rows, cols):
    generator = torch.Generator().manual_seed(seed)
    a = torch.randn(rows, cols, dtype=DTYPE, generator=generator).requires_grad_()
    b = torch.randn(rows, cols, dtype=DTYPE, generator=generator).requires_grad_()
    w = torch.randn(cols, 3, dtype=DTYPE, generator=generator).requires_grad_()

    def f():
        h = ops.matmul(ops.mul(ops.sigmoid(a), b), w)
        pooled = ops.concat(ops.row_mean(h), ops.scale(ops.row_mean(h), 2.0))
        attention = ops.sum(ops.mul(ops.softmax_rows(h), h))
        return (
            ops.sum(ops.log_sigmoid(pooled))
            + ops.sum(ops.dot_rows(a, b))
            + ops.sum(ops.logsumexp_cols(h))
            + attention
        )

    report = gradient_check(f, [a, b, w], eps=1e-4, tol=1e-3)
    assert report.passed


def test_row_max_gradient_check_away_from_ties():
    a = tensor([[0.0, 3.0, -1.0], [2.0, 1.0, 0.5], [1.0, -2.0, 4.0]], requires_grad=True)
    report = gradient_check(lambda: ops.sum(ops.sigmoid(ops.row_max(a))), [a])
    assert report.passed
    assert report.checked == 9
