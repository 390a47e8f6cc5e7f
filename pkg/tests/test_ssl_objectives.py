import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from src.core.errors import ContractError
from src.diffcore import DTYPE, gradient_check, tensor
from src.graph.models import Graph
from src.services.ssl_objectives import TripleBatch, bpr_loss, contrastive_loss, sample_triples, ssl_loss


class TestContrastiveLoss:
    def test_single_node_is_zero(self):
        d = tensor([[0.3, -1.2]])
        assert contrastive_loss(d, d, 0.5).item() == pytest.approx(0.0)

    def test_two_orthonormal_nodes(self):
        d = tensor([[1.0, 0.0], [0.0, 1.0]])
        # 2 · -log(e / (e + 1))
        assert contrastive_loss(d, d, 1.0).item() == pytest.approx(0.6265, abs=1e-4)

    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_identical_rows_give_log_n_per_node(self, n):
        d = torch.ones(n, 3, dtype=DTYPE)
        assert contrastive_loss(d, d, 0.5).item() == pytest.approx(n * math.log(n))

    def test_non_negative(self, small_graph):
        generator = torch.Generator().manual_seed(0)
        dp = torch.randn(small_graph.n_nodes, 4, dtype=DTYPE, generator=generator)
        dg = torch.randn(small_graph.n_nodes, 4, dtype=DTYPE, generator=generator)
        assert contrastive_loss(dp, dg, 0.5).item() >= 0.0

    def test_full_pool_matches_exact_loss(self):
        generator = torch.Generator().manual_seed(1)
        dp = torch.randn(12, 3, dtype=DTYPE, generator=generator)
        dg = torch.randn(12, 3, dtype=DTYPE, generator=generator)
        exact = contrastive_loss(dp, dg, 0.5)
        sampled = contrastive_loss(dp, dg, 0.5, negative_pool=12, rng=torch.Generator().manual_seed(2))
        assert sampled.item() == pytest.approx(exact.item())

    def test_sampled_pool_is_seeded(self):
        generator = torch.Generator().manual_seed(1)
        dp = torch.randn(30, 3, dtype=DTYPE, generator=generator)
        dg = torch.randn(30, 3, dtype=DTYPE, generator=generator)
        a = contrastive_loss(dp, dg, 0.5, negative_pool=8, rng=torch.Generator().manual_seed(4))
        b = contrastive_loss(dp, dg, 0.5, negative_pool=8, rng=torch.Generator().manual_seed(4))
        assert a.item() == b.item()

    def test_gradient(self):
        generator = torch.Generator().manual_seed(3)
        dp = torch.randn(5, 3, dtype=DTYPE, generator=generator).requires_grad_()
        dg = torch.randn(5, 3, dtype=DTYPE, generator=generator).requires_grad_()
        assert gradient_check(lambda: contrastive_loss(dp, dg, 0.5), [dp, dg]).passed

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dg": torch.zeros(3, 2, dtype=DTYPE)},
            {"tau_f": 0.0},
            {"negative_pool": 4},
        ],
    )
    def test_contract_errors(self, kwargs):
        args = {"dp": torch.zeros(4, 2, dtype=DTYPE), "dg": torch.zeros(4, 2, dtype=DTYPE), "tau_f": 0.5}
        args.update(kwargs)
        with pytest.raises(ContractError):
            contrastive_loss(**args)


def _pair(seed: int, n: int, d: int) -> tuple[torch.Tensor, torch.Tensor]:
    generator = torch.Generator().manual_seed(seed)
    dp = torch.randn(n, d, dtype=DTYPE, generator=generator)
    dg = torch.randn(n, d, dtype=DTYPE, generator=generator)
    return dp, dg


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.integers(1, 4))
def test_contrastive_gradient_trials(seed, n, d):
    dp, dg = (t.requires_grad_() for t in _pair(seed, n, d))
    assert gradient_check(lambda: contrastive_loss(dp, dg, 0.5), [dp, dg], eps=1e-4, tol=1e-3).passed


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.integers(1, 4))
def test_contrastive_loss_ignores_row_order(seed, n, d):
    dp, dg = _pair(seed, n, d)
    perm = torch.randperm(n, generator=torch.Generator().manual_seed(seed + 1))
    assert contrastive_loss(dp[perm], dg[perm], 0.5).item() == pytest.approx(contrastive_loss(dp, dg, 0.5).item())


class TestSampleTriples:
    def test_two_node_graph_skips_everything(self):
        g = Graph.from_pairs(2, np.array([[0, 1]]))
        batch = sample_triples(g, 3, torch.Generator().manual_seed(0))
        assert batch.size == 0
        assert batch.skipped == 3
        assert batch.requested == 3

    def test_only_non_neighbour_is_chosen(self):
        g = Graph.from_pairs(4, np.array([[0, 1], [0, 2], [1, 2]]))
        batch = sample_triples(g, 20, torch.Generator().manual_seed(0))
        assert batch.size == 20
        assert batch.triples[:, 2].tolist() == [3] * 20

    def test_triples_are_valid(self, small_graph):
        batch = sample_triples(small_graph, 50, torch.Generator().manual_seed(1))
        i, j, k = batch.triples.T
        assert small_graph.has_train_edges(i, j).all()
        assert not small_graph.has_train_edges(i, k).any()
        assert np.all(i != k)

    def test_seeded(self, small_graph):
        a = sample_triples(small_graph, 10, torch.Generator().manual_seed(6))
        b = sample_triples(small_graph, 10, torch.Generator().manual_seed(6))
        assert np.array_equal(a.triples, b.triples)

    def test_no_train_edges(self):
        g = Graph.from_pairs(3, np.empty((0, 2), dtype=np.int64))
        with pytest.raises(ContractError):
            sample_triples(g, 5, torch.Generator())


class TestBprLoss:
    def test_zero_embeddings(self):
        batch = TripleBatch(triples=np.array([[0, 1, 2]]), requested=1)
        assert bpr_loss(torch.zeros(3, 2, dtype=DTYPE), batch).item() == pytest.approx(math.log(2))

    def test_prefers_positive_gap(self):
        final = tensor([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
        batch = TripleBatch(triples=np.array([[0, 1, 2]]), requested=1)
        assert bpr_loss(final, batch).item() == pytest.approx(-math.log(1 / (1 + math.exp(-2))))

    def test_empty_batch(self):
        with pytest.raises(ContractError):
            bpr_loss(torch.zeros(3, 2, dtype=DTYPE), TripleBatch(triples=np.empty((0, 3), np.int64), requested=2))


@pytest.mark.parametrize(
    "gcl, bpr, lambda_gcl, lambda_bpr, expected",
    [
        (2.0, 4.0, 0.5, 0.5, 3.0),
        (2.0, 4.0, 1.0, 0.0, 2.0),
        (None, 4.0, 1.0, 1e-4, 4e-4),
        (None, None, 1.0, 1.0, 0.0),
    ],
)
def test_ssl_loss(gcl, bpr, lambda_gcl, lambda_bpr, expected):
    as_tensor = lambda v: None if v is None else tensor(v)  # noqa: E731
    assert ssl_loss(as_tensor(gcl), as_tensor(bpr), lambda_gcl, lambda_bpr).item() == pytest.approx(expected)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(1, 4), st.integers(1, 6))
def test_bpr_gradient_trials(seed, n, d, size):
    generator = torch.Generator().manual_seed(seed)
    final = torch.randn(n, d, dtype=DTYPE, generator=generator).requires_grad_()
    triples = torch.randint(0, n, (size, 3), generator=generator).numpy()
    batch = TripleBatch(triples=triples, requested=size)
    assert gradient_check(lambda: bpr_loss(final, batch), [final], eps=1e-4, tol=1e-3).passed
