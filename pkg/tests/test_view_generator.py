import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from src.core.errors import ConfigurationError, ContractError
from src.diffcore import DTYPE, gradient_check, ops, tensor
from src.graph import build_candidate_set
from src.graph.models import Graph
from src.services.view_generator import (
    RelaxedView,
    ViewGenerator,
    average_view_statistics,
    degree_buckets,
    dropout_view,
    edge_count_loss,
    expected_edge_probability,
    init_weights,
    new_edge_loss,
    regularization_loss,
    replacement_view,
    sample_non_edges,
    sample_relaxed_view,
    view_neighborhood,
    view_statistics,
)

from tests.conftest import random_graph


def _view(p: list[float], is_candidate: list[bool], pairs=None, n_nodes: int = 20) -> RelaxedView:
    if pairs is None:
        pairs = np.array([[0, k + 1] for k in range(len(p))])
    return RelaxedView(
        pairs=np.asarray(pairs),
        p=tensor(p),
        is_candidate=np.array(is_candidate),
        n_nodes=n_nodes,
        noise_seed=0,
    )


def _generator(g: Graph, **kwargs) -> ViewGenerator:
    return ViewGenerator(g, build_candidate_set(g, top_k=kwargs.pop("top_k", 2000)), **kwargs)


@pytest.mark.parametrize(
    "n_edges, n_candidates, lambda_g, gamma, expected",
    [
        (100, 1000, 0.5, 0.75, (0.125, 0.0375)),
        (100, 1000, 0.5, 0.0, (0.5, 0.0)),
        (10, 5, 0.5, 1.0, (0.0, 1.0)),
    ],
)
def test_init_weights(n_edges, n_candidates, lambda_g, gamma, expected):
    assert init_weights(n_edges, n_candidates, lambda_g, gamma) == pytest.approx(expected)


def test_init_weights_needs_candidates():
    with pytest.raises(ConfigurationError):
        init_weights(10, 0, 0.5, 0.75)
    assert init_weights(10, 0, 0.5, 0.0) == (0.5, 0.0)


class TestViewGenerator:
    def test_support_is_edges_plus_candidates(self, path_graph):
        gen = _generator(path_graph, top_k=3)
        assert gen.support.tolist() == [[0, 1], [0, 2], [1, 2]]
        assert gen.candidate_mask.tolist() == [False, True, False]

    def test_initial_weights(self, small_graph):
        gen = _generator(small_graph, lambda_g=0.5, gamma=0.75)
        n_candidates = int(gen.candidate_mask.sum())
        w = gen.w.detach().numpy()
        assert np.allclose(w[~gen.candidate_mask], 0.125)
        assert np.allclose(w[gen.candidate_mask], 0.75 * 0.5 * 60 / n_candidates)

    def test_rejects_bad_temperature(self, small_graph):
        with pytest.raises(ConfigurationError):
            _generator(small_graph, tau_g=0.0)

    def test_export_support(self, tmp_path, path_graph):
        gen = _generator(path_graph, top_k=3)
        gen.export_support(tmp_path / "support.tsv")
        lines = (tmp_path / "support.tsv").read_text().splitlines()
        assert lines[0].split("\t") == ["i", "j", "w", "is_candidate"]
        assert len(lines) == 4


class TestRelaxedView:
    def test_equal_draw_gives_half(self):
        assert ops.sigmoid(ops.scale(tensor([0.3]) - tensor([0.3]), 1e4)).item() == 0.5

    def test_formula(self, small_graph):
        gen = _generator(small_graph, tau_g=1.0)
        with torch.no_grad():
            gen.w.zero_()
        view = sample_relaxed_view(gen, torch.Generator().manual_seed(5))
        x = torch.rand(gen.w.shape[0], dtype=DTYPE, generator=torch.Generator().manual_seed(5))
        assert torch.allclose(view.p, torch.sigmoid(-x))
        assert torch.sigmoid(tensor(-0.5)).item() == pytest.approx(0.37754, abs=1e-5)

    def test_saturation_clamps(self, small_graph):
        gen = _generator(small_graph, tau_g=1e-4)
        with torch.no_grad():
            gen.w.fill_(0.6)
        view = sample_relaxed_view(gen, torch.Generator().manual_seed(0))
        assert view.p.max().item() == 1.0 - 1e-12
        assert view.p.min().item() == pytest.approx(1e-12)

    def test_seeded(self, small_graph):
        gen = _generator(small_graph)
        a = sample_relaxed_view(gen, torch.Generator().manual_seed(9))
        b = sample_relaxed_view(gen, torch.Generator().manual_seed(9))
        assert torch.equal(a.p, b.p)

    def test_adjacency_is_symmetric_and_differentiable(self, small_graph):
        gen = _generator(small_graph)
        view = sample_relaxed_view(gen, torch.Generator().manual_seed(0))
        adj = view.adjacency()
        dense = adj.to_dense()
        assert torch.equal(dense, dense.T)
        assert adj.values.requires_grad


class TestRegularization:
    def test_edge_count_loss(self):
        g = random_graph(12, 10)
        assert edge_count_loss(_view([0.7] * 10, [False] * 10), g, 0.5).item() == pytest.approx(2.0)
        assert edge_count_loss(_view([0.5] * 10, [False] * 10), g, 0.5).item() == pytest.approx(0.0)

    def test_edge_count_loss_empty_mass(self):
        g = random_graph(6, 4)
        assert edge_count_loss(_view([1e-12] * 4, [True] * 4), g, 0.5).item() == pytest.approx(2.0)

    @pytest.mark.parametrize(
        "p, is_candidate, expected",
        [
            ([0.9, 0.8], [False, False], 0.0),
            ([0.6, 0.9], [True, False], 0.6),
            ([1.0] * 5, [True] * 5, 5.0),
        ],
    )
    def test_new_edge_loss(self, p, is_candidate, expected):
        assert new_edge_loss(_view(p, is_candidate)).item() == pytest.approx(expected)

    def test_regularization_combination(self):
        g = random_graph(15, 10)
        view = _view([0.64] * 10 + [0.6], [False] * 10 + [True])
        assert regularization_loss(view, g, 1.0, 0.5, 0.5).item() == pytest.approx(2.3)
        assert regularization_loss(view, g, 0.0, 0.0, 0.5).item() == 0.0

    def test_count_loss_gradient_raises_weights_below_target(self, small_graph):
        gen = _generator(small_graph, tau_g=0.5, gamma=0.0, lambda_g=0.1)
        rng_seed = 4

        def f():
            view = sample_relaxed_view(gen, torch.Generator().manual_seed(rng_seed))
            # target 5 x 60 edges sits far above the initial mass
            return edge_count_loss(view, small_graph, 5.0)

        loss = f()
        (grad,) = torch.autograd.grad(loss, [gen.w])
        assert torch.all(grad <= 0)
        assert gradient_check(f, [gen.w], max_coords=30).passed


class TestViewStatistics:
    def test_counts(self):
        g = Graph.from_pairs(6, np.array([[0, 1], [0, 2], [0, 3], [0, 4]]))
        pairs = np.array([[0, 1], [0, 2], [0, 3], [0, 4], [1, 2]])
        view = _view([0.9] * 5, [False] * 4 + [True], pairs=pairs, n_nodes=6)
        stats = view_statistics(view, g, 0.5)
        assert (stats.edges, stats.existing, stats.new) == (5.0, 4.0, 1.0)
        high = view_statistics(view, g, 0.95)
        assert (high.edges, high.new) == (0.0, 0.0)

    def test_new_edges_land_in_endpoint_buckets(self, star_graph):
        buckets = degree_buckets(star_graph.degrees())
        assert buckets.tolist() == [8, 0, 0, 0, 0]
        view = _view([0.9], [True], pairs=np.array([[1, 2]]), n_nodes=5)
        stats = view_statistics(view, star_graph, 0.5)
        assert stats.new_by_degree_bucket[0] == 2.0
        assert sum(stats.new_by_degree_bucket) == 2.0

    def test_threshold_range(self, star_graph):
        with pytest.raises(ContractError):
            view_statistics(_view([0.5], [True], pairs=np.array([[1, 2]]), n_nodes=5), star_graph, 1.0)

    def test_average(self, small_graph):
        gen = _generator(small_graph)
        stats = average_view_statistics(gen, small_graph, torch.Generator().manual_seed(0), n_views=4)
        assert stats.n_views == 4
        assert stats.edges == pytest.approx(stats.existing + stats.new)

    def test_neighborhood(self, path_graph):
        pairs = np.array([[0, 1], [0, 2], [1, 2]])
        view = _view([0.9, 0.7, 0.1], [False, True, False], pairs=pairs, n_nodes=3)
        hood = view_neighborhood(view, path_graph, 2)
        assert [e.target for e in hood.added] == [0]
        assert [e.target for e in hood.dropped] == [1]
        assert hood.kept == []


class TestPredefinedAugmentations:
    def test_dropout_keep_all(self, small_graph):
        view = dropout_view(small_graph, 1.0, torch.Generator().manual_seed(0))
        assert view.pairs.tolist() == small_graph.train_edges.tolist()

    def test_dropout_rate(self):
        g = random_graph(200, 2000, seed=2)
        view = dropout_view(g, 0.8, torch.Generator().manual_seed(1))
        assert len(view.pairs) == pytest.approx(1600, abs=80)

    def test_dropout_rejects_zero_keep(self, small_graph):
        with pytest.raises(ContractError):
            dropout_view(small_graph, 0.0, torch.Generator())

    def test_replacement_rate_zero_is_dropout(self, small_graph):
        a = dropout_view(small_graph, 0.8, torch.Generator().manual_seed(3))
        b = replacement_view(small_graph, 0.8, 0.0, torch.Generator().manual_seed(3))
        assert a.pairs.tolist() == b.pairs.tolist()
        assert b.n_new == 0

    def test_replacement_swaps_edges(self, small_graph):
        base = dropout_view(small_graph, 0.8, torch.Generator().manual_seed(3))
        view = replacement_view(small_graph, 0.8, 0.5, torch.Generator().manual_seed(3))
        n_replace = int(np.floor(0.5 * len(base.pairs)))
        assert view.n_new == n_replace
        assert len(view.pairs) == len(base.pairs)
        existing = small_graph.has_train_edges(view.pairs[:, 0], view.pairs[:, 1])
        assert int((~existing).sum()) == n_replace

    def test_sample_non_edges(self, small_graph):
        pairs = sample_non_edges(small_graph, 25, torch.Generator().manual_seed(0), exclude=np.empty(0, np.int64))
        assert len(pairs) == 25
        assert not small_graph.has_train_edges(pairs[:, 0], pairs[:, 1]).any()
        assert len({tuple(p) for p in pairs.tolist()}) == 25

    def test_sample_non_edges_complete_graph(self):
        g = Graph.from_pairs(3, np.array([[0, 1], [0, 2], [1, 2]]))
        assert len(sample_non_edges(g, 2, torch.Generator().manual_seed(0), exclude=np.empty(0, np.int64))) == 0


@pytest.mark.slow
def test_generator_converges_to_edge_budget():
    g = random_graph(50, 200, seed=11)
    gen = ViewGenerator(g, build_candidate_set(g), tau_g=0.5, lambda_g=0.5, gamma=0.75)
    optimizer = torch.optim.Adam(gen.parameters(), lr=0.01, betas=(0.9, 0.999), eps=1e-8)
    rng = torch.Generator().manual_seed(0)
    for draw in range(400):
        view = sample_relaxed_view(gen, rng, draw)
        loss = regularization_loss(view, g, lambda_cnt=1.0, lambda_new=0.0, lambda_g=0.5)
        (grad,) = torch.autograd.grad(loss, [gen.w])
        gen.w.grad = grad
        optimizer.step()

    with torch.no_grad():
        mass = np.mean([sample_relaxed_view(gen, rng).p.sum().item() for _ in range(20)])
    assert mass == pytest.approx(100.0, rel=0.05)


def _converged_candidate_mass(g: Graph, lambda_new: float) -> float:
    gen = ViewGenerator(g, build_candidate_set(g), tau_g=0.5, lambda_g=0.5, gamma=0.75)
    optimizer = torch.optim.Adam(gen.parameters(), lr=0.01)
    rng = torch.Generator().manual_seed(0)
    for draw in range(300):
        view = sample_relaxed_view(gen, rng, draw)
        loss = regularization_loss(view, g, lambda_cnt=1.0, lambda_new=lambda_new, lambda_g=0.5)
        (grad,) = torch.autograd.grad(loss, [gen.w])
        gen.w.grad = grad
        optimizer.step()
    return float(expected_edge_probability(gen.w, gen.tau_g)[gen.is_candidate].sum())


@pytest.mark.slow
def test_new_edge_penalty_reduces_converged_new_edges():
    g = random_graph(50, 200, seed=11)
    assert _converged_candidate_mass(g, 0.5) < _converged_candidate_mass(g, 0.0)


class TestExpectedEdgeProbability:
    def test_cold_limit_is_clipped_weight(self):
        w = tensor([-0.3, 0.0, 0.25, 0.9, 1.4])
        assert expected_edge_probability(w, 1e-6).tolist() == pytest.approx([0.0, 0.0, 0.25, 0.9, 1.0], abs=1e-5)

    def test_matches_mean_over_noise(self, small_graph):
        gen = ViewGenerator(small_graph, build_candidate_set(small_graph, top_k=5), tau_g=0.5)
        with torch.no_grad():
            gen.w.copy_(torch.linspace(-1.0, 2.0, len(gen.w), dtype=DTYPE))
        rng = torch.Generator().manual_seed(0)
        with torch.no_grad():
            sampled = torch.stack([sample_relaxed_view(gen, rng).p for _ in range(4000)]).mean(dim=0)
        assert torch.allclose(expected_edge_probability(gen.w, 0.5), sampled, atol=0.03)

    def test_warm_negative_weights_keep_mass(self):
        assert expected_edge_probability(tensor([-0.5]), 0.5).item() > 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.integers(4, 8))
def test_regularization_gradient_trials(seed, n_nodes):
    g = random_graph(n_nodes, n_nodes, seed=seed)
    gen = ViewGenerator(g, build_candidate_set(g, top_k=n_nodes), tau_g=0.5)

    def f():
        view = sample_relaxed_view(gen, torch.Generator().manual_seed(seed))
        return regularization_loss(view, g, lambda_cnt=1.0, lambda_new=0.5, lambda_g=0.5)

    assert gradient_check(f, [gen.w], eps=1e-4, tol=1e-3).passed
