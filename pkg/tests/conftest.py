import numpy as np
import pytest

from src.core.config import TrainConfig
from src.graph.models import Graph


def random_graph(n_nodes: int, n_edges: int, seed: int = 0) -> Graph:
    """Random simple graph with exactly n_edges edges."""
    rng = np.random.default_rng(seed)
    keys: set[tuple[int, int]] = set()
    while len(keys) < n_edges:
        i, j = rng.integers(0, n_nodes, size=2)
        if i != j:
            keys.add((min(i, j), max(i, j)))
    return Graph.from_pairs(n_nodes, np.array(sorted(keys), dtype=np.int64))


@pytest.fixture
def path_graph() -> Graph:
    return Graph.from_pairs(3, np.array([[0, 1], [1, 2]]))


@pytest.fixture
def star_graph() -> Graph:
    """Center 0 with leaves 1..4."""
    return Graph.from_pairs(5, np.array([[0, 1], [0, 2], [0, 3], [0, 4]]))


@pytest.fixture
def small_graph() -> Graph:
    return random_graph(30, 60, seed=1)


@pytest.fixture
def labelled_graph() -> Graph:
    """Two dense communities with labels 0/1 and a node split."""
    from src.graph.splits import split_nodes

    rng = np.random.default_rng(3)
    pairs = []
    for block in (range(0, 20), range(20, 40)):
        nodes = list(block)
        for i in nodes:
            for j in nodes:
                if i < j and rng.random() < 0.3:
                    pairs.append((i, j))
    pairs.append((0, 20))
    labels = np.array([0] * 20 + [1] * 20)
    g = Graph.from_pairs(40, np.array(pairs), labels=labels)
    return split_nodes(g, per_class_train=5, n_val=10, n_test=20, seed=0)


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        dim=8,
        layers=2,
        max_iters=3,
        eval_every=1,
        patience=5,
        candidate_top_k=5,
        views_per_d_step=2,
        mlp_hidden=8,
        seed=7,
    )
