"""Node-classification linear probe on frozen embeddings."""

import logging
import time
import warnings
from typing import Literal, Optional, Union

import numpy as np
import torch
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import accuracy_score, precision_recall_fscore_support

from src.core.errors import ConfigurationError
from src.graph.models import Graph
from src.services.evaluation.models import MetricsRecord

logger = logging.getLogger(__name__)

L2_PENALTY = 1e-4
PROBE_TOL = 1e-5
PROBE_MAX_ITER = 2000


def _as_numpy(emb: Union[torch.Tensor, np.ndarray]) -> np.ndarray:
    if isinstance(emb, torch.Tensor):
        return emb.detach().cpu().numpy()
    return np.asarray(emb, dtype=np.float64)


def _fit_once(x: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator) -> LogisticRegression:
    """Multinomial logistic regression started from a random coefficient draw."""
    clf = LogisticRegression(
        C=1.0 / (L2_PENALTY * len(y)),
        tol=PROBE_TOL,
        max_iter=PROBE_MAX_ITER,
        warm_start=True,
    )
    rows = 1 if n_classes == 2 else n_classes
    clf.coef_ = rng.normal(0.0, 0.01, size=(rows, x.shape[1]))
    clf.intercept_ = np.zeros(rows)
    clf.fit(x, y)
    return clf


def linear_probe(
    emb: Union[torch.Tensor, np.ndarray],
    g: Graph,
    n_inits: int = 10,
    seed: int = 0,
    part: Literal["val", "test"] = "test",
    config_hash: str = "",
    variant: Optional[str] = None,
) -> MetricsRecord:
    """
    Train a linear classifier on frozen train-node embeddings and score one split part.

    Macro precision, recall and F1 (plus accuracy) are averaged over n_inits
    classifier initialisations.

    Args:
        emb: n × D embeddings
        g: Graph with labels and a node split
        n_inits: Number of random classifier initialisations
        seed: Seed of the initialisations
        part: Split part to score
        config_hash: Hash of the training config, copied into the record
        variant: Ablation variant tag

    Returns:
        MetricsRecord for task node_classification

    Raises:
        ConfigurationError: If labels or the node split are missing
    """
    if g.labels is None:
        raise ConfigurationError("Node classification needs labels")
    if g.node_split is None:
        raise ConfigurationError("Node classification needs a node split")

    started = time.perf_counter()
    x = _as_numpy(emb)
    train_idx = g.node_split.train
    eval_idx = getattr(g.node_split, part)
    y_train, y_eval = g.labels[train_idx], g.labels[eval_idx]
    classes = np.unique(y_train)
    if len(classes) < 2:
        raise ConfigurationError("Node classification needs at least two classes among training nodes")

    rng = np.random.default_rng(seed)
    scores = []
    for _ in range(n_inits):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            clf = _fit_once(x[train_idx], y_train, len(classes), rng)
        predicted = clf.predict(x[eval_idx])
        precision, recall, f1, _ = precision_recall_fscore_support(
            y_eval, predicted, average="macro", zero_division=0
        )
        scores.append((precision, recall, f1, accuracy_score(y_eval, predicted)))

    mean = np.mean(scores, axis=0)
    record = MetricsRecord(
        task="node_classification",
        metrics={"P": float(mean[0]), "R": float(mean[1]), "F1": float(mean[2]), "accuracy": float(mean[3])},
        seed=seed,
        config_hash=config_hash,
        wall_time=time.perf_counter() - started,
        part=part,
        variant=variant,
        split=g.node_split.provenance,
    )
    logger.info(f"Linear probe ({part}, {n_inits} inits): F1={record.metrics['F1']:.4f}")
    return record
