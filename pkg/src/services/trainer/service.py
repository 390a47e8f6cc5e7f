"""Alternating G-Step / D-Step / E-Step training loop."""

import logging
import math
from pathlib import Path
from typing import Callable, Optional, Union

import torch

from src.core.config import TrainConfig
from src.core.errors import NumericError, TrainingError
from src.core.rng import RngStreams
from src.graph.candidates import build_candidate_set
from src.graph.models import CandidateSet, Graph
from src.services.encoder import EmbeddingTable, encode, normalize_adjacency, train_operator
from src.services.encoder.models import EncoderOutput
from src.services.ssl_objectives import bpr_loss, contrastive_loss, sample_triples, ssl_loss
from src.services.trainer.checkpoint import load_checkpoint, save_checkpoint
from src.services.trainer.models import (
    EvaluationPoint,
    LossRecord,
    Phase,
    TrainingHistory,
    TrainResult,
)
from src.services.view_discriminator import (
    GENERATED_LABEL,
    REAL_LABEL,
    LabeledView,
    ViewDiscriminator,
    adversarial_loss,
    bce_loss,
    pool_graph,
)
from src.services.view_generator import (
    DiscreteView,
    RelaxedView,
    ViewGenerator,
    average_view_statistics,
    dropout_view,
    regularization_loss,
    replacement_view,
    sample_relaxed_view,
)

logger = logging.getLogger(__name__)

View = Union[RelaxedView, DiscreteView]
Evaluator = Callable[[torch.Tensor], float]

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class GacnTrainer:
    """
    Owns the three parameter groups, their optimizers and the random streams.

    Each phase differentiates its loss only with respect to its own group
    and steps only that group's optimizer, so the other groups stay
    bitwise unchanged.
    """

    def __init__(
        self,
        g: Graph,
        cfg: TrainConfig,
        evaluator: Optional[Evaluator] = None,
        checkpoint_dir: Optional[Path] = None,
        candidates: Optional[CandidateSet] = None,
    ):
        self.g = g
        self.cfg = cfg
        self.evaluator = evaluator
        self.checkpoint_dir = checkpoint_dir
        self.rng = RngStreams(cfg.seed)
        self.iteration = 0
        self.best_metric: Optional[float] = None

        if candidates is None:
            candidates = build_candidate_set(g, cfg.candidate_top_k, cfg.candidate_cap_factor)
        self.candidates = candidates

        init_stream = self.rng.get("init")
        self.embeddings = EmbeddingTable.initialize(g, cfg.dim, init_stream, cfg.init_std, cfg.feature_init)
        self.generator = ViewGenerator.from_config(g, candidates, cfg)
        self.discriminator = ViewDiscriminator.from_config(cfg, init_stream)

        self.g_optimizer = self._adam(self.generator.parameters())
        self.d_optimizer = self._adam(self.discriminator.parameters())
        self.e_optimizer = self._adam(self.embeddings.parameters())
        self.d_params = list(self.discriminator.parameters())
        if cfg.d_step_updates_encoder:
            self.d_optimizer.add_param_group({"params": [self.embeddings.table]})
            self.d_params.append(self.embeddings.table)

        self.clean_operator = train_operator(g)
        self.negative_pool = cfg.negative_pool if g.n_nodes > cfg.negative_pool_threshold else None
        if self.negative_pool:
            logger.info(f"Using a sampled negative pool of {self.negative_pool} nodes ({g.n_nodes} nodes)")

    def _adam(self, params) -> torch.optim.Adam:
        return torch.optim.Adam(params, lr=self.cfg.lr, betas=ADAM_BETAS, eps=ADAM_EPS)

    # Views

    def generated_view(self, track_grad: bool = True) -> RelaxedView:
        stream, draw = self.rng.draw("noise")
        with torch.set_grad_enabled(track_grad):
            return sample_relaxed_view(self.generator, stream, draw)

    def predefined_view(self) -> DiscreteView:
        stream, draw = self.rng.draw("dropout")
        return dropout_view(self.g, self.cfg.keep_rate, stream, draw)

    def contrast_view(self) -> View:
        """Second view of the E-Step contrastive pair."""
        if self.cfg.contrast_view == "dropout":
            return self.predefined_view()
        if self.cfg.contrast_view == "replacement":
            stream, draw = self.rng.draw("replacement")
            return replacement_view(self.g, self.cfg.keep_rate, self.cfg.replacement_rate, stream, draw)
        return self.generated_view(track_grad=False)

    def encode_view(self, view: View, table: Optional[torch.Tensor] = None) -> EncoderOutput:
        table = self.embeddings.table if table is None else table
        return encode(table, normalize_adjacency(view.adjacency()), self.cfg.layers)

    def clean_embeddings(self) -> torch.Tensor:
        """Readout of the current table over the training graph."""
        with torch.no_grad():
            return encode(self.embeddings.table, self.clean_operator, self.cfg.layers).final.detach().clone()

    # Phases

    def _apply(self, loss: torch.Tensor, params: list[torch.nn.Parameter], optimizer: torch.optim.Optimizer) -> None:
        if not loss.requires_grad:
            return
        grads = torch.autograd.grad(loss, params, allow_unused=True)
        for param, grad in zip(params, grads):
            param.grad = torch.zeros_like(param) if grad is None else grad
        optimizer.step()
        for param in params:
            param.grad = None

    def _check(self, phase: Phase, loss: torch.Tensor) -> None:
        if not math.isfinite(float(loss.detach())):
            raise NumericError(phase, f"loss is {float(loss.detach())}")

    def _run(self, phase: Phase, step: Callable[[], LossRecord]) -> LossRecord:
        try:
            record = step()
        except NumericError as e:
            if self.checkpoint_dir is not None:
                self.save_checkpoint(self.checkpoint_dir / "failure", reason="failure")
            raise TrainingError(phase, self.iteration, str(e)) from e
        logger.debug(f"[{self.iteration}] {phase}: {record.values}")
        return record

    def g_step(self) -> LossRecord:
        """Update the generator weights on the regularisation plus adversarial loss."""

        def step() -> LossRecord:
            cfg = self.cfg
            view = self.generated_view()
            reg = regularization_loss(view, self.g, cfg.lambda_cnt, cfg.lambda_new, cfg.lambda_g)
            values = {"reg": float(reg.detach())}
            loss = reg
            if cfg.lambda_adv:
                p = self.discriminator(pool_graph(self.encode_view(view)))
                adv = adversarial_loss(p)
                loss = loss + cfg.lambda_adv * adv
                values["adv"] = float(adv.detach())
                values["p_generated"] = float(p.detach())
            self._check("g_step", loss)
            values["loss"] = float(loss.detach())
            self._apply(loss, [self.generator.w], self.g_optimizer)
            return LossRecord(iteration=self.iteration, phase="g_step", values=values)

        return self._run("g_step", step)

    def d_batch(self) -> list[LabeledView]:
        """Balanced batch: dropout views labelled real, generator views labelled generated."""
        n = self.cfg.views_per_d_step
        real = [LabeledView(self.predefined_view(), REAL_LABEL) for _ in range(n)]
        generated = [LabeledView(self.generated_view(track_grad=False), GENERATED_LABEL) for _ in range(n)]
        return real + generated

    def d_step(self) -> LossRecord:
        """Update the discriminator (and optionally the table) on mean BCE."""

        def step() -> LossRecord:
            batch = self.d_batch()
            table = self.embeddings.table if self.cfg.d_step_updates_encoder else self.embeddings.table.detach()
            losses, correct = [], 0
            for item in batch:
                p = self.discriminator(pool_graph(self.encode_view(item.view, table)))
                losses.append(bce_loss(p, item.label))
                correct += int((float(p.detach()) >= 0.5) == (item.label == REAL_LABEL))
            loss = torch.stack(losses).mean()
            self._check("d_step", loss)
            self._apply(loss, self.d_params, self.d_optimizer)
            return LossRecord(
                iteration=self.iteration,
                phase="d_step",
                values={"loss": float(loss.detach())},
                accuracy=correct / len(batch),
            )

        return self._run("d_step", step)

    def e_step(self) -> LossRecord:
        """Update the embedding table on λ_gcl·contrastive + λ_bpr·BPR."""

        def step() -> LossRecord:
            cfg = self.cfg
            values: dict[str, float] = {}
            gcl = bpr = None
            dp = None
            if cfg.lambda_gcl or (cfg.lambda_bpr and cfg.bpr_on_views):
                dp = self.encode_view(self.predefined_view()).final
            if cfg.lambda_gcl:
                dg = self.encode_view(self.contrast_view()).final
                gcl = contrastive_loss(dp, dg, cfg.tau_f, self.negative_pool, self.rng.get("negatives"))
                values["gcl"] = float(gcl.detach())
            if cfg.lambda_bpr and len(self.g.train_edges):
                batch = sample_triples(self.g, len(self.g.train_edges), self.rng.get("triples"))
                if batch.size:
                    final = dp if cfg.bpr_on_views else encode(
                        self.embeddings.table, self.clean_operator, cfg.layers
                    ).final
                    bpr = bpr_loss(final, batch)
                    values["bpr"] = float(bpr.detach())
            loss = ssl_loss(gcl, bpr, cfg.lambda_gcl, cfg.lambda_bpr)
            self._check("e_step", loss)
            values["loss"] = float(loss.detach())
            self._apply(loss, [self.embeddings.table], self.e_optimizer)
            return LossRecord(iteration=self.iteration, phase="e_step", values=values)

        return self._run("e_step", step)

    # Loop

    def _evaluate(self, history: TrainingHistory) -> float:
        value = float(self.evaluator(self.clean_embeddings()))
        stats = None
        if self.cfg.track_view_stats:
            stats = average_view_statistics(
                self.generator, self.g, self.rng.get("eval"), self.cfg.stats_views, self.cfg.stats_threshold
            )
        metric = getattr(self.evaluator, "metric_name", "val_metric")
        history.evaluations.append(
            EvaluationPoint(iteration=self.iteration, metric=metric, value=value, view_stats=stats)
        )
        logger.info(f"Iteration {self.iteration}: {metric}={value:.4f}")
        return value

    def train(self) -> TrainResult:
        """
        Run outer iterations of n_g G-Steps, n_d D-Steps and n_e E-Steps.

        Stops at max_iters or after `patience` evaluations without a
        validation improvement; the best table is restored before the final
        clean-graph encoding. A checkpoint is written at every evaluation and
        at the end.

        Returns:
            TrainResult with the table, the clean readout embeddings and history
        """
        cfg = self.cfg
        history = TrainingHistory()
        best_table: Optional[torch.Tensor] = None
        stale = 0
        logger.info(
            f"Training for up to {cfg.max_iters} iterations "
            f"(n_g={cfg.n_g}, n_d={cfg.n_d}, n_e={cfg.n_e}, seed={cfg.seed}, config={cfg.config_hash()})"
        )

        while self.iteration < cfg.max_iters:
            self.iteration += 1
            history.losses.extend(self.g_step() for _ in range(cfg.n_g))
            history.losses.extend(self.d_step() for _ in range(cfg.n_d))
            history.losses.extend(self.e_step() for _ in range(cfg.n_e))
            history.iterations_run = self.iteration

            if self.evaluator is None or self.iteration % cfg.eval_every:
                continue
            value = self._evaluate(history)
            if self.best_metric is None or value > self.best_metric:
                self.best_metric = value
                history.best_iteration = self.iteration
                best_table = self.embeddings.table.detach().clone()
                stale = 0
            else:
                stale += 1
            if self.checkpoint_dir is not None:
                self.save_checkpoint(self.checkpoint_dir)
            if stale >= cfg.patience:
                history.stopped_early = True
                logger.info(f"Early stop at iteration {self.iteration} (best at {history.best_iteration})")
                break

        if best_table is not None:
            with torch.no_grad():
                self.embeddings.table.copy_(best_table)
        if self.checkpoint_dir is not None:
            self.save_checkpoint(self.checkpoint_dir, reason="final")

        embeddings = self.clean_embeddings()
        logger.info(f"Training finished after {history.iterations_run} iterations")
        return TrainResult(
            table=self.embeddings.table.detach().clone(),
            embeddings=embeddings,
            history=history,
        )

    def save_checkpoint(self, directory: Path, reason: str = "periodic") -> None:
        save_checkpoint(self, directory, reason)

    def load_checkpoint(self, directory: Path) -> None:
        """Restore parameters, optimizer moments, rng streams and the iteration counter."""
        load_checkpoint(self, directory)


def train(
    g: Graph,
    cfg: TrainConfig,
    evaluator: Optional[Evaluator] = None,
    checkpoint_dir: Optional[Path] = None,
) -> TrainResult:
    """Build a trainer and run the full loop."""
    return GacnTrainer(g, cfg, evaluator=evaluator, checkpoint_dir=checkpoint_dir).train()
