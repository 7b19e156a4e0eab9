"""Multitask training loop: Adam with gradient clipping, deterministic by seed."""

from __future__ import annotations

import logging
import math

import numpy as np

from ifthen.seq2seq.model import ModelParams, TrainingInstance, loss_and_grads

log = logging.getLogger(__name__)


class NumericError(RuntimeError):
    """Training hit a non-finite loss or gradient."""


class AdamOptimizer:
    """Standard Adam update over the model's named arrays."""

    def __init__(self, params: ModelParams, learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays.items()}

    def step(self, params: ModelParams, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name in params.param_order:
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params.arrays[name] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most ``max_norm``."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def batch_loss_and_grads(
    params: ModelParams,
    batch: list[TrainingInstance],
    grads: dict[str, np.ndarray],
    instance_losses: list[tuple[str, float]] | None = None,
) -> float:
    """Multitask objective for one batch.

    The loss is the mean over dimensions present in the batch of the mean
    instance loss for that dimension; gradients are weighted accordingly,
    so a batch containing only one dimension touches only that
    dimension's decoder and its shared encoder.
    """
    by_dim: dict[str, list[TrainingInstance]] = {}
    for inst in batch:
        by_dim.setdefault(inst.dimension.value, []).append(inst)
    num_dims = len(by_dim)
    total = 0.0
    for insts in by_dim.values():
        weight = 1.0 / (num_dims * len(insts))
        dim_total = 0.0
        for inst in insts:
            inst_loss = loss_and_grads(params, inst, grads, weight=weight)
            dim_total += inst_loss
            if instance_losses is not None:
                instance_losses.append((inst.dimension.value, inst_loss))
        total += dim_total / len(insts)
    return total / num_dims


def train(
    params: ModelParams,
    dataset: list[TrainingInstance],
    config=None,
) -> tuple[ModelParams, list[float]]:
    """Train in place; returns the params and the per-epoch loss trace.

    Deterministic given the config seed. Aborts with :class:`NumericError`
    on a non-finite loss. When ``early_stop_loss`` is set, training stops
    as soon as an epoch's mean loss falls below it.
    """
    if config is None:
        config = params.config
    if not dataset:
        raise ValueError("empty training dataset")
    rng = np.random.default_rng(config.seed)
    optimizer = AdamOptimizer(params, config.learning_rate)
    trace: list[float] = []
    for epoch in range(config.epochs):
        perm = rng.permutation(len(dataset))
        instance_losses: list[tuple[str, float]] = []
        for start in range(0, len(dataset), config.batch_size):
            batch = [dataset[i] for i in perm[start : start + config.batch_size]]
            grads = params.zero_grads()
            loss = batch_loss_and_grads(params, batch, grads, instance_losses)
            if not math.isfinite(loss):
                raise NumericError(
                    f"non-finite loss {loss} at epoch {epoch}, batch start {start}"
                )
            if config.learning_rate != 0.0:
                clip_gradients(grads, config.clip_norm)
                optimizer.step(params, grads)
        # Dataset-level multitask loss: mean over dimensions of the mean
        # instance loss, invariant to how the epoch was batched.
        dim_totals: dict[str, tuple[float, int]] = {}
        for dim, inst_loss in instance_losses:
            total, count = dim_totals.get(dim, (0.0, 0))
            dim_totals[dim] = (total + inst_loss, count + 1)
        epoch_mean = sum(t / c for t, c in dim_totals.values()) / len(dim_totals)
        trace.append(epoch_mean)
        log.debug("epoch %d: mean loss %.6f", epoch, epoch_mean)
        if config.early_stop_loss is not None and epoch_mean < config.early_stop_loss:
            break
    return params, trace
