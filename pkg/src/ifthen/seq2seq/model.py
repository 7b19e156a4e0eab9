"""Gated-recurrent encoder-decoder core with hand-derived backpropagation.

Everything runs in double precision on plain numpy arrays. A model is a
flat name->array dict plus a fixed flattening order, which makes shared
encoders literal shared objects, keeps checkpoints bit-exact, and lets
the gradient checker treat parameters as one vector.

Architecture: a shared embedding table feeds bidirectional gated
recurrent encoders (one per encoder group, each direction hidden size
h_enc/2, final states concatenated); an affine bridge per encoder group
initializes the per-dimension unidirectional decoder, whose state is
projected to vocabulary logits through W_o, b_o.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ifthen.graph import Triple
from ifthen.seq2seq.config import ModelConfig, ModelVariant
from ifthen.seq2seq.grouping import encoder_grouping
from ifthen.seq2seq.vocab import VocabularyMap
from ifthen.taxonomy import Dimension

CELL_KEYS = ("Wz", "Uz", "bz", "Wr", "Ur", "br", "Wn", "Un", "bn")


@dataclass(frozen=True)
class TrainingInstance:
    """One worker's annotation as an (event ids, dimension, target ids) pair."""

    event_ids: tuple[int, ...]
    dimension: Dimension
    target_ids: tuple[int, ...]
    worker_id: str = ""


class ModelParams:
    """Parameter container for one model variant.

    ``arrays`` maps structured names (``embedding``, ``encoder/<id>/fwd/Wz``,
    ``bridge/<id>/W``, ``decoder/<dim>/W_o``, ...) to float64 arrays;
    ``param_order`` is the canonical flattening order used by checkpoints,
    the optimizer, and the gradient checker.
    """

    def __init__(
        self,
        config: ModelConfig,
        vocab: VocabularyMap,
        arrays: dict[str, np.ndarray],
        param_order: list[str],
    ):
        self.config = config
        self.vocab = vocab
        self.grouping = encoder_grouping(config.variant)
        self.arrays = arrays
        self.param_order = param_order

    @property
    def encoder_ids(self) -> list[str]:
        return sorted(set(self.grouping.values()))

    @property
    def decoder_dims(self) -> list[Dimension]:
        return sorted(self.grouping, key=lambda d: d.value)

    def cell(self, prefix: str) -> dict[str, np.ndarray]:
        return {k: self.arrays[f"{prefix}/{k}"] for k in CELL_KEYS}

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.arrays.items()}


def _canonical_param_order(grouping: dict[Dimension, str]) -> list[str]:
    order = ["embedding"]
    for eid in sorted(set(grouping.values())):
        order += [f"bridge/{eid}/W", f"bridge/{eid}/b"]
        for direction in ("fwd", "bwd"):
            order += [f"encoder/{eid}/{direction}/{k}" for k in CELL_KEYS]
    for dim in sorted(grouping, key=lambda d: d.value):
        order += [f"decoder/{dim.value}/{k}" for k in CELL_KEYS]
        order += [f"decoder/{dim.value}/W_o", f"decoder/{dim.value}/b_o"]
    return order


def _cell_shapes(input_dim: int, hidden: int) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    for gate in "zrn":
        shapes[f"W{gate}"] = (hidden, input_dim)
        shapes[f"U{gate}"] = (hidden, hidden)
        shapes[f"b{gate}"] = (hidden,)
    return shapes


def _param_shapes(config: ModelConfig, vocab_size: int, grouping) -> dict[str, tuple]:
    half = config.enc_hidden // 2
    shapes: dict[str, tuple[int, ...]] = {"embedding": (vocab_size, config.embed_dim)}
    for eid in set(grouping.values()):
        shapes[f"bridge/{eid}/W"] = (config.dec_hidden, config.enc_hidden)
        shapes[f"bridge/{eid}/b"] = (config.dec_hidden,)
        for direction in ("fwd", "bwd"):
            for k, shape in _cell_shapes(config.embed_dim, half).items():
                shapes[f"encoder/{eid}/{direction}/{k}"] = shape
    for dim in grouping:
        for k, shape in _cell_shapes(config.embed_dim, config.dec_hidden).items():
            shapes[f"decoder/{dim.value}/{k}"] = shape
        shapes[f"decoder/{dim.value}/W_o"] = (vocab_size, config.dec_hidden)
        shapes[f"decoder/{dim.value}/b_o"] = (vocab_size,)
    return shapes


def init_params(
    config: ModelConfig,
    vocab: VocabularyMap,
    seed: int | None = None,
    pretrained_embeddings: dict[str, np.ndarray] | None = None,
) -> ModelParams:
    """Random initialization, deterministic given the seed.

    Known tokens may be seeded from a static embedding table; its vectors
    must match ``embed_dim``.
    """
    if config.variant is ModelVariant.NearestNeighbor:
        raise ValueError("the retrieval baseline has no trainable parameters")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    grouping = encoder_grouping(config.variant)
    shapes = _param_shapes(config, len(vocab), grouping)
    order = _canonical_param_order(grouping)
    arrays = {}
    for name in order:
        shape = shapes[name]
        if name.endswith(("/b", "/bz", "/br", "/bn", "/b_o")):
            arrays[name] = np.zeros(shape)
        else:
            scale = 0.1 if name == "embedding" else 0.08
            arrays[name] = rng.uniform(-scale, scale, size=shape)
    if pretrained_embeddings:
        emb = arrays["embedding"]
        for token, vec in pretrained_embeddings.items():
            idx = vocab.token_to_id.get(token)
            if idx is None:
                continue
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (config.embed_dim,):
                raise ValueError(
                    f"embedding for {token!r} has dim {vec.shape}, "
                    f"expected ({config.embed_dim},)"
                )
            emb[idx] = vec
    return ModelParams(config, vocab, arrays, order)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def gru_step(cell: dict[str, np.ndarray], x: np.ndarray, h_prev: np.ndarray):
    """One gated-recurrent step; returns the new state and a backprop cache."""
    z = _sigmoid(cell["Wz"] @ x + cell["Uz"] @ h_prev + cell["bz"])
    r = _sigmoid(cell["Wr"] @ x + cell["Ur"] @ h_prev + cell["br"])
    n = np.tanh(cell["Wn"] @ x + cell["Un"] @ (r * h_prev) + cell["bn"])
    h = (1.0 - z) * n + z * h_prev
    return h, (x, h_prev, z, r, n)


def gru_step_backward(
    cell: dict[str, np.ndarray],
    cache,
    dh: np.ndarray,
    grads: dict[str, np.ndarray],
    prefix: str,
) -> tuple[np.ndarray, np.ndarray]:
    """Backprop one step; accumulates into ``grads``, returns (dx, dh_prev)."""
    x, h_prev, z, r, n = cache
    dz = dh * (h_prev - n)
    dn = dh * (1.0 - z)
    dh_prev = dh * z

    dn_pre = dn * (1.0 - n * n)
    grads[f"{prefix}/Wn"] += np.outer(dn_pre, x)
    grads[f"{prefix}/Un"] += np.outer(dn_pre, r * h_prev)
    grads[f"{prefix}/bn"] += dn_pre
    drh = cell["Un"].T @ dn_pre
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    dz_pre = dz * z * (1.0 - z)
    dr_pre = dr * r * (1.0 - r)
    grads[f"{prefix}/Wz"] += np.outer(dz_pre, x)
    grads[f"{prefix}/Uz"] += np.outer(dz_pre, h_prev)
    grads[f"{prefix}/bz"] += dz_pre
    grads[f"{prefix}/Wr"] += np.outer(dr_pre, x)
    grads[f"{prefix}/Ur"] += np.outer(dr_pre, h_prev)
    grads[f"{prefix}/br"] += dr_pre
    dh_prev = dh_prev + cell["Uz"].T @ dz_pre + cell["Ur"].T @ dr_pre

    dx = cell["Wz"].T @ dz_pre + cell["Wr"].T @ dr_pre + cell["Wn"].T @ dn_pre
    return dx, dh_prev


def _encode_with_cache(params: ModelParams, encoder_id: str, event_ids):
    if len(event_ids) == 0:
        raise ValueError("cannot encode an empty event sequence")
    emb = params.arrays["embedding"]
    half = params.config.enc_hidden // 2
    fwd = params.cell(f"encoder/{encoder_id}/fwd")
    bwd = params.cell(f"encoder/{encoder_id}/bwd")

    h_f = np.zeros(half)
    fwd_caches = []
    for tok in event_ids:
        h_f, cache = gru_step(fwd, emb[tok], h_f)
        fwd_caches.append(cache)
    h_b = np.zeros(half)
    bwd_caches = []
    for tok in reversed(event_ids):
        h_b, cache = gru_step(bwd, emb[tok], h_b)
        bwd_caches.append(cache)
    return np.concatenate([h_f, h_b]), fwd_caches, bwd_caches


def encode(params: ModelParams, encoder_id: str, event_ids) -> np.ndarray:
    """Bidirectional encoding: concatenated final forward/backward states."""
    h, _, _ = _encode_with_cache(params, encoder_id, event_ids)
    return h


def initial_decoder_state(
    params: ModelParams, dimension: Dimension, event_ids
) -> np.ndarray:
    """Encode the event with the dimension's encoder and bridge to h_dec."""
    dimension = Dimension(dimension)
    if dimension not in params.grouping:
        raise ValueError(
            f"{dimension.value} is not modeled by variant {params.config.variant.value}"
        )
    eid = params.grouping[dimension]
    h = encode(params, eid, event_ids)
    return params.arrays[f"bridge/{eid}/W"] @ h + params.arrays[f"bridge/{eid}/b"]


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def decode_step(
    params: ModelParams,
    dimension: Dimension,
    hidden_state: np.ndarray,
    prev_token_id: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance the decoder one token; returns (next-token distribution, state)."""
    dim = Dimension(dimension).value
    cell = params.cell(f"decoder/{dim}")
    x = params.arrays["embedding"][prev_token_id]
    new_h, _ = gru_step(cell, x, hidden_state)
    logits = params.arrays[f"decoder/{dim}/W_o"] @ new_h + params.arrays[f"decoder/{dim}/b_o"]
    return _softmax(logits), new_h


def _teacher_forced_ids(params: ModelParams, instance: TrainingInstance):
    bos, eos = params.vocab.bos_id, params.vocab.eos_id
    inputs = (bos,) + tuple(instance.target_ids)
    golds = tuple(instance.target_ids) + (eos,)
    return inputs, golds


def sequence_loss(params: ModelParams, instance: TrainingInstance) -> float:
    """Teacher-forced cross entropy, averaged over target positions."""
    state = initial_decoder_state(params, instance.dimension, instance.event_ids)
    inputs, golds = _teacher_forced_ids(params, instance)
    total = 0.0
    for inp, gold in zip(inputs, golds):
        probs, state = decode_step(params, instance.dimension, state, inp)
        total -= np.log(probs[gold])
    return total / len(golds)


def loss_and_grads(
    params: ModelParams,
    instance: TrainingInstance,
    grads: dict[str, np.ndarray],
    weight: float = 1.0,
) -> float:
    """Forward + backward for one instance.

    Accumulates ``weight`` times the gradient into ``grads`` and returns
    the (unweighted) loss.
    """
    dim = Dimension(instance.dimension)
    if dim not in params.grouping:
        raise ValueError(
            f"{dim.value} is not modeled by variant {params.config.variant.value}"
        )
    eid = params.grouping[dim]
    emb = params.arrays["embedding"]
    half = params.config.enc_hidden // 2
    event_ids = list(instance.event_ids)

    h, fwd_caches, bwd_caches = _encode_with_cache(params, eid, event_ids)
    w_bridge = params.arrays[f"bridge/{eid}/W"]
    s0 = w_bridge @ h + params.arrays[f"bridge/{eid}/b"]

    dec_prefix = f"decoder/{dim.value}"
    dec_cell = params.cell(dec_prefix)
    w_o = params.arrays[f"{dec_prefix}/W_o"]
    b_o = params.arrays[f"{dec_prefix}/b_o"]

    inputs, golds = _teacher_forced_ids(params, instance)
    state = s0
    states = []  # state after consuming inputs[i]
    caches = []
    probs_seq = []
    total = 0.0
    for inp, gold in zip(inputs, golds):
        state, cache = gru_step(dec_cell, emb[inp], state)
        probs = _softmax(w_o @ state + b_o)
        total -= np.log(probs[gold])
        states.append(state)
        caches.append(cache)
        probs_seq.append(probs)
    m = len(golds)
    loss = total / m

    # Backward through the decoder stack.
    ds_next = np.zeros_like(s0)
    for i in reversed(range(m)):
        dlogits = probs_seq[i].copy()
        dlogits[golds[i]] -= 1.0
        dlogits *= weight / m
        grads[f"{dec_prefix}/W_o"] += np.outer(dlogits, states[i])
        grads[f"{dec_prefix}/b_o"] += dlogits
        ds = w_o.T @ dlogits + ds_next
        dx, ds_next = gru_step_backward(dec_cell, caches[i], ds, grads, dec_prefix)
        grads["embedding"][inputs[i]] += dx

    # Bridge.
    ds0 = ds_next
    grads[f"bridge/{eid}/W"] += np.outer(ds0, h)
    grads[f"bridge/{eid}/b"] += ds0
    dh = w_bridge.T @ ds0

    # Encoder, both directions (only the final states receive gradient).
    fwd = params.cell(f"encoder/{eid}/fwd")
    bwd = params.cell(f"encoder/{eid}/bwd")
    n = len(event_ids)
    dh_next = dh[:half]
    for t in reversed(range(n)):
        dx, dh_next = gru_step_backward(
            fwd, fwd_caches[t], dh_next, grads, f"encoder/{eid}/fwd"
        )
        grads["embedding"][event_ids[t]] += dx
    dh_next = dh[half:]
    for t in reversed(range(n)):
        dx, dh_next = gru_step_backward(
            bwd, bwd_caches[t], dh_next, grads, f"encoder/{eid}/bwd"
        )
        grads["embedding"][event_ids[n - 1 - t]] += dx
    return loss


def make_training_instances(
    triples: list[Triple], vocab: VocabularyMap
) -> list[TrainingInstance]:
    """One instance per worker annotation; empty targets carry no sequence."""
    instances = []
    for t in triples:
        if t.target.is_empty:
            continue
        instances.append(
            TrainingInstance(
                event_ids=tuple(vocab.encode(t.event.tokens)),
                dimension=t.dimension,
                target_ids=tuple(vocab.encode(t.target.tokens)),
                worker_id=t.worker_id,
            )
        )
    return instances
