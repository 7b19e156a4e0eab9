"""Deterministic, bit-exact checkpoint serialization.

Layout: one JSON header line (format version, config, vocabulary, tensor
manifest with shapes, all keys sorted) followed by the raw little-endian
float64 bytes of every tensor, concatenated in the canonical flattening
order. Writing the same model twice yields byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from ifthen.seq2seq.config import ModelConfig
from ifthen.seq2seq.model import ModelParams, _canonical_param_order
from ifthen.seq2seq.vocab import VocabularyMap

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(params: ModelParams, path: str) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "config": params.config.to_dict(),
        "vocab": list(params.vocab.tokens),
        "tensors": [
            {"name": name, "shape": list(params.arrays[name].shape)}
            for name in params.param_order
        ],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        for name in params.param_order:
            arr = np.ascontiguousarray(params.arrays[name], dtype="<f8")
            fh.write(arr.tobytes())


def load_checkpoint(path: str) -> ModelParams:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"bad checkpoint header: {exc}") from None
        if header.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint format version {header.get('format_version')}"
            )
        config = ModelConfig.from_dict(header["config"])
        vocab = VocabularyMap.from_tokens(header["vocab"])
        arrays: dict[str, np.ndarray] = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise CheckpointError(f"truncated tensor data for {spec['name']}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
        if fh.read(1):
            raise CheckpointError("trailing bytes after tensor data")

    params = ModelParams(
        config=config,
        vocab=vocab,
        arrays=arrays,
        param_order=[spec["name"] for spec in header["tensors"]],
    )
    expected = _canonical_param_order(params.grouping)
    if params.param_order != expected:
        raise CheckpointError("tensor manifest does not match the canonical order")
    return params
