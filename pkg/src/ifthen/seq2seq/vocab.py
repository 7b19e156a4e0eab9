"""Token vocabulary built from the training split only."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ifthen.graph import Triple

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<bos>", "<eos>"
RESERVED_TOKENS = (PAD, UNK, BOS, EOS, "PersonX", "PersonY", "PersonZ", "___")


@dataclass(frozen=True)
class VocabularyMap:
    """Bijective token<->id map with fixed reserved ids 0..7."""

    tokens: tuple[str, ...]
    token_to_id: dict[str, int]

    def __post_init__(self) -> None:
        if self.tokens[: len(RESERVED_TOKENS)] != RESERVED_TOKENS:
            raise ValueError("reserved tokens must occupy the first ids")
        if len(self.token_to_id) != len(self.tokens):
            raise ValueError("token->id map must be bijective")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK]

    @property
    def bos_id(self) -> int:
        return self.token_to_id[BOS]

    @property
    def eos_id(self) -> int:
        return self.token_to_id[EOS]

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.unk_id
        return [self.token_to_id.get(t, unk) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "VocabularyMap":
        return cls(tokens=tuple(tokens), token_to_id={t: i for i, t in enumerate(tokens)})


def build_vocab(train_triples: list[Triple], min_count: int = 1) -> VocabularyMap:
    """Vocabulary over event and non-empty target tokens of the train split.

    Ids are assigned by frequency (descending), ties broken
    lexicographically; tokens below ``min_count`` fall back to ``<unk>``.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    for t in train_triples:
        counts.update(t.event.tokens)
        if not t.target.is_empty:
            counts.update(t.target.tokens)
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count and tok not in RESERVED_TOKENS),
        key=lambda tok: (-counts[tok], tok),
    )
    return VocabularyMap.from_tokens(list(RESERVED_TOKENS) + kept)
