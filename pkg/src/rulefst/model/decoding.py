"""Greedy and beam-search decoding with length-normalized scoring.

The beam keeps `beam_size` live hypotheses; each step expands every live
hypothesis with its top-`fanout` next tokens, then reselects the best
`beam_size` by score. Hypotheses end at [EOS] or max_len and the best
finished hypothesis wins. Scores are sum log-probability, divided by the
generated length when length_normalize is on.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import DataError
from ..text import BOS_ID, EOS_ID
from .seq2seq import Seq2SeqTransformer

# step_fn maps a batch of prefixes (each starting with BOS) to (n, V) next-token log-probs
StepFn = Callable[[list[list[int]]], np.ndarray]


def _score(logp_sum: float, length: int, length_normalize: bool) -> float:
    if not length_normalize:
        return logp_sum
    return logp_sum / max(length, 1)


def _hyp_key(hyp: tuple[list[int], float], length_normalize: bool) -> tuple:
    tokens, logp = hyp
    # Deterministic ordering: score, then shorter, then lexicographic.
    return (-_score(logp, len(tokens), length_normalize), len(tokens), tokens)


def beam_search(
    step_fn: StepFn,
    beam_size: int = 4,
    fanout: int = 6,
    max_len: int = 32,
    length_normalize: bool = True,
) -> list[int]:
    """Generic beam search over a next-token log-probability callback.

    Returns the generated ids without BOS, with the trailing EOS stripped.
    """
    if beam_size < 1:
        raise DataError("beam_size must be >= 1")
    if fanout < 1:
        raise DataError("fanout must be >= 1")
    live: list[tuple[list[int], float]] = [([], 0.0)]
    finished: list[tuple[list[int], float]] = []
    for _ in range(max_len):
        prefixes = [[BOS_ID] + tokens for tokens, _ in live]
        logprobs = step_fn(prefixes)
        candidates: list[tuple[list[int], float]] = []
        for (tokens, logp), row in zip(live, logprobs):
            k = min(fanout, row.shape[-1])
            top = np.argpartition(-row, k - 1)[:k]
            for tok in sorted(top.tolist(), key=lambda t: (-row[t], t)):
                candidates.append((tokens + [tok], logp + float(row[tok])))
        candidates.sort(key=lambda h: _hyp_key(h, length_normalize))
        live = []
        for tokens, logp in candidates:
            if tokens[-1] == EOS_ID:
                finished.append((tokens, logp))
            elif len(live) < beam_size:
                live.append((tokens, logp))
        if not live:
            break
    finished.extend(live)  # ran into max_len
    finished.sort(key=lambda h: _hyp_key(h, length_normalize))
    best = finished[0][0]
    if best and best[-1] == EOS_ID:
        best = best[:-1]
    return best


def model_step_fn(model: Seq2SeqTransformer, src_ids: Sequence[int]) -> StepFn:
    """Encode once; score next tokens for any batch of target prefixes."""
    src = np.asarray([src_ids], dtype=np.int64)
    enc_out, src_mask = model.encode(src, train=False)

    def step(prefixes: list[list[int]]) -> np.ndarray:
        n = len(prefixes)
        length = max(len(p) for p in prefixes)
        tgt = np.full((n, length), BOS_ID, dtype=np.int64)
        for i, p in enumerate(prefixes):
            tgt[i, : len(p)] = p
        enc = np.repeat(enc_out, n, axis=0)
        mask = np.repeat(src_mask, n, axis=0)
        return model.next_token_logprobs(enc, mask, tgt)

    return step


def beam_decode(
    model: Seq2SeqTransformer,
    src_ids: Sequence[int],
    beam_size: int = 4,
    fanout: int = 6,
    max_len: int | None = None,
    length_normalize: bool = True,
) -> list[int]:
    """Beam-search translation of one encoded source sentence."""
    if fanout < beam_size:
        raise DataError("fanout must be >= beam_size")
    if max_len is None:
        max_len = model.config.max_len - 1
    return beam_search(
        model_step_fn(model, src_ids),
        beam_size=beam_size,
        fanout=fanout,
        max_len=max_len,
        length_normalize=length_normalize,
    )


def greedy_decode(model: Seq2SeqTransformer, src_ids: Sequence[int], max_len: int | None = None) -> list[int]:
    """Argmax decoding; equivalent to beam_size=1, fanout=1."""
    if max_len is None:
        max_len = model.config.max_len - 1
    step = model_step_fn(model, src_ids)
    tokens: list[int] = []
    for _ in range(max_len):
        row = step([[BOS_ID] + tokens])[0]
        tok = int(np.argmax(row))
        if tok == EOS_ID:
            break
        tokens.append(tok)
    return tokens
