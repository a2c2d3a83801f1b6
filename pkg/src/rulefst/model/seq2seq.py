"""A small transformer encoder-decoder trained from scratch.

Pre-norm blocks, learned positional embeddings, a token embedding shared by
encoder and decoder, and (by default) an output projection tied to the token
embedding. No token-type embeddings: [SEP] tokens alone carry segment
structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import DataError
from ..text import PAD_ID
from .layers import (
    NEG_INF,
    Dense,
    Dropout,
    Embedding,
    FeedForward,
    LayerNorm,
    MultiHeadAttention,
    ParamStore,
    softmax,
)


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    heads: int = 4
    enc_layers: int = 2
    dec_layers: int = 2
    ffn_dim: int = 256
    max_len: int = 128
    dropout: float = 0.1
    positional: str = "learned"
    tie_embeddings: bool = True
    dtype: str = "float32"

    def __post_init__(self):
        if self.d_model % self.heads:
            raise DataError("d_model must be divisible by heads")
        if self.positional != "learned":
            raise DataError(f"unsupported positional mode {self.positional!r}")
        if self.vocab_size < 7:
            raise DataError("vocab_size must cover the reserved tokens")

    def to_dict(self) -> dict:
        return asdict(self)


class _EncoderBlock:
    def __init__(self, store, prefix, cfg, rng):
        self.ln1 = LayerNorm(store, prefix + ".ln1", cfg.d_model)
        self.attn = MultiHeadAttention(store, prefix + ".attn", cfg.d_model, cfg.heads, rng)
        self.drop1 = Dropout(cfg.dropout)
        self.ln2 = LayerNorm(store, prefix + ".ln2", cfg.d_model)
        self.ffn = FeedForward(store, prefix + ".ffn", cfg.d_model, cfg.ffn_dim, rng)
        self.drop2 = Dropout(cfg.dropout)

    def forward(self, x, mask, train, rng):
        h = self.ln1.forward(x)
        x = x + self.drop1.forward(self.attn.forward(h, h, mask), train, rng)
        x = x + self.drop2.forward(self.ffn.forward(self.ln2.forward(x)), train, rng)
        return x

    def backward(self, dx):
        dffn = self.ln2.backward(self.ffn.backward(self.drop2.backward(dx)))
        dx = dx + dffn
        dq, dkv = self.attn.backward(self.drop1.backward(dx))
        dx = dx + self.ln1.backward(dq + dkv)
        return dx


class _DecoderBlock:
    def __init__(self, store, prefix, cfg, rng):
        self.ln1 = LayerNorm(store, prefix + ".ln1", cfg.d_model)
        self.self_attn = MultiHeadAttention(store, prefix + ".self", cfg.d_model, cfg.heads, rng)
        self.drop1 = Dropout(cfg.dropout)
        self.ln2 = LayerNorm(store, prefix + ".ln2", cfg.d_model)
        self.cross_attn = MultiHeadAttention(store, prefix + ".cross", cfg.d_model, cfg.heads, rng)
        self.drop2 = Dropout(cfg.dropout)
        self.ln3 = LayerNorm(store, prefix + ".ln3", cfg.d_model)
        self.ffn = FeedForward(store, prefix + ".ffn", cfg.d_model, cfg.ffn_dim, rng)
        self.drop3 = Dropout(cfg.dropout)

    def forward(self, x, enc_out, self_mask, cross_mask, train, rng):
        h = self.ln1.forward(x)
        x = x + self.drop1.forward(self.self_attn.forward(h, h, self_mask), train, rng)
        x = x + self.drop2.forward(
            self.cross_attn.forward(self.ln2.forward(x), enc_out, cross_mask), train, rng
        )
        x = x + self.drop3.forward(self.ffn.forward(self.ln3.forward(x)), train, rng)
        return x

    def backward(self, dx):
        dffn = self.ln3.backward(self.ffn.backward(self.drop3.backward(dx)))
        dx = dx + dffn
        dq, denc = self.cross_attn.backward(self.drop2.backward(dx))
        dx = dx + self.ln2.backward(dq)
        dq, dkv = self.self_attn.backward(self.drop1.backward(dx))
        dx = dx + self.ln1.backward(dq + dkv)
        return dx, denc


class Seq2SeqTransformer:
    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        self.store = ParamStore(np.dtype(config.dtype))
        root = np.random.default_rng(seed)
        init_rng, dropout_rng = root.spawn(2)
        self._dropout_rng = dropout_rng
        cfg = config

        self.tok = Embedding(self.store, "embed.tok", cfg.vocab_size, cfg.d_model, init_rng)
        self.store.add("embed.pos", init_rng.normal(0.0, 0.02, size=(cfg.max_len, cfg.d_model)))
        self.emb_drop_src = Dropout(cfg.dropout)
        self.emb_drop_tgt = Dropout(cfg.dropout)
        self.enc_blocks = [
            _EncoderBlock(self.store, f"enc{i}", cfg, init_rng) for i in range(cfg.enc_layers)
        ]
        self.enc_ln = LayerNorm(self.store, "enc.ln_f", cfg.d_model)
        self.dec_blocks = [
            _DecoderBlock(self.store, f"dec{i}", cfg, init_rng) for i in range(cfg.dec_layers)
        ]
        self.dec_ln = LayerNorm(self.store, "dec.ln_f", cfg.d_model)
        if cfg.tie_embeddings:
            self.out_proj = None
        else:
            self.out_proj = Dense(self.store, "out", cfg.d_model, cfg.vocab_size, init_rng)
        self.store.add("out.bias", np.zeros(cfg.vocab_size))

    # ---- helpers -------------------------------------------------------

    def _check_len(self, ids: np.ndarray, what: str) -> None:
        if ids.shape[-1] > self.config.max_len:
            raise DataError(
                f"{what} length {ids.shape[-1]} exceeds max_len={self.config.max_len}"
            )

    def _embed(self, ids: np.ndarray, drop: Dropout, train: bool) -> np.ndarray:
        pos = self.store.values["embed.pos"][: ids.shape[1]]
        x = self.tok.table[ids] + pos
        return drop.forward(x, train, self._dropout_rng)

    def _embed_backward(self, ids: np.ndarray, dx: np.ndarray, drop: Dropout) -> None:
        dx = drop.backward(dx)
        dE = np.zeros_like(self.tok.table)
        np.add.at(dE, ids.reshape(-1), dx.reshape(-1, dx.shape[-1]))
        self.store.accumulate("embed.tok.E", dE)
        dpos = np.zeros_like(self.store.values["embed.pos"])
        dpos[: ids.shape[1]] = dx.sum(axis=0)
        self.store.accumulate("embed.pos", dpos)

    @staticmethod
    def pad_mask(ids: np.ndarray, dtype) -> np.ndarray:
        """(B, 1, 1, L) additive mask hiding PAD keys."""
        return np.where(ids[:, None, None, :] == PAD_ID, NEG_INF, 0.0).astype(dtype)

    @staticmethod
    def causal_mask(length: int, dtype) -> np.ndarray:
        m = np.triu(np.full((length, length), NEG_INF), k=1)
        return m[None, None].astype(dtype)

    # ---- forward / backward -------------------------------------------

    def encode(self, src_ids: np.ndarray, train: bool = False) -> tuple[np.ndarray, np.ndarray]:
        self._check_len(src_ids, "source")
        mask = self.pad_mask(src_ids, self.store.dtype)
        x = self._embed(src_ids, self.emb_drop_src, train)
        for block in self.enc_blocks:
            x = block.forward(x, mask, train, self._dropout_rng)
        return self.enc_ln.forward(x), mask

    def decode(self, enc_out: np.ndarray, src_mask: np.ndarray, tgt_in_ids: np.ndarray, train: bool = False) -> np.ndarray:
        self._check_len(tgt_in_ids, "target")
        t = tgt_in_ids.shape[1]
        self_mask = self.causal_mask(t, self.store.dtype) + self.pad_mask(tgt_in_ids, self.store.dtype)
        x = self._embed(tgt_in_ids, self.emb_drop_tgt, train)
        for block in self.dec_blocks:
            x = block.forward(x, enc_out, self_mask, src_mask, train, self._dropout_rng)
        h = self.dec_ln.forward(x)
        if self.out_proj is None:
            logits = self.tok.project_out(h)
        else:
            logits = self.out_proj.forward(h)
        return logits + self.store.values["out.bias"]

    def forward(self, src_ids: np.ndarray, tgt_in_ids: np.ndarray, train: bool = False) -> np.ndarray:
        """Logits over the vocabulary at every target position, (B, T, V)."""
        enc_out, src_mask = self.encode(src_ids, train)
        self._last_src_ids = src_ids
        return self.decode(enc_out, src_mask, tgt_in_ids, train)

    def loss(self, src_ids: np.ndarray, tgt_in_ids: np.ndarray, tgt_out_ids: np.ndarray, train: bool = False) -> tuple[float, int]:
        """Mean token cross-entropy over non-PAD target positions.

        Returns (loss, n_tokens); n_tokens == 0 yields loss 0.0.
        """
        logits = self.forward(src_ids, tgt_in_ids, train)
        loss, _, n_tok = self._ce(logits, tgt_out_ids)
        return loss, n_tok

    def _ce(self, logits: np.ndarray, tgt_out: np.ndarray) -> tuple[float, np.ndarray, int]:
        mask = tgt_out != PAD_ID
        n_tok = int(mask.sum())
        probs = softmax(logits.astype(np.float64), axis=-1)
        if n_tok == 0:
            return 0.0, np.zeros_like(logits), 0
        b, t = tgt_out.shape
        ii, jj = np.nonzero(mask)
        gold = tgt_out[ii, jj]
        eps = np.finfo(np.float64).tiny
        loss = -np.log(probs[ii, jj, gold] + eps).sum() / n_tok
        dlogits = probs
        dlogits[ii, jj, gold] -= 1.0
        dlogits[~mask] = 0.0
        dlogits /= n_tok
        return float(loss), dlogits.astype(logits.dtype), n_tok

    def loss_and_grads(
        self,
        src_ids: np.ndarray,
        tgt_in_ids: np.ndarray,
        tgt_out_ids: np.ndarray,
        train: bool = True,
        loss_scale: float = 1.0,
    ) -> tuple[float, int]:
        """Forward + backward; gradients accumulate into the param store."""
        self.store.zero_grads()
        enc_out, src_mask = self.encode(src_ids, train)
        logits = self.decode(enc_out, src_mask, tgt_in_ids, train)
        loss, dlogits, n_tok = self._ce(logits, tgt_out_ids)
        if loss_scale != 1.0:
            loss *= loss_scale
            dlogits = dlogits * loss_scale

        self.store.accumulate("out.bias", dlogits.reshape(-1, dlogits.shape[-1]).sum(axis=0))
        if self.out_proj is None:
            dh = self.tok.project_out_backward(dlogits)
        else:
            dh = self.out_proj.backward(dlogits)
        dx = self.dec_ln.backward(dh)
        denc_total = np.zeros_like(enc_out)
        for block in reversed(self.dec_blocks):
            dx, denc = block.backward(dx)
            denc_total += denc
        self._embed_backward(tgt_in_ids, dx, self.emb_drop_tgt)

        dx = self.enc_ln.backward(denc_total)
        for block in reversed(self.enc_blocks):
            dx = block.backward(dx)
        self._embed_backward(src_ids, dx, self.emb_drop_src)
        return loss, n_tok

    def next_token_logprobs(self, enc_out: np.ndarray, src_mask: np.ndarray, prefix_ids: np.ndarray) -> np.ndarray:
        """Log-probabilities for the next token after each prefix, (B, V)."""
        logits = self.decode(enc_out, src_mask, prefix_ids, train=False)
        last = logits[:, -1, :].astype(np.float64)
        shifted = last - last.max(axis=-1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
