"""Context windows around a mention and the pooled vectors built from them.

A window is the mention's utterance plus its neighbours, with a one-token
padding utterance standing in at transcript boundaries. An encoder turns the
concatenated window into subword vectors; those are averaged into word
vectors, then into one vector per utterance and one per mention span.
"""

from __future__ import annotations

import hashlib
import logging
import re
import threading
from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

import numpy as np
import torch
from torch import nn

from speakerid.core import PAD, PAD_UTTERANCE, NameMention, Transcript, Utterance
from speakerid.errors import EncoderFailure

log = logging.getLogger(__name__)

PAD_TOKEN = PAD_UTTERANCE.tokens[0]


@dataclass(frozen=True)
class ContextWindow:
    w_prev: Utterance
    w_cur: Utterance
    w_next: Utterance
    mentions: tuple[NameMention, ...]

    @property
    def mention(self) -> NameMention:
        return self.mentions[0]

    @property
    def s_prev(self) -> str:
        return self.w_prev.speaker_id

    @property
    def s_cur(self) -> str:
        return self.w_cur.speaker_id

    @property
    def s_next(self) -> str:
        return self.w_next.speaker_id

    @property
    def speakers(self) -> tuple[str, str, str]:
        return self.s_prev, self.s_cur, self.s_next

    @property
    def tokens(self) -> tuple[str, ...]:
        return self.w_prev.tokens + self.w_cur.tokens + self.w_next.tokens

    @property
    def lengths(self) -> tuple[int, int, int]:
        return len(self.w_prev.tokens), len(self.w_cur.tokens), len(self.w_next.tokens)


@dataclass
class TokenMatrix:
    vectors: torch.Tensor  # (n_tokens, dim)
    window: ContextWindow | None = None

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


@dataclass
class EncodedMention:
    r_prev: torch.Tensor
    r_cur: torch.Tensor
    r_next: torch.Tensor
    r_n: torch.Tensor
    names: list[torch.Tensor] = field(default_factory=list)


def assemble_window(t: Transcript, m: NameMention | Sequence[NameMention]) -> ContextWindow:
    mentions = (m,) if isinstance(m, NameMention) else tuple(m)
    if not mentions:
        raise ValueError("window needs at least one mention")
    i = mentions[0].utt_index
    if any(x.utt_index != i for x in mentions):
        raise ValueError("all mentions of one window must share an utterance")
    utts = t.utterances
    prev = utts[i - 1] if i > 0 else PAD_UTTERANCE
    nxt = utts[i + 1] if i + 1 < len(utts) else PAD_UTTERANCE
    return ContextWindow(prev, utts[i], nxt, mentions)


class ContextEncoder(Protocol):
    """Maps a token sequence to subword vectors plus a subword->token alignment.

    ``concurrency`` declares how an instance may be shared between workers:
    ``"synchronized"`` (safe to share) or ``"clone"`` (call ``clone()`` per worker).
    """

    dim: int
    max_subwords: int | None
    concurrency: str

    def encode(self, tokens: Sequence[str]) -> tuple[torch.Tensor, list[int]]: ...

    def count_subwords(self, tokens: Sequence[str]) -> int: ...


_PIECE = re.compile(r"[^\W_]{1,4}|\S")


def split_subwords(token: str) -> list[str]:
    """Deterministic word-piece split: runs of up to four letters/digits,
    every other character on its own."""
    if token == PAD_TOKEN:
        return [PAD_TOKEN]
    return _PIECE.findall(token.casefold()) or [token]


class HashEncoder(nn.Module):
    """Seeded hash-embedding encoder for desk-scale runs and tests.

    Every subword gets a fixed pseudo-random vector derived from its hash,
    plus a trainable embedding from a hashed bucket table. A trainable
    local convolution then mixes each subword with its neighbours, so name
    vectors carry some context the way a contextual encoder's would.
    """

    concurrency = "synchronized"
    max_subwords = None
    cache_size = 200_000

    def __init__(self, dim: int = 64, seed: int = 0, n_buckets: int = 4096, context: int = 2,
                 mix_scale: float = 0.5):
        super().__init__()
        self.dim = dim
        self.seed = seed
        self.n_buckets = n_buckets
        self.context = context
        self._key = seed.to_bytes(8, "little", signed=True)
        gen = torch.Generator().manual_seed(seed)
        self.embedding = nn.Embedding(n_buckets, dim)
        nn.init.normal_(self.embedding.weight, std=0.1 / np.sqrt(dim), generator=gen)
        offsets = [o for o in range(-context, context + 1) if o != 0]
        self.offsets = offsets
        self.mix = nn.Parameter(
            torch.randn(len(offsets), dim, dim, generator=gen) * (mix_scale / np.sqrt(dim))
        )
        self._pieces: dict[str, tuple[int, np.ndarray]] = {}
        self._windows: dict[tuple[str, ...], tuple] = {}
        self._lock = threading.Lock()

    def config(self) -> dict:
        return {"kind": "hash", "dim": self.dim, "seed": self.seed,
                "n_buckets": self.n_buckets, "context": self.context}

    def _piece(self, piece: str) -> tuple[int, np.ndarray]:
        hit = self._pieces.get(piece)
        if hit is None:
            digest = hashlib.blake2b(piece.encode("utf-8"), digest_size=8, key=self._key).digest()
            h = int.from_bytes(digest, "little")
            bucket = 0 if piece == PAD_TOKEN else 1 + h % (self.n_buckets - 1)
            vec = np.random.default_rng(h).standard_normal(self.dim) / np.sqrt(self.dim)
            hit = (bucket, vec)
            with self._lock:
                self._pieces[piece] = hit
        return hit

    def count_subwords(self, tokens: Sequence[str]) -> int:
        return sum(len(split_subwords(t)) for t in tokens)

    def encode(self, tokens: Sequence[str]) -> tuple[torch.Tensor, list[int]]:
        if not tokens:
            raise EncoderFailure("empty token sequence")
        key = tuple(tokens)
        hit = self._windows.get(key)
        if hit is None:
            buckets, fixed, align = [], [], []
            for ti, tok in enumerate(tokens):
                for piece in split_subwords(tok):
                    b, v = self._piece(piece)
                    buckets.append(b)
                    fixed.append(v)
                    align.append(ti)
            hit = (torch.from_numpy(np.stack(fixed)), torch.tensor(buckets), align)
            with self._lock:
                if len(self._windows) >= self.cache_size:
                    self._windows.clear()
                self._windows[key] = hit
        fixed_t, bucket_t, align = hit
        dtype = self.mix.dtype
        x = fixed_t.to(dtype) + self.embedding(bucket_t)
        n = x.shape[0]
        out = x
        for k, off in enumerate(self.offsets):
            shifted = torch.zeros_like(x)
            if off < 0 and n + off > 0:
                shifted[-off:] = x[: n + off]
            elif off > 0 and n - off > 0:
                shifted[: n - off] = x[off:]
            out = out + shifted @ self.mix[k].T
        return out, list(align)


class PretrainedEncoder(nn.Module):
    """Adapter for a Hugging Face encoder checkpoint (e.g. ``roberta-large``)."""

    concurrency = "clone"

    def __init__(self, path: str):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as e:  # pragma: no cover - depends on environment
            raise EncoderFailure("transformers is not installed") from e
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(path, add_prefix_space=True)
        except TypeError:
            self.tokenizer = AutoTokenizer.from_pretrained(path)
        except Exception as e:
            raise EncoderFailure(f"cannot load tokenizer from {path}: {e}") from e
        try:
            self.model = AutoModel.from_pretrained(path)
        except Exception as e:
            raise EncoderFailure(f"cannot load encoder from {path}: {e}") from e
        if not getattr(self.tokenizer, "is_fast", False):
            raise EncoderFailure("pretrained encoder needs a fast tokenizer for word alignment")
        self.path = path
        self.dim = int(self.model.config.hidden_size)
        limit = getattr(self.model.config, "max_position_embeddings", 512)
        self.max_subwords = int(min(limit, self.tokenizer.model_max_length)) - 4
        self._pad_word = self.tokenizer.pad_token or PAD_TOKEN

    def config(self) -> dict:
        return {"kind": "pretrained", "path": self.path, "dim": self.dim}

    def clone(self) -> "PretrainedEncoder":
        import copy

        return copy.deepcopy(self)

    def _words(self, tokens: Sequence[str]) -> list[str]:
        return [self._pad_word if t == PAD_TOKEN else t for t in tokens]

    def count_subwords(self, tokens: Sequence[str]) -> int:
        enc = self.tokenizer(self._words(tokens), is_split_into_words=True, add_special_tokens=False)
        return len(enc["input_ids"])

    def encode(self, tokens: Sequence[str]) -> tuple[torch.Tensor, list[int]]:
        if not tokens:
            raise EncoderFailure("empty token sequence")
        enc = self.tokenizer(self._words(tokens), is_split_into_words=True, return_tensors="pt")
        word_ids = enc.word_ids(0)
        hidden = self.model(**enc).last_hidden_state[0]
        keep = [i for i, w in enumerate(word_ids) if w is not None]
        align = [word_ids[i] for i in keep]
        missing = set(range(len(tokens))) - set(align)
        if missing:
            raise EncoderFailure(f"tokens {sorted(missing)} produced no subwords")
        return hidden[keep], align


def build_encoder(cfg: dict) -> nn.Module:
    kind = cfg.get("kind", "hash")
    if kind == "hash":
        return HashEncoder(dim=int(cfg.get("dim", 64)), seed=int(cfg.get("seed", 0)),
                           n_buckets=int(cfg.get("n_buckets", 4096)),
                           context=int(cfg.get("context", 2)))
    if kind == "pretrained":
        if not cfg.get("path"):
            raise EncoderFailure("encoder.path is required for the pretrained encoder")
        return PretrainedEncoder(cfg["path"])
    raise EncoderFailure(f"unknown encoder kind {kind!r}")


def fit_window(cw: ContextWindow, encoder: ContextEncoder) -> ContextWindow:
    """Trim a window to the encoder's subword budget.

    Outer ends of the previous and next utterances go first (each keeps at
    least one token); after that the current utterance is trimmed outside
    the mention spans.
    """
    budget = getattr(encoder, "max_subwords", None)
    if budget is None:
        return cw
    count = encoder.count_subwords
    if count(cw.tokens) <= budget:
        return cw
    prev, cur, nxt = list(cw.w_prev.tokens), list(cw.w_cur.tokens), list(cw.w_next.tokens)
    mentions = list(cw.mentions)
    while count(prev + cur + nxt) > budget:
        if len(prev) > 1:
            prev.pop(0)
        elif len(nxt) > 1:
            nxt.pop()
        else:
            lo = min(m.start_tok for m in mentions)
            hi = max(m.end_tok for m in mentions)
            if len(cur) - 1 > hi:
                cur.pop()
            elif lo > 0:
                cur.pop(0)
                mentions = [replace(m, start_tok=m.start_tok - 1, end_tok=m.end_tok - 1)
                            for m in mentions]
            else:
                raise EncoderFailure("mention spans alone exceed the encoder length budget")
    log.debug("window around utterance %d truncated", cw.w_cur.index)
    return ContextWindow(
        replace(cw.w_prev, tokens=tuple(prev)),
        replace(cw.w_cur, tokens=tuple(cur)),
        replace(cw.w_next, tokens=tuple(nxt)),
        tuple(mentions),
    )


def average_subwords(sub: torch.Tensor, align: Sequence[int], n_tokens: int) -> torch.Tensor:
    idx = torch.as_tensor(align, dtype=torch.long)
    sums = torch.zeros(n_tokens, sub.shape[1], dtype=sub.dtype).index_add(0, idx, sub)
    counts = torch.bincount(idx, minlength=n_tokens).to(sub.dtype)
    if bool((counts == 0).any()):
        raise EncoderFailure("some tokens have no subword vectors")
    return sums / counts[:, None]


def encode_window(cw: ContextWindow, encoder: ContextEncoder) -> TokenMatrix:
    cw = fit_window(cw, encoder)
    tokens = cw.tokens
    if not tokens:
        raise EncoderFailure("empty window")
    try:
        sub, align = encoder.encode(tokens)
    except EncoderFailure:
        raise
    except Exception as e:
        raise EncoderFailure(f"encoder backend failed: {e}") from e
    return TokenMatrix(average_subwords(sub, align, len(tokens)), cw)


def pool(cw: ContextWindow, tm: TokenMatrix) -> EncodedMention:
    """Sentence vectors and mention-span vectors by arithmetic means.

    If the matrix was encoded from a truncated window, that window's
    boundaries are used.
    """
    if tm.window is not None:
        cw = tm.window
    n_prev, n_cur, n_next = cw.lengths
    v = tm.vectors
    if v.shape[0] != n_prev + n_cur + n_next:
        raise ValueError(f"matrix has {v.shape[0]} rows for a {n_prev + n_cur + n_next}-token window")
    r_prev = v[:n_prev].mean(0)
    cur = v[n_prev : n_prev + n_cur]
    r_cur = cur.mean(0)
    r_next = v[n_prev + n_cur :].mean(0)
    names = [cur[m.start_tok : m.end_tok + 1].mean(0) for m in cw.mentions]
    return EncodedMention(r_prev, r_cur, r_next, names[0], names)
