"""Pairing heads, the name-graph GCN, and the training loss.

A name vector is concatenated with each of the three speaker (utterance)
vectors and scored by a separate feed-forward head per position. When an
utterance mentions several names, their vectors are first refined by a GCN
over a fully connected name graph whose edge weights are a row-wise softmax
of dot products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import torch
from torch import nn

from speakerid.core import HeadScores
from speakerid.encode import ContextWindow, EncodedMention, build_encoder, encode_window, pool
from speakerid.errors import DimensionMismatch

HEADS = ("prev", "cur", "next")
PROB_EPS = 1e-7
ModelKind = Literal["single", "multi", "multi_no_gcn"]


class PairingHead(nn.Module):
    def __init__(self, dim: int, hidden: int = 400):
        super().__init__()
        self.hidden = nn.Linear(2 * dim, hidden)
        self.out = nn.Linear(hidden, 1)

    def forward(self, r_name: torch.Tensor, r_speaker: torch.Tensor) -> torch.Tensor:
        x = torch.cat([r_name, r_speaker], dim=-1)
        return torch.sigmoid(self.out(torch.relu(self.hidden(x)))).squeeze(-1)


class PairingHeads(nn.Module):
    """Three independent heads (prev, cur, next); the head parameters."""

    def __init__(self, dim: int, hidden: int = 400):
        super().__init__()
        self.dim = dim
        self.prev = PairingHead(dim, hidden)
        self.cur = PairingHead(dim, hidden)
        self.next = PairingHead(dim, hidden)


class NameGCN(nn.Module):
    """``n_layers`` graph-convolution layers, each a square weight plus bias."""

    def __init__(self, dim: int, n_layers: int = 2):
        super().__init__()
        if n_layers < 0:
            raise ValueError("n_layers must be >= 0")
        self.dim = dim
        self.layers = nn.ModuleList(nn.Linear(dim, dim) for _ in range(n_layers))

    @property
    def n_layers(self) -> int:
        return len(self.layers)


@dataclass
class NameGraph:
    node_vectors: torch.Tensor  # (K, dim)
    alpha: torch.Tensor  # (K, K), row-stochastic

    @property
    def K(self) -> int:
        return int(self.node_vectors.shape[0])


@dataclass(frozen=True)
class TrainingTargets:
    y_prev: int = 0
    y_cur: int = 0
    y_next: int = 0

    def __post_init__(self):
        ys = (self.y_prev, self.y_cur, self.y_next)
        if any(y not in (0, 1) for y in ys) or sum(ys) > 1:
            raise ValueError(f"invalid targets {ys}: binary with at most one positive")

    def as_tuple(self) -> tuple[int, int, int]:
        return self.y_prev, self.y_cur, self.y_next


def _check_dim(v: torch.Tensor, dim: int, what: str) -> None:
    if v.shape[-1] != dim:
        raise DimensionMismatch(f"{what} has dimension {v.shape[-1]}, expected {dim}")


def head_probs(
    heads: PairingHeads, names: torch.Tensor, r_prev: torch.Tensor, r_cur: torch.Tensor, r_next: torch.Tensor
) -> torch.Tensor:
    """(K, 3) probabilities for K name vectors against the three speaker vectors."""
    for what, v in (("name vectors", names), ("r_prev", r_prev), ("r_cur", r_cur), ("r_next", r_next)):
        _check_dim(v, heads.dim, what)
    k = names.shape[0]
    cols = [head(names, r.expand(k, -1)) for head, r in
            ((heads.prev, r_prev), (heads.cur, r_cur), (heads.next, r_next))]
    return torch.stack(cols, dim=1)


def score_single(em: EncodedMention, heads: PairingHeads, r_n: torch.Tensor | None = None) -> HeadScores:
    r_n = em.r_n if r_n is None else r_n
    return HeadScores(*head_probs(heads, r_n.unsqueeze(0), em.r_prev, em.r_cur, em.r_next)[0])


def edge_weights(vectors: torch.Tensor, mode: str = "softmax") -> torch.Tensor:
    """Row-stochastic K x K edge weights between name vectors (self-loops included).

    ``mode="softmax"`` uses softmax over raw dot products. ``mode="sum_normalized"``
    first divides each row of dot products by its sum, as the formula is
    literally printed; rows whose sum is near zero fall back to raw dots.
    """
    if vectors.dim() != 2 or vectors.shape[0] < 1:
        raise ValueError("edge_weights needs a (K, dim) tensor with K >= 1")
    logits = vectors @ vectors.T
    if mode == "sum_normalized":
        sums = logits.sum(dim=1, keepdim=True)
        safe = sums.abs() > 1e-12
        logits = torch.where(safe, logits / torch.where(safe, sums, torch.ones_like(sums)), logits)
    elif mode != "softmax":
        raise ValueError(f"unknown edge mode {mode!r}")
    return torch.softmax(logits, dim=1)


def gcn_forward(g: NameGraph, gcn: NameGCN) -> torch.Tensor:
    """h_i^l = ReLU(sum_j alpha_ij W^l h_j^(l-1) + b^l), for l = 1..L."""
    _check_dim(g.node_vectors, gcn.dim, "node vectors")
    if g.alpha.shape != (g.K, g.K):
        raise DimensionMismatch(f"alpha is {tuple(g.alpha.shape)}, expected ({g.K}, {g.K})")
    h = g.node_vectors
    for layer in gcn.layers:
        h = torch.relu(g.alpha @ (h @ layer.weight.T) + layer.bias)
    return h


def score_multi(
    window_reps: tuple[torch.Tensor, torch.Tensor, torch.Tensor],
    refined_names: torch.Tensor | Sequence[torch.Tensor],
    heads: PairingHeads,
) -> list[HeadScores]:
    if not isinstance(refined_names, torch.Tensor):
        refined_names = torch.stack(list(refined_names))
    probs = head_probs(heads, refined_names, *window_reps)
    return [HeadScores(*row) for row in probs]


def bce(probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Summed binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7]."""
    p = probs.clamp(PROB_EPS, 1.0 - PROB_EPS)
    return -(targets * torch.log(p) + (1 - targets) * torch.log1p(-p)).sum()


def loss(scores: HeadScores, targets: TrainingTargets) -> torch.Tensor:
    """Sum of the three per-head binary cross-entropies."""
    probs = torch.stack([torch.as_tensor(p, dtype=torch.float64) for p in scores])
    return bce(probs, torch.tensor(targets.as_tuple(), dtype=probs.dtype))


class SpeakerIDModel(nn.Module):
    """Encoder + heads (+ GCN for the multi-name variants)."""

    def __init__(
        self,
        kind: ModelKind = "single",
        encoder: dict | None = None,
        hidden: int = 400,
        gcn_layers: int = 2,
        edge_mode: str = "softmax",
        seed: int = 0,
    ):
        super().__init__()
        if kind not in ("single", "multi", "multi_no_gcn"):
            raise ValueError(f"unknown model kind {kind!r}")
        enc_cfg = dict(encoder or {"kind": "hash"})
        enc_cfg.setdefault("seed", seed)
        self.kind = kind
        self.edge_mode = edge_mode
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            self.encoder = build_encoder(enc_cfg)
            dim = self.encoder.dim
            self.heads = PairingHeads(dim, hidden)
            self.gcn = NameGCN(dim, gcn_layers if kind == "multi" else 0)
        self._config = {
            "kind": kind, "hidden": hidden, "gcn_layers": self.gcn.n_layers,
            "edge_mode": edge_mode, "seed": seed, "encoder": self.encoder.config(),
        }
        self.double()

    @property
    def dim(self) -> int:
        return self.heads.dim

    def config(self) -> dict:
        return dict(self._config)

    def encode(self, cw: ContextWindow) -> EncodedMention:
        tm = encode_window(cw, self.encoder)
        tm.vectors = tm.vectors.to(self.heads.prev.out.weight.dtype)
        return pool(cw, tm)

    def refine(self, names: torch.Tensor) -> torch.Tensor:
        if self.gcn.n_layers == 0:
            return names
        return gcn_forward(NameGraph(names, edge_weights(names, self.edge_mode)), self.gcn)

    def probs(self, cw: ContextWindow) -> torch.Tensor:
        """(K, 3) head probabilities for the K mentions of the window.

        Both model kinds score all mentions in one batched pass; only the
        multi-name kinds refine the name vectors through the graph first.
        """
        em = self.encode(cw)
        names = torch.stack(em.names)
        if self.kind != "single":
            names = self.refine(names)
        return head_probs(self.heads, names, em.r_prev, em.r_cur, em.r_next)

    def forward(self, cw: ContextWindow) -> list[HeadScores]:
        return [HeadScores(*row) for row in self.probs(cw)]
