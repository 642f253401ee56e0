"""Training regime: instance construction, Adam loop, dev-based selection."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import torch

from speakerid.core import NULL, GoldRoster, LabeledMention, Transcript
from speakerid.encode import ContextWindow, assemble_window
from speakerid.errors import DivergedLoss
from speakerid.evaluation import Metrics, count_matchable, speaker_prf
from speakerid.inference import DEFAULT_TAU, predict_transcript
from speakerid.model import SpeakerIDModel, TrainingTargets, bce

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "speakerid-checkpoint"
CHECKPOINT_VERSION = 1
ENCODER_DIR_ENV = "SPEAKERID_ENCODER_DIR"

# (transcript, labeled mentions, gold roster)
Example = tuple[Transcript, list[LabeledMention], GoldRoster]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-5
    batch_size: int = 16
    max_epochs: int = 20
    seeds: tuple[int, ...] = (1, 2, 3)
    model_kind: str = "single"
    encoder_kind: str = "hash"
    encoder_path: str | None = None
    encoder_dim: int = 64
    hidden: int = 400
    gcn_layers: int = 2
    edge_mode: str = "softmax"
    tau: float = DEFAULT_TAU
    threshold: float = 0.8
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.model_kind not in ("single", "multi", "multi_no_gcn"):
            raise ValueError(f"unknown model_kind {self.model_kind!r}")
        self.seeds = tuple(int(s) for s in self.seeds)

    def encoder_config(self) -> dict:
        if self.encoder_kind == "pretrained":
            path = self.encoder_path
            base = os.environ.get(ENCODER_DIR_ENV)
            if base and path and not os.path.isabs(path):
                path = os.path.join(base, path)
            elif base and not path:
                path = base
            return {"kind": "pretrained", "path": path}
        return {"kind": "hash", "dim": self.encoder_dim}

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class Instance:
    window: ContextWindow
    targets: tuple[TrainingTargets, ...]  # one per window mention


def targets_for(label: str, speakers: Sequence[str]) -> TrainingTargets:
    """Binary targets for one mention.

    A label outside the window (or ``null``) gives all zeros. If the labeled
    speaker fills several slots, the current slot wins, then previous.
    """
    s_prev, s_cur, s_next = speakers
    if label == NULL:
        return TrainingTargets()
    if label == s_cur:
        return TrainingTargets(y_cur=1)
    if label == s_prev:
        return TrainingTargets(y_prev=1)
    if label == s_next:
        return TrainingTargets(y_next=1)
    return TrainingTargets()


def make_instances(dataset: Iterable[tuple[Transcript, list[LabeledMention]]], mode: str = "single") -> list[Instance]:
    """Single mode: one instance per mention. Multi modes: one per utterance
    holding all of its mentions."""
    out: list[Instance] = []
    for item in dataset:
        t, labeled = item[0], item[1]
        ordered = sorted(labeled, key=lambda lm: (lm.mention.utt_index, lm.mention.start_tok))
        if mode == "single":
            for lm in ordered:
                cw = assemble_window(t, lm.mention)
                out.append(Instance(cw, (targets_for(lm.label, cw.speakers),)))
        else:
            groups: dict[int, list[LabeledMention]] = {}
            for lm in ordered:
                groups.setdefault(lm.mention.utt_index, []).append(lm)
            for ui in sorted(groups):
                lms = groups[ui]
                cw = assemble_window(t, [lm.mention for lm in lms])
                out.append(Instance(cw, tuple(targets_for(lm.label, cw.speakers) for lm in lms)))
    return out


def instance_loss(model: SpeakerIDModel, inst: Instance) -> torch.Tensor:
    probs = model.probs(inst.window)
    targets = torch.tensor([y.as_tuple() for y in inst.targets], dtype=probs.dtype)
    return bce(probs, targets)


def batch_loss(model: SpeakerIDModel, batch: Sequence[Instance]) -> torch.Tensor:
    """Sum of per-instance losses."""
    return sum((instance_loss(model, inst) for inst in batch), torch.zeros((), dtype=torch.float64))


@dataclass
class Checkpoint:
    model_config: dict
    state_dict: dict
    train_config: dict = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    dev_metrics: dict | None = None

    def build_model(self) -> SpeakerIDModel:
        cfg = dict(self.model_config)
        model = SpeakerIDModel(
            kind=cfg["kind"], encoder=cfg["encoder"], hidden=cfg["hidden"],
            gcn_layers=cfg["gcn_layers"], edge_mode=cfg["edge_mode"], seed=cfg["seed"],
        )
        model.load_state_dict(self.state_dict)
        model.eval()
        return model

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save({
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "model_config": self.model_config,
            "state_dict": self.state_dict,
            "train_config": self.train_config,
            "history": self.history,
            "best_epoch": self.best_epoch,
            "dev_metrics": self.dev_metrics,
        }, path)

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        blob = torch.load(path, map_location="cpu", weights_only=False)
        if blob.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path} is not a speakerid checkpoint")
        if blob.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {blob.get('version')}")
        return cls(blob["model_config"], blob["state_dict"], blob["train_config"],
                   blob["history"], blob["best_epoch"], blob["dev_metrics"])


def evaluate_model(model: SpeakerIDModel, examples: Sequence[Example], tau: float = DEFAULT_TAU,
                   threshold: float = 0.8) -> Metrics:
    preds = {t.meeting_id: predict_transcript(t, [lm.mention for lm in lms], model, tau)
             for t, lms, _ in examples}
    golds = {g.meeting_id: g for _, _, g in examples}
    matchable, _ = count_matchable([(t, g, lms) for t, lms, g in examples], threshold)
    return speaker_prf(preds, golds, threshold, n_matchable=matchable)


def build_model(cfg: TrainConfig, seed: int) -> SpeakerIDModel:
    enc = cfg.encoder_config()
    if enc["kind"] == "hash":
        enc["seed"] = seed
    return SpeakerIDModel(kind=cfg.model_kind, encoder=enc, hidden=cfg.hidden,
                          gcn_layers=cfg.gcn_layers, edge_mode=cfg.edge_mode, seed=seed)


def _snapshot(model: SpeakerIDModel) -> dict:
    return {k: v.detach().clone() for k, v in model.state_dict().items()}


def train(
    cfg: TrainConfig,
    train_set: Sequence[Example],
    dev_set: Sequence[Example],
    seed: int | None = None,
    log_path: str | Path | None = None,
) -> Checkpoint:
    """Train one model and return the parameters with the best dev F1.

    Epoch 0 (the initialization) is evaluated too, so ``max_epochs=0``
    returns the initial parameters. Ties keep the earliest epoch.
    """
    if not train_set:
        raise ValueError("empty training set")
    seed = cfg.seeds[0] if seed is None else seed
    model = build_model(cfg, seed)
    instances = make_instances([(t, lms) for t, lms, _ in train_set], cfg.model_kind)
    optim = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate,
                             betas=cfg.adam_betas, eps=cfg.adam_eps)
    history: list[dict] = []
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None

    def record(entry: dict) -> None:
        history.append(entry)
        log.info("epoch %d loss=%s dev_f1=%.4f", entry["epoch"],
                 "-" if entry["loss"] is None else f"{entry['loss']:.4f}", entry["dev_f1"])
        if log_fh:
            log_fh.write(json.dumps(entry, sort_keys=True) + "\n")
            log_fh.flush()

    try:
        dev = evaluate_model(model, dev_set, cfg.tau, cfg.threshold) if dev_set else None
        best = (dev.f1 if dev else 0.0, 0, _snapshot(model), dev)
        record(_epoch_entry(0, None, dev, 0.0, seed))
        for epoch in range(1, cfg.max_epochs + 1):
            start = time.perf_counter()
            model.train()
            order = np.random.default_rng([seed, epoch]).permutation(len(instances))
            total = 0.0
            for b in range(0, len(order), cfg.batch_size):
                batch = [instances[i] for i in order[b : b + cfg.batch_size]]
                optim.zero_grad()
                batch_total = batch_loss(model, batch)
                if not torch.isfinite(batch_total):
                    raise DivergedLoss(
                        f"non-finite loss {float(batch_total.detach())} at epoch {epoch}, batch {b // cfg.batch_size}"
                    )
                (batch_total / len(batch)).backward()
                optim.step()
                total += float(batch_total.detach())
            dev = evaluate_model(model, dev_set, cfg.tau, cfg.threshold) if dev_set else None
            record(_epoch_entry(epoch, total / len(instances), dev, time.perf_counter() - start, seed))
            if dev is not None and dev.f1 > best[0]:
                best = (dev.f1, epoch, _snapshot(model), dev)
        if dev_set is None or not dev_set:
            best = (0.0, cfg.max_epochs, _snapshot(model), None)
    finally:
        if log_fh:
            log_fh.close()

    _, best_epoch, state, dev_metrics = best
    return Checkpoint(
        model_config=model.config(),
        state_dict=state,
        train_config=cfg.to_dict() | {"seed": seed},
        history=history,
        best_epoch=best_epoch,
        dev_metrics=dev_metrics.as_dict() if dev_metrics else None,
    )


def _epoch_entry(epoch: int, mean_loss: float | None, dev: Metrics | None, seconds: float, seed: int) -> dict:
    entry = {"seed": seed, "epoch": epoch, "loss": mean_loss, "seconds": round(seconds, 3),
             "dev_precision": 0.0, "dev_recall": 0.0, "dev_f1": 0.0}
    if dev is not None:
        entry.update(dev_precision=dev.precision, dev_recall=dev.recall, dev_f1=dev.f1)
    return entry


def run_seeds(cfg: TrainConfig, splits: dict[str, Sequence[Example]]) -> dict:
    """Train once per seed; report per-seed and mean test metrics."""
    if not cfg.seeds:
        raise ValueError("need at least one seed")
    per_seed = []
    for seed in cfg.seeds:
        ckpt = train(cfg, splits["train"], splits.get("dev", []), seed=seed)
        m = evaluate_model(ckpt.build_model(), splits["test"], cfg.tau, cfg.threshold)
        per_seed.append({"seed": seed} | m.as_dict())
    mean = {k: float(np.mean([r[k] for r in per_seed])) for k in ("precision", "recall", "f1")}
    return {"per_seed": per_seed, "mean": mean}
