"""Command-line entry points.

    speakerid synth       --out corpus.jsonl --n 200 --gazetteer names.txt
    speakerid build-data  --input corpus.jsonl --output-dir data/
    speakerid train       --config train.cfg [--flag overrides]
    speakerid predict     --checkpoint model.pt --data data/test.jsonl --out preds.jsonl
    speakerid evaluate    --predictions preds.jsonl --gold data/test.gold.jsonl
    speakerid stats       --data data/train.jsonl
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from speakerid import io
from speakerid.core import GoldRoster, Transcript
from speakerid.detect import DetectorConfig, Gazetteer, detect_mentions
from speakerid.errors import InsufficientCorpus, SpeakerIDError
from speakerid.evaluation import count_matchable, dataset_stats, speaker_prf
from speakerid.ingest import load_interviews
from speakerid.label import DEFAULT_THRESHOLD, build_labeled_dataset
from speakerid.synth import write_corpus

log = logging.getLogger("speakerid")

SPLITS = ("train", "dev", "test")


# ---------------------------------------------------------------- build-data

def split_meetings(ids: Sequence[str], ratio: Sequence[float], seed: int) -> dict[str, list[str]]:
    """Seeded shuffle, then cut by rounded ratio; the test split takes the rest."""
    ids = list(ids)
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    total = float(sum(ratio))
    n_train = round(len(ids) * ratio[0] / total)
    n_dev = round(len(ids) * ratio[1] / total)
    return {
        "train": shuffled[:n_train],
        "dev": shuffled[n_train : n_train + n_dev],
        "test": shuffled[n_train + n_dev :],
    }


def parse_ratio(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.replace(":", "/").split("/")]
    if len(parts) != 3 or any(p < 0 for p in parts) or sum(parts) <= 0:
        raise argparse.ArgumentTypeError(f"bad split ratio {text!r}; expected e.g. 8/1/1")
    return parts[0], parts[1], parts[2]


_WORKER_STATE: dict = {}


def _init_worker(cfg: DetectorConfig, threshold: float) -> None:
    gaz = None
    if cfg.kind == "gazetteer" and cfg.gazetteer_source == "file":
        gaz = Gazetteer.from_file(cfg.gazetteer_path, cfg.min_token_len)
    _WORKER_STATE.update(cfg=cfg, threshold=threshold, gazetteer=gaz)


def _label_meeting(pair: tuple[Transcript, GoldRoster]) -> io.MeetingRecord:
    t, g = pair
    st = _WORKER_STATE
    mentions = detect_mentions(t, st["cfg"], gold=g, gazetteer=st["gazetteer"])
    return io.MeetingRecord(t, build_labeled_dataset(t, g, mentions, st["threshold"]))


def build_data(
    input_path: str | Path,
    output_dir: str | Path,
    detector: DetectorConfig,
    sample_size: int | None = None,
    split_ratio: Sequence[float] = (8, 1, 1),
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> dict:
    pairs = list(load_interviews(input_path))
    if sample_size is not None:
        if sample_size > len(pairs):
            raise InsufficientCorpus(f"asked for {sample_size} meetings, corpus has {len(pairs)}")
        pick = np.random.default_rng(seed).choice(len(pairs), sample_size, replace=False)
        pairs = [pairs[i] for i in sorted(pick)]

    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(detector, threshold)) as ex:
            records = list(ex.map(_label_meeting, pairs, chunksize=8))
    else:
        _init_worker(detector, threshold)
        records = [_label_meeting(p) for p in pairs]

    golds = {g.meeting_id: g for _, g in pairs}
    by_id = {r.meeting_id: r for r in records}
    splits = split_meetings([r.meeting_id for r in records], split_ratio, seed)
    output_dir = Path(output_dir)
    report = {"seed": seed, "split_ratio": list(split_ratio), "threshold": threshold, "splits": {}}
    for name in SPLITS:
        ids = sorted(splits[name])
        recs = [by_id[i] for i in ids]
        for r in recs:
            r.split = name
        io.write_dataset(output_dir / f"{name}.jsonl", recs)
        io.write_gold(output_dir / f"{name}.gold.jsonl", [golds[i] for i in ids])
        report["splits"][name] = _split_report(recs, golds)
    io.write_json(output_dir / "stats.json", report)
    return report


def _split_report(recs: list[io.MeetingRecord], golds: dict[str, GoldRoster]) -> dict:
    meetings, sents, names, speakers = dataset_stats((r.transcript, r.mentions) for r in recs)
    matchable, _ = count_matchable((r.transcript, golds[r.meeting_id], r.mentions) for r in recs)
    return {
        "meetings": meetings, "sentences": sents, "names": names, "speakers": speakers,
        "null_names": sum(lm.label == "null" for r in recs for lm in r.mentions),
        "matchable_speakers": matchable,
        "recall_upper_bound": matchable / speakers if speakers else 0.0,
    }


# --------------------------------------------------------------------- train

def read_flat_config(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


_KEY_ALIASES = {"encoder.kind": "encoder_kind", "encoder.path": "encoder_path",
                "encoder.dim": "encoder_dim"}
_RUN_KEYS = ("train", "dev", "test", "out", "log")


def _coerce(field_type, value: str):
    if isinstance(value, str):
        t = str(field_type)
        if "tuple" in t:
            parts = [p for p in value.replace(",", " ").split() if p]
            return tuple(float(p) if "float" in t else int(p) for p in parts)
        if t.startswith("int"):
            return int(value)
        if t.startswith("float"):
            return float(value)
        if value.lower() in ("none", "null", ""):
            return None
    return value


def train_config_from(mapping: dict[str, str]):
    from speakerid.trainer import TrainConfig

    fields = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    kwargs = {}
    for key, value in mapping.items():
        key = _KEY_ALIASES.get(key, key.replace("-", "_"))
        if key in _RUN_KEYS:
            continue
        if key not in fields:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[key] = _coerce(fields[key], value)
    return TrainConfig(**kwargs)


def _load_examples(path: str | Path):
    recs = io.read_dataset(path)
    golds = io.read_gold(io.gold_path_for(path))
    return [(r.transcript, r.mentions, golds[r.meeting_id]) for r in recs]


def cmd_train(args) -> int:
    import torch

    from speakerid.trainer import train

    settings = read_flat_config(args.config) if args.config else {}
    for key in ("train", "dev", "out", "log", "model_kind", "learning_rate", "batch_size",
                "max_epochs", "seeds", "encoder_kind", "encoder_path", "encoder_dim", "hidden",
                "gcn_layers"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = str(value)
    for key in ("train", "out"):
        if key not in settings:
            raise SpeakerIDError(f"missing required setting {key!r} (config file or --{key})")
    cfg = train_config_from(settings)
    torch.set_num_threads(args.threads)
    train_set = _load_examples(settings["train"])
    dev_set = _load_examples(settings["dev"]) if settings.get("dev") else []
    ckpt = train(cfg, train_set, dev_set, seed=cfg.seeds[0], log_path=settings.get("log"))
    ckpt.save(settings["out"])
    print(f"saved {settings['out']} (best epoch {ckpt.best_epoch}, dev {ckpt.dev_metrics})")
    return 0


# ------------------------------------------------------------------- predict

def predict_file(checkpoint: str | Path, data: str | Path, tau: float | None = None,
                 unique_names: bool = False):
    from speakerid.inference import predict_transcript
    from speakerid.trainer import Checkpoint

    ckpt = Checkpoint.load(checkpoint)
    model = ckpt.build_model()
    tau = ckpt.train_config.get("tau", 0.5) if tau is None else tau
    return {
        r.meeting_id: predict_transcript(r.transcript, r.name_mentions, model, tau, unique_names)
        for r in io.read_dataset(data)
    }


def cmd_predict(args) -> int:
    import torch

    torch.set_num_threads(args.threads)
    preds = predict_file(args.checkpoint, args.data, args.tau, args.unique_names)
    io.write_predictions(args.out, preds)
    print(f"wrote {sum(len(v) for v in preds.values())} assignments to {args.out}")
    return 0


# ------------------------------------------------------------------ evaluate

def evaluate_files(predictions: str | Path, gold: str | Path, data: str | Path | None = None,
                   threshold: float = DEFAULT_THRESHOLD) -> dict:
    preds = io.read_predictions(predictions)
    golds = io.read_gold(gold)
    n_matchable = None
    if data:
        recs = io.read_dataset(data)
        n_matchable, _ = count_matchable(
            ((r.transcript, golds[r.meeting_id], r.mentions) for r in recs), threshold)
    m = speaker_prf(preds, golds, threshold, n_matchable)
    report = m.as_dict()
    if n_matchable is not None:
        report["recall_upper_bound"] = n_matchable / m.n_speakers if m.n_speakers else 0.0
    return report


def cmd_evaluate(args) -> int:
    report = evaluate_files(args.predictions, args.gold, args.data, args.threshold)
    row = {"model": args.name} | report
    if args.out:
        io.write_json(args.out, {"rows": [row]})
    for k, v in row.items():
        print(f"{k:>20}: {v:.4f}" if isinstance(v, float) else f"{k:>20}: {v}")
    return 0


# --------------------------------------------------------------------- misc

def cmd_stats(args) -> int:
    recs = io.read_dataset(args.data)
    m, s, n, k = dataset_stats((r.transcript, r.mentions) for r in recs)
    print(f"meetings={m} sentences={s} names={n} speakers={k}")
    return 0


def cmd_synth(args) -> int:
    tally = write_corpus(args.out, args.n, args.seed, args.gazetteer)
    print(f"wrote {tally.meetings} dialogues ({tally.sentences} utterances, "
          f"{tally.names} name mentions, {tally.speakers} speakers) to {args.out}")
    return 0


def cmd_build_data(args) -> int:
    cfg = DetectorConfig(kind=args.detector, gazetteer_source=args.gazetteer_source,
                         min_token_len=args.min_token_len, gazetteer_path=args.gazetteer_file,
                         mention_path=args.mention_file)
    report = build_data(args.input, args.output_dir, cfg, args.sample_size, args.split_ratio,
                        args.seed, args.threshold, args.workers)
    for name, row in report["splits"].items():
        print(f"{name:>5}: " + " ".join(f"{k}={v}" for k, v in row.items()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="speakerid", description="Text-based speaker identification")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic interview corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gazetteer", help="also write a name list for the file gazetteer")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("build-data", help="detect, anonymize, label and split a corpus")
    s.add_argument("--input", required=True)
    s.add_argument("--output-dir", required=True)
    s.add_argument("--detector", choices=("gazetteer", "external"), default="gazetteer")
    s.add_argument("--gazetteer-source", choices=("roster", "file"), default="roster")
    s.add_argument("--gazetteer-file")
    s.add_argument("--mention-file", help="external NER spans (JSON lines)")
    s.add_argument("--min-token-len", type=int, default=2)
    s.add_argument("--sample-size", type=int)
    s.add_argument("--split-ratio", type=parse_ratio, default=(8.0, 1.0, 1.0))
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_build_data)

    s = sub.add_parser("train", help="train a model; flags override the config file")
    s.add_argument("--config")
    s.add_argument("--train")
    s.add_argument("--dev")
    s.add_argument("--out")
    s.add_argument("--log")
    s.add_argument("--model-kind", dest="model_kind", choices=("single", "multi", "multi_no_gcn"))
    s.add_argument("--learning-rate", dest="learning_rate", type=float)
    s.add_argument("--batch-size", dest="batch_size", type=int)
    s.add_argument("--max-epochs", dest="max_epochs", type=int)
    s.add_argument("--seeds")
    s.add_argument("--encoder-kind", dest="encoder_kind", choices=("hash", "pretrained"))
    s.add_argument("--encoder-path", dest="encoder_path")
    s.add_argument("--encoder-dim", dest="encoder_dim", type=int)
    s.add_argument("--hidden", type=int)
    s.add_argument("--gcn-layers", dest="gcn_layers", type=int)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="assign names to speakers")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--tau", type=float)
    s.add_argument("--unique-names", action="store_true")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="speaker-level precision/recall/F1")
    s.add_argument("--predictions", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--data", help="dataset file, to report the recall upper bound")
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--name", default="model")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("stats", help="dataset statistics")
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SpeakerIDError, ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
