import json

import pytest

from speakerid import io
from speakerid.cli import build_data, main, parse_ratio, read_flat_config, split_meetings, train_config_from
from speakerid.detect import DetectorConfig, write_mention_file
from speakerid.errors import InsufficientCorpus
from speakerid.synth import write_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    tally = write_corpus(d / "raw.jsonl", 30, seed=4, gazetteer_path=d / "names.txt")
    return d, tally


def file_detector(d):
    return DetectorConfig(gazetteer_source="file", gazetteer_path=str(d / "names.txt"))


def test_split_sizes():
    parts = split_meetings([f"m{i}" for i in range(200)], (8, 1, 1), seed=0)
    assert [len(parts[k]) for k in ("train", "dev", "test")] == [160, 20, 20]
    assert sorted(sum(parts.values(), [])) == sorted(f"m{i}" for i in range(200))
    assert split_meetings([f"m{i}" for i in range(200)], (8, 1, 1), seed=0) == parts


def test_parse_ratio():
    assert parse_ratio("8/1/1") == (8.0, 1.0, 1.0)
    assert parse_ratio("0.7:0.2:0.1") == (0.7, 0.2, 0.1)
    for bad in ("8/1", "-1/1/1", "0/0/0"):
        with pytest.raises(Exception):
            parse_ratio(bad)


def test_build_data_outputs(corpus, tmp_path):
    d, tally = corpus
    report = build_data(d / "raw.jsonl", tmp_path, file_detector(d), seed=1)
    assert {k: report["splits"][k]["meetings"] for k in report["splits"]} == {"train": 24, "dev": 3, "test": 3}
    assert sum(r["names"] for r in report["splits"].values()) == tally.names
    assert sum(r["speakers"] for r in report["splits"].values()) == tally.speakers
    for split in ("train", "dev", "test"):
        recs = io.read_dataset(tmp_path / f"{split}.jsonl")
        golds = io.read_gold(tmp_path / f"{split}.gold.jsonl")
        assert {r.meeting_id for r in recs} == set(golds)
        assert all(r.split == split for r in recs)
    assert json.loads((tmp_path / "stats.json").read_text())["seed"] == 1


def test_build_data_deterministic_and_parallel(corpus, tmp_path):
    d, _ = corpus
    build_data(d / "raw.jsonl", tmp_path / "a", file_detector(d), seed=3)
    build_data(d / "raw.jsonl", tmp_path / "b", file_detector(d), seed=3)
    build_data(d / "raw.jsonl", tmp_path / "c", file_detector(d), seed=3, workers=2)
    for name in ("train.jsonl", "dev.jsonl", "test.gold.jsonl", "stats.json"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()


def test_sample_size(corpus, tmp_path):
    d, _ = corpus
    report = build_data(d / "raw.jsonl", tmp_path, file_detector(d), sample_size=10)
    assert sum(r["meetings"] for r in report["splits"].values()) == 10
    with pytest.raises(InsufficientCorpus):
        build_data(d / "raw.jsonl", tmp_path, file_detector(d), sample_size=31)


def test_external_mentions_route(corpus, tmp_path):
    d, _ = corpus
    build_data(d / "raw.jsonl", tmp_path / "gaz", file_detector(d), seed=0)
    items = [(r.meeting_id, lm.mention) for s in ("train", "dev", "test")
             for r in io.read_dataset(tmp_path / "gaz" / f"{s}.jsonl") for lm in r.mentions]
    write_mention_file(tmp_path / "spans.jsonl", items)
    ext = DetectorConfig(kind="external", mention_path=str(tmp_path / "spans.jsonl"))
    build_data(d / "raw.jsonl", tmp_path / "ext", ext, seed=0)
    for s in ("train", "dev", "test"):
        assert (tmp_path / "gaz" / f"{s}.jsonl").read_bytes() == (tmp_path / "ext" / f"{s}.jsonl").read_bytes()


def test_config_file_and_overrides(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("# run\nmodel_kind = multi\nlearning_rate = 0.001  # fast\n"
                        "encoder.dim = 32\nseeds = 4, 5\ntrain = x.jsonl\n")
    settings = read_flat_config(cfg_path)
    cfg = train_config_from(settings)
    assert (cfg.model_kind, cfg.learning_rate, cfg.encoder_dim, cfg.seeds) == ("multi", 0.001, 32, (4, 5))
    cfg = train_config_from(settings | {"learning_rate": "0.01"})
    assert cfg.learning_rate == 0.01
    with pytest.raises(ValueError):
        train_config_from({"no_such_key": "1"})
    cfg_path.write_text("just words\n")
    with pytest.raises(ValueError):
        read_flat_config(cfg_path)


def test_end_to_end_commands(corpus, tmp_path, capsys):
    d, tally = corpus
    assert main(["build-data", "--input", str(d / "raw.jsonl"), "--output-dir", str(tmp_path),
                 "--gazetteer-source", "file", "--gazetteer-file", str(d / "names.txt")]) == 0
    assert main(["stats", "--data", str(tmp_path / "dev.jsonl")]) == 0
    assert "meetings=3" in capsys.readouterr().out
    assert main(["train", "--train", str(tmp_path / "train.jsonl"), "--dev", str(tmp_path / "dev.jsonl"),
                 "--out", str(tmp_path / "m.pt"), "--max-epochs", "1", "--learning-rate", "0.001",
                 "--encoder-dim", "16", "--hidden", "16", "--log", str(tmp_path / "log.jsonl")]) == 0
    assert len((tmp_path / "log.jsonl").read_text().splitlines()) == 2
    assert main(["predict", "--checkpoint", str(tmp_path / "m.pt"), "--data", str(tmp_path / "test.jsonl"),
                 "--out", str(tmp_path / "pred.jsonl")]) == 0
    assert main(["evaluate", "--predictions", str(tmp_path / "pred.jsonl"),
                 "--gold", str(tmp_path / "test.gold.jsonl"), "--data", str(tmp_path / "test.jsonl"),
                 "--out", str(tmp_path / "eval.json")]) == 0
    row = json.loads((tmp_path / "eval.json").read_text())["rows"][0]
    assert 0.0 <= row["recall"] <= row["recall_upper_bound"] <= 1.0
    assert row["model"] == "model"


def test_error_exit_codes(tmp_path, capsys):
    assert main(["stats", "--data", str(tmp_path / "missing.jsonl")]) == 1
    assert main(["train", "--train", str(tmp_path / "x.jsonl")]) == 1
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["build-data"])
