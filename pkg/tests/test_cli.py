import json

import numpy as np
import pytest

from sopool.cli import main
from sopool.pooling import read_descriptor

CFG_FLAGS = [
    "--target-side", "32", "--k", "6", "--grids", "1,2", "--runs", "2",
    "--train-per-subject", "3", "--test-per-subject", "2", "--seed", "4",
]


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "corpus"
    assert main(["synth", "--subjects", "5", "--per-subject", "6",
                 "--out", str(out), "--seed", "21", "--side", "32"]) == 0
    return out


@pytest.fixture(scope="module")
def model_path(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_model") / "model.sopm"
    assert main(["train", "--corpus", str(corpus), "--out", str(out)] + CFG_FLAGS) == 0
    return out


def test_synth_layout(corpus):
    subjects = sorted(p.name for p in corpus.iterdir())
    assert subjects == [f"subj_{i:03d}" for i in range(5)]
    assert len(list((corpus / "subj_000").glob("*.pgm"))) == 6


def test_synth_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["synth", "--subjects", "2", "--per-subject", "2",
              "--out", str(out), "--seed", "5", "--side", "16"])
    for fa, fb in zip(sorted(a.rglob("*.pgm")), sorted(b.rglob("*.pgm"))):
        assert fa.read_bytes() == fb.read_bytes()


def test_extract_writes_descriptor(model_path, corpus, tmp_path):
    image = next(iter((corpus / "subj_001").glob("*.pgm")))
    out = tmp_path / "desc.sopd"
    assert main(["extract", "--model", str(model_path), "--image", str(image),
                 "--out", str(out)]) == 0
    values, p, n_cells = read_descriptor(out)
    assert (p, n_cells) == (12, 5)  # 2K=12 code width, 1+4 cells
    assert np.all(np.isfinite(values))


def test_eval_gallery_probe(model_path, corpus, capsys):
    assert main(["eval", "--model", str(model_path), "--gallery", str(corpus),
                 "--probe", str(corpus), "--confusion"]) == 0
    out = capsys.readouterr().out
    assert "accuracy:" in out


def test_benchmark_reports_and_manifest(corpus, tmp_path):
    prefix = tmp_path / "rep"
    manifest = tmp_path / "splits.txt"
    assert main(["benchmark", "--corpus", str(corpus), "--out", str(prefix),
                 "--manifest", str(manifest)] + CFG_FLAGS) == 0
    doc = json.loads((tmp_path / "rep.json").read_text())
    assert len(doc["per_run_accuracies"]) == 2
    assert (tmp_path / "rep.txt").read_text().startswith("benchmark report")
    lines = manifest.read_text().strip().splitlines()
    assert len(lines) == 2 * 5 * (3 + 2)
    assert all(len(line.split(",")) == 4 for line in lines)


def test_ablate_encoding(corpus, tmp_path, capsys):
    assert main(["ablate", "encoding", "--corpus", str(corpus),
                 "--out", str(tmp_path / "ab")] + CFG_FLAGS) == 0
    out = capsys.readouterr().out
    assert "with_encoding" in out and "without_encoding" in out
    assert (tmp_path / "ab.with_encoding.json").exists()
    assert (tmp_path / "ab.without_encoding.json").exists()


def test_ablate_grid_csv(corpus, tmp_path):
    assert main(["ablate", "grid", "--corpus", str(corpus),
                 "--dict-sizes", "4,6", "--depths", "2",
                 "--out", str(tmp_path / "grid")] + CFG_FLAGS[:-2] + ["--runs", "1"]) == 0
    csv = (tmp_path / "grid.csv").read_text().strip().splitlines()
    assert csv[0] == "pyramid_levels,4,6"
    assert len(csv) == 2


def test_missing_corpus_fails_with_message(tmp_path, capsys):
    assert main(["train", "--corpus", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "m")]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_model_file_fails(tmp_path, capsys):
    bad = tmp_path / "bad.sopm"
    bad.write_bytes(b"not a model")
    assert main(["eval", "--model", str(bad), "--probe", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err
