import json

import numpy as np
import pytest

from abstractclf.cli import main
from abstractclf.config import MODEL_IDS
from abstractclf.corpus import load_corpus
from abstractclf.ensemble import read_predictions

from conftest import package_data, write_fixture_config


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    """Train and predict all four sub-models once for this module."""
    root = tmp_path_factory.mktemp("cli")
    cfg = write_fixture_config(root)
    assert main(["train", "--config", str(cfg)]) == 0
    assert main(["predict", "--config", str(cfg), "--split", "validation"]) == 0
    return cfg, root / "run"


def test_train_writes_models_and_logs(trained_run):
    _, run = trained_run
    for model_id in MODEL_IDS:
        assert (run / "models" / f"{model_id}.json").is_file()
        trace = json.loads((run / "logs" / f"{model_id}.train.json").read_text())
        assert trace["stop_reason"] in ("converged", "max_iterations", "line_search_failed")
        assert trace["loss_history"] and "effective_seeds" in trace


def test_predictions_cover_corpus(trained_run):
    _, run = trained_run
    corpus = load_corpus(package_data("fixture_validation.tsv"), split_name="validation")
    for model_id in MODEL_IDS:
        preds = read_predictions(run / "predictions" / f"{model_id}.validation.tsv")
        assert list(preds) == corpus.ids
        lines = (run / "predictions" / f"{model_id}.validation.probs.tsv").read_text().splitlines()
        assert lines[0].split("\t") == ["doc_id", "CL", "CR", "DC", "DS", "LO", "NI", "SE"]
        probs = np.array([[float(v) for v in ln.split("\t")[1:]] for ln in lines[1:]])
        assert probs.shape == (len(corpus), 7)
        assert np.abs(probs.sum(axis=1) - 1).max() <= 1e-9


def test_m4_rerun_is_byte_identical(trained_run, tmp_path):
    cfg, run = trained_run
    out = tmp_path / "again"
    assert main(["train", "--config", str(cfg), "--model", "m4_tfidf_lr", "--output-dir", str(out)]) == 0
    first = (run / "models" / "m4_tfidf_lr.json").read_bytes()
    assert (out / "models" / "m4_tfidf_lr.json").read_bytes() == first


def test_predict_then_evaluate_on_train(trained_run, tmp_path, capsys):
    cfg, run = trained_run
    assert main(["predict", "--config", str(cfg), "--model", "m4_tfidf_lr", "--split", "train"]) == 0
    pred = run / "predictions" / "m4_tfidf_lr.train.tsv"
    report = tmp_path / "r.json"
    assert main(["evaluate", "--gold", str(package_data("fixture_train.tsv")), "--pred", str(pred),
                 "--output", str(report)]) == 0
    assert "weighted f1" in capsys.readouterr().out
    data = json.loads(report.read_text())
    assert 0.0 <= data["weighted_f1"] <= 1.0
    assert sum(map(sum, data["confusion"])) == 42


def test_ensemble_and_evaluate(trained_run, capsys):
    cfg, run = trained_run
    preds = [str(run / "predictions" / f"{m}.validation.tsv") for m in MODEL_IDS]
    out = run / "ensemble.validation.tsv"
    assert main(["ensemble", *preds, "--output", str(out), "--config", str(cfg)]) == 0
    summary = json.loads(out.with_suffix(".summary.json").read_text())
    assert summary["documents"] == 18 and summary["models"] == list(MODEL_IDS)
    assert main(["evaluate", "--gold", str(package_data("fixture_validation.tsv")),
                 "--pred", str(out)]) == 0
    assert out.with_suffix(".report.json").is_file()
    # same inputs, same decisions
    first = out.read_bytes()
    assert main(["ensemble", *preds, "--output", str(out), "--config", str(cfg)]) == 0
    assert out.read_bytes() == first


def test_ensemble_of_identical_files(trained_run):
    _, run = trained_run
    src = run / "predictions" / "m4_tfidf_lr.validation.tsv"
    copies = []
    for i in range(4):
        p = run / f"copy{i}.tsv"
        p.write_bytes(src.read_bytes())
        copies.append(str(p))
    out = run / "same.tsv"
    assert main(["ensemble", *copies, "--output", str(out), "--seed", "1"]) == 0
    assert read_predictions(out) == read_predictions(src)
    assert json.loads(out.with_suffix(".summary.json").read_text())["ties"] == 0


def test_ensemble_disjoint_ids(tmp_path, capsys):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    a.write_text("doc_id\tlabel\nx\tCL\n")
    b.write_text("doc_id\tlabel\ny\tCL\n")
    assert main(["ensemble", str(a), str(b), "--output", str(tmp_path / "o.tsv")]) == 2
    assert "coverage" in capsys.readouterr().err
    assert main(["ensemble", str(a), "--output", str(tmp_path / "o.tsv")]) == 1


def test_inspect_model(trained_run, capsys):
    _, run = trained_run
    assert main(["inspect-model", str(run / "models" / "m2_embed_lda.json"), "--topics", "2"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["model_id"] == "m2_embed_lda" and info["lda"]["num_topics"] == 50
    assert len(info["lda"]["top_terms"]) == 2
    assert info["feature_dimension"] == 32 + 50


def test_embeddings_required(tmp_path, capsys):
    cfg = write_fixture_config(tmp_path, drop_embeddings=True)
    assert "[embeddings]" not in cfg.read_text()
    assert main(["train", "--config", str(cfg), "--model", "m2_embed_lda"]) == 1
    assert "embedding table required" in capsys.readouterr().err
    # the flag supplies the table
    assert main(["train", "--config", str(cfg), "--model", "m1_embed",
                 "--embeddings", str(package_data("fixture_embeddings.txt"))]) == 0


def test_empty_sentence_training_set(tmp_path, capsys):
    train = tmp_path / "short.tsv"
    rows = [f"d{i}\t{code}\tShort one here. Also brief. Tiny." for i, code in
            enumerate(["CL", "CR", "DC", "DS", "LO", "NI", "SE"])]
    train.write_text("id\tlabel\ttext\n" + "\n".join(rows) + "\n")
    cfg = tmp_path / "c.toml"
    cfg.write_text(f'output_dir = "{tmp_path / "out"}"\n[corpus]\ntrain = "{train}"\n')
    assert main(["train", "--config", str(cfg), "--model", "m3_sentence"]) == 2
    assert "empty sentence training set" in capsys.readouterr().err


def test_usage_and_data_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    assert main(["train", "--config", str(tmp_path / "missing.toml")]) == 1
    bad = tmp_path / "bad.tsv"
    bad.write_text("id\tlabel\ttext\na\tZZ\ttext\n")
    cfg = tmp_path / "c.toml"
    cfg.write_text(f'[corpus]\ntrain = "{bad}"\n')
    assert main(["train", "--config", str(cfg), "--model", "m4_tfidf_lr"]) == 2
    out = tmp_path / "nowhere"
    cfg.write_text(f'output_dir = "{out}"\n[corpus]\ntrain = "{package_data("fixture_train.tsv")}"\n')
    assert main(["predict", "--config", str(cfg), "--model", "m4_tfidf_lr", "--split", "train"]) == 2
    assert "not found" in capsys.readouterr().err
