"""Command-line interface: train, predict, ensemble, evaluate, inspect-model.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import MODEL_IDS, ConfigError, RunConfig, load_config, with_overrides
from .corpus import ClassLabel, CorpusError, load_corpus
from .embed import EmbeddingError
from .ensemble import (
    CoverageError, ensemble_run, read_predictions, tie_summary, write_decisions,
    write_predictions, write_probabilities,
)
from .evaluation import EvaluationError, evaluate
from .lda import LdaError
from .pipeline import (
    EmbeddingsRequired, PipelineError, SubModel, load_run_embeddings, load_split,
    model_path, prediction_paths, train_submodel,
)
from .softmax import DimensionError
from .tfidf import VocabularyError

log = logging.getLogger("abstractclf")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

DATA_ERRORS = (CorpusError, EmbeddingError, CoverageError, EvaluationError, DimensionError,
               VocabularyError, LdaError, PipelineError, FileNotFoundError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(path: Path, writer, *args) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        log.info("overwriting %s", path)
    writer(path, *args)


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config)
    return with_overrides(
        cfg,
        output_dir=Path(args.output_dir) if getattr(args, "output_dir", None) else None,
        embeddings=Path(args.embeddings) if getattr(args, "embeddings", None) else None,
    )


def _model_ids(choice: str) -> list[str]:
    return list(MODEL_IDS) if choice == "all" else [choice]


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    corpus = load_split(cfg, "train")
    embeddings = load_run_embeddings(cfg)
    for model_id in _model_ids(args.model):
        if model_id in ("m1_embed", "m2_embed_lda") and embeddings is None:
            raise EmbeddingsRequired(f"{model_id}: embedding table required (pass --embeddings)")
        model, trace = train_submodel(model_id, corpus, cfg, embeddings)
        out = model_path(cfg, model_id)
        _write(out, lambda p: model.save(p))
        trace["effective_seeds"] = cfg.seeds()
        _write(out.parent.parent / "logs" / f"{model_id}.train.json",
               lambda p: p.write_text(json.dumps(trace, indent=2) + "\n", encoding="utf-8"))
        print(f"{model_id}: {trace['stop_reason']} after {trace['iterations']} iterations "
              f"(D={trace['feature_dimension']}) -> {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _load_cfg(args)
    corpus = load_split(cfg, args.split)
    embeddings = load_run_embeddings(cfg)
    for model_id in _model_ids(args.model):
        model = SubModel.load(model_path(cfg, model_id))
        if model.needs_embeddings and embeddings is None:
            raise EmbeddingsRequired(f"{model_id}: embedding table required (pass --embeddings)")
        probs = model.predict_proba(corpus, embeddings)
        labels = {d.id: ClassLabel.from_index(int(p.argmax())) for d, p in zip(corpus, probs)}
        pred_path, prob_path = prediction_paths(cfg, model_id, args.split)
        _write(pred_path, write_predictions, labels)
        _write(prob_path, write_probabilities, corpus.ids, probs)
        print(f"{model_id}: {len(labels)} predictions -> {pred_path}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    if len(args.predictions) < 2:
        raise UsageError("ensemble needs at least 2 prediction files")
    seed, deterministic = args.seed, args.deterministic_ties
    if args.config:
        cfg = load_config(args.config, check_paths=False)
        seed = cfg.ensemble_seed if seed is None else seed
        deterministic = deterministic or cfg.ensemble_deterministic_ties
    seed = 0 if seed is None else seed
    per_model = {}
    for path in args.predictions:
        name = Path(path).name.split(".")[0]
        if name in per_model:
            name = str(path)
        per_model[name] = read_predictions(path)
    decisions = ensemble_run(per_model, seed, deterministic)
    out = Path(args.output)
    _write(out, write_decisions, decisions)
    summary = tie_summary(decisions)
    summary.update(seed=seed, models=list(per_model))
    _write(out.with_suffix(".summary.json"),
           lambda p: p.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8"))
    print(f"ensemble of {len(per_model)} models: {summary['documents']} documents, "
          f"{summary['ties']} ties -> {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    gold_corpus = load_corpus(args.gold, split_name="validation")
    gold = gold_corpus.labels()
    pred = read_predictions(args.pred)
    report = evaluate(gold, pred)
    print(report.format_table())
    out = Path(args.output) if args.output else Path(args.pred).with_suffix(".report.json")
    _write(out, report.save)
    return EXIT_OK


def cmd_inspect(args) -> int:
    model = SubModel.load(args.model_file)
    info = {
        "model_id": model.model_id,
        "classes": list(model.head.class_codes),
        "feature_dimension": model.head.feature_dimension,
        "stem": model.prep.stem,
        "stopwords": len(model.prep.stopwords),
        "head_config": model.head.to_dict()["config"],
    }
    if model.tfidf is not None:
        info["tfidf"] = {"vocabulary_size": model.tfidf.dimension,
                         "ngram_range": list(model.tfidf.vocabulary.ngram_range),
                         "min_df_fraction": model.tfidf.vocabulary.min_df_fraction,
                         "corpus_doc_count": model.tfidf.corpus_doc_count}
    if model.lda is not None:
        info["lda"] = {"num_topics": model.lda.num_topics, "vocabulary_size": len(model.lda.vocab),
                       "top_terms": {k: model.lda.top_terms(k, 5)
                                     for k in range(min(model.lda.num_topics, args.topics))}}
    if model.aggregation is not None:
        info["aggregation"] = vars(model.aggregation)
    print(json.dumps(info, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abstractclf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(p):
        p.add_argument("--config", required=True, help="run configuration (TOML)")
        p.add_argument("--output-dir", help="override output_dir from the config")
        p.add_argument("--embeddings", help="embedding table for m1/m2 (dim=<D> header format)")
        p.add_argument("--model", default="all", choices=MODEL_IDS + ("all",))

    p = sub.add_parser("train", help="train one sub-model (or all)")
    run_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write predictions and probabilities for a split")
    run_flags(p)
    p.add_argument("--split", default="validation", choices=("train", "validation", "test"))
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("ensemble", help="majority vote over prediction files")
    p.add_argument("predictions", nargs="+", help="doc_id<TAB>label prediction files")
    p.add_argument("--output", required=True)
    p.add_argument("--config", help="take the ensemble seed from a run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--deterministic-ties", action="store_true",
                   help="break ties by lowest class index instead of at random")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("evaluate", help="weighted F1 report for a prediction file")
    p.add_argument("--gold", required=True, help="labeled corpus file")
    p.add_argument("--pred", required=True, help="prediction TSV")
    p.add_argument("--output", help="JSON report path (default: next to --pred)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect-model", help="summarize a trained sub-model artifact")
    p.add_argument("model_file")
    p.add_argument("--topics", type=int, default=5)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError, EmbeddingsRequired) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
