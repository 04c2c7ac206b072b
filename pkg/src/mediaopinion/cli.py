"""Command-line pipeline: ingest, score, aggregate, series, harmonize, fit, predict, report.

Every subcommand reads its upstream artifacts from the output directory,
writes its own artifacts there, and records a manifest under
``manifests/<subcommand>.json`` with input hashes and the effective
configuration.

Exit codes: 0 success, 1 invalid configuration or input data, 2 missing
upstream artifact, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from . import __version__
from .aggregation import ArticleAggregator, parse_sentiments
from .corpus import DEFAULT_KEYWORDS, Article, IngestReport, Sentence, ingest_corpus, segment
from .exceptions import ConfigError, DataError, InvariantError, MissingArtifactError
from .harmonize import SurveyHarmonizer, read_waves
from .io import read_jsonl, sha256_file, write_csv, write_json, write_jsonl
from .regression import (SparseLagModel, SparseLagRegressor, dump_model, nested_table,
                         predict_model)
from .scoring import SentenceScore, make_scorer, score_sentences
from .series import build_series, series_from_frame, series_to_frame, signed_panel

log = logging.getLogger("mediaopinion")

ARTIFACTS = {
    "ingest": "articles.jsonl",
    "score": "scores.jsonl",
    "aggregate": "sentiments.jsonl",
    "series": "series.csv",
    "harmonize": "opinion.csv",
    "fit": "model.json",
    "predict": "predictions.csv",
}
SUBCOMMANDS = list(ARTIFACTS) + ["report"]

# Config fields that only locate files; excluded from hashes and manifests
_LOCATION_FIELDS = {"out_dir", "config"}


@dataclass
class RunConfig:
    corpus: str | None = None
    scores: str | None = None
    lexicon: str | None = None
    waves: str | None = None
    out_dir: str = "out"
    scorer: str = "lexicon"
    keywords: list = field(default_factory=lambda: list(DEFAULT_KEYWORDS))
    tau_assign: float = 0.5
    tau_sent: float = 0.5
    deadband: float = 0.0
    denominator: str = "all"
    year_start: int | None = None
    year_end: int | None = None
    max_lag: int = 5
    min_lag: int = 0
    max_topics: int = 8
    baseline_year: int = 1974
    n_bootstrap: int = 1000
    seed: int = 0
    n_jobs: int = 1
    config: str | None = None

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(unknown[0], "unknown config field")
        # input paths in a config file are relative to that file
        for key in ("corpus", "scores", "lexicon", "waves"):
            if data.get(key) is not None and not Path(data[key]).is_absolute():
                data[key] = str(path.parent / data[key])
        return cls(**data, config=str(path))

    def validate(self):
        checks = [
            ("tau_assign", 0 < self.tau_assign <= 1),
            ("tau_sent", 0 < self.tau_sent < 1),
            ("deadband", self.deadband >= 0),
            ("denominator", self.denominator in ("all", "topic")),
            ("scorer", self.scorer in ("lexicon", "replay")),
            ("max_lag", isinstance(self.max_lag, int) and self.max_lag >= 0),
            ("min_lag", isinstance(self.min_lag, int) and 0 <= self.min_lag <= self.max_lag),
            ("max_topics", isinstance(self.max_topics, int) and 1 <= self.max_topics <= 8),
            ("n_bootstrap", isinstance(self.n_bootstrap, int) and self.n_bootstrap >= 0),
            ("n_jobs", isinstance(self.n_jobs, int) and self.n_jobs >= 1),
            ("keywords", bool([k for k in self.keywords if k.strip()])),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigError(name, f"invalid value {getattr(self, name)!r}")
        for name in ("corpus", "scores", "lexicon", "waves"):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(name, f"path does not exist: {value}")

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(name, "required for this subcommand")

    def as_record(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in _LOCATION_FIELDS}

    def hash(self, *names) -> str:
        rec = self.as_record()
        sub = {k: rec[k] for k in names} if names else rec
        return hashlib.sha256(json.dumps(sub, sort_keys=True).encode()).hexdigest()[:16]


class Run:
    """Artifact bookkeeping for one subcommand invocation."""

    def __init__(self, name, config: RunConfig):
        self.name = name
        self.config = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs = {}
        self.outputs = []

    def upstream(self, stage) -> Path:
        path = self.out / ARTIFACTS[stage]
        if not path.exists():
            raise MissingArtifactError(ARTIFACTS[stage])
        self.inputs[ARTIFACTS[stage]] = sha256_file(path)
        return path

    def external(self, name) -> Path:
        path = Path(getattr(self.config, name))
        self.inputs[f"{name}:{path.name}"] = sha256_file(path)
        return path

    def output(self, relpath) -> Path:
        path = self.out / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(relpath)
        return path

    def finish(self):
        manifest = {
            "command": self.name,
            "version": __version__,
            "config": self.config.as_record(),
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": {str(p): sha256_file(self.out / p) for p in self.outputs},
        }
        (self.out / "manifests").mkdir(exist_ok=True)
        write_json(self.out / "manifests" / f"{self.name}.json", manifest)


def _load_articles(path):
    articles, sentences = [], []
    for rec in read_jsonl(path):
        article = Article(rec["id"], pd.Timestamp(rec["date"]).date(), rec["title"], rec["body"])
        articles.append(article)
        sentences.extend(Sentence(article.id, s["index"], tuple(s["text"].split()))
                         for s in rec["sentences"])
    return articles, sentences


def cmd_ingest(run: Run):
    cfg = run.config
    cfg.require("corpus")
    report = IngestReport()
    articles = ingest_corpus(run.external("corpus"), cfg.keywords, report)
    records = []
    for a in articles:
        rec = a.to_record()
        rec["year"] = a.year
        rec["sentences"] = [{"index": s.index, "token_count": s.token_count, "text": s.text}
                            for s in segment(a)]
        records.append(rec)
    write_jsonl(run.output(ARTIFACTS["ingest"]), records)
    print(f"ingest: {report.n_read} read, {report.n_kept} kept, "
          f"{report.n_errors} malformed", file=sys.stderr)


def cmd_score(run: Run):
    cfg = run.config
    source = "scores" if cfg.scorer == "replay" else "lexicon"
    cfg.require(source)
    _, sentences = _load_articles(run.upstream("ingest"))
    scorer = make_scorer(cfg.scorer, run.external(source))
    scores = score_sentences(sentences, scorer, n_jobs=cfg.n_jobs)
    write_jsonl(run.output(ARTIFACTS["score"]), [s.to_record() for s in scores])


def cmd_aggregate(run: Run):
    cfg = run.config
    articles, _ = _load_articles(run.upstream("ingest"))
    scores = [SentenceScore.from_record(r) for r in read_jsonl(run.upstream("score"))]
    agg = ArticleAggregator(cfg.tau_assign, cfg.tau_sent, cfg.deadband).fit()
    sentiments = agg.transform(scores, years={a.id: a.year for a in articles})
    write_jsonl(run.output(ARTIFACTS["aggregate"]),
                [r for s in sentiments for r in s.to_records()])


def cmd_series(run: Run):
    cfg = run.config
    sentiments = parse_sentiments(read_jsonl(run.upstream("aggregate")))
    year_range = None
    if cfg.year_start is not None or cfg.year_end is not None:
        years = [s.year for s in sentiments]
        year_range = (cfg.year_start if cfg.year_start is not None else min(years),
                      cfg.year_end if cfg.year_end is not None else max(years))
    series = build_series(sentiments, year_range, denominator=cfg.denominator)
    for s in series:
        if s.n_positive + s.n_negative > s.n_total or s.f_positive + s.f_negative > 1 + 1e-12:
            raise InvariantError(f"inconsistent counts for {s.topic.value} {s.year}")
    write_csv(run.output(ARTIFACTS["series"]), series_to_frame(series))


def cmd_harmonize(run: Run):
    cfg = run.config
    cfg.require("waves")
    waves = read_waves(run.external("waves"))
    h = SurveyHarmonizer(cfg.baseline_year, cfg.n_bootstrap, cfg.seed, n_jobs=cfg.n_jobs)
    h.fit(waves)
    opinion = h.opinion_
    if opinion.loc[opinion["year"] == cfg.baseline_year, "mu"].iloc[0] != 0.0:
        raise InvariantError("opinion is not anchored at the baseline year")
    write_csv(run.output(ARTIFACTS["harmonize"]), opinion)
    write_csv(run.output("calibration.csv"), h.calibration_)


def _fit_inputs(run):
    series = series_from_frame(pd.read_csv(run.upstream("series")))
    opinion = pd.read_csv(run.upstream("harmonize"))
    return series, opinion.set_index("year")["mu"]


def cmd_fit(run: Run):
    cfg = run.config
    series, opinion = _fit_inputs(run)
    reg = SparseLagRegressor(cfg.max_lag, cfg.max_topics, cfg.min_lag).fit(series, opinion)
    for m in reg.models_:
        try:
            m.check_constraints()
        except DataError as exc:
            raise InvariantError(str(exc)) from exc
    chash = cfg.hash("max_lag", "min_lag", "max_topics")
    run.output(ARTIFACTS["fit"]).write_text(dump_model(reg.model(), chash), encoding="utf-8")
    write_json(run.output("nested_models.json"),
               {"config_hash": chash, "models": [m.to_dict() for m in reg.models_]})


def cmd_predict(run: Run):
    series, opinion = _fit_inputs(run)
    model = SparseLagModel.from_dict(json.loads(run.upstream("fit").read_text()))
    pred = predict_model(model, signed_panel(series))
    frame = pd.DataFrame({"year": pred.index, "predicted": pred.to_numpy()})
    frame["actual"] = frame["year"].map(opinion)
    write_csv(run.output(ARTIFACTS["predict"]), frame)


def cmd_report(run: Run):
    from .report import write_report

    opinion = pd.read_csv(run.upstream("harmonize"))
    series = pd.read_csv(run.upstream("series"))
    predictions = pd.read_csv(run.upstream("predict"))
    run.upstream("fit")
    nested_path = run.out / "nested_models.json"
    if not nested_path.exists():
        raise MissingArtifactError("nested_models.json")
    run.inputs["nested_models.json"] = sha256_file(nested_path)
    models = [SparseLagModel.from_dict(d) for d in json.loads(nested_path.read_text())["models"]]
    written = write_report(run.out / "report", opinion, series, predictions, nested_table(models))
    for path in written:
        run.outputs.append(path.relative_to(run.out))


COMMANDS = {
    "ingest": cmd_ingest, "score": cmd_score, "aggregate": cmd_aggregate,
    "series": cmd_series, "harmonize": cmd_harmonize, "fit": cmd_fit,
    "predict": cmd_predict, "report": cmd_report,
}


def run_subcommand(name, config: RunConfig):
    config.validate()
    run = Run(name, config)
    COMMANDS[name](run)
    run.finish()
    return run


def run_pipeline(config: RunConfig):
    for name in SUBCOMMANDS:
        run_subcommand(name, config)


def build_parser():
    parser = argparse.ArgumentParser(prog="mediaopinion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file setting any run option; flags override it")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--corpus")
    common.add_argument("--scores", help="replay score file (JSON lines)")
    common.add_argument("--lexicon", help="lexicon file (JSON lines)")
    common.add_argument("--waves", help="survey wave table (CSV)")
    common.add_argument("--scorer", choices=["lexicon", "replay"])
    common.add_argument("--keywords", type=lambda s: [k for k in s.split(",")],
                        help="comma-separated filter terms")
    common.add_argument("--tau-assign", dest="tau_assign", type=float)
    common.add_argument("--tau-sent", dest="tau_sent", type=float)
    common.add_argument("--deadband", type=float)
    common.add_argument("--denominator", choices=["all", "topic"])
    common.add_argument("--year-start", dest="year_start", type=int)
    common.add_argument("--year-end", dest="year_end", type=int)
    common.add_argument("--max-lag", dest="max_lag", type=int)
    common.add_argument("--min-lag", dest="min_lag", type=int)
    common.add_argument("--max-topics", dest="max_topics", type=int)
    common.add_argument("--baseline-year", dest="baseline_year", type=int)
    common.add_argument("--n-bootstrap", dest="n_bootstrap", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--n-jobs", dest="n_jobs", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS + ["all"]:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None and f.name != "config":
            setattr(config, f.name, value)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        if args.command == "all":
            run_pipeline(config)
        else:
            run_subcommand(args.command, config)
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return 1
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvariantError, AssertionError) as exc:
        print(f"error: invariant breach: {exc}", file=sys.stderr)
        return 3
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
