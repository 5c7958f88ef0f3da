"""``dancehit`` command line: dataset building, evaluation, prediction, trends.

Settings are resolved in increasing priority: built-in defaults, a flat
JSON ``--config`` document, ``DANCEHIT_<KEY>`` environment variables and
finally explicit flags. Every command writes only into ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from . import synthetic
from .classifiers.svm import C_GRID, DEGREE_GRID, GAMMA_GRID
from .datamodel import (
    LABEL_NAMES, Dataset, assemble_dataset, compute_peaks, get_scheme, load_analyses, load_analysis,
    out_of_time_split, parse_chart_csv,
)
from .evaluation import (
    CrossValidator, compare_models, confusion_and_accuracy, format_results_text, roc_auc,
    write_results_csv,
)
from .features import FEATURE_NAMES, feature_vector, write_trend_csv, yearly_trend
from .pipeline import DEFAULT_SPECS, FittedPipeline, ModelSpec, fit_pipeline, get_specs
from .preprocess import GaConfig

logger = logging.getLogger("dancehit")

ENV_PREFIX = "DANCEHIT_"


class CliError(Exception):
    """Raised for user-facing failures; ``main`` turns it into exit code 2."""


def _list(value) -> list:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _opt_bool(value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "both", "none")):
        return None
    return _bool(value)


def _opt_int(value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
        return None
    return int(value)


@dataclass
class PipelineConfig:
    charts: str | None = None
    analyses: str | None = None
    dataset: str | None = None
    out: str = "out"
    scheme: str = "D1"
    runs: int = 10
    folds: int = 10
    seed: int = 0
    models: list = field(default_factory=lambda: list(DEFAULT_SPECS))
    fs: bool | None = None  # None: evaluate both with and without selection
    selection_scope: str = "fold"
    oot_fraction: float = 0.9
    ga_population: int = 20
    ga_generations: int = 20
    ga_crossover: float = 0.6
    ga_mutation: float = 0.033
    svm_neighborhood: int = 8
    svm_c_grid: list = field(default_factory=lambda: list(C_GRID))
    svm_gamma_grid: list = field(default_factory=lambda: list(GAMMA_GRID))
    svm_degree_grid: list = field(default_factory=lambda: list(DEGREE_GRID))
    svm_tol: float = 1e-3
    features: list = field(default_factory=lambda: ["loudness", "tempo", "T1mean"])
    max_peak: int | None = 10
    n_songs: int = 400
    scenario: str = "separable"

    def ga(self, seed: int = 0) -> GaConfig:
        return GaConfig(seed, self.ga_population, self.ga_generations, self.ga_crossover, self.ga_mutation)

    def specs(self) -> list[ModelSpec]:
        out = []
        for spec in get_specs(self.models):
            if spec.kind in ("svm_poly", "svm_rbf"):
                grid = self.svm_degree_grid if spec.kind == "svm_poly" else self.svm_gamma_grid
                spec = dataclasses.replace(spec, options=spec.options + (
                    ("neighborhood", self.svm_neighborhood), ("tol", self.svm_tol),
                    ("C_grid", tuple(self.svm_c_grid)), ("param_grid", tuple(grid))))
            out.append(spec)
        return out

    def validate(self) -> None:
        get_scheme(self.scheme)
        get_specs(self.models)
        if self.runs < 1 or self.folds < 2:
            raise CliError("need runs >= 1 and folds >= 2")
        if self.selection_scope not in ("fold", "global"):
            raise CliError("selection_scope must be 'fold' or 'global'")
        if self.svm_neighborhood not in (4, 8):
            raise CliError("svm_neighborhood must be 4 or 8")
        for key in ("charts", "analyses", "dataset"):
            path = getattr(self, key)
            if path is not None and not Path(path).exists():
                raise CliError(f"{key} path does not exist: {path}")


_CONVERTERS = {
    "runs": int, "folds": int, "seed": int, "ga_population": int, "ga_generations": int,
    "svm_neighborhood": int, "n_songs": int, "max_peak": _opt_int,
    "oot_fraction": float, "ga_crossover": float, "ga_mutation": float, "svm_tol": float,
    "fs": _opt_bool, "models": _list, "features": _list,
    "svm_c_grid": lambda v: [float(x) for x in _list(v)],
    "svm_gamma_grid": lambda v: [float(x) for x in _list(v)],
    "svm_degree_grid": lambda v: [int(x) for x in _list(v)],
}
CONFIG_KEYS = tuple(f.name for f in fields(PipelineConfig))


def _convert(key: str, value):
    conv = _CONVERTERS.get(key, str)
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad value for {key}: {value!r}") from exc


def resolve_config(flags: dict, environ: dict | None = None) -> PipelineConfig:
    """Merge defaults, the ``config`` file named in ``flags``, environment and flags."""
    environ = os.environ if environ is None else environ
    values: dict = {}
    path = flags.get("config") or environ.get(ENV_PREFIX + "CONFIG")
    if path:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise CliError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise CliError("config file must hold one flat JSON object")
        unknown = sorted(set(doc) - set(CONFIG_KEYS))
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(unknown)}")
        values.update({k: _convert(k, v) for k, v in doc.items()})
    for key in CONFIG_KEYS:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = _convert(key, env)
    for key in CONFIG_KEYS:
        if flags.get(key) is not None:
            values[key] = _convert(key, flags[key])
    cfg = PipelineConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- helpers

def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _build(cfg: PipelineConfig):
    if not cfg.charts or not cfg.analyses:
        raise CliError("need --charts and --analyses (or --dataset)")
    analyses = load_analyses(cfg.analyses)
    parsed = parse_chart_csv(cfg.charts)
    dataset, report = assemble_dataset(compute_peaks(parsed.listings), analyses, get_scheme(cfg.scheme))
    return dataset, report, parsed.skipped


def _load_dataset(cfg: PipelineConfig) -> Dataset:
    if cfg.dataset:
        return Dataset.from_csv(cfg.dataset)
    return _build(cfg)[0]


def _fs_modes(cfg: PipelineConfig, default) -> list[bool]:
    if cfg.fs is not None:
        return [cfg.fs]
    return default


def _model_key(spec: ModelSpec) -> str:
    for key, s in DEFAULT_SPECS.items():
        if s.kind == spec.kind:
            return key
    return spec.kind


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# ---------------------------------------------------------------- commands

def cmd_build_dataset(cfg: PipelineConfig) -> int:
    dataset, report, skipped = _build(cfg)
    out = _out_dir(cfg)
    dataset.to_csv(out / f"dataset_{cfg.scheme}.csv")
    _write_json(out / f"drop_report_{cfg.scheme}.json",
                {**report.as_dict(), "skipped_chart_rows": skipped, "hits": dataset.n_hits,
                 "nonhits": dataset.n_nonhits, "scheme": cfg.scheme})
    print(f"{cfg.scheme}: {len(dataset)} songs ({dataset.n_hits} hits, {dataset.n_nonhits} non-hits); "
          f"{report.excluded} in the gap, {report.missing_analysis} without analysis, "
          f"{report.unusable_analysis} unusable")
    return 0


def cmd_evaluate(cfg: PipelineConfig) -> int:
    dataset = _load_dataset(cfg)
    specs = cfg.specs()
    comparisons = []
    for with_fs in _fs_modes(cfg, [False, True]):
        logger.info("evaluating %d models, feature selection %s", len(specs), "on" if with_fs else "off")
        comparisons.append(compare_models(dataset, specs, cfg.runs, cfg.folds, cfg.seed, with_fs,
                                          cfg.ga(), cfg.selection_scope))
    out = _out_dir(cfg)
    write_results_csv(out / "results_auc.csv", comparisons, "auc")
    write_results_csv(out / "results_accuracy.csv", comparisons, "accuracy")
    text = (f"{len(dataset)} songs, {cfg.runs} x {cfg.folds}-fold CV, seed {cfg.seed}\n\n"
            f"AUC\n{format_results_text(comparisons, 'auc')}\n"
            f"Accuracy\n{format_results_text(comparisons, 'accuracy')}")
    for comp in comparisons:
        tag = "fs" if comp.with_feature_selection else "nofs"
        for spec, res in zip(specs, comp.results.values()):
            res.roc(0).to_csv(out / f"roc_{_model_key(spec)}_{tag}.csv")
            text += f"\nConfusion matrix, {res.name} ({tag}, run 1)\n{res.confusion(0).table()}\n"
    (out / "results.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def cmd_oot(cfg: PipelineConfig) -> int:
    dataset = _load_dataset(cfg)
    train, test = out_of_time_split(dataset, cfg.oot_fraction)
    if len(set(train.y.tolist())) < 2:
        raise CliError("the early training partition holds only one class")
    with_fs = cfg.fs if cfg.fs is not None else True
    specs = cfg.specs()
    cv = CrossValidator(dataset, cfg.runs, cfg.folds, cfg.seed, with_fs, cfg.ga(), cfg.selection_scope)
    out = _out_dir(cfg)
    header = ["model", "split_auc", "split_accuracy", "cv_auc", "cv_accuracy"]
    rows = []
    lines = [f"train {len(train)} ({train.n_hits} hits, {train.n_nonhits} non-hits) up to "
             f"{train.dates.max()}; test {len(test)} ({test.n_hits} hits, {test.n_nonhits} non-hits) "
             f"from {test.dates.min()}; feature selection {'on' if with_fs else 'off'}"]
    for spec in specs:
        pipe = fit_pipeline(train, spec, cfg.seed, with_fs, cfg.ga())
        scores = pipe.score(test.X)
        preds = pipe.predict(test.X)
        cm, acc = confusion_and_accuracy(test.y, preds)
        if test.n_hits and test.n_nonhits:
            curve, auc = roc_auc(test.y, scores)
            curve.to_csv(out / f"roc_oot_{_model_key(spec)}.csv")
        else:
            auc = float("nan")
        res = cv.evaluate(spec)
        rows.append([spec.name, _fmt(auc), _fmt(acc), _fmt(res.mean_auc), _fmt(res.mean_accuracy)])
        lines.append(f"\n{spec.name}: split AUC {auc:.4f}, accuracy {acc:.4f}; "
                     f"{cfg.runs}x{cfg.folds} CV AUC {res.mean_auc:.4f}, accuracy {res.mean_accuracy:.4f}")
        lines.append(cm.table())
    with open(out / "oot.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    text = "\n".join(lines) + "\n"
    (out / "oot.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def cmd_train(cfg: PipelineConfig) -> int:
    dataset = _load_dataset(cfg)
    with_fs = cfg.fs if cfg.fs is not None else True
    out = _out_dir(cfg)
    for spec in cfg.specs():
        pipe = fit_pipeline(dataset, spec, cfg.seed, with_fs, cfg.ga())
        path = out / f"model_{_model_key(spec)}.json"
        pipe.save(path)
        print(f"{spec.name}: {len(pipe.selected)} features -> {path}")
    return 0


def schema_mismatch(model_names: Sequence[str], data_names: Sequence[str]) -> str | None:
    """Describe how two feature schemas differ, or None when they are identical."""
    if tuple(model_names) == tuple(data_names):
        return None
    missing = [n for n in model_names if n not in set(data_names)]
    extra = [n for n in data_names if n not in set(model_names)]
    parts = []
    if missing:
        parts.append(f"missing features: {', '.join(missing)}")
    if extra:
        parts.append(f"extra features: {', '.join(extra)}")
    if not parts:
        parts.append("features are in a different order")
    return "model schema does not match the song features; " + "; ".join(parts)


def cmd_predict(model_path: str, analysis_paths: Sequence[str]) -> int:
    pipe = FittedPipeline.load(model_path)
    problem = schema_mismatch(pipe.feature_names, FEATURE_NAMES)
    if problem:
        raise CliError(problem)
    for path in analysis_paths:
        try:
            vec = feature_vector(load_analysis(path))
        except (ValueError, KeyError) as exc:
            raise CliError(f"{path}: {exc}") from exc
        score = float(pipe.score(vec[None, :])[0])
        label = LABEL_NAMES[int(pipe.predict(vec[None, :])[0])]
        kind = "margin" if pipe.model.kind == "svm" else "probability"
        print(f"{path}\t{kind}={score:.6f}\t{label}")
    return 0


def cmd_trends(cfg: PipelineConfig) -> int:
    unknown = [f for f in cfg.features if f not in FEATURE_NAMES]
    if unknown:
        raise CliError(f"unknown feature(s) {', '.join(unknown)}; valid names: {', '.join(FEATURE_NAMES)}")
    if not cfg.charts or not cfg.analyses:
        raise CliError("trends needs --charts and --analyses")
    analyses = load_analyses(cfg.analyses)
    peaks = compute_peaks(parse_chart_csv(cfg.charts).listings)
    songs = []
    for p in peaks:
        if cfg.max_peak is not None and p.peak_position > cfg.max_peak:
            continue
        a = analyses.get(p.song_key)
        if a is None:
            continue
        try:
            songs.append((p.first_date, feature_vector(a)))
        except ValueError:
            continue
    results = []
    for name in cfg.features:
        col = FEATURE_NAMES.index(name)
        per_year, line = yearly_trend((d, v[col]) for d, v in songs)
        results.append((name, per_year, line))
    out = _out_dir(cfg)
    with open(out / "trends.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "slope", "intercept", "n_years"])
        for name, per_year, line in results:
            write_trend_csv(out / f"trend_{name}.csv", name, per_year, line)
            w.writerow([name, repr(line.slope), repr(line.intercept), line.n_years])
            print(f"{name}: slope {line.slope:.6g} per year over {line.n_years} years")
    return 0


def cmd_gen_synthetic(cfg: PipelineConfig) -> int:
    out = synthetic.write_corpus(cfg.out, cfg.seed, cfg.n_songs, cfg.scenario)
    print(f"{cfg.n_songs} {cfg.scenario} songs -> {out}")
    return 0


# ---------------------------------------------------------------- argument parsing

def _add_common(p: argparse.ArgumentParser, *groups: str) -> None:
    p.add_argument("--config", help="flat JSON document of settings")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", help="root seed")
    if "data" in groups:
        p.add_argument("--charts", help="chart listings CSV")
        p.add_argument("--analyses", help="directory of song analysis JSON files")
        p.add_argument("--scheme", help="gap scheme D1, D2 or D3")
    if "dataset" in groups:
        p.add_argument("--dataset", help="dataset CSV written by build-dataset")
    if "models" in groups:
        p.add_argument("--models", help=f"comma list from {','.join(DEFAULT_SPECS)}")
        fs = p.add_mutually_exclusive_group()
        fs.add_argument("--fs", dest="fs", action="store_const", const=True, help="with feature selection")
        fs.add_argument("--no-fs", dest="fs", action="store_const", const=False,
                        help="without feature selection")
        p.add_argument("--selection-scope", dest="selection_scope", choices=("fold", "global"))
        p.add_argument("--ga-population", dest="ga_population")
        p.add_argument("--ga-generations", dest="ga_generations")
        p.add_argument("--ga-crossover", dest="ga_crossover")
        p.add_argument("--ga-mutation", dest="ga_mutation")
        p.add_argument("--svm-neighborhood", dest="svm_neighborhood", choices=("4", "8"))
        p.add_argument("--svm-c-grid", dest="svm_c_grid")
        p.add_argument("--svm-gamma-grid", dest="svm_gamma_grid")
        p.add_argument("--svm-degree-grid", dest="svm_degree_grid")
    if "cv" in groups:
        p.add_argument("--runs")
        p.add_argument("--folds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dancehit", description="Dance hit prediction experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="charts + analyses -> labelled feature CSV")
    _add_common(p, "data")
    p = sub.add_parser("evaluate", help="repeated cross-validation and significance tests")
    _add_common(p, "data", "dataset", "models", "cv")
    p = sub.add_parser("oot", help="train on the oldest songs, test on the newest")
    _add_common(p, "data", "dataset", "models", "cv")
    p.add_argument("--fraction", dest="oot_fraction", help="share of songs used for training")
    p = sub.add_parser("train", help="fit models on the full dataset and save them as JSON")
    _add_common(p, "data", "dataset", "models")
    p = sub.add_parser("predict", help="score song analyses with a saved model")
    p.add_argument("--model", required=True, help="model JSON written by train")
    p.add_argument("analysis", nargs="+", help="song analysis JSON file(s)")
    p = sub.add_parser("trends", help="yearly means and linear trends of features")
    _add_common(p, "data")
    p.add_argument("--features", help="comma list of feature names")
    p.add_argument("--max-peak", dest="max_peak", help="only songs peaking at or above this position")
    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic corpus")
    _add_common(p)
    p.add_argument("--n-songs", dest="n_songs")
    p.add_argument("--scenario", choices=synthetic.SCENARIOS)
    return parser


COMMANDS = {
    "build-dataset": cmd_build_dataset,
    "evaluate": cmd_evaluate,
    "oot": cmd_oot,
    "train": cmd_train,
    "trends": cmd_trends,
    "gen-synthetic": cmd_gen_synthetic,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "predict":
            return cmd_predict(args.model, args.analysis)
        cfg = resolve_config(vars(args))
        return COMMANDS[args.command](cfg)
    except (CliError, ValueError, FileNotFoundError) as exc:
        print(f"dancehit {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
