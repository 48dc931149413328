"""Command-line surface: prepare, cv-eta, train, evaluate, predict, sweep."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boosting import (
    ROUND_LOG_HEADER,
    BoostConfig,
    BoostingError,
    RoundRecord,
    run_adafm,
)
from .core import FeatureEncoder, InteractionDataset
from .data import (
    DataFormatError,
    SplitSpec,
    filter_min_interactions,
    load_dataset,
    load_split,
    split,
    write_interactions,
)
from .metrics import Measure, evaluate_model, format_report
from .model import (
    EnsembleModel,
    ModelFormatError,
    load_model,
    save_model,
    score_items,
)
from .samplers import SamplerConfig
from .training import (
    TrainConfig,
    TrainingDivergedError,
    train_component,
    train_pointwise_fm,
)

__all__ = ["main", "ConfigError", "ALGORITHMS"]

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Inconsistent or incomplete command configuration."""


# algorithm -> (objective, implied sampler kind, boosted)
ALGORITHMS = {
    "FM": ("pointwise", "uniform", False),
    "PRFM": ("pairwise", "uniform", False),
    "LFM-S": ("pairwise", "static", False),
    "LFM-D": ("pairwise", "dynamic", False),
    "LFM-W": ("pairwise", "rank-aware", False),
    "AdaFM-O": ("pointwise", "uniform", True),
    "AdaFM-P": ("pairwise", "uniform", True),
    "AdaFM-S": ("pairwise", "static", True),
    "AdaFM-D": ("pairwise", "dynamic", True),
    "AdaFM-W": ("pairwise", "rank-aware", True),
}


def _to_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


# key -> (converter, default); defaults of None mean "required".
_COMMON_TRAIN_KEYS: dict[str, tuple] = {
    "data": (str, None),
    "algorithm": (str, "PRFM"),
    "k": (int, 2),
    "rounds": (int, 4),
    "eta": (float, 0.05),
    "gamma": (float, 0.05),
    "sampler": (str, ""),
    "rho": (float, 0.3),
    "m": (int, 10),
    "epsilon": (float, 0.1),
    "max_trials": (int, 0),
    "iters": (int, 100_000),
    "metric": (str, "auc"),
    "seed": (int, 42),
    "eval_negatives": (int, 100),
    "log_every": (int, 0),
}

_SCHEMAS: dict[str, dict[str, tuple]] = {
    "prepare": {
        "input": (str, None),
        "min_interactions": (int, 0),
        "split": (str, "holdout"),
        "fraction": (float, 0.2),
        "seed": (int, 42),
        "binarize": (_to_bool, False),
    },
    "train": {
        **_COMMON_TRAIN_KEYS,
        "patience": (int, 0),
        "val_fraction": (float, 0.1),
    },
    "evaluate": {
        "model": (str, None),
        "data": (str, None),
        "metric": (str, "auc"),
        "seed": (int, 42),
        "eval_negatives": (int, 100),
        "per_user": (_to_bool, False),
    },
    "predict": {
        "model": (str, None),
        "data": (str, None),
        "user": (str, None),
        "n": (int, 10),
        "sample_candidates": (int, 0),
        "seed": (int, 42),
    },
    "sweep": {
        **_COMMON_TRAIN_KEYS,
        "axis": (str, "ranks"),
        "values": (str, None),
        "seeds": (str, ""),
    },
    "cv-eta": {
        "data": (str, None),
        "grid": (str, "0.1,0.05,0.01,0.005,0.001"),
        "folds": (int, 5),
        "k": (int, 2),
        "gamma": (float, 0.05),
        "iters": (int, 20_000),
        "metric": (str, "auc"),
        "seed": (int, 42),
        "eval_negatives": (int, 100),
    },
}


def read_config(path) -> dict[str, str]:
    """Parse flat `key = value` lines; '#' comments and blanks are ignored."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve_options(command: str, args: argparse.Namespace) -> dict:
    """Layer defaults, config-file values, and explicit CLI flags, in that order."""
    schema = _SCHEMAS[command]
    resolved = {key: default for key, (_, default) in schema.items()}
    config_path = getattr(args, "config", None)
    if config_path:
        raw = read_config(config_path)
        for key, text in raw.items():
            if key in schema:
                conv = schema[key][0]
                try:
                    resolved[key] = conv(text)
                except ValueError:
                    raise ConfigError(f"bad value for {key!r}: {text!r}") from None
    for key in schema:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            resolved[key] = cli_value
    missing = [k for k, v in resolved.items() if v is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join(sorted(missing))}")
    return resolved


def write_meta(out_dir: Path, command: str, resolved: dict, extra: dict | None = None) -> None:
    """Echo the full resolved configuration; the file re-runs as --config."""
    entries = {"command": command, **resolved, **(extra or {})}
    lines = [f"{key} = {entries[key]}" for key in sorted(entries)]
    (out_dir / "meta.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad {what} list: {text!r}") from None


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad {what} list: {text!r}") from None


@dataclass
class Experiment:
    """A validated algorithm + hyperparameter bundle ready to train."""

    algorithm: str
    boosted: bool
    rounds: int
    train: TrainConfig
    measure: Measure
    eval_negatives: int
    patience: int | None
    val_fraction: float


def build_experiment(opts: dict) -> Experiment:
    algorithm = opts["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ConfigError(
            f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}"
        )
    objective, implied_sampler, boosted = ALGORITHMS[algorithm]
    sampler_opt = opts.get("sampler", "")
    if sampler_opt and sampler_opt != implied_sampler:
        raise ConfigError(
            f"--sampler {sampler_opt} conflicts with algorithm {algorithm}"
            f" (implies {implied_sampler})"
        )
    rounds = int(opts.get("rounds", 1)) if boosted else 1
    if boosted and rounds < 1:
        raise ConfigError("boosted algorithms need rounds >= 1")
    sampler = SamplerConfig(
        kind=implied_sampler,
        rho=opts["rho"],
        m=opts["m"],
        epsilon=opts["epsilon"],
        max_trials=opts["max_trials"] or None,
    )
    train_cfg = TrainConfig(
        eta=opts["eta"],
        gamma=opts["gamma"],
        max_iter=opts["iters"],
        k=opts["k"],
        sampler=sampler,
        seed=opts["seed"],
        objective=objective,
        log_every=opts.get("log_every", 0),
    )
    patience = opts.get("patience", 0) or None
    return Experiment(
        algorithm=algorithm,
        boosted=boosted,
        rounds=rounds,
        train=train_cfg,
        measure=Measure.parse(opts["metric"]),
        eval_negatives=opts["eval_negatives"],
        patience=patience,
        val_fraction=opts.get("val_fraction", 0.1),
    )


def _load_prepared(data_dir: str) -> tuple[InteractionDataset, InteractionDataset]:
    root = Path(data_dir)
    train_path = root / "train.tsv"
    test_path = root / "test.tsv"
    if not train_path.exists() or not test_path.exists():
        raise ConfigError(f"{data_dir} does not contain train.tsv and test.tsv")
    return load_split(train_path, test_path)


def train_experiment(
    exp: Experiment, train_ds: InteractionDataset
) -> tuple[EnsembleModel, list[RoundRecord]]:
    """Train one experiment on a training split, returning model and round log."""
    records: list[RoundRecord] = []
    if exp.boosted:
        base_ds, holdout = train_ds, None
        if exp.patience is not None:
            base_ds, holdout = split(
                train_ds,
                SplitSpec("holdout", exp.val_fraction, seed=exp.train.seed),
            )
        cfg = BoostConfig(
            rounds=exp.rounds,
            train=exp.train,
            measure=exp.measure,
            patience=exp.patience,
            eval_negatives=exp.eval_negatives,
        )
        model = run_adafm(base_ds, cfg, holdout=holdout, on_round=records.append)
        return model, records
    if exp.train.objective == "pointwise":
        params = train_pointwise_fm(train_ds, None, exp.train)
    else:
        params = train_component(train_ds, None, exp.train, exp.measure)
    model = EnsembleModel([(1.0, params)])
    enc = FeatureEncoder(train_ds.n_users, train_ds.n_items)
    result = evaluate_model(
        lambda u, items: score_items(params, enc, u, items),
        train_ds,
        exp.measure,
        n_negatives=exp.eval_negatives,
        seed=exp.train.seed,
    )
    records.append(
        RoundRecord(
            round=1,
            alpha=1.0,
            component_weighted_e=result.aggregate,
            ensemble_train_e=result.aggregate,
            ensemble_holdout_e=None,
            weights=np.full(train_ds.n_users, 1.0 / max(train_ds.n_users, 1)),
        )
    )
    return model, records


def _write_rounds(out: Path, records: list[RoundRecord]) -> None:
    lines = [ROUND_LOG_HEADER] + [r.csv_row() for r in records]
    (out / "rounds.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_prepare(args) -> int:
    opts = resolve_options("prepare", args)
    out = _out_dir(args)
    ds = load_dataset(opts["input"])
    if opts["binarize"]:
        ds = InteractionDataset(
            ds.user_tokens,
            ds.item_tokens,
            [ds.items_of(a) for a in range(ds.n_users)],
            [np.minimum(ds.grades_of(a), 1) for a in range(ds.n_users)],
        )
    if opts["min_interactions"] > 0:
        ds = filter_min_interactions(ds, opts["min_interactions"])
    spec = SplitSpec(
        method=opts["split"],
        fraction=opts["fraction"],
        seed=opts["seed"],
        min_user_interactions=opts["min_interactions"],
    )
    train_ds, test_ds = split(ds, spec)
    write_interactions(train_ds, out / "train.tsv")
    write_interactions(test_ds, out / "test.tsv")
    write_meta(
        out,
        "prepare",
        opts,
        extra={
            "n_users": ds.n_users,
            "n_items": ds.n_items,
            "entries": ds.n_interactions,
        },
    )
    print(
        f"prepared {ds.n_users} users, {ds.n_items} items,"
        f" {train_ds.n_interactions} train / {test_ds.n_interactions} test entries"
        f" -> {out}"
    )
    return 0


def cmd_train(args) -> int:
    opts = resolve_options("train", args)
    out = _out_dir(args)
    train_ds, _ = _load_prepared(opts["data"])
    exp = build_experiment(opts)
    model, records = train_experiment(exp, train_ds)
    save_model(model, out / "model.txt")
    _write_rounds(out, records)
    write_meta(out, "train", opts)
    print(
        f"trained {exp.algorithm}: {model.n_components} component(s),"
        f" d={model.d}, k={model.k} -> {out / 'model.txt'}"
    )
    return 0


def _model_scorer(model: EnsembleModel, enc: FeatureEncoder):
    merged = model.merged()
    return lambda u, items: score_items(merged, enc, u, items)


def cmd_evaluate(args) -> int:
    opts = resolve_options("evaluate", args)
    out = _out_dir(args)
    model = load_model(opts["model"])
    train_ds, test_ds = _load_prepared(opts["data"])
    enc = FeatureEncoder(test_ds.n_users, test_ds.n_items)
    if model.d != enc.dim:
        raise ConfigError(
            f"model dimension {model.d} does not match dataset dimension {enc.dim}"
        )
    measure = Measure.parse(opts["metric"])
    exclude = {
        a: np.union1d(train_ds.items_of(a), test_ds.items_of(a))
        for a in range(test_ds.n_users)
    }
    result = evaluate_model(
        _model_scorer(model, enc),
        test_ds,
        measure,
        exclude=exclude,
        n_negatives=opts["eval_negatives"],
        seed=opts["seed"],
    )
    report = format_report(result)
    (out / "report.txt").write_text(report + "\n", encoding="utf-8")
    if opts["per_user"]:
        rows = ["user,E"] + [
            f"{test_ds.user_tokens[a]},{e:.17g}"
            for a, e in sorted(result.per_user.values.items())
        ]
        (out / "per_user.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_meta(out, "evaluate", opts)
    print(report)
    return 0


def cmd_predict(args) -> int:
    opts = resolve_options("predict", args)
    out = _out_dir(args)
    model = load_model(opts["model"])
    train_ds, test_ds = _load_prepared(opts["data"])
    enc = FeatureEncoder(train_ds.n_users, train_ds.n_items)
    if model.d != enc.dim:
        raise ConfigError(
            f"model dimension {model.d} does not match dataset dimension {enc.dim}"
        )
    user_ids = {tok: a for a, tok in enumerate(train_ds.user_tokens)}
    if opts["user"] not in user_ids:
        raise ConfigError(f"unknown user {opts['user']!r}")
    user = user_ids[opts["user"]]
    if opts["sample_candidates"] > 0:
        gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(opts["seed"], spawn_key=(user,)))
        )
        take = min(opts["sample_candidates"], train_ds.n_items)
        items = np.sort(gen.choice(train_ds.n_items, size=take, replace=False))
    else:
        items = np.arange(train_ds.n_items)
    scores = _model_scorer(model, enc)(user, items)
    order = np.lexsort((items, -scores))
    top = order[: max(0, opts["n"])]
    lines = [f"{train_ds.item_tokens[int(items[j])]}\t{scores[j]:.17g}" for j in top]
    (out / "predictions.txt").write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    write_meta(out, "predict", opts)
    for line in lines:
        print(line)
    return 0


def cmd_sweep(args) -> int:
    opts = resolve_options("sweep", args)
    out = _out_dir(args)
    axis = opts["axis"]
    if axis not in ("ranks", "rounds"):
        raise ConfigError("axis must be 'ranks' or 'rounds'")
    values = _parse_int_list(opts["values"], "values")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    seeds = _parse_int_list(opts["seeds"], "seeds") if opts["seeds"] else [opts["seed"]]
    _, _, boosted = ALGORITHMS.get(opts["algorithm"], (None, None, None))
    if boosted is None:
        raise ConfigError(f"unknown algorithm {opts['algorithm']!r}")
    if axis == "rounds" and not boosted:
        raise ConfigError("a rounds sweep needs a boosted (AdaFM-*) algorithm")
    train_ds, test_ds = _load_prepared(opts["data"])
    enc = FeatureEncoder(train_ds.n_users, train_ds.n_items)
    exclude = {
        a: np.union1d(train_ds.items_of(a), test_ds.items_of(a))
        for a in range(test_ds.n_users)
    }
    rows = ["x,metric_value,algorithm,seed,status"]
    for value in values:
        for seed in seeds:
            cell = dict(opts)
            cell["seed"] = seed
            if axis == "ranks":
                cell["k"] = value
            else:
                cell["rounds"] = value
            try:
                exp = build_experiment(cell)
                x = exp.train.k * exp.rounds if exp.boosted else exp.train.k
                model, _ = train_experiment(exp, train_ds)
                result = evaluate_model(
                    _model_scorer(model, enc),
                    test_ds,
                    exp.measure,
                    exclude=exclude,
                    n_negatives=exp.eval_negatives,
                    seed=seed,
                )
                rows.append(
                    f"{x},{result.aggregate:.17g},{opts['algorithm']},{seed},ok"
                )
            except (ValueError, RuntimeError) as exc:
                x = value if axis == "ranks" else opts["k"] * value
                rows.append(
                    f"{x},,{opts['algorithm']},{seed},error:{type(exc).__name__}"
                )
                logger.warning("sweep cell value=%s seed=%s failed: %s", value, seed, exc)
    (out / "sweep.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_meta(out, "sweep", opts)
    print(f"swept {len(values)} value(s) x {len(seeds)} seed(s) -> {out / 'sweep.csv'}")
    return 0


def _cv_folds(
    ds: InteractionDataset, folds: int, seed: int
) -> list[tuple[InteractionDataset, InteractionDataset]]:
    """Per-user round-robin fold assignment after a seeded shuffle."""
    from .core import RngHandle

    assignments = []
    for a in range(ds.n_users):
        n_a = ds.items_of(a).size
        perm = RngHandle(seed).derive(a).gen.permutation(n_a)
        assignments.append(perm % folds)
    out = []
    for f in range(folds):
        tr_items, tr_grades, va_items, va_grades = [], [], [], []
        for a in range(ds.n_users):
            items, grades = ds.items_of(a), ds.grades_of(a)
            mask = assignments[a] == f
            tr_items.append(items[~mask])
            tr_grades.append(grades[~mask])
            va_items.append(items[mask])
            va_grades.append(grades[mask])
        out.append(
            (
                InteractionDataset(ds.user_tokens, ds.item_tokens, tr_items, tr_grades),
                InteractionDataset(ds.user_tokens, ds.item_tokens, va_items, va_grades),
            )
        )
    return out


def cmd_cv_eta(args) -> int:
    opts = resolve_options("cv-eta", args)
    out = _out_dir(args)
    grid = _parse_float_list(opts["grid"], "grid")
    if not grid:
        raise ConfigError("cv-eta needs a non-empty grid")
    if opts["folds"] < 2:
        raise ConfigError("cv-eta needs folds >= 2")
    train_ds, _ = _load_prepared(opts["data"])
    measure = Measure.parse(opts["metric"])
    enc = FeatureEncoder(train_ds.n_users, train_ds.n_items)
    folds = _cv_folds(train_ds, opts["folds"], opts["seed"])
    rows = ["eta,mean_value"]
    best_eta, best_value = None, -np.inf
    for eta in grid:
        fold_values = []
        for f, (cv_train, cv_val) in enumerate(folds):
            cfg = TrainConfig(
                eta=eta,
                gamma=opts["gamma"],
                max_iter=opts["iters"],
                k=opts["k"],
                seed=opts["seed"] + f,
                objective="pointwise",
            )
            params = train_pointwise_fm(cv_train, None, cfg)
            exclude = {
                a: np.union1d(cv_train.items_of(a), cv_val.items_of(a))
                for a in range(cv_val.n_users)
            }
            result = evaluate_model(
                lambda u, items: score_items(params, enc, u, items),
                cv_val,
                measure,
                exclude=exclude,
                n_negatives=opts["eval_negatives"],
                seed=opts["seed"],
            )
            if np.isfinite(result.aggregate):
                fold_values.append(result.aggregate)
        mean_value = float(np.mean(fold_values)) if fold_values else float("nan")
        rows.append(f"{eta:.17g},{mean_value:.17g}")
        if np.isfinite(mean_value) and mean_value > best_value:
            best_eta, best_value = eta, mean_value
    if best_eta is None:
        raise BoostingError("cross-validation produced no finite fold value")
    (out / "cv.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_meta(out, "cv-eta", opts, extra={"best_eta": best_eta})
    print(f"best_eta={best_eta:.17g} (mean {measure.label} {best_value:.17g})")
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key = value config file; flags override it")
    sub.add_argument("--out", required=True, help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adafm",
        description=(
            "Factorization machines for implicit-feedback ranking, with"
            " uniform/popularity/score/rank-aware negative samplers and an"
            " adaptive-boosting ensemble mode."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("prepare", help="ingest a TSV and write a train/test split")
    p.add_argument("--input", help="raw interaction file (user\\titem\\tgrade)")
    p.add_argument("--min-interactions", dest="min_interactions", type=int)
    p.add_argument("--split", choices=("holdout", "loo"))
    p.add_argument("--fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--binarize", action="store_const", const=True)
    _add_common(p)
    p.set_defaults(func=cmd_prepare)

    p = subs.add_parser("train", help="train a model on a prepared directory")
    p.add_argument("--data", help="directory produced by prepare")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS))
    p.add_argument("--k", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--sampler", choices=("uniform", "static", "dynamic", "rank-aware"))
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-trials", dest="max_trials", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--metric")
    p.add_argument("--seed", type=int)
    p.add_argument("--eval-negatives", dest="eval_negatives", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--val-fraction", dest="val_fraction", type=float)
    p.add_argument("--log-every", dest="log_every", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("evaluate", help="report a metric for a model on the test split")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--metric")
    p.add_argument("--seed", type=int)
    p.add_argument("--eval-negatives", dest="eval_negatives", type=int)
    p.add_argument("--per-user", dest="per_user", action="store_const", const=True)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("predict", help="top-n items for one user")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--user")
    p.add_argument("--n", type=int)
    p.add_argument("--sample-candidates", dest="sample_candidates", type=int)
    p.add_argument("--seed", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = subs.add_parser("sweep", help="train/evaluate across ranks or rounds")
    p.add_argument("--data")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS))
    p.add_argument("--axis", choices=("ranks", "rounds"))
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--seeds", help="comma-separated seeds")
    p.add_argument("--k", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--sampler", choices=("uniform", "static", "dynamic", "rank-aware"))
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-trials", dest="max_trials", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--metric")
    p.add_argument("--seed", type=int)
    p.add_argument("--eval-negatives", dest="eval_negatives", type=int)
    p.add_argument("--log-every", dest="log_every", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("cv-eta", help="pick a learning rate by k-fold cross-validation")
    p.add_argument("--data")
    p.add_argument("--grid", help="comma-separated learning rates")
    p.add_argument("--folds", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--metric")
    p.add_argument("--seed", type=int)
    p.add_argument("--eval-negatives", dest="eval_negatives", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_cv_eta)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TrainingDivergedError, BoostingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, DataFormatError, ModelFormatError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
