"""``droughtcast`` command line.

Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.
Settings resolve as defaults < ``--config`` file < ``DROUGHTCAST_*``
environment variables < flags. Logs go to stderr; data goes to files or
stdout.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import __version__, pipeline
from .errors import DroughtcastError, ParameterError
from .features import LABELS

logger = logging.getLogger("droughtcast")


def _common(parser):
    parser.add_argument("--config", help="INI file with a [droughtcast] section")
    parser.add_argument("--seed", type=int, help="master seed (default 20)")
    parser.add_argument("--n-jobs", type=int, dest="n_jobs", help="parallel workers for tree training")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _model_flags(parser):
    parser.add_argument("--test-fraction", type=float, dest="test_fraction", help="held-out share (default 0.3)")
    parser.add_argument(
        "--n-estimators", type=int, nargs="+", dest="n_estimators", help="trees per forest variant (default 100 200 300)"
    )
    parser.add_argument("--max-features", dest="max_features", help="sqrt | log2 | all | <int>")
    parser.add_argument("--min-samples-leaf", type=int, dest="min_samples_leaf")
    parser.add_argument("--max-depth", type=int, dest="max_depth")
    parser.add_argument(
        "--fit-on-train",
        action="store_true",
        default=None,
        dest="fit_scaler_on_train",
        help="fit min-max bounds on training rows only (default: all rows, before splitting)",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="droughtcast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="merge splits, filter a state, aggregate 90-day windows")
    _common(p)
    p.add_argument("--train")
    p.add_argument("--validation")
    p.add_argument("--test")
    p.add_argument("--fips", help="county registry CSV (FIPS, Name, State)")
    p.add_argument("--state", help="2-letter state code (default CA)")
    p.add_argument("--window-days", type=int, dest="window_days")
    p.add_argument("--aggregator", choices=["mean", "min", "max", "sum"])
    p.add_argument("--lenient", action="store_false", default=None, dest="strict",
                   help="drop rows with missing feature values instead of failing")
    p.add_argument("--out", required=True, help="prepared-sample CSV to write")

    p = sub.add_parser("train", help="train forest variants and their soft-voting ensemble")
    _common(p)
    _model_flags(p)
    p.add_argument("--data", required=True, help="prepared-sample CSV")
    p.add_argument("--task", required=True, choices=pipeline.TASKS)
    p.add_argument("--present-only", action="store_true", default=None, dest="present_only",
                   help="macro averages over classes present in the test rows only")
    p.add_argument("--out-dir", dest="out_dir")

    p = sub.add_parser("evaluate", help="reprint the held-out reports of a trained model")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="also write the text report here")

    p = sub.add_parser("predict", help="predict classes for windows or raw daily rows")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="prepared-sample CSV or raw daily CSV")
    p.add_argument("--out", help="predictions CSV (default: stdout)")

    p = sub.add_parser("importance", help="feature importance in the three feature-set scenarios")
    _common(p)
    _model_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--threshold", type=float, dest="collinearity_threshold")
    p.add_argument("--out", dest="out_dir", help="output directory")

    p = sub.add_parser("trends", help="per-county label change between two periods")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--soil", help="soil CSV with county coordinates (GeoJSON output)")
    p.add_argument("--fips", help="county registry CSV, for county names")
    p.add_argument("--scenario", type=int, choices=sorted(pipeline.PERIOD_SCENARIOS), default=1)
    p.add_argument("--label", required=True, choices=list(LABELS))
    p.add_argument("--out", help=".csv for a table, anything else for GeoJSON")
    p.add_argument("--yearly-out", dest="yearly_out", help="CSV of yearly label counts")
    return parser


_CONFIG_KEYS = {f for f in pipeline.RunConfig.__dataclass_fields__}


def _config_from_args(args):
    overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS and v is not None}
    cfg = pipeline.load_config(args.config, overrides)
    for key, value in cfg.as_dict().items():
        logger.info("config %s = %r", key, value)
    return cfg


def _cmd_prepare(args, cfg):
    missing = [k for k in ("train", "validation", "test", "fips") if getattr(cfg, k) is None]
    if missing:
        raise ParameterError("missing required input(s): " + ", ".join(f"--{k}" for k in missing))
    samples = pipeline.prepare(cfg, args.out)
    print(
        f"{len(samples)} rows, {len(pipeline.FEATURES) + 1} feature+score columns "
        f"({samples['fips'].nunique()} counties) -> {args.out}"
    )


def _cmd_train(args, cfg):
    reports = pipeline.train(cfg, args.task, args.data, cfg.out_dir)
    sys.stdout.write(pipeline.render_reports(reports))
    print(f"model: {pipeline.model_path(cfg.out_dir, args.task)}")


def _cmd_evaluate(args, cfg):
    text = pipeline.render_reports(pipeline.evaluate(args.model, args.data))
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")


def _cmd_predict(args, cfg):
    out = pipeline.predict(args.model, args.input, args.out)
    if args.out is None:
        out.to_csv(sys.stdout, index=False, lineterminator="\n")
    else:
        print(f"{len(out)} predictions -> {args.out}")


def _cmd_importance(args, cfg):
    reports = pipeline.importance(cfg, args.data, cfg.out_dir)
    for rep in reports:
        print(f"{rep.scenario}: {len(rep.features)} features, accuracy {rep.accuracy:.5f}, top3 {' '.join(rep.top(3))}")


def _cmd_trends(args, cfg):
    summary, yearly = pipeline.trends(cfg, args.data, args.scenario, args.label, args.out)
    if args.yearly_out:
        yearly.to_csv(args.yearly_out, lineterminator="\n")
    a, b = summary.period_a, summary.period_b
    print(f"label {summary.label} {a[0]}-{a[1]} vs {b[0]}-{b[1]}: {summary.line()}")


COMMANDS = {
    "prepare": _cmd_prepare,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "importance": _cmd_importance,
    "trends": _cmd_trends,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    logging.captureWarnings(True)
    warnings.simplefilter("default")
    try:
        cfg = _config_from_args(args)
        COMMANDS[args.command](args, cfg)
    except ParameterError as exc:
        parser.print_usage(sys.stderr)
        print(f"droughtcast {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DroughtcastError, OSError, ValueError) as exc:
        print(f"droughtcast {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
