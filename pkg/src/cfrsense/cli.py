"""Command-line entry point: simulate, featurize, evaluate, report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

import argparse
import csv
import datetime as _dt
import logging
import os
import sys
from pathlib import Path

from . import __version__, classifiers
from . import io as dio
from .channel import simulate_campaign
from .errors import (CfrSenseError, ConfigError, DataError, HashMismatchError, ModelError,
                     ParseError, SchemaError)
from .estimation import cfr_stream
from .labels import ScenarioKind
from .metrics import baseline_table, cross_validate
from .ofdm import OfdmConfig
from .pipeline import examples_from_blocks
from .preprocess import FilterSpec

log = logging.getLogger("cfrsense")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
SEED_ENV = "CFRSENSE_SEED"
MANIFEST_NAME = "manifest.json"
NUM = ".9g"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise UsageError(f"{SEED_ENV} must be a 64-bit unsigned integer")
    return seed


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc))
    return when.replace(microsecond=0).isoformat()


def _manifest(**kw):
    return dio.RunManifest(tool_version=__version__, created=_timestamp(),
                           **{k: dio.json_safe(v) for k, v in kw.items()})


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _prepare_dir(path):
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create {path}: {exc.strerror}") from None
    if not os.access(path, os.W_OK):
        raise DataError(f"{path} is not writable")


def build_parser():
    p = _Parser(prog="cfrsense", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a campaign and write per-session CFR CSVs")
    s.add_argument("--scenario", choices=[k.value for k in ScenarioKind], default="chest")
    s.add_argument("--subjects", type=int, default=5)
    s.add_argument("--sessions-per-class", type=int, default=5)
    s.add_argument("--duration-s", type=float, default=30.0)
    s.add_argument("--separation", type=float, default=0.2)
    s.add_argument("--snr-db", type=float, default=15.0)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", type=Path, required=True)

    f = sub.add_parser("featurize", help="filter, window and average CFR magnitudes")
    f.add_argument("--in", dest="indir", type=Path, required=True)
    f.add_argument("--out", type=Path, required=True)
    f.add_argument("--window-frames", type=int, default=125)
    f.add_argument("--lowpass-hz", type=float, default=FilterSpec.lowpass_cutoff_hz)
    f.add_argument("--lowpass-order", type=int, default=FilterSpec.lowpass_order)
    f.add_argument("--savgol-window", type=int, default=FilterSpec.savgol_window)
    f.add_argument("--savgol-order", type=int, default=FilterSpec.savgol_polyorder)
    f.add_argument("--z-threshold", type=float, default=6.0)

    e = sub.add_parser("evaluate", help="cross-validate catalog variants on an examples CSV")
    e.add_argument("--examples", type=Path, required=True)
    e.add_argument("--model", default="all", help="a catalog variant or 'all'")
    e.add_argument("--folds", type=int, default=5)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--report", type=Path, required=True, help="output path prefix")

    r = sub.add_parser("report", help="verify a run directory and summarize its results")
    r.add_argument("--run", type=Path, required=True)
    r.add_argument("--format", choices=["csv"], default="csv")
    return p


def cmd_simulate(args):
    seed = _default_seed() if args.seed is None else args.seed
    cfg = OfdmConfig(master_seed=seed)
    sessions = simulate_campaign(cfg, ScenarioKind(args.scenario), args.subjects,
                                 args.sessions_per_class, args.duration_s, args.separation,
                                 args.snr_db, seed)
    out = args.out
    _prepare_dir(out)
    manifest = _manifest(ofdm=sessions.cfg.to_dict(),
                         scenarios=[sc.to_dict() for sc in sessions.scenarios],
                         seeds={"master": seed},
                         extra={"command": "simulate", "duration_s": args.duration_s})
    for session in sessions:
        sc = session.scenario
        path = out / f"cfr_subject{sc.subject_id:02d}_session{sc.session_id:02d}.csv"
        dio.write_cfr_csv(cfr_stream(session, sessions.cfg), path)
        manifest.add_file(path, out)
        log.info("wrote %s (%d frames)", path.name, len(session))
    dio.write_manifest(manifest, out / MANIFEST_NAME)
    print(f"simulate: {len(sessions)} sessions -> {out}")
    return EXIT_OK


def cmd_featurize(args):
    spec = FilterSpec(args.lowpass_order, args.lowpass_hz, args.savgol_window,
                      args.savgol_order)
    indir = args.indir
    if not indir.is_dir():
        raise DataError(f"{indir} is not a directory")
    cfg = OfdmConfig()
    upstream = indir / MANIFEST_NAME
    if upstream.is_file():
        m = dio.read_manifest(upstream)
        m.verify(indir)
        if m.ofdm:
            cfg = OfdmConfig(**{k: v for k, v in m.ofdm.items()
                                if k in OfdmConfig.__dataclass_fields__})
    spec.validate(cfg.frames_per_second)
    files = sorted(indir.glob("*.csv"))
    if not files:
        raise DataError(f"no CFR CSV files in {indir}")
    blocks = []
    for path in files:
        blocks.extend(dio.blocks_from_snapshots(dio.read_cfr_csv(path)))
    dataset, rejected = examples_from_blocks(blocks, args.window_frames, spec,
                                             cfg.frames_per_second, args.z_threshold)
    if len(dataset) == 0:
        log.warning("window of %d frames is longer than every session; no examples written",
                    args.window_frames)
    _prepare_dir(args.out.parent if str(args.out.parent) else Path("."))
    dio.write_examples_csv(dataset, args.out)
    manifest = _manifest(ofdm=cfg.to_dict(), filter=spec.to_dict(),
                         extra={"command": "featurize", "input": str(indir),
                                "window_frames": args.window_frames,
                                "z_threshold": args.z_threshold,
                                "rejected_snapshots": rejected})
    manifest.add_file(args.out, args.out.parent)
    dio.write_manifest(manifest, args.out.with_name(args.out.stem + "_manifest.json"))
    print(f"featurize: {len(dataset)} examples, {rejected} snapshots rejected -> {args.out}")
    return EXIT_OK


def _variants(name):
    if name == "all":
        return list(classifiers.CATALOG)
    if name not in classifiers.CATALOG:
        raise UsageError(f"unknown model variant {name!r}; catalog: "
                         + ", ".join(classifiers.CATALOG))
    return [name]


def cmd_evaluate(args):
    variants = _variants(args.model)
    seed = _default_seed() if args.seed is None else args.seed
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    dataset = dio.read_examples_csv(args.examples)
    if len(dataset) == 0:
        raise DataError(f"{args.examples} holds no examples")
    prefix = args.report
    _prepare_dir(prefix.parent if str(prefix.parent) else Path("."))
    reports = []
    for v in variants:
        rep = cross_validate(dataset, classifiers.ModelSpec.from_variant(v, seed=seed),
                             args.folds, seed)
        log.info("%s: pooled %.2f%%", v, rep.pooled_accuracy)
        reports.append(rep)

    acc_path = Path(f"{prefix}_accuracy.csv")
    conf_path = Path(f"{prefix}_confusion.csv")
    cmp_path = Path(f"{prefix}_comparison.csv")
    _write_csv(acc_path,
               ["variant", "mean_accuracy", "pooled_accuracy"]
               + [f"fold_{i + 1}" for i in range(args.folds)],
               [[r.variant, format(r.mean_accuracy, NUM), format(r.pooled_accuracy, NUM)]
                + [format(a, NUM) for a in r.fold_accuracies] for r in reports])
    _write_csv(conf_path, ["variant", "tp", "tn", "fp", "fn"],
               [[r.variant, r.pooled.tp, r.pooled.tn, r.pooled.fp, r.pooled.fn]
                for r in reports])
    rows = [[b["method"], b["kind"], format(b["accuracy"], NUM), "published"]
            for b in baseline_table()]
    rows += [[r.variant, "synthetic", format(r.pooled_accuracy, NUM), "pooled cross-validation"]
             for r in reports]
    _write_csv(cmp_path, ["method", "kind", "accuracy", "source"], rows)

    root = acc_path.parent
    manifest = _manifest(models=[classifiers.ModelSpec.from_variant(v, seed=seed).to_dict()
                                 for v in variants],
                         seeds={"master": seed},
                         extra={"command": "evaluate", "examples": str(args.examples),
                                "examples_sha256": dio.file_sha256(args.examples),
                                "folds": args.folds,
                                "dataset_fingerprint": reports[0].dataset_fingerprint})
    for path in (acc_path, conf_path, cmp_path):
        manifest.add_file(path, root)
    dio.write_manifest(manifest, Path(f"{prefix}_manifest.json"))
    for r in reports:
        print(f"{r.variant:32s} {r.pooled_accuracy:7.2f}%")
    return EXIT_OK


def cmd_report(args):
    run = args.run
    if not run.is_dir():
        raise DataError(f"{run} is not a directory")
    manifests = sorted(p for p in run.rglob("*manifest.json"))
    if not manifests:
        raise DataError(f"no manifests under {run}")
    rows = []
    for mpath in manifests:
        m = dio.read_manifest(mpath)
        m.verify(mpath.parent)
        print(f"verified {mpath.relative_to(run)} ({len(m.files)} files)")
        if m.extra.get("command") != "evaluate":
            continue
        acc = {}
        conf = {}
        for rel in m.files:
            path = mpath.parent / rel
            if rel.endswith("_accuracy.csv"):
                with open(path, encoding="utf-8", newline="") as fh:
                    acc = {r["variant"]: r for r in csv.DictReader(fh)}
            elif rel.endswith("_confusion.csv"):
                with open(path, encoding="utf-8", newline="") as fh:
                    conf = {r["variant"]: r for r in csv.DictReader(fh)}
        for v, a in acc.items():
            c = conf.get(v, {})
            rows.append([str(mpath.relative_to(run)), v, a["mean_accuracy"],
                         a["pooled_accuracy"], c.get("tp", ""), c.get("tn", ""),
                         c.get("fp", ""), c.get("fn", "")])
    out = run / "summary.csv"
    _write_csv(out, ["manifest", "variant", "mean_accuracy", "pooled_accuracy", "tp", "tn",
                     "fp", "fn"], rows)
    print(f"report: {len(rows)} variant rows -> {out}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "featurize": cmd_featurize, "evaluate": cmd_evaluate,
            "report": cmd_report}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DataError, SchemaError, HashMismatchError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CfrSenseError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last-resort exit code contract
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
