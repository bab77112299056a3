"""Command-line front end: ``gen``, ``train``, ``retrieve``, ``eval`` and ``check``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, write_config
from .encoder import EncoderInputError, embed, load_checkpoint, save_checkpoint
from .numeric.autodiff import NonFiniteError
from .numeric.container import ContainerError
from .retrieval import (
    RetrievalError,
    build_index,
    cloud_seed,
    evaluate_complements,
    label_agreement_curve,
    label_prior,
    retrieve_complements,
    retrieve_interchangeable,
    write_curve_csv,
    write_metrics_csv,
    write_summary_json,
)
from .shapes import (
    ContactGraphError,
    DatasetError,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
)
from .shapes.mesh import sample_point_cloud
from .training import TrainingError, limit_threads, train

log = logging.getLogger("dualfuzzy")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
MODEL_NAME = "model.ckpt"
LOG_NAME = "metrics.csv"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class NumericFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--force", action="store_true", help="allow a non-empty output directory")
    p.add_argument("--threads", type=int, help="BLAS threads; 1 is bit-reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dualfuzzy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic component dataset")
    _common(p)

    p = sub.add_parser("train", help="train both encoders on a dataset")
    _common(p)
    p.add_argument("--resume", help="checkpoint to continue from")

    p = sub.add_parser("retrieve", help="rank candidates for one query")
    _common(p)
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--query", help="object id and components, e.g. table_0003/legs_left+top")
    q.add_argument("--cloud", help=".npy file with a centered (n, 3) point cloud")
    p.add_argument("--mode", choices=("complement", "interchangeable"), default="complement")
    p.add_argument("--k", type=int, help="number of results (default from config)")

    p = sub.add_parser("eval", help="retrieval metrics and label-agreement curve on the test split")
    _common(p)

    p = sub.add_parser("check", help="bound sweeps and gradient checks")
    _common(p)
    return parser


def resolve_config(args) -> RunConfig:
    overrides = list(args.set)
    for key in ("seed", "out", "threads"):
        v = getattr(args, key, None)
        if v is not None:
            overrides.append(f"{key}={v}")
    return load_config(args.config, overrides).validate()


def prepare_out(config: RunConfig, force: bool, required: bool = True) -> Path | None:
    if not config.out:
        if required:
            raise UsageError("an output directory is required (--out or out = ...)")
        return None
    out = Path(config.out)
    if out.exists() and any(out.iterdir()) and not force:
        raise UsageError(f"output directory {out} is not empty (use --force)")
    out.mkdir(parents=True, exist_ok=True)
    write_config(config, out)
    return out


def _dataset(config: RunConfig):
    if not config.dataset:
        raise UsageError("no dataset given (set dataset = <directory>)")
    return load_dataset(config.dataset)


def _model(config: RunConfig):
    if not config.checkpoint:
        raise UsageError("no checkpoint given (set checkpoint = <file>)")
    if not Path(config.checkpoint).is_file():
        raise DataError(f"checkpoint {config.checkpoint} not found")
    try:
        params, _, _ = load_checkpoint(config.checkpoint)
    except (ValueError, KeyError) as err:
        raise DataError(str(err)) from None
    return params


# -- commands ---------------------------------------------------------------


def cmd_gen(config: RunConfig, args) -> int:
    out = prepare_out(config, args.force)
    dataset = generate_synthetic_dataset(config.generator(), config.seed)
    save_dataset(dataset, out)
    print(f"{len(dataset.objects)} objects: {len(dataset.train)} train, {len(dataset.test)} test "
          f"-> {out}")
    return EXIT_OK


def cmd_train(config: RunConfig, args) -> int:
    dataset = _dataset(config)
    init = adam = None
    start_epoch = 0
    if args.resume:
        if not Path(args.resume).is_file():
            raise DataError(f"checkpoint {args.resume} not found")
        try:
            init, adam, meta = load_checkpoint(args.resume, config.embed())
        except (ValueError, KeyError) as err:
            raise DataError(str(err)) from None
        start_epoch = int(meta.get("epoch", 0))
    out = prepare_out(config, args.force or bool(args.resume))
    if config.checkpoint_every:
        (out / "checkpoints").mkdir(exist_ok=True)
    result = train(dataset.train, config.loss(), config.embed(), init=init, adam=adam,
                   start_epoch=start_epoch, validation_objects=dataset.test,
                   log_path=out / LOG_NAME,
                   checkpoint_dir=out / "checkpoints" if config.checkpoint_every else None,
                   threads=config.threads)
    last = start_epoch + config.epochs
    save_checkpoint(out / MODEL_NAME, result.params, result.adam, {"epoch": last})
    if result.log:
        first, final = result.log[0]["mean_loss"], result.log[-1]["mean_loss"]
        print(f"epochs {start_epoch + 1}..{last}: loss {first:.6f} -> {final:.6f}; "
              f"steps {result.adam.step}")
    print(f"checkpoint -> {out / MODEL_NAME}")
    return EXIT_OK


def _parse_query(spec: str):
    if "/" not in spec:
        raise UsageError(f"query must look like OBJECT/COMP+COMP, got {spec!r}")
    oid, comps = spec.split("/", 1)
    ids = tuple(sorted(c for c in comps.split("+") if c))
    if not ids:
        raise UsageError(f"query {spec!r} names no components")
    return oid, ids


def cmd_retrieve(config: RunConfig, args) -> int:
    params = _model(config)
    dataset = _dataset(config)
    if not dataset.test:
        raise DataError("the test split is empty; nothing to retrieve from")
    out = prepare_out(config, args.force, required=False)
    k = args.k if args.k is not None else config.k
    index = build_index(params, dataset.test, max_count=config.cap, rng_seed=config.seed)
    if args.cloud:
        try:
            cloud = np.load(args.cloud)
        except (OSError, ValueError) as err:
            raise DataError(f"cannot read cloud {args.cloud}: {err}") from None
        query = embed(params, cloud)
        qname = str(args.cloud)
    else:
        oid, ids = _parse_query(args.query)
        try:
            obj = dataset.get(oid)
        except KeyError as err:
            raise DataError(str(err.args[0])) from None
        missing = [c for c in ids if c not in obj.graph.nodes]
        if missing:
            raise DataError(f"object {oid} has no components {missing}")
        if not obj.graph.is_connected(ids):
            raise DataError(f"components {list(ids)} of {oid} are not a connected subgraph")
        qname = f"{oid}/{'+'.join(ids)}"
        if qname in index._position:
            query = index.embedding(qname)
        else:
            cloud = sample_point_cloud(obj.select(ids), params.config.points,
                                       cloud_seed(config.seed, qname))
            query = embed(params, cloud)
    fn = retrieve_complements if args.mode == "complement" else retrieve_interchangeable
    results = fn(index, query, k)
    print(f"query {qname} ({args.mode}, {len(index)} candidates)")
    print(f"{'rank':>4}  {'energy':>12}  id")
    for rank, (cid, energy) in enumerate(results, start=1):
        print(f"{rank:>4}  {energy:12.6g}  {cid}")
    if out is not None:
        with open(out / "retrieval.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "id", "energy"])
            for rank, (cid, energy) in enumerate(results, start=1):
                w.writerow([rank, cid, repr(energy)])
    return EXIT_OK


def cmd_eval(config: RunConfig, args) -> int:
    params = _model(config)
    dataset = _dataset(config)
    if not dataset.test:
        raise DataError("the test split is empty")
    out = prepare_out(config, args.force)
    with limit_threads(config.threads):
        metrics = evaluate_complements(params, dataset.test, max_count=config.cap,
                                       rng_seed=config.seed)
        parts = build_index(params, dataset.test, single_parts=True, rng_seed=config.seed)
        curve = label_agreement_curve(parts, k_max=config.label_k or None)
    category = dataset.config.get("category", config.category)
    write_metrics_csv(out / "metrics.csv", category, metrics)
    write_curve_csv(out / "curve.csv", curve)
    write_summary_json(out / "summary.json", category, metrics,
                       {"label_curve": {"k1": float(curve[0]), "prior": label_prior(parts),
                                        "k_max": len(curve)}})
    for key in ("recall_at_1", "recall_at_10", "median_percentile_rank", "mean_percentile_rank"):
        print(f"{key:24s} {metrics[key]:8.2f}")
    print(f"{'random_recall_at_10':24s} {metrics['random_recall_at_10']:8.2f}")
    print(f"label agreement k=1 {curve[0]:.3f} (prior {label_prior(parts):.3f})")
    return EXIT_OK


def cmd_check(config: RunConfig, args) -> int:
    from .checks import bound_sweep, gradient_suite

    out = prepare_out(config, args.force, required=False)
    ok = True
    rows = bound_sweep(config.check_triples, config.dims(), config.seed)
    for r in rows:
        bad = r["prop1"] + r["prop2"] + r["corollary3"]
        ok &= bad == 0
        print(f"bounds D={r['dim']:<4d} triples={r['triples']} prop1={r['prop1']} "
              f"prop2={r['prop2']} corollary3={r['corollary3']} ({r['seconds']:.2f}s) "
              f"{'ok' if bad == 0 else 'FAIL'}")
    cases = gradient_suite(config.check_draws, config.seed)
    for target in sorted({c.target for c in cases}):
        sub = [c for c in cases if c.target == target]
        worst = max(c.report.max_rel_error for c in sub)
        kinks = sum(c.report.skipped_kinks for c in sub)
        passed = all(c.report.passed for c in sub)
        ok &= passed
        print(f"gradients {target:16s} draws={len(sub)} max_rel_err={worst:.3e} "
              f"kinks_skipped={kinks} {'ok' if passed else 'FAIL'}")
    selftest = gradient_suite(1, config.seed + 1, targets=("complementarity",), corrupt=1.01)
    flagged = not selftest[0].report.passed
    ok &= flagged
    print(f"corrupted-gradient self-test {'flagged' if flagged else 'NOT FLAGGED'}")
    if out is not None:
        with open(out / "check_bounds.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dim", "triples", "prop1_failures", "prop2_failures",
                        "corollary3_failures"])
            for r in rows:
                w.writerow([r["dim"], r["triples"], r["prop1"], r["prop2"], r["corollary3"]])
        with open(out / "check_gradients.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["draw", "target", "dim", "points", "max_rel_error", "checked",
                        "kinks_skipped", "passed"])
            for c in cases:
                checked = sum(p.checked for p in c.report.params.values())
                w.writerow([c.draw, c.target, c.dim, c.points, repr(c.report.max_rel_error),
                            checked, c.report.skipped_kinks, int(c.report.passed)])
        with open(out / "check_summary.json", "w", encoding="utf-8") as fh:
            json.dump({"passed": bool(ok), "selftest_flagged": bool(flagged)}, fh, indent=2)
            fh.write("\n")
    if not ok:
        raise NumericFailure("check failed")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "retrieve": cmd_retrieve, "eval": cmd_eval,
            "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as err:  # --help
        return int(err.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](config, args)
    except (UsageError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DatasetError, ContactGraphError, RetrievalError, EncoderInputError,
            ContainerError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (NumericFailure, TrainingError, NonFiniteError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
