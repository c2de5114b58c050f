"""Command-line entry point: ``deeploop <subcommand> [flags]``.

Exit status: 0 success, 1 usage error, 2 data error (or a failed check).
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import DataError, DeepLoopError

log = logging.getLogger("deeploop")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _Fmt(argparse.ArgumentDefaultsHelpFormatter):
    pass


def _add(sub, name, help_):
    return sub.add_parser(name, help=help_, description=help_, formatter_class=_Fmt)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deeploop", description="Unsupervised deep loop closure toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stdout")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    g = _add(sub, "gen-data", "Generate warped-image / HOG training pairs.")
    g.add_argument("--images", required=True, help="directory of .pgm source images")
    g.add_argument("--out", required=True, help="output dataset file (CLCD)")
    g.add_argument("--count", type=int, default=None, help="records to write (default: one per image)")
    g.add_argument("--seed", type=int, default=0, help="random seed (chosen)")
    g.add_argument("--hog-cell", type=int, default=8, help="HOG cell size in pixels (chosen)")
    g.add_argument("--hog-block", type=int, default=2, help="HOG cells per block side (chosen)")
    g.add_argument("--hog-stride", type=int, default=16, help="HOG block stride in pixels (chosen)")
    g.add_argument("--hog-bins", type=int, default=9, help="HOG orientation bins (chosen)")
    g.add_argument("--workers", type=int, default=1, help="generation threads (chosen)")

    t = _add(sub, "train", "Train the autoencoder on a CLCD dataset.")
    t.add_argument("--data", required=True, help="dataset file (CLCD)")
    t.add_argument("--model-out", required=True, help="output model file (CLCM)")
    t.add_argument("--epochs", type=int, default=42, help="training epochs")
    t.add_argument("--lr", type=float, default=9e-4, help="fixed learning rate")
    t.add_argument("--momentum", type=float, default=0.9, help="SGD momentum")
    t.add_argument("--wd", type=float, default=5e-4, help="weight decay")
    t.add_argument("--batch", type=int, default=32, help="batch size (chosen)")
    t.add_argument("--seed", type=int, default=0, help="initialization / shuffling seed (chosen)")
    t.add_argument("--loss-log", default=None, help="loss CSV path (default: MODEL_OUT.loss.csv)")

    e = _add(sub, "extract", "Describe every image of a directory into a database.")
    e.add_argument("--model", required=True, help="model file (CLCM)")
    e.add_argument("--images", required=True, help="directory of .pgm images (sorted name order = ids 0..n-1)")
    e.add_argument("--db-out", required=True, help="output database file (CLCB)")

    q = _add(sub, "query", "Find the nearest database entries for one image.")
    q.add_argument("--db", required=True, help="database file (CLCB)")
    q.add_argument("--model", required=True, help="model file (CLCM)")
    q.add_argument("--image", required=True, help="query .pgm image")
    q.add_argument("--k", type=int, default=5, help="number of results (chosen)")

    v = _add(sub, "evaluate", "Precision-recall evaluation of top-1 matches.")
    v.add_argument("--db", required=True, help="database file (CLCB)")
    v.add_argument("--model", required=True, help="model file (CLCM)")
    v.add_argument("--queries", required=True, help="directory of query .pgm images (sorted)")
    v.add_argument("--gt", default=None, help="ground-truth CSV query_idx,db_idx (default: identity pairing)")
    v.add_argument("--tolerance", type=int, default=2, help="match tolerance in database ids (chosen)")
    v.add_argument("--out", required=True, help="output PR CSV")

    lp = _add(sub, "loop", "Run online loop-closure detection over an image sequence.")
    lp.add_argument("--model", required=True, help="model file (CLCM)")
    lp.add_argument("--images", required=True, help="directory of .pgm frames (sorted name order = frame index)")
    lp.add_argument("--stride", type=int, default=7, help="keyframe stride in frames")
    lp.add_argument("--tau", type=float, default=0.9, help="hypothesis score threshold (chosen; calibrate from PR data)")
    lp.add_argument("--consecutive", type=int, default=3, help="consecutive hypotheses needed to close")
    lp.add_argument("--frame-tol", type=int, default=6, help="allowed spread of matches")
    lp.add_argument("--tol-unit", choices=("keyframes", "frames"), default="keyframes",
                    help="unit of --frame-tol (chosen)")
    lp.add_argument("--exclude", type=int, default=20, help="most recent keyframes excluded from search (chosen)")
    lp.add_argument("--min-db", type=int, default=40, help="searchable keyframes needed before detecting (chosen)")
    lp.add_argument("--log", default=None, help="event log CSV (default: stdout summary only)")

    b = _add(sub, "bench", "Time descriptor extraction and database queries.")
    b.add_argument("--model", required=True, help="model file (CLCM)")
    b.add_argument("--images", required=True, help="directory of .pgm images")
    b.add_argument("--db-size", type=int, default=4541,
                   help="database size; padded with seeded random unit vectors (chosen)")
    b.add_argument("--reps", type=int, default=20, help="timed repetitions per phase (3 warm-up runs extra)")
    b.add_argument("--seed", type=int, default=0, help="padding seed (chosen)")

    c = _add(sub, "grad-check", "Finite-difference check of every layer and the full network.")
    c.add_argument("--seed", type=int, default=1, help="base seed")
    c.add_argument("--trials", type=int, default=20, help="number of seeded trials")
    return p


def _load_images(directory):
    from .image import list_pgm, load_pgm, to_canonical

    paths = list_pgm(directory)
    if not paths:
        raise DataError(f"{directory}: no .pgm images")
    return [to_canonical(load_pgm(p)) for p in paths]


def _cmd_gen_data(a):
    from .datagen import build_dataset
    from .hog import HogParams

    hog = HogParams(a.hog_cell, a.hog_block, a.hog_stride, a.hog_bins)
    h = build_dataset(a.images, a.count, a.seed, hog, a.out, workers=a.workers)
    print(f"wrote {h.count} records (D={h.dim}) to {a.out}")


def _cmd_train(a):
    from .datagen import read_dataset
    from .net import NetConfig, save_model, train
    from .net.train import write_loss_log

    ds = read_dataset(a.data)
    config = NetConfig(in_height=ds.header.height, in_width=ds.header.width, out_dim=ds.dim)
    params, history = train(ds, config, a.epochs, a.seed, batch_size=a.batch, lr=a.lr,
                            momentum=a.momentum, weight_decay=a.wd,
                            on_epoch=lambda e, m: log.info("epoch %d loss %.6f", e, m))
    save_model(params, config, a.model_out)
    write_loss_log(history, a.loss_log or a.model_out + ".loss.csv")
    print(f"trained {a.epochs} epochs, final loss {history[-1]:.6f}" if history else "trained 0 epochs")


def _cmd_extract(a):
    from .db import DescriptorDB, save_db
    from .net import Model

    model = Model.load(a.model)
    db = DescriptorDB(model.descriptor_dim)
    for i, img in enumerate(_load_images(a.images)):
        db.insert(i, model.describe(img))
    save_db(db, a.db_out)
    print(f"wrote {len(db)} descriptors to {a.db_out}")


def _cmd_query(a):
    from .db import load_db
    from .image import load_pgm, to_canonical
    from .net import Model

    model = Model.load(a.model)
    db = load_db(a.db)
    for id_, score in db.query(model.describe(to_canonical(load_pgm(a.image))), k=min(a.k, len(db))):
        print(f"{id_},{score:.6f}")


def _cmd_evaluate(a):
    from .db import load_db
    from .evaluation import GroundTruth, match_all, pr_curve, write_pr_csv
    from .net import Model

    model = Model.load(a.model)
    db = load_db(a.db)
    gt = GroundTruth.from_csv(a.gt, a.tolerance) if a.gt else GroundTruth(a.tolerance)
    q = np.stack([model.describe(im) for im in _load_images(a.queries)])
    curve = pr_curve(match_all(q, db), gt)
    write_pr_csv(curve, a.out)
    print(f"auc={curve.auc:.6f} r={curve.r:.6f}")


def _cmd_loop(a):
    from .loop import DetectorConfig, LoopDetector, write_event_log
    from .net import Model

    model = Model.load(a.model)
    cfg = DetectorConfig(a.stride, a.tau, a.consecutive, a.frame_tol, a.exclude, a.min_db, a.tol_unit)
    det = LoopDetector(model.describe, cfg, model.descriptor_dim)
    events = det.run(_load_images(a.images))
    if a.log:
        write_event_log(events, a.log)
    closures = [e for e in events if e.kind == "closure"]
    for e in closures:
        print(f"closure frame={e.frame_index} match={e.match_id} score={e.score:.6f}")
    print(f"{len(closures)} closures over {len(events)} frames")


def _cmd_bench(a):
    from .db import DescriptorDB
    from .evaluation import bench, format_bench_csv
    from .net import Model

    model = Model.load(a.model)
    images = _load_images(a.images)
    dim = model.descriptor_dim
    db = DescriptorDB(dim, capacity=a.db_size + a.reps + 8)
    pad = np.abs(np.random.default_rng(a.seed).standard_normal((a.db_size, dim)))
    for i, v in enumerate(pad):
        db.insert(i, v)
    next_id = [a.db_size]

    def extract(img):
        d = model.describe(img)
        db.insert(next_id[0], d)
        next_id[0] += 1
        return d

    rows = bench(extract, lambda d: db.query(d, k=1), images, a.reps)
    sys.stdout.write(format_bench_csv(rows))


def _cmd_grad_check(a):
    from .net.gradcheck import TOLERANCE, run_suite

    worst, results = run_suite(a.seed, a.trials)
    skipped = sum(r.skipped for r in results)
    print(f"max relative error {worst:.3e} over {a.trials} trials ({skipped} kink entries skipped)")
    return 0 if worst <= TOLERANCE else 2


COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "extract": _cmd_extract,
    "query": _cmd_query,
    "evaluate": _cmd_evaluate,
    "loop": _cmd_loop,
    "bench": _cmd_bench,
    "grad-check": _cmd_grad_check,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc).splitlines()[0], file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stdout, format="%(message)s")
    try:
        return COMMANDS[args.command](args) or 0
    except (DataError, OSError) as exc:
        print(f"deeploop {args.command}: {exc}", file=sys.stderr)
        return 2
    except (DeepLoopError, ValueError) as exc:
        print(f"deeploop {args.command}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
