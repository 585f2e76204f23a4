"""Command-line interface: ``fcaod <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .agendas import read_agenda_file
from .errors import FCAODError
from .explain import (
    attribute_index,
    explain_global,
    explain_local,
    export_heatmap,
    export_histogram,
)
from .model_io import load_model, save_model
from .pipeline import evaluate, fit_on_split
from .scaling import read_csv
from .sup import SupModel, TrainConfig

log = logging.getLogger("fcaod")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_data(p, label_required=False):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--label-column", required=label_required, help="0/1 outlier label column")
    p.add_argument("--id-column", help="column holding record identifiers (default: row number)")


def _add_fit(p):
    p.add_argument("--bins", type=int, required=True, help="equal-width bins per attribute")
    p.add_argument("--alpha", type=int, default=2, help="largest agenda size (default 2)")
    p.add_argument("--include-full", action=argparse.BooleanOptionalAction, default=True,
                   help="add the agenda of all attributes (default on)")
    p.add_argument("--agendas", help="expert agenda file: one comma-separated agenda per line")
    p.add_argument("--gamma", type=float, help="decay parameter (default: seeded uniform draw)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8,
                   help="stratified train share; 1 trains on every row (default 0.8)")
    p.add_argument("--scale-on-all", action="store_true",
                   help="fit bin ranges on the whole file instead of the training part")


def _add_train(p):
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--init-scale", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1e-8, help="denominator guard")
    p.add_argument("--loss-orientation", choices=("literal", "swapped"), default="literal")


def _add_output(p):
    p.add_argument("--output", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fcaod", description="Explainable FCA outlier detection over interrogative agendas.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit-unsup", help="fit the unsupervised detector and save the model")
    _add_data(p)
    _add_fit(p)
    _add_output(p)

    p = sub.add_parser("fit-sup", help="learn agenda weights and save the model")
    _add_data(p, label_required=True)
    _add_fit(p)
    _add_train(p)
    _add_output(p)
    p.add_argument("--loss-trace", help="CSV file for the per-epoch loss")

    p = sub.add_parser("score", help="score records with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--id-column")
    p.add_argument("--split", choices=("all", "train", "test"), default="all",
                   help="train/test: rows whose ids are / are not the model's training ids")
    _add_output(p)

    p = sub.add_parser("eval", help="split, fit, score the held-out part and report metrics")
    _add_data(p, label_required=True)
    _add_fit(p)
    _add_train(p)
    p.add_argument("--supervised", action="store_true")
    p.add_argument("--threshold", type=float, default=0.5, help="flagging threshold for TPR/FPR")
    p.add_argument("--with-scores", action="store_true", help="include per-object test scores")
    _add_output(p)

    p = sub.add_parser("explain", help="local or global explanation")
    p.add_argument("--model", required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--object", help="record id to explain")
    target.add_argument("--global", dest="global_", action="store_true", help="global explanation")
    p.add_argument("--input", help="CSV holding the object (default: the model's training data)")
    p.add_argument("--id-column")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--degree-floor", type=float, default=5e-5)
    p.add_argument("--degree-threshold", type=float, default=0.5)
    p.add_argument("--text", action="store_true", help="plain-text rendering instead of JSON")
    _add_output(p)

    p = sub.add_parser("export-hist", help="closure-size histogram for one agenda")
    p.add_argument("--model", required=True)
    p.add_argument("--agenda", required=True, help="agenda name, e.g. x1 or x1-x2 or full")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_output(p)

    p = sub.add_parser("export-heatmap", help="log2 closure sizes over two attributes' bins")
    p.add_argument("--model", required=True)
    p.add_argument("--attributes", required=True, help="two attribute names, comma-separated")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_output(p)

    p = sub.add_parser("info", help="summarise a saved model")
    p.add_argument("--model", required=True)
    _add_output(p)
    return parser


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _train_fraction(args):
    if args.train_fraction >= 1:
        return None
    if not 0 < args.train_fraction < 1:
        raise UsageError("--train-fraction must be in (0, 1]")
    return args.train_fraction


def _space(args, table):
    return read_agenda_file(args.agendas, table.column_names) if args.agendas else None


def _config(args) -> TrainConfig:
    try:
        return TrainConfig(args.epochs, args.lr, args.seed, args.init_scale, args.eps, args.loss_orientation)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_fit_args(args):
    if args.bins < 1:
        raise UsageError("--bins must be >= 1")
    if args.alpha < 1:
        raise UsageError("--alpha must be >= 1")
    if args.gamma is not None and not args.gamma > 0:
        raise UsageError("--gamma must be > 0")


def _log_hyper(model) -> None:
    log.info(
        "bins=%d gamma=%.6g alpha=%s |T|=%d train_objects=%d",
        model.scaler.bins, model.gamma, model.meta.get("alpha"), len(model.space),
        model.context.num_objects,
    )


def _fit(args, supervised: bool):
    _check_fit_args(args)
    fraction = _train_fraction(args)
    table = read_csv(args.input, args.label_column, args.id_column)
    model, _, _ = fit_on_split(
        table, args.bins, args.alpha, args.include_full, args.gamma, args.seed, fraction,
        supervised, _config(args) if supervised else None, _space(args, table),
        args.scale_on_all, args.threads,
    )
    model.meta.update(
        {"alpha": args.alpha, "include_full": args.include_full,
         "label_column": args.label_column, "id_column": args.id_column}
    )
    _log_hyper(model)
    return model


def cmd_fit(args, supervised: bool) -> None:
    model = _fit(args, supervised)
    if supervised and args.loss_trace:
        rows = [(e, repr(float(v))) for e, v in enumerate(model.loss_trace)]
        Path(args.loss_trace).write_text(_csv(("epoch", "loss"), rows), encoding="utf-8")
    if args.output:
        save_model(model, args.output)
    else:
        buf = io.BytesIO()
        save_model(model, buf)
        sys.stdout.buffer.write(buf.getvalue())


def _csv_header(path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [h.strip() for h in next(csv.reader(fh), [])]


def _read_for_model(model, path, id_column):
    header = _csv_header(path)
    label = model.meta.get("label_column")
    id_column = id_column or model.meta.get("id_column")
    return read_csv(
        path,
        label_column=label if label in header else None,
        id_column=id_column if id_column in header else None,
        columns=list(model.scaler.column_names),
    )


def cmd_score(args) -> None:
    model = load_model(args.model)
    table = _read_for_model(model, args.input, args.id_column)
    if args.split != "all":
        train_ids = {str(i) for i in model.context.object_ids}
        keep = [i for i, rid in enumerate(table.record_ids) if (str(rid) in train_ids) == (args.split == "train")]
        table = table.take(keep)
    scores = model.score(table, threads=args.threads)
    _log_hyper(model)
    _emit(_json([{"id": rid, "score": float(s)} for rid, s in zip(table.record_ids, scores)]), args.output)


def cmd_eval(args) -> None:
    _check_fit_args(args)
    if not 0 < args.train_fraction < 1:
        raise UsageError("--train-fraction must be in (0, 1) for eval")
    table = read_csv(args.input, args.label_column, args.id_column)
    result = evaluate(
        table, args.bins, args.alpha, args.include_full, args.gamma, args.seed,
        args.train_fraction, args.supervised, _config(args) if args.supervised else None,
        args.threshold, _space(args, table), args.scale_on_all, args.threads,
    )
    model = result["model"]
    log.info("alpha=%d |T|=%d", args.alpha, len(model.space))
    out = {k: result[k] for k in ("auc", "tpr", "fpr", "threshold", "n_train", "n_test", "seed", "bins", "gamma")}
    if args.with_scores:
        out["scores"] = [{"id": rid, "score": float(s)} for rid, s in zip(result["test_ids"], result["scores"])]
    _emit(_json(out), args.output)


def cmd_explain(args) -> None:
    model = load_model(args.model)
    if args.global_:
        expl = explain_global(model, args.degree_threshold)
        if args.text:
            lines = [f"{e.agenda}: weight {e.weight:.4g}, {100 * e.high_fraction:.1f}% of training objects "
                     f"with degree >= {args.degree_threshold:g}" for e in expl.entries]
            _emit("\n".join(lines) + "\n", args.output)
        else:
            _emit(_json(expl.to_dict()), args.output)
        return
    if args.top_k < 1:
        raise UsageError("--top-k must be >= 1")
    queries = None
    if args.input:
        queries = model.binarize(_read_for_model(model, args.input, args.id_column))
    expl = explain_local(model, args.object, queries, args.top_k, args.degree_floor)
    _emit(expl.render() + "\n" if args.text else _json(expl.to_dict()), args.output)


def cmd_export_hist(args) -> None:
    model = load_model(args.model)
    hist = export_histogram(model, args.agenda)
    if args.format == "csv":
        _emit(_csv(("closure_size", "object_count"), hist), args.output)
    else:
        _emit(_json({"agenda": args.agenda, "histogram": [list(h) for h in hist]}), args.output)


def cmd_export_heatmap(args) -> None:
    model = load_model(args.model)
    names = [n.strip() for n in args.attributes.split(",")]
    if len(names) != 2:
        raise UsageError("--attributes needs exactly two names")
    heat = export_heatmap(model, attribute_index(model, names[0]), attribute_index(model, names[1]))
    if args.format == "csv":
        _emit(_csv(("row_bin", "col_bin", "log2_closure_size"), heat.to_csv_rows()), args.output)
    else:
        _emit(_json(heat.to_dict()), args.output)


def cmd_info(args) -> None:
    model = load_model(args.model)
    info = {
        "kind": "sup" if isinstance(model, SupModel) else "unsup",
        "columns": list(model.scaler.column_names),
        "bins": model.scaler.bins,
        "gamma": model.gamma,
        "num_training_objects": model.context.num_objects,
        "population_size": int(len(model.population_indices)),
        "agendas": model.space.names,
        "meta": model.meta,
    }
    if isinstance(model, SupModel):
        info["weights"] = dict(zip(model.space.names, model.weight_vector().tolist()))
        info["config"] = model.config_dict()
        info["final_loss"] = float(model.loss_trace[-1]) if len(model.loss_trace) else None
    _emit(_json(info), args.output)


COMMANDS = {
    "fit-unsup": lambda a: cmd_fit(a, supervised=False),
    "fit-sup": lambda a: cmd_fit(a, supervised=True),
    "score": cmd_score,
    "eval": cmd_eval,
    "explain": cmd_explain,
    "export-hist": cmd_export_hist,
    "export-heatmap": cmd_export_heatmap,
    "info": cmd_info,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(name)s: %(message)s",
        force=True,
    )
    if args.threads < 1:
        print("fcaod: error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fcaod: error: {exc}", file=sys.stderr)
        return 1
    except (FCAODError, OSError, UnicodeDecodeError) as exc:
        print(f"fcaod: data error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
