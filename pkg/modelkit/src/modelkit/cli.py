"""Command-line surface: dataset / fit / eval / predict."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .dataset import FEATURES, build_dataset, split, write_dataset_csv
from .models import (
    ModelSpec,
    evaluate,
    load_model,
    predict,
    save_model,
    train,
)


def _cmd_dataset(args) -> int:
    rows = build_dataset(args.input)
    write_dataset_csv(rows, args.out, include_drops=not args.no_drops)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_fit(args) -> int:
    rows = build_dataset(args.dataset)
    spec = ModelSpec(
        kind=args.kind,
        include_drops_target=not args.no_drops,
        train_fraction=args.train_frac,
        split_seed=args.seed,
    )
    train_rows, _ = split(rows, spec.train_fraction, spec.split_seed)
    model = train(spec, train_rows)
    save_model(model, args.out)
    status = "converged" if model.converged else f"stopped at {model.n_iter} iterations"
    print(f"fit {args.kind} model on {len(train_rows)}/{len(rows)} rows ({status}) -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    rows = build_dataset(args.dataset)
    if args.all_rows:
        test_rows, n_train = rows, 0
    else:
        train_rows, test_rows = split(rows, model.spec.train_fraction,
                                      model.spec.split_seed)
        n_train = len(train_rows)
    report = evaluate(model, test_rows, n_train=n_train)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    if args.input:
        with open(args.input, newline="", encoding="utf-8") as fh:
            records = list(csv.DictReader(fh))
    else:
        record = {}
        for item in args.set or []:
            key, _, value = item.partition("=")
            record[key] = value
        missing = [k for k in FEATURES if k not in record]
        if missing:
            raise SystemExit(f"missing feature values: {missing}")
        records = [record]
    results = predict(model, records)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(results[0].keys()))
            writer.writeheader()
            writer.writerows(results)
        print(f"wrote {len(results)} predictions to {args.out}")
    else:
        for row in results:
            print(json.dumps(row, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="modelkit",
        description="surrogate models over shared-buffer sweep results",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ds = sub.add_parser("dataset", help="archives or results.csv -> canonical CSV")
    p_ds.add_argument("--in", dest="input", required=True,
                      help="sweep directory, results.csv, or archive dir")
    p_ds.add_argument("--out", required=True)
    p_ds.add_argument("--no-drops", action="store_true",
                      help="drop the packet-drops target column")
    p_ds.set_defaults(func=_cmd_dataset)

    p_fit = sub.add_parser("fit", help="train a model on a dataset split")
    p_fit.add_argument("--dataset", required=True)
    p_fit.add_argument("--kind", choices=("shallow", "deep"), default="deep")
    p_fit.add_argument("--train-frac", type=float, default=0.05)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--no-drops", action="store_true",
                       help="exclude the packet-drops target")
    p_fit.add_argument("--out", required=True, help="model file")
    p_fit.set_defaults(func=_cmd_fit)

    p_eval = sub.add_parser("eval", help="score a model on the held-out split")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--all-rows", action="store_true",
                        help="evaluate on every row instead of the held-out split")
    p_eval.set_defaults(func=_cmd_eval)

    p_pred = sub.add_parser("predict", help="predict targets for feature rows")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--in", dest="input", help="CSV of feature rows")
    p_pred.add_argument("--set", action="append", metavar="FEATURE=VALUE",
                        help="inline feature values (repeatable)")
    p_pred.add_argument("--out", help="write predictions CSV here")
    p_pred.set_defaults(func=_cmd_predict)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
