"""Command-line interface: fit, average, rank, criteria, search, surface.

Every invocation prints its effective configuration to stderr as a single
``# config:`` line, so any run can be reproduced from its logs.  Exit codes:
0 success, 2 argument/validation problems, 1 numerical failures (rank
deficiency, saturation, search dead ends).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .averaging import CandidateSet, average_predictions
from .criteria import (
    ORIENTATION,
    CompoundMember,
    CompoundSpec,
    CriterionKind,
    CriterionSpec,
    criterion_value,
)
from .dataio import (
    fit_from_dict,
    fit_to_dict,
    read_design,
    table_to_csv,
    table_to_json,
    to_json,
    write_design,
)
from .errors import OofaError, SaturatedModelError, ValidationError
from .fitting import Dataset, FitResult, ols_fit
from .models import Family, ModelSpec, build_matrix, parse_model
from .perms import check_capacity, enumerate_permutations, standardize
from .ranking import PredictionTable, predict_all, predict_rows, rank_descending, top_k
from .search import SearchConfig, exchange_search


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _emit_config(args: argparse.Namespace, keys: list[str]) -> None:
    parts = [f"{key.replace('_', '-')}={getattr(args, key)}" for key in keys]
    print(f"# config: {args.command} " + " ".join(parts), file=sys.stderr)


def _emit_table(args: argparse.Namespace, header, rows) -> None:
    if getattr(args, "format", "csv") == "json":
        print(table_to_json(header, rows))
    else:
        sys.stdout.write(table_to_csv(header, rows))


def _resolve_model(args: argparse.Namespace) -> ModelSpec:
    label = args.model
    if getattr(args, "taper", None):
        if ":" in label:
            raise ValidationError(
                "give the taper either as --taper or as a model suffix, not both"
            )
        label = f"{label}:{args.taper}"
    return parse_model(label)


def _model_list(text: str) -> list[ModelSpec]:
    labels = [part for part in text.split(",") if part.strip()]
    if not labels:
        raise ValidationError("empty model list")
    specs = [parse_model(part) for part in labels]
    if len({spec.label for spec in specs}) != len(specs):
        raise ValidationError(f"duplicate models in {text!r}")
    return specs


def _load_dataset(path: str) -> Dataset:
    loaded = read_design(path)
    if not isinstance(loaded, Dataset):
        raise ValidationError(f"{path} has no response column y")
    return loaded


def _apply_block(data: Dataset, use_block: bool) -> Dataset:
    if use_block:
        if data.design.block is None:
            raise ValidationError("--block given but the file has no block column")
        return data
    return Dataset(data.design.without_block(), data.response)


def _parse_weight_list(text: str, count: int) -> list[float]:
    try:
        weights = [float(part) for part in text.split(",")]
    except ValueError:
        raise ValidationError(f"bad weight list {text!r}") from None
    if len(weights) != count:
        raise ValidationError(f"{len(weights)} weights for {count} models")
    return weights


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_enumerate(args: argparse.Namespace) -> None:
    _emit_config(args, ["m", "labels", "format"])
    check_capacity(args.m)
    labels = None
    if args.labels:
        labels = tuple(part.strip() for part in args.labels.split(","))
        if len(labels) != args.m:
            raise ValidationError(f"{len(labels)} labels for m = {args.m}")
    header = [f"pos_{k}" for k in range(1, args.m + 1)]
    named = labels or tuple(str(c) for c in range(1, args.m + 1))
    rows = [
        [named[c - 1] for c in perm.order] for perm in enumerate_permutations(args.m)
    ]
    _emit_table(args, header, rows)


def _cmd_matrix(args: argparse.Namespace) -> None:
    _emit_config(args, ["model", "taper", "design", "format"])
    spec = _resolve_model(args)
    loaded = read_design(args.design)
    design = loaded.design if isinstance(loaded, Dataset) else loaded
    built = build_matrix(spec, design.runs)
    _emit_table(args, built.term_labels, built.values.tolist())


def _cmd_fit(args: argparse.Namespace) -> None:
    _emit_config(args, ["model", "taper", "data", "block", "out"])
    spec = _resolve_model(args)
    data = _apply_block(_load_dataset(args.data), args.block)
    fit = ols_fit(spec, data)
    text = to_json(fit_to_dict(fit))
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")


def _weighted_candidates(
    fits: list[FitResult], weights_arg: str
) -> tuple[CandidateSet, list[FitResult]]:
    """Candidate set plus any fits carried along for display only."""
    if weights_arg != "akaike":
        weights = _parse_weight_list(weights_arg, len(fits))
        return CandidateSet(tuple(fits), tuple(weights)), []
    usable, display_only = [], []
    for fit in fits:
        if fit.sigma2_hat is None:
            display_only.append(fit)
            print(
                f"# warning: {fit.spec.label} is saturated (no dispersion "
                "estimate); excluded from averaging, predictions still shown",
                file=sys.stderr,
            )
        else:
            usable.append(fit)
    if not usable:
        raise SaturatedModelError(
            "every candidate model is saturated; nothing to average"
        )
    return CandidateSet.from_akaike(usable), display_only


def _cmd_average(args: argparse.Namespace) -> None:
    _emit_config(args, ["data", "models", "weights", "block", "top", "format"])
    specs = _model_list(args.models)
    data = _apply_block(_load_dataset(args.data), args.block)
    fits = [ols_fit(spec, data) for spec in specs]
    candidates, _ = _weighted_candidates(fits, args.weights)
    averaged = average_predictions(candidates)

    labels = data.design.component_labels
    per_model: list[tuple[str, np.ndarray, np.ndarray]] = []
    for fit in fits:
        table = predict_all(fit)
        per_model.append((fit.spec.label, table.estimates, table.ranks))

    header = [f"pos_{k}" for k in range(1, data.m + 1)]
    for label, _, _ in per_model:
        header += [f"est_{label}", f"rank_{label}"]
    header += ["ma_estimate", "ma_rank", "ma_se"]

    order = range(len(averaged))
    if args.top is not None:
        if not 1 <= args.top <= len(averaged):
            raise ValidationError(f"--top must be in 1..{len(averaged)}, got {args.top}")
        order = np.argsort(averaged.ranks)[: args.top]
    rows = []
    for i in order:
        row: list = [labels[c - 1] for c in averaged.perms[i].order]
        for _, est, ranks in per_model:
            row += [est[i], int(ranks[i])]
        row += [averaged.estimates[i], int(averaged.ranks[i]), averaged.std_errors[i]]
        rows.append(row)
    _emit_table(args, header, rows)


def _cmd_predict(args: argparse.Namespace) -> None:
    _emit_config(args, ["fit", "top", "minimize", "format"])
    with open(args.fit, "r", encoding="utf-8") as handle:
        fit = fit_from_dict(json.load(handle))
    table = predict_all(fit)
    if args.minimize:
        table = PredictionTable(
            table.perms,
            table.estimates.copy(),
            table.std_errors.copy(),
            rank_descending(-table.estimates),
        )
    if args.top is not None:
        table = top_k(table, args.top)
    labels = fit.data.design.component_labels
    rows = [
        [perm.label(labels), table.estimates[i], table.std_errors[i], int(table.ranks[i])]
        for i, perm in enumerate(table.perms)
    ]
    _emit_table(args, ["order", "estimate", "std_error", "rank"], rows)


def _cmd_criteria(args: argparse.Namespace) -> None:
    _emit_config(args, ["design", "models", "criterion", "sigma2", "orth", "format"])
    specs = _model_list(args.models)
    loaded = read_design(args.design)
    design = loaded.design if isinstance(loaded, Dataset) else loaded
    kind = CriterionKind(args.criterion)
    crit = CriterionSpec(kind, args.sigma2, args.orth)
    rows = [
        [spec.label, args.criterion, criterion_value(spec, crit, design), ORIENTATION[kind]]
        for spec in specs
    ]
    _emit_table(args, ["model", "criterion", "value", "orientation"], rows)


def _cmd_design(args: argparse.Namespace) -> None:
    if args.seed is None:
        args.seed = int(os.environ.get("OOFA_SEED", "0"))
    _emit_config(
        args,
        ["m", "runs", "models", "criterion", "sigma2", "orth", "weights",
         "restarts", "seed", "max_passes", "out"],
    )
    specs = _model_list(args.models)
    crit = CriterionSpec(CriterionKind(args.criterion), args.sigma2, args.orth)
    if args.weights == "equal":
        objective = CompoundSpec.equal_weights(specs, crit)
    else:
        weights = _parse_weight_list(args.weights, len(specs))
        objective = CompoundSpec(
            tuple(CompoundMember(spec, crit, w) for spec, w in zip(specs, weights))
        )
    config = SearchConfig(
        m=args.m,
        n_runs=args.runs,
        objective=objective,
        restarts=args.restarts,
        seed=args.seed,
        max_passes=args.max_passes,
    )
    result = exchange_search(config)
    report = {
        "m": args.m,
        "runs": args.runs,
        "models": [spec.label for spec in specs],
        "criterion": args.criterion,
        "sigma2": args.sigma2,
        "orthogonal_coding": bool(args.orth),
        "weights": [member.weight for member in objective.members],
        "restarts": args.restarts,
        "seed": args.seed,
        "objective": result.objective,
        "member_values": {
            member.model.label: value
            for member, value in zip(objective.members, result.member_values)
        },
        "best_restart": result.restart,
        "passes": len(result.objective_trace) - 1,
        "objective_trace": list(result.objective_trace),
        "design": [list(run.order) for run in result.design.runs],
    }
    print(to_json(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            write_design(handle, result.design, run_index=True)


def _cmd_surface(args: argparse.Namespace) -> None:
    _emit_config(args, ["data", "model", "grid", "block", "format"])
    spec = parse_model(args.model)
    if spec.family is not Family.RS2:
        raise ValidationError("surface supports the rs2 model only")
    data = _apply_block(_load_dataset(args.data), args.block)
    if data.m != 3:
        raise ValidationError(f"surface supports m = 3 only, got m = {data.m}")
    if args.grid < 2:
        raise ValidationError(f"--grid must be >= 2, got {args.grid}")
    fit = ols_fit(spec, data)

    m = data.m
    lo, hi = 2.0 / (m * (m + 1)), 2.0 * m / (m * (m + 1))
    axis = np.linspace(lo, hi, args.grid)
    grid_rows = np.array(
        [[p1, p2, p1**2, p2**2, p1 * p2] for p1 in axis for p2 in axis]
    )
    eta, _ = predict_rows(fit, grid_rows)
    best = int(np.argmax(eta))

    design_rows = build_matrix(spec, data.design.runs).values
    eta_design, _ = predict_rows(fit, design_rows)

    rows = [
        [grid_rows[i, 0], grid_rows[i, 1], eta[i], "grid", int(i == best)]
        for i in range(len(eta))
    ]
    for i, run in enumerate(data.design.runs):
        p = standardize(run).p
        rows.append([p[0], p[1], eta_design[i], "design", 0])
    _emit_table(args, ["p1", "p2", "eta", "kind", "best"], rows)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oofa",
        description="Order-of-addition experiments: model fitting, model "
        "averaging, rank prediction, and design search.",
    )
    parser.add_argument("--version", action="version", version=f"oofa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p, default="csv"):
        p.add_argument("--format", choices=["csv", "json"], default=default,
                       help=f"output format (default {default})")

    p = sub.add_parser("enumerate", help="list all m! orders")
    p.add_argument("--m", type=int, required=True, help="number of components (<= 8)")
    p.add_argument("--labels", default=None, help="comma-separated component names")
    add_format(p)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("matrix", help="model matrix for a design file")
    p.add_argument("--model", required=True)
    p.add_argument("--taper", default=None, help="taper for tpwo: invh, geom=<r>, linear")
    p.add_argument("--design", required=True, help="design CSV (pos_1..pos_m)")
    add_format(p)
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("fit", help="least-squares fit of one model")
    p.add_argument("--model", required=True)
    p.add_argument("--taper", default=None)
    p.add_argument("--data", required=True, help="design CSV with a y column")
    p.add_argument("--block", action="store_true", help="include the block column")
    p.add_argument("--out", default=None, help="also write the fit JSON here")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("average", help="model-averaged predictions for all orders")
    p.add_argument("--data", required=True)
    p.add_argument("--models", required=True, help="comma-separated model list")
    p.add_argument("--weights", default="akaike", help="'akaike' or w1,w2,...")
    p.add_argument("--block", action="store_true")
    p.add_argument("--top", type=int, default=None, help="emit only the K best orders")
    add_format(p)
    p.set_defaults(func=_cmd_average)

    p = sub.add_parser("predict", help="rank all orders from a saved fit")
    p.add_argument("--fit", required=True, help="fit JSON from the fit command")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--minimize", action="store_true",
                   help="rank 1 = smallest estimate instead of largest")
    add_format(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("criteria", help="design criteria for given models")
    p.add_argument("--design", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--criterion", choices=["apv", "av", "a", "d"], required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--orth", action="store_true", help="use the orthogonal coding")
    add_format(p)
    p.set_defaults(func=_cmd_criteria)

    p = sub.add_parser("design", help="search for a good N-run design")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--criterion", choices=["apv", "av", "a", "d"], default="apv")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--orth", action="store_true")
    p.add_argument("--weights", default="equal", help="'equal' or a1,a2,...")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: $OOFA_SEED, else 0)")
    p.add_argument("--max-passes", type=int, default=50, dest="max_passes")
    p.add_argument("--out", default=None, help="write the design CSV here")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("surface", help="response-surface grid on the (p1, p2) plane")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default="rs2")
    p.add_argument("--grid", type=int, required=True, help="grid points per axis")
    p.add_argument("--block", action="store_true")
    add_format(p)
    p.set_defaults(func=_cmd_surface)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"oofa: error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 2
    except (OofaError, np.linalg.LinAlgError) as exc:
        print(f"oofa: error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"oofa: error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 2
    return 0


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
