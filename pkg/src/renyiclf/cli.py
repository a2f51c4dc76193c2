"""Command-line surface.

Machine-parsable key=value output goes to stdout (12+ significant digits);
human-oriented notes go to stderr.  Exit codes: 0 success, 1 verification or
evaluation failure, 2 usage error, 3 data error (including infeasible
marginal systems), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import oracle, verification
from .classifier import evaluate, load_model, predict_labels, save_model, train_model
from .core import hgr_binary
from .errors import DataError, Infeasible, NumericalError, RenyiError
from .experiment import run_synthetic
from .feature_selection import AdmmOptions, lambda_path, select_saa
from .joint import parse_dump
from .marginals import build_constraints, from_joint
from .schema import Dataset, expand_pairs, ingest_csv

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class UsageError(RenyiError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _emit(**kv):
    for key, value in kv.items():
        print(f"{key}={_fmt(value)}")


def _positive_float(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def _nonnegative_float(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renyi",
        description="Robust categorical classification from pairwise marginals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model from a CSV dataset")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--label", required=True)
    p_train.add_argument("--ridge", type=_nonnegative_float, default=0.0)
    p_train.add_argument("--smoothing", type=_nonnegative_float, default=0.0)
    p_train.add_argument("--pairs", action="store_true",
                         help="expand features to all unordered pairs before training")
    p_train.add_argument("--out", default=None, help="path of the model file to write")

    for name in ("predict", "evaluate"):
        p = sub.add_parser(name)
        p.add_argument("--model", required=True)
        p.add_argument("--data", required=True)
        p.add_argument("--label", required=(name == "evaluate"),
                       help="label column (ignored by predict, required by evaluate)")
        modes = (["map", "randomized-sampled"] if name == "predict"
                 else ["map", "randomized-analytic", "randomized-sampled"])
        p.add_argument("--mode", choices=modes, default="map")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--strict", action="store_true",
                       help="reject categories unseen during training")
        if name == "predict":
            p.add_argument("--out", default=None)

    p_sel = sub.add_parser("select", help="group-lasso feature selection")
    p_sel.add_argument("--data", required=True)
    p_sel.add_argument("--label", required=True)
    p_sel.add_argument("--lambda", dest="reg_lambda", type=_positive_float, default=None)
    p_sel.add_argument("--rho", type=_positive_float, default=1.0)
    p_sel.add_argument("--tol-abs", type=_positive_float, default=1e-6)
    p_sel.add_argument("--tol-rel", type=_positive_float, default=1e-4)
    p_sel.add_argument("--max-iter", type=int, default=10_000)
    p_sel.add_argument("--path", default=None, metavar="L1:L2:N",
                       help="log-spaced lambda sweep, one output line per value")

    p_or = sub.add_parser("oracle", help="exact small-instance computations")
    or_sub = p_or.add_subparsers(dest="oracle_command", required=True)
    for name in ("estar", "theta", "worst-case", "hgr"):
        q = or_sub.add_parser(name)
        q.add_argument("--instance", default=None, help="instance dump file")
        q.add_argument("--random", default=None, metavar="SEED,D,M,MODE",
                       help="generate the instance instead of reading one")
        if name in ("theta", "worst-case"):
            q.add_argument("--tol", type=_positive_float, default=1e-7)
    q = or_sub.add_parser("verify")
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--seed", type=int, default=0)

    p_exp = sub.add_parser("experiment-synthetic",
                           help="wide Bernoulli synthetic benchmark")
    p_exp.add_argument("--d", type=int, default=10_000)
    p_exp.add_argument("--n", type=int, default=200)
    p_exp.add_argument("--bern", type=float, default=0.7)
    p_exp.add_argument("--nonzero-frac", type=float, default=0.3)
    p_exp.add_argument("--ridge", type=_nonnegative_float, default=1e4)
    p_exp.add_argument("--runs", type=int, default=1000)
    p_exp.add_argument("--train-frac", type=float, default=0.85)
    p_exp.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_train(args) -> int:
    data = ingest_csv(args.data, args.label)
    if args.pairs:
        data = expand_pairs(data)
    model = train_model(data, ridge_lambda=args.ridge, smoothing_alpha=args.smoothing)
    if args.out:
        save_model(model, args.out)
        print(f"model written to {args.out}", file=sys.stderr)
    bound = model.error_upper_bound()
    hgr_lb = float(np.sqrt(max(0.0, 1.0 - model.gamma / (model.q0 * (1.0 - model.q0))))
                   ) if 0.0 < model.q0 < 1.0 else 0.0
    _emit(gamma=model.gamma, error_upper_bound=bound, separable=model.separable,
          hgr_lower_bound=hgr_lb, h_plus=model.h_plus, h_minus=model.h_minus,
          q0=model.q0, train_n=model.train_n, total_width=model.schema.total_width)
    return EXIT_OK


def _load_rows(args, model):
    """Read feature rows against a trained model's schema, tolerating an
    extra label column and, unless --strict, unseen categories (index 0)."""
    with open(args.data, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{args.data}: empty file") from None
        table = list(reader)
    label_pos = header.index(args.label) if args.label and args.label in header else None
    feature_cols = [h for i, h in enumerate(header) if i != label_pos]
    if tuple(feature_cols) != model.schema.names:
        raise DataError(
            f"{args.data}: columns {feature_cols} do not match the model's features "
            f"{list(model.schema.names)}"
        )
    positions = [header.index(f) for f in model.schema.names]
    rows = np.zeros((len(table), len(positions)), dtype=np.int64)
    labels = []
    for r, cells in enumerate(table):
        if len(cells) != len(header) or any(c == "" for c in cells):
            raise DataError(f"{args.data}: row {r + 1} is ragged or has missing cells")
        for j, pos in enumerate(positions):
            idx = model.schema.category_index(j, cells[pos])
            if idx == 0 and args.strict:
                raise DataError(
                    f"{args.data}: row {r + 1}, feature {model.schema.names[j]!r}: "
                    f"category {cells[pos]!r} unseen in training (strict mode)"
                )
            rows[r, j] = idx
        if label_pos is not None:
            labels.append(cells[label_pos])
    return rows, labels


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    rows, _ = _load_rows(args, model)
    labels = predict_labels(model, rows, mode=args.mode, seed=args.seed)
    text = "\n".join(str(int(v)) for v in labels) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    model = load_model(args.model)
    rows, label_strings = _load_rows(args, model)
    if not label_strings:
        raise DataError(f"{args.data}: label column {args.label!r} not found")
    distinct = sorted(set(label_strings))
    if set(distinct) <= {"0", "1"}:
        mapping = {"0": 0, "1": 1}
    elif len(distinct) == 2:
        mapping = {distinct[0]: 0, distinct[1]: 1}
    else:
        raise DataError(f"{args.data}: expected two label values, got {len(distinct)}")
    labels = np.array([mapping[v] for v in label_strings], dtype=np.int64)
    data = Dataset(schema=model.schema, rows=rows, labels=labels, permissive=True)
    result = evaluate(model, data, mode=args.mode, seed=args.seed, strict=args.strict)
    _emit(error_rate=result.error_rate, error_class0=result.per_class[0],
          error_class1=result.per_class[1], n=data.n, mode=args.mode)
    return EXIT_OK


def _cmd_select(args) -> int:
    if (args.reg_lambda is None) == (args.path is None):
        raise UsageError("provide exactly one of --lambda or --path")
    data = ingest_csv(args.data, args.label)
    opts = AdmmOptions(rho=args.rho, tol_abs=args.tol_abs, tol_rel=args.tol_rel,
                       max_iter=args.max_iter)
    if args.path is not None:
        try:
            lo, hi, count = args.path.split(":")
            lams = lambda_path(float(lo), float(hi), int(count))
        except ValueError as exc:
            raise UsageError(f"--path must look like L1:L2:N, got {args.path!r}") from exc
        for lam in lams:
            res = select_saa(data, float(lam), opts)
            names = ",".join(res.selected_names(data.schema)) or "(none)"
            print(f"lambda={lam:.17g} n_selected={len(res.selected)} selected={names}")
        return EXIT_OK
    res = select_saa(data, args.reg_lambda, opts)
    names = ",".join(res.selected_names(data.schema)) or "(none)"
    _emit(**{"lambda": args.reg_lambda, "selected": names,
             "n_selected": len(res.selected),
             "iterations": res.admm_stats.iterations,
             "primal_residual": res.admm_stats.primal_residual,
             "dual_residual": res.admm_stats.dual_residual,
             "converged": res.admm_stats.converged})
    for i, name in enumerate(data.schema.names):
        print(f"block_norm_{name}={res.block_norms[i]:.17g}")
    return EXIT_OK


def _oracle_instance(args):
    if (args.instance is None) == (args.random is None):
        raise UsageError("provide exactly one of --instance or --random")
    if args.instance is not None:
        with open(args.instance, "r", encoding="utf-8") as fh:
            return parse_dump(fh.read())
    try:
        seed_s, d_s, m_s, mode = args.random.split(",")
        return oracle.random_instance(int(seed_s), int(d_s), int(m_s), mode.strip())
    except (ValueError, TypeError) as exc:
        raise UsageError(
            f"--random must look like SEED,D,M,MODE, got {args.random!r}") from exc


def _cmd_oracle(args) -> int:
    if args.oracle_command == "verify":
        reports = verification.run_all(args.trials, args.seed)
        failed = False
        for rep in reports:
            print(f"suite={rep.name} trials={rep.trials} "
                  f"status={'ok' if rep.ok else 'FAIL'}")
            if not rep.ok:
                failed = True
                for message, dump in rep.failures[:3]:
                    print(f"failure={message}")
                    if dump:
                        sys.stdout.write(dump)
        return EXIT_VERIFICATION if failed else EXIT_OK
    inst = _oracle_instance(args)
    cons = build_constraints(from_joint(inst))
    if args.oracle_command == "estar":
        e_star, _ = oracle.solve_estar(cons)
        _emit(e_star=e_star)
    elif args.oracle_command == "theta":
        sol = oracle.solve_theta(cons, tol=args.tol)
        _emit(theta=sol.theta, gap=sol.gap, iterations=sol.iterations)
    elif args.oracle_command == "worst-case":
        sol = oracle.solve_theta(cons, tol=args.tol)
        wce_map = oracle.worst_case_error(cons, oracle.map_rule_of(sol.p_tilde))
        wce_renyi = oracle.worst_case_error(cons, oracle.renyi_rule_of(sol.p_tilde))
        e_star, _ = oracle.solve_estar(cons)
        _emit(e_star=e_star, theta=sol.theta, wce_map=wce_map, wce_renyi=wce_renyi)
    elif args.oracle_command == "hgr":
        _emit(hgr_binary=hgr_binary(inst), hgr_bruteforce=oracle.hgr_bruteforce(inst))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if not 0.0 < args.train_frac < 1.0:
        raise UsageError(f"--train-frac must lie in (0, 1), got {args.train_frac}")
    if not 0.0 <= args.bern <= 1.0:
        raise UsageError(f"--bern must lie in [0, 1], got {args.bern}")
    if args.runs < 1 or args.d < 1 or args.n < 2:
        raise UsageError("--runs and --d must be >= 1 and --n >= 2")
    result = run_synthetic(seed=args.seed, d=args.d, n=args.n, bern=args.bern,
                           nonzero_frac=args.nonzero_frac, ridge=args.ridge,
                           runs=args.runs, train_frac=args.train_frac)
    # timings are not reproducible across runs, so they go to stderr with the
    # other human-oriented notes; stdout stays byte-identical for a fixed seed
    print(f"mean_train_seconds={result.mean_train_seconds:.6g}", file=sys.stderr)
    _emit(mean_map_error=result.mean_error, runs=args.runs)
    return EXIT_OK


_DISPATCH = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "select": _cmd_select,
    "oracle": _cmd_oracle,
    "experiment-synthetic": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print("status=infeasible")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
