"""Command-line surface: fit, contrast, and simulate subcommands."""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .data import load_dataset
from .inference import (contrast_test, infer, subvector_covariance,
                        subvector_fit)
from .selection import make_selector
from .simulate import load_scenario, run_scenario, sweep_split_proportion
from .smoothing import ssglm_fit

# diagnostic codes by error class, checked in order (LinAlgError is a
# ValueError subclass, so it must come first)
_EXIT_CODES = {
    np.linalg.LinAlgError: 3,
    ValueError: 2,
    RuntimeError: 4,
    OSError: 5,
}

_CONFIG_KEYS = {"input", "response", "family", "selector", "folds", "sis_cap",
                "sis_iterations",
                "q", "B", "seed", "alpha", "subset", "contrast_Q",
                "contrast_R", "threads", "out", "delimiter", "scenario",
                "sweep_q"}


def _fmt(x):
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return ""
    return f"{x:.6g}"


def _parse_subset(spec, labels):
    """Subset spec: comma-separated 1-based indices or column labels."""
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in labels:
            out.append(labels.index(tok))
        else:
            try:
                idx = int(tok)
            except ValueError:
                raise ValueError(f"unknown column {tok!r}") from None
            if not 1 <= idx <= len(labels):
                raise ValueError(f"subset index {idx} out of range 1..{len(labels)}")
            out.append(idx - 1)
    if not out:
        raise ValueError("empty subset")
    return np.asarray(sorted(set(out)), dtype=np.int64)


def _parse_matrix(spec):
    """Rows separated by ';', entries by ','."""
    rows = [[float(v) for v in row.split(",")] for row in spec.split(";")]
    return np.asarray(rows, dtype=float)


def _selector_from_args(args):
    opts = {}
    if args.selector == "sis":
        if args.sis_cap is not None:
            opts["d"] = args.sis_cap
        if args.sis_iterations is not None:
            opts["iterations"] = args.sis_iterations
    if args.selector == "lasso-cv" and args.folds is not None:
        opts["folds"] = args.folds
    return make_selector(args.selector, **opts)


def _write_results_csv(path, report):
    """ResultTable: one row per coefficient, sorted by ascending p-value."""
    labels = ["intercept"] + list(report.labels)
    sel = [np.nan] + list(report.selection_freq)
    rows = []
    for j in range(report.beta_hat.shape[0]):
        t = (report.beta_hat[j] / report.se[j]
             if report.se[j] > 0 else np.inf * np.sign(report.beta_hat[j]))
        rows.append((report.p_values[j], labels[j], report.beta_hat[j],
                     report.se[j], t, report.bonferroni[j], sel[j]))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "beta", "se", "t", "p_value", "adjusted_p",
                    "sel_freq"])
        for pval, lbl, beta, se, t, adj, sf in rows:
            w.writerow([lbl, _fmt(beta), _fmt(se), _fmt(t), _fmt(pval),
                        _fmt(adj), _fmt(sf)])


def _dump_fit_json(path, fit, report, variance):
    payload = {
        "beta_hat": fit.beta_hat.tolist(),
        "labels": list(fit.labels),
        "se": report.se.tolist(),
        "ci_lower": report.ci_lower.tolist(),
        "ci_upper": report.ci_upper.tolist(),
        "p_values": report.p_values.tolist(),
        "bonferroni": report.bonferroni.tolist(),
        "v_hat": variance.v_hat.tolist(),
        "v_hat_B": variance.v_hat_B.tolist(),
        "clamped": variance.clamped.astype(int).tolist(),
        "selection_freq": fit.selection_freq.tolist(),
        "plan": {"n": fit.plan.n, "n1": fit.plan.n1, "q": fit.plan.q,
                 "B": fit.plan.B, "seed": fit.plan.seed},
        "splits": [{"b": s.b, "selected": s.selected.tolist(),
                    "stabilized_count": s.stabilized_count,
                    "failed": s.failed.tolist()} for s in fit.splits],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def _cmd_fit(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = load_dataset(args.input, args.response, delimiter=args.delimiter)
    selector = _selector_from_args(args)
    fit = ssglm_fit(ds, args.family, selector, q=args.q, B=args.B,
                    seed=args.seed, n_jobs=args.threads)
    report, variance = infer(fit, alpha=args.alpha)
    _write_results_csv(out / "results.csv", report)
    _dump_fit_json(out / "fit.json", fit, report, variance)
    print(f"wrote {out / 'results.csv'} and {out / 'fit.json'}")
    return 0


def _cmd_contrast(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = load_dataset(args.input, args.response, delimiter=args.delimiter)
    S1 = _parse_subset(args.subset, ds.labels)
    selector = _selector_from_args(args)
    b1, est, plan = subvector_fit(ds, args.family, selector, S1, q=args.q,
                                  B=args.B, seed=args.seed,
                                  n_jobs=args.threads)
    sigma1 = subvector_covariance(plan, est, b1)
    Q = (_parse_matrix(args.contrast_Q) if args.contrast_Q
         else np.eye(S1.size))
    R = (np.asarray([float(v) for v in args.contrast_R.split(",")])
         if args.contrast_R else np.zeros(Q.shape[0]))
    test = contrast_test(b1, sigma1, Q, R)
    payload = {
        "subset": (S1 + 1).tolist(),
        "labels": [ds.labels[i] for i in S1],
        "beta1_hat": b1.tolist(),
        "sigma1_hat": sigma1.tolist(),
        "Q": Q.tolist(), "R": R.tolist(),
        "T": test.T, "df": test.df, "p_value": test.p_value,
    }
    with open(out / "contrast.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    print(f"T = {test.T:.6g} on {test.df} df, p = {test.p_value:.6g}")
    print(f"wrote {out / 'contrast.json'}")
    return 0


def _cmd_simulate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenario = load_scenario(args.scenario)
    if args.sweep_q:
        qs = [float(v) for v in args.sweep_q.split(",")]
        rows = sweep_split_proportion(scenario, qs, n_jobs=args.threads)
        with open(out / "plotdata_q_mse.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["q", "mse_avg", "effective_K"])
            for r in rows:
                w.writerow([_fmt(r["q"]), _fmt(r["mse_avg"]),
                            r["effective_K"]])
        print(f"wrote {out / 'plotdata_q_mse.csv'}")
        return 0
    rep = run_scenario(scenario, n_jobs=args.threads, keep_reps=False)
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["coef", "bias", "se", "sd", "cov_prob", "sel_freq",
                    "mse", "rejection", "is_signal"])
        for row in rep.summary_rows():
            w.writerow([row["coef"], _fmt(row["bias"]), _fmt(row["se"]),
                        _fmt(row["sd"]), _fmt(row["cov_prob"]),
                        _fmt(row["sel_freq"]), _fmt(row["mse"]),
                        _fmt(row["rejection"]), int(row["is_signal"])])
    print(f"mse_avg = {rep.mse_avg:.6g}, effective K = {rep.effective_K}")
    print(f"wrote {out / 'metrics.csv'}")
    return 0


def _apply_config_file(args):
    if not args.config:
        return args
    with open(args.config) as fh:
        cfg = yaml.safe_load(fh) or {}
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    sub = args.subparser            # defaults live on the subcommand parser
    for key, val in cfg.items():
        # flags explicitly given on the command line win
        if sub.get_default(key) == getattr(args, key, None):
            setattr(args, key, val)
    return args


def _add_common(sub):
    sub.add_argument("--config", default=None,
                     help="YAML config file; flags override it")
    sub.add_argument("--family", default="gaussian",
                     choices=["gaussian", "binomial", "poisson"])
    sub.add_argument("--selector", default="sis",
                     choices=["sis", "lasso-cv"])
    sub.add_argument("--sis-cap", dest="sis_cap", type=int, default=None)
    sub.add_argument("--sis-iterations", dest="sis_iterations", type=int,
                     default=None)
    sub.add_argument("--folds", type=int, default=None)
    sub.add_argument("--q", type=float, default=0.5)
    sub.add_argument("--B", type=int, default=500)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out", default="ssglm_out")
    sub.add_argument("--delimiter", default=",",
                     help="field delimiter; use 'tab' for tab-separated")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssglm",
        description="Split-and-smooth estimation and inference for "
                    "high-dimensional GLMs")
    subs = parser.add_subparsers(dest="command", required=True)

    p_fit = subs.add_parser("fit", help="fit all coefficients with CIs")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--response", required=True)
    _add_common(p_fit)
    p_fit.set_defaults(func=_cmd_fit, subparser=p_fit)

    p_con = subs.add_parser("contrast", help="test a contrast on a subvector")
    p_con.add_argument("--input", required=True)
    p_con.add_argument("--response", required=True)
    p_con.add_argument("--subset", required=True,
                       help="comma-separated 1-based indices or labels")
    p_con.add_argument("--contrast-Q", dest="contrast_Q", default=None,
                       help="rows ';'-separated, entries ','-separated")
    p_con.add_argument("--contrast-R", dest="contrast_R", default=None)
    _add_common(p_con)
    p_con.set_defaults(func=_cmd_contrast, subparser=p_con)

    p_sim = subs.add_parser("simulate", help="run a scenario file")
    p_sim.add_argument("--scenario", required=True,
                       help="YAML scenario description")
    p_sim.add_argument("--sweep-q", dest="sweep_q", default=None,
                       help="comma-separated q values for an MSE sweep")
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate, subparser=p_sim)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(args)
        if getattr(args, "delimiter", ",") == "tab":
            args.delimiter = "\t"
        _validate(args)
        return args.func(args)
    except Exception as err:
        code = 1
        for klass, klass_code in _EXIT_CODES.items():
            if isinstance(err, klass):
                code = klass_code
                break
        print(f"error[{code}]: {err}", file=sys.stderr)
        return code


def _validate(args):
    if not 0.0 < args.q < 1.0:
        raise ValueError("--q must be in (0, 1)")
    if args.B < 1:
        raise ValueError("--B must be >= 1")
    if not 0.0 < args.alpha < 1.0:
        raise ValueError("--alpha must be in (0, 1)")
    if args.threads < 1:
        raise ValueError("--threads must be >= 1")


if __name__ == "__main__":
    sys.exit(main())
