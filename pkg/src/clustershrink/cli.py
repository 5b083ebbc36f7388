"""Command-line interface.

Subcommands: estimate (denoise a vector from a file), simulate (averaged-loss
Monte Carlo from a JSON config), theory (asymptotic constants for a
deterministic arrangement), figures (emit report CSVs and plots), and
check-concentration (empirical validation of the concentration predictions).

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import theory
from .clustering import estimate_cluster_js
from .estimators import (
    EstimatorOutput,
    estimate_js,
    estimate_js_positive,
    estimate_lindley,
    estimate_ml,
)
from .figures import emit_figure_data, figure_names
from .selection import select_hybrid
from .simulate import (
    ConfigError,
    check_concentration,
    format_number,
    generate_theta,
    load_config,
    placement_rng,
    sweep_experiment,
    theta_spec_from_dict,
    write_csv,
)


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _read_vector(path: str) -> np.ndarray:
    """Load an observation vector: a JSON array, or one value per line."""
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, list):
            raise ConfigError(f"{path} must contain a JSON array of numbers")
        try:
            return np.array([float(v) for v in data])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path} contains a non-numeric entry") from exc
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: non-numeric value {text!r}") from exc
    return np.array(values)


def _parse_candidates(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--candidates must be comma-separated integers, got {text!r}") from exc
    if not values:
        raise ConfigError("--candidates must be nonempty")
    return values


def _run_estimator(label, y, sigma, delta, candidates):
    """Dispatch an estimator label; returns (EstimatorOutput, diagnostics)."""
    is_hybrid = label == "hybrid" or (label.startswith("hybrid") and label[6:].isdigit())
    if is_hybrid:
        if candidates is None:
            if label == "hybrid":
                candidates = (1, 2)
            else:
                top = int(label[6:])
                if top < 2 or top & (top - 1):
                    raise ConfigError(f"hybrid cluster counts must be powers of two, got {label!r}")
                candidates = tuple(2**a for a in range(top.bit_length()))
        selection, output = select_hybrid(y, sigma, candidates, delta)
        diagnostics = {"candidates": ",".join(str(c) for c in sorted(set(int(c) for c in candidates)))}
        diagnostics["chosen_clusters"] = selection.chosen
        for L in sorted(selection.losses.per_candidate):
            diagnostics[f"loss_estimate[{L}]"] = selection.losses.per_candidate[L]
        if selection.losses.ineligible:
            diagnostics["ineligible"] = ",".join(str(L) for L in sorted(selection.losses.ineligible))
        return output, diagnostics
    if candidates is not None:
        raise ConfigError("--candidates applies only to hybrid estimators")
    simple = {
        "ml": lambda: estimate_ml(y, sigma),
        "js": lambda: estimate_js(y, sigma),
        "js_plus": lambda: estimate_js_positive(y, sigma),
        "lindley": lambda: estimate_lindley(y, sigma),
        "lindley_plus": lambda: estimate_lindley(y, sigma, positive_part=True),
        "js1": lambda: estimate_lindley(y, sigma, positive_part=True),
    }
    if label in simple:
        return simple[label](), {}
    if label.startswith("js") and label[2:].isdigit():
        L = int(label[2:])
        if L >= 1 and (L & (L - 1)) == 0:
            return estimate_cluster_js(y, sigma, L, delta), {"clusters": L}
        raise ConfigError(f"cluster counts must be powers of two, got {label!r}")
    raise ConfigError(f"unknown estimator label: {label!r}")


def _cmd_estimate(args) -> int:
    y = _read_vector(args.input)
    candidates = _parse_candidates(args.candidates) if args.candidates else None
    output, diagnostics = _run_estimator(args.estimator, y, args.sigma, args.delta, candidates)
    lines = [
        f"# estimator: {args.estimator}",
        f"# n: {y.size}",
        f"# sigma: {format_number(args.sigma)}",
    ]
    if args.delta is not None:
        lines.append(f"# delta: {format_number(args.delta)}")
    for key, value in diagnostics.items():
        text = format_number(value) if isinstance(value, float) else value
        lines.append(f"# {key}: {text}")
    lines.append(f"# shrinkage_factor: {format_number(output.shrinkage_factor)}")
    lines.extend(format_number(v) for v in output.estimate)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _theta_description(spec) -> str:
    parts = [spec.kind]
    if spec.centers:
        parts.append(f"centers={list(spec.centers)}")
    if spec.widths:
        parts.append(f"widths={list(spec.widths)}")
    if spec.fractions:
        parts.append(f"fractions={list(spec.fractions)}")
    parts.append(f"tau={format_number(spec.tau)}")
    parts.append(f"rho={format_number(spec.rho)}")
    return " ".join(parts)


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    rows = []
    if config.sweep is None:
        fieldnames = ("estimator", "mean_loss", "std_error", "trials_ok")
        for _, result in sweep_experiment(config):
            for st in result.stats:
                rows.append((st.label, st.mean, st.se, st.trials_ok))
    else:
        fieldnames = (config.sweep.variable, "estimator", "mean_loss", "std_error", "trials_ok")
        for value, result in sweep_experiment(config):
            for st in result.stats:
                rows.append((value, st.label, st.mean, st.se, st.trials_ok))
    if args.out:
        from .simulate import RNG_DESCRIPTION

        metadata = {
            "n": config.n,
            "sigma": format_number(config.sigma),
            "trials": config.trials,
            "seed": config.seed,
            "delta": format_number(config.delta) if config.delta is not None else "default 5/sqrt(n)",
            "theta": _theta_description(config.theta),
            "rng": RNG_DESCRIPTION,
        }
        write_csv(args.out, fieldnames, rows, metadata)
    else:
        widths = [max(len(str(f)), 14) for f in fieldnames]
        print("  ".join(str(f).ljust(w) for f, w in zip(fieldnames, widths)))
        for row in rows:
            cells = [format_number(v) if isinstance(v, float) else str(v) for v in row]
            print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return 0


_THEORY_KEYS = {"n", "sigma", "theta", "clusters", "seed"}


def _cmd_theory(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("theory config must be a JSON object")
    unknown = set(data) - _THEORY_KEYS
    if unknown:
        raise ConfigError(f"unknown theory config keys: {sorted(unknown)}")
    if "n" not in data or "theta" not in data:
        raise ConfigError("theory config requires 'n' and 'theta'")
    n = int(data["n"])
    sigma = float(data.get("sigma", 1.0))
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    clusters = int(data.get("clusters", 2))
    if clusters < 1 or clusters & (clusters - 1):
        raise ConfigError(f"clusters must be a power of two, got {clusters}")
    spec = theta_spec_from_dict(data["theta"])
    theta = generate_theta(spec, n, placement_rng(int(data.get("seed", 0))))

    mu = np.array([])
    while len(mu) + 1 < clusters:
        refined = theory.refine_separators(theta, sigma, mu)
        if len(refined) == len(mu):
            break
        mu = refined
    constants = theory.theory_L_cluster(theta, sigma, mu)
    lines = [
        f"# n: {n}",
        f"# sigma: {format_number(sigma)}",
        f"# clusters: {clusters}",
        f"# theta: {_theta_description(spec)}",
        f"gamma: {format_number(constants.gamma)}",
        f"rho: {format_number(constants.rho)}",
        f"beta: {format_number(constants.beta)}",
        f"alpha: {format_number(constants.alpha)}",
        "c: " + " ".join(format_number(v) for v in constants.c),
        "mu: " + (" ".join(format_number(v) for v in constants.mu) if len(constants.mu) else "(none)"),
        f"loss_js_plus: {format_number(theory.asymptotic_loss('jsplus', constants, sigma))}",
        f"loss_js1: {format_number(theory.asymptotic_loss('lindley', constants, sigma))}",
        f"loss_cluster: {format_number(theory.asymptotic_loss('cluster', constants, sigma))}",
    ]
    print("\n".join(lines))
    return 0


def _cmd_figures(args) -> int:
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    written = emit_figure_data(args.figure, args.out_dir, overrides or None, render=not args.no_plots)
    for path in written:
        print(path)
    return 0


_CONCENTRATION_KEYS = {"statistic", "theta", "sigma", "delta", "n_grid", "trials", "seed", "eps"}


def _cmd_check_concentration(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("concentration config must be a JSON object")
    unknown = set(data) - _CONCENTRATION_KEYS
    if unknown:
        raise ConfigError(f"unknown concentration config keys: {sorted(unknown)}")
    if "statistic" not in data or "theta" not in data:
        raise ConfigError("concentration config requires 'statistic' and 'theta'")
    report = check_concentration(
        statistic=data["statistic"],
        theta_spec=theta_spec_from_dict(data["theta"]),
        sigma=float(data.get("sigma", 1.0)),
        delta=float(data["delta"]) if data.get("delta") is not None else None,
        n_grid=tuple(int(v) for v in data.get("n_grid", (100, 1000))),
        trials=int(data.get("trials", 200)),
        seed=int(data.get("seed", 0)),
        eps=float(data.get("eps", 0.05)),
    )
    header = ("n", "predicted", "mean_observed", "median_abs_dev", "max_abs_dev", "frac_within_eps", "slack")
    widths = [max(len(h), 15) for h in header]
    print(f"# statistic: {report.statistic}")
    print(f"# eps: {format_number(report.eps)}")
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in report.rows:
        cells = (
            str(row.n),
            format_number(row.predicted),
            format_number(row.mean_observed),
            format_number(row.median_abs_dev),
            format_number(row.max_abs_dev),
            format_number(row.frac_within_eps),
            format_number(row.delta_slack),
        )
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    if len(report.rows) > 1:
        print(f"deviation_shrinks_with_n: {'yes' if report.trend_ok else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="clustershrink",
        description="Cluster-based shrinkage estimation for Gaussian sequence data.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_est = sub.add_parser("estimate", help="denoise an observation vector from a file")
    p_est.add_argument("--input", required=True, help="JSON array (.json) or one value per line")
    p_est.add_argument("--sigma", required=True, type=float, help="noise standard deviation")
    p_est.add_argument("--estimator", default="js2", help="ml, js, js_plus, lindley, lindley_plus, js<L>, hybrid, hybrid<L>")
    p_est.add_argument("--delta", type=float, default=None, help="boundary window half-width (default 5/sqrt(n))")
    p_est.add_argument("--candidates", default=None, help="comma-separated cluster counts for hybrid selection")
    p_est.add_argument("--out", default=None, help="output file (default stdout)")
    p_est.set_defaults(func=_cmd_estimate)

    p_sim = sub.add_parser("simulate", help="run an averaged-loss experiment from a JSON config")
    p_sim.add_argument("--config", required=True, help="JSON experiment config")
    p_sim.add_argument("--out", default=None, help="CSV output path (default: table on stdout)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_thy = sub.add_parser("theory", help="asymptotic constants for a deterministic arrangement")
    p_thy.add_argument("--config", required=True, help="JSON with n, theta, and optional sigma/clusters/seed")
    p_thy.set_defaults(func=_cmd_theory)

    p_fig = sub.add_parser("figures", help="emit report figure data (CSV) and plots (PNG)")
    p_fig.add_argument("--figure", required=True, choices=figure_names())
    p_fig.add_argument("--out-dir", default="figures", help="output directory (default ./figures)")
    p_fig.add_argument("--trials", type=int, default=None, help="override Monte Carlo trials")
    p_fig.add_argument("--seed", type=int, default=None, help="override base seed")
    p_fig.add_argument("--no-plots", action="store_true", help="write CSVs only")
    p_fig.set_defaults(func=_cmd_figures)

    p_con = sub.add_parser("check-concentration", help="validate concentration predictions empirically")
    p_con.add_argument("--config", required=True, help="JSON with statistic, theta, and optional overrides")
    p_con.set_defaults(func=_cmd_check_concentration)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
