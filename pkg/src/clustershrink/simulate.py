"""Seeded Monte Carlo harness: theta generators, experiment runner, and
empirical concentration checks.

theta is held fixed across the trials of one experiment (risk is defined for
a deterministic parameter); random within-cluster placement happens once per
experiment and is seeded separately from the noise. Per-trial noise streams
are derived by counter-based seed splitting, so results are bitwise
deterministic regardless of execution order.
"""

from __future__ import annotations

import json
import csv
from dataclasses import dataclass, fields, replace

import numpy as np

from . import theory
from .clustering import default_delta, estimate_cluster_js
from .estimators import (
    estimate_js,
    estimate_js_positive,
    estimate_lindley,
    estimate_ml,
)
from .selection import select_hybrid

# Sampler identity recorded in output metadata so reruns stay comparable.
RNG_DESCRIPTION = "numpy PCG64, ziggurat standard_normal"


class ConfigError(Exception):
    """Invalid experiment configuration (bad values, unknown keys, bad JSON)."""


@dataclass(frozen=True)
class ThetaSpec:
    """Parameter-vector arrangement.

    kind "two_point" places exact values centers[k] * tau; "clustered" draws
    each cluster member uniformly from center*tau +/- width*tau/2; "uniform"
    spreads n points evenly over [-tau, tau]. fractions give per-cluster
    point counts (integers summing to n) or proportions (summing to 1); when
    empty, clusters are equal-sized, except that a two_point spec with no
    centers defaults to values {tau, -rho*tau} with floor(n*rho/(1+rho))
    points at tau.
    """

    kind: str
    centers: tuple[float, ...] = ()
    widths: tuple[float, ...] = ()
    fractions: tuple[float, ...] = ()
    tau: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if self.kind not in ("two_point", "clustered", "uniform"):
            raise ConfigError(f"unknown theta kind: {self.kind!r}")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        if any(w < 0 for w in self.widths):
            raise ConfigError("widths must be nonnegative")


@dataclass(frozen=True)
class SweepSpec:
    """Range over tau or n for a sweep experiment."""

    variable: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.variable not in ("tau", "n"):
            raise ConfigError(f"sweep variable must be 'tau' or 'n', got {self.variable!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of one averaged-loss experiment."""

    n: int
    theta: ThetaSpec
    estimators: tuple[str, ...]
    sigma: float = 1.0
    trials: int = 1000
    seed: int = 0
    delta: float | None = None
    sweep: SweepSpec | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be a positive integer")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.delta is not None and self.delta <= 0:
            raise ConfigError("delta must be positive when given")
        if not self.estimators:
            raise ConfigError("estimators must be nonempty")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        for label in self.estimators:
            resolve_estimator(label)

    def resolved_delta(self, n: int | None = None) -> float:
        return self.delta if self.delta is not None else default_delta(n or self.n)


@dataclass(frozen=True)
class EstimatorStats:
    """Mean normalized loss of one estimator over the successful trials."""

    label: str
    mean: float
    se: float
    trials_ok: int


@dataclass(frozen=True)
class AggregateResult:
    """Averaged-loss output of run_experiment."""

    stats: tuple[EstimatorStats, ...]
    theta: np.ndarray
    config: ExperimentConfig

    def __getitem__(self, label: str) -> EstimatorStats:
        for s in self.stats:
            if s.label == label:
                return s
        raise KeyError(label)


def placement_rng(seed: int) -> np.random.Generator:
    """RNG stream for within-cluster placement, separate from all noise streams."""
    return np.random.default_rng([_norm_seed(seed), 0])


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial noise stream derived from (seed, trial)."""
    return np.random.default_rng([_norm_seed(seed), 1, trial])


def _norm_seed(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def _resolve_counts(spec: ThetaSpec, n: int, k: int) -> list[int]:
    """Turn spec.fractions into integer cluster sizes summing to n."""
    fr = spec.fractions
    if not fr:
        if spec.kind == "two_point" and not spec.centers:
            n1 = int(np.floor(n * spec.rho / (1.0 + spec.rho)))
            return [n1, n - n1]
        base, extra = divmod(n, k)
        return [base + (j < extra) for j in range(k)]
    if len(fr) != k:
        raise ConfigError(f"fractions length {len(fr)} does not match {k} clusters")
    if all(f <= 1.0 for f in fr) and abs(sum(fr) - 1.0) < 1e-9:
        counts = [int(np.floor(f * n)) for f in fr]
        remainders = [f * n - c for f, c in zip(fr, counts)]
        for j in np.argsort(remainders)[::-1][: n - sum(counts)]:
            counts[j] += 1
        return counts
    counts = [int(f) for f in fr]
    if any(c != f for c, f in zip(counts, fr)) or any(c < 0 for c in counts):
        raise ConfigError("fractions must be nonnegative integers or proportions summing to 1")
    if sum(counts) != n:
        raise ConfigError(f"fractions sum to {sum(counts)}, expected n = {n}")
    return counts


def generate_theta(spec: ThetaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Materialize a theta vector of length n from its arrangement spec.

    Deterministic given the rng state; only "clustered" consumes randomness.
    """
    if n < 1:
        raise ConfigError("n must be a positive integer")
    if spec.kind == "uniform":
        return np.linspace(-spec.tau, spec.tau, n)
    centers = spec.centers if spec.centers else ((1.0, -spec.rho) if spec.kind == "two_point" else ())
    if not centers:
        raise ConfigError("clustered theta spec requires centers")
    counts = _resolve_counts(spec, n, len(centers))
    if spec.kind == "two_point":
        widths = (0.0,) * len(centers)
    else:
        widths = spec.widths if spec.widths else (0.0,) * len(centers)
        if len(widths) == 1:
            widths = widths * len(centers)
        if len(widths) != len(centers):
            raise ConfigError("widths length must match centers")
    parts = []
    for center, width, count in zip(centers, widths, counts):
        mid = center * spec.tau
        if width == 0.0 or count == 0:
            parts.append(np.full(count, mid))
        else:
            half = width * spec.tau / 2.0
            parts.append(mid + rng.uniform(-half, half, size=count))
    return np.concatenate(parts) if parts else np.zeros(0)


def resolve_estimator(label: str):
    """Map an estimator label to a callable (y, sigma, delta) -> estimate array."""
    simple = {
        "ml": lambda y, s, d: estimate_ml(y, s).estimate,
        "js": lambda y, s, d: estimate_js(y, s).estimate,
        "js_plus": lambda y, s, d: estimate_js_positive(y, s).estimate,
        "lindley": lambda y, s, d: estimate_lindley(y, s).estimate,
        "lindley_plus": lambda y, s, d: estimate_lindley(y, s, positive_part=True).estimate,
        "js1": lambda y, s, d: estimate_lindley(y, s, positive_part=True).estimate,
    }
    if label in simple:
        return simple[label]
    if label.startswith("js") and label[2:].isdigit():
        L = int(label[2:])
        if L >= 1 and (L & (L - 1)) == 0:
            return lambda y, s, d: estimate_cluster_js(y, s, L, d).estimate
    if label == "hybrid":
        return lambda y, s, d: select_hybrid(y, s, (1, 2), d)[1].estimate
    if label.startswith("hybrid") and label[6:].isdigit():
        top = int(label[6:])
        if top >= 2 and (top & (top - 1)) == 0:
            candidates = tuple(2**a for a in range(top.bit_length()))
            return lambda y, s, d: select_hybrid(y, s, candidates, d)[1].estimate
    raise ConfigError(f"unknown estimator label: {label!r}")


def run_experiment(config: ExperimentConfig, theta: np.ndarray | None = None) -> AggregateResult:
    """Average normalized losses over config.trials noise realizations.

    theta is generated once (or taken from the argument) and held fixed;
    estimator-level errors are recorded per trial, not fatal.
    """
    n = config.n
    if theta is None:
        theta = generate_theta(config.theta, n, placement_rng(config.seed))
    theta = np.asarray(theta, dtype=float)
    if theta.size != n:
        raise ConfigError("theta length does not match config.n")
    delta = config.resolved_delta()
    funcs = {label: resolve_estimator(label) for label in config.estimators}
    losses = {label: np.full(config.trials, np.nan) for label in config.estimators}
    for t in range(config.trials):
        w = trial_rng(config.seed, t).standard_normal(n)
        y = theta + config.sigma * w
        for label, fn in funcs.items():
            try:
                estimate = fn(y, config.sigma, delta)
            except ValueError:
                continue
            diff = estimate - theta
            losses[label][t] = float(diff @ diff) / n
    stats = []
    for label in config.estimators:
        vals = losses[label][np.isfinite(losses[label])]
        ok = vals.size
        mean = float(vals.mean()) if ok else float("nan")
        se = float(vals.std(ddof=1) / np.sqrt(ok)) if ok > 1 else float("nan")
        stats.append(EstimatorStats(label=label, mean=mean, se=se, trials_ok=ok))
    return AggregateResult(stats=tuple(stats), theta=theta, config=config)


# --- concentration checks -------------------------------------------------

CONCENTRATION_STATISTICS = (
    "y_above",
    "y_below",
    "theta_above",
    "theta_below",
    "count_above",
    "count_below",
    "delta_window",
)


def _kernel_sum(theta: np.ndarray, sigma: float) -> float:
    args = (theta.mean() - theta) / sigma
    return float(np.exp(-0.5 * args * args).sum())


def _predicted_value(statistic: str, theta: np.ndarray, sigma: float, delta: float) -> float:
    n = theta.size
    q = theory.q_function((theta.mean() - theta) / sigma)
    kern = sigma / (n * np.sqrt(2.0 * np.pi)) * _kernel_sum(theta, sigma)
    if statistic == "y_above":
        return float(theta @ q) / n + kern
    if statistic == "y_below":
        return float(theta @ (1.0 - q)) / n - kern
    if statistic == "theta_above":
        return float(theta @ q) / n
    if statistic == "theta_below":
        return float(theta @ (1.0 - q)) / n
    if statistic == "count_above":
        return float(q.sum()) / n
    if statistic == "count_below":
        return 1.0 - float(q.sum()) / n
    if statistic == "delta_window":
        return kern
    raise ConfigError(f"unknown concentration statistic: {statistic!r}")


def _observed_value(statistic: str, y: np.ndarray, theta: np.ndarray, sigma: float, delta: float) -> float:
    n = y.size
    above = y > y.mean()
    if statistic == "y_above":
        return float(y[above].sum()) / n
    if statistic == "y_below":
        return float(y[~above].sum()) / n
    if statistic == "theta_above":
        return float(theta[above].sum()) / n
    if statistic == "theta_below":
        return float(theta[~above].sum()) / n
    if statistic == "count_above":
        return float(above.sum()) / n
    if statistic == "count_below":
        return float((~above).sum()) / n
    if statistic == "delta_window":
        b = float(np.count_nonzero(np.abs(y - y.mean()) <= delta))
        return sigma * sigma / (2.0 * n * delta) * b
    raise ConfigError(f"unknown concentration statistic: {statistic!r}")


@dataclass(frozen=True)
class ConcentrationRow:
    n: int
    predicted: float
    mean_observed: float
    median_abs_dev: float
    max_abs_dev: float
    frac_within_eps: float
    delta_slack: float


@dataclass(frozen=True)
class ConcentrationReport:
    statistic: str
    eps: float
    rows: tuple[ConcentrationRow, ...]

    @property
    def trend_ok(self) -> bool:
        """Median deviation at the largest n is below that at the smallest n."""
        by_n = sorted(self.rows, key=lambda r: r.n)
        return by_n[-1].median_abs_dev < by_n[0].median_abs_dev


def check_concentration(
    statistic: str,
    theta_spec: ThetaSpec,
    sigma: float,
    delta: float | None,
    n_grid,
    trials: int,
    seed: int,
    eps: float = 0.05,
) -> ConcentrationReport:
    """Empirical check that a statistic concentrates at its predicted value.

    For each n in the grid, draws `trials` noise realizations around a fixed
    theta and compares the observed statistic to the deterministic prediction.
    The delta-window row carries the kappa*delta slack bound
    delta / sqrt(2 pi e) from the bias lemma; other statistics have slack 0.
    """
    if statistic not in CONCENTRATION_STATISTICS:
        raise ConfigError(f"unknown concentration statistic: {statistic!r}")
    rows = []
    for n in n_grid:
        n = int(n)
        d = delta if delta is not None else default_delta(n)
        theta = generate_theta(theta_spec, n, placement_rng(seed))
        predicted = _predicted_value(statistic, theta, sigma, d)
        devs = np.empty(trials)
        observed = np.empty(trials)
        for t in range(trials):
            y = theta + sigma * trial_rng(seed, t).standard_normal(n)
            observed[t] = _observed_value(statistic, y, theta, sigma, d)
            devs[t] = abs(observed[t] - predicted)
        slack = d / np.sqrt(2.0 * np.pi * np.e) if statistic == "delta_window" else 0.0
        rows.append(
            ConcentrationRow(
                n=n,
                predicted=predicted,
                mean_observed=float(observed.mean()),
                median_abs_dev=float(np.median(devs)),
                max_abs_dev=float(devs.max()),
                frac_within_eps=float((devs <= eps).mean()),
                delta_slack=float(slack),
            )
        )
    return ConcentrationReport(statistic=statistic, eps=eps, rows=tuple(rows))


# --- delimited output ------------------------------------------------------

def format_number(x) -> str:
    """Render a float at 9 significant digits (integers pass through)."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".9g")


def write_csv(path, fieldnames, rows, metadata=None) -> None:
    """Write rows to a CSV with '#'-prefixed metadata lines above the header.

    Floats are formatted at 9 significant digits. Metadata is written in the
    given key order; no timestamps or environment data are added, so reruns
    with identical inputs produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {value}\n")
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow(
                [format_number(v) if isinstance(v, (int, float, np.floating, np.integer)) else str(v) for v in row]
            )


# --- JSON config loading ---------------------------------------------------

def _dataclass_from_dict(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{name} must be a JSON object")
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown {name} keys: {sorted(unknown)}")
    return data


def theta_spec_from_dict(data: dict) -> ThetaSpec:
    kwargs = dict(_dataclass_from_dict(ThetaSpec, data, "theta"))
    if "kind" not in kwargs:
        raise ConfigError("theta spec requires a 'kind'")
    for key in ("centers", "widths", "fractions"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return ThetaSpec(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    kwargs = dict(_dataclass_from_dict(ExperimentConfig, data, "config"))
    if "n" not in kwargs or "theta" not in kwargs or "estimators" not in kwargs:
        raise ConfigError("config requires 'n', 'theta', and 'estimators'")
    kwargs["theta"] = theta_spec_from_dict(kwargs["theta"])
    kwargs["estimators"] = tuple(kwargs["estimators"])
    if kwargs.get("sweep") is not None:
        sweep = _dataclass_from_dict(SweepSpec, kwargs["sweep"], "sweep")
        if "variable" not in sweep or "values" not in sweep:
            raise ConfigError("sweep requires 'variable' and 'values'")
        kwargs["sweep"] = SweepSpec(variable=sweep["variable"], values=tuple(sweep["values"]))
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    """Read an ExperimentConfig from a JSON file; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(data)


def sweep_experiment(config: ExperimentConfig):
    """Run config once per sweep value, yielding (value, AggregateResult).

    A tau sweep rescales the theta spec; an n sweep changes the dimension.
    Without a sweep, yields the single configured point.
    """
    if config.sweep is None:
        yield (config.theta.tau, run_experiment(config))
        return
    for value in config.sweep.values:
        if config.sweep.variable == "tau":
            point = replace(config, theta=replace(config.theta, tau=float(value)), sweep=None)
        else:
            point = replace(config, n=int(value), sweep=None)
        yield (value, run_experiment(point))
