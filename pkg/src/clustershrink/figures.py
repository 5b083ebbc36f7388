"""Report figures: sweep experiments and theory curves behind each panel.

Every figure is a set of panels. emit_figure_data writes one CSV per panel
(metadata in '#' comment lines, then a header row, values at 9 significant
digits) and, unless disabled, a PNG rendered with the Agg backend. Output is
byte-identical across reruns with the same inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from . import theory
from .clustering import default_delta, estimate_cluster_js
from .estimators import estimate_lindley
from .selection import select_hybrid
from .simulate import (
    RNG_DESCRIPTION,
    ConfigError,
    ExperimentConfig,
    ThetaSpec,
    generate_theta,
    placement_rng,
    run_experiment,
    trial_rng,
    write_csv,
)

DELTA_NOTE = "default 5/sqrt(n)"

# Arrangements reused by several figures: two clusters of equal size at
# +/- tau whose points spread uniformly over half the cluster separation.
FIG4_N_VALUES = (10, 50, 100, 1000)


def fig4_theta_spec(tau: float) -> ThetaSpec:
    return ThetaSpec(kind="clustered", centers=(1.0, -1.0), widths=(0.5, 0.5), tau=float(tau))


# Four n = 1000 arrangements of increasing difficulty for the selector:
# (a) unequal clusters close together, (b) exact two-point values,
# (c) tight unequal clusters, (d) no cluster structure at all.
FIG5_SPECS = {
    "a": ThetaSpec(kind="clustered", centers=(0.25, -1.0), widths=(0.5, 0.5), fractions=(300, 700), tau=1.0),
    "b": ThetaSpec(kind="two_point", centers=(1.0, -0.25), fractions=(200, 800), tau=1.0),
    "c": ThetaSpec(kind="clustered", centers=(1.0, -1.0), widths=(0.125, 0.125), fractions=(300, 700), tau=1.0),
    "d": ThetaSpec(kind="uniform", tau=1.0),
}

FIG7_SPECS = {
    "a": ThetaSpec(kind="clustered", centers=(1.0, -1.0), widths=(0.5, 0.5), tau=2.0),
    "b": ThetaSpec(kind="clustered", centers=(1.0, -1.0), widths=(0.25, 0.25), tau=5.0),
    "c": ThetaSpec(kind="clustered", centers=(1.0, -1.0), widths=(0.5, 0.5), tau=0.5),
    "d": ThetaSpec(kind="uniform", tau=2.0),
}

FIG8_CENTERS = (1.5, 0.9, -0.5, -1.25)


@dataclass(frozen=True)
class PanelResult:
    """Rows and metadata of one figure panel, ready to serialize."""

    figure: str
    panel: str
    sweep_name: str
    rows: tuple[tuple, ...]
    metadata: dict


def _grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    count = int(round((stop - start) / step)) + 1
    return tuple(float(start + k * step) for k in range(count))


_FIGURE_DEFAULTS = {
    "fig1": {"theta_norms": _grid(0.0, 8.0, 0.5), "trials": 2000, "seed": 0},
    "fig2": {"tau_values": _grid(0.0, 10.0, 0.25)},
    "fig3": {"tau_values": _grid(0.0, 10.0, 0.25)},
    "fig4": {"tau_values": _grid(0.0, 10.0, 0.5), "n_values": FIG4_N_VALUES, "trials": 400, "seed": 0},
    "fig5": {"tau_values": _grid(0.0, 10.0, 0.5), "trials": 400, "seed": 0},
    "fig6": {"tau_values": _grid(0.0, 10.0, 0.5), "trials": 500, "seed": 0},
    "fig7": {"n_values": (50, 100, 200, 500, 1000), "trials": 400, "seed": 0},
    "fig8": {"tau_values": _grid(0.0, 10.0, 0.5), "trials": 300, "seed": 0},
}


def figure_names() -> tuple[str, ...]:
    return tuple(_FIGURE_DEFAULTS)


def _resolve_settings(figure: str, overrides) -> dict:
    if figure not in _FIGURE_DEFAULTS:
        raise ConfigError(f"unknown figure: {figure!r} (choose from {', '.join(figure_names())})")
    settings = dict(_FIGURE_DEFAULTS[figure])
    for key, value in (overrides or {}).items():
        if key not in settings:
            raise ConfigError(f"override {key!r} is not supported for {figure}")
        if key in ("trials", "seed"):
            settings[key] = int(value)
        else:
            values = tuple(float(v) for v in value)
            if not values:
                raise ConfigError(f"override {key!r} must be nonempty")
            settings[key] = values
    return settings


def _mc_rows(theta_spec_for, sweep_values, n, estimators, trials, seed):
    """Run one experiment per sweep value; rows are (x, label, mean, se)."""
    rows = []
    for x in sweep_values:
        config = ExperimentConfig(
            n=n, theta=theta_spec_for(x), estimators=estimators, trials=trials, seed=seed
        )
        result = run_experiment(config)
        for st in result.stats:
            rows.append((x, st.label, st.mean, st.se))
    return rows


def _meta(figure, panel, sweep_name, theta_desc, **extra) -> dict:
    meta = {"figure": figure, "panel": panel or "-", "sweep": sweep_name, "theta": theta_desc}
    meta.update(extra)
    meta["rng"] = RNG_DESCRIPTION
    return meta


def _fig1(settings) -> list[PanelResult]:
    n = 10
    estimators = ("js", "js_plus", "lindley", "lindley_plus")
    arrangements = (
        ("a", (1.0, -1.0), "half the coordinates at +|theta|/sqrt(n), half at the negative"),
        ("b", (1.0,), "all coordinates equal to |theta|/sqrt(n)"),
    )
    panels = []
    for panel, centers, desc in arrangements:
        spec_for = lambda norm, c=centers: ThetaSpec(kind="two_point", centers=c, tau=norm / np.sqrt(n))
        rows = _mc_rows(spec_for, settings["theta_norms"], n, estimators, settings["trials"], settings["seed"])
        meta = _meta("fig1", panel, "theta_norm", desc, n=n, trials=settings["trials"], seed=settings["seed"])
        panels.append(PanelResult("fig1", panel, "theta_norm", tuple(rows), meta))
    return panels


def _two_point_theta(tau, rho, n):
    # default two-point arrangement: floor(n rho / (1 + rho)) points at tau,
    # the rest at -rho tau
    spec = ThetaSpec(kind="two_point", tau=tau, rho=rho)
    return generate_theta(spec, n, placement_rng(0))


def _fig2(settings) -> list[PanelResult]:
    n, sigma = 1000, 1.0
    panels = []
    for panel, rho in (("a", 0.1), ("b", 0.5), ("c", 1.0)):
        rows = []
        for tau in settings["tau_values"]:
            theta = _two_point_theta(tau, rho, n)
            const = theory.theory_two_cluster(theta, sigma)
            rows.append((tau, "theory_js_plus", theory.asymptotic_loss("jsplus", const, sigma), 0.0))
            rows.append((tau, "theory_js1", theory.asymptotic_loss("lindley", const, sigma), 0.0))
            rows.append((tau, "theory_js2", theory.asymptotic_loss("cluster", const, sigma), 0.0))
        desc = f"two values tau and -{rho}*tau, floor(n*rho/(1+rho)) points at tau"
        meta = _meta("fig2", panel, "tau", desc, n=n, rho=rho)
        panels.append(PanelResult("fig2", panel, "tau", tuple(rows), meta))
    return panels


def _refined_four_cluster_mu(theta, sigma):
    mu = np.array([])
    mu = theory.refine_separators(theta, sigma, mu)
    mu = theory.refine_separators(theta, sigma, mu)
    return mu


def _fig3(settings) -> list[PanelResult]:
    n, sigma = 1000, 1.0
    panels = []
    arrangements = []
    for idx, rho in enumerate((0.1, 0.5, 1.0)):
        arrangements.append((chr(ord("a") + idx), rho, "two"))
    for idx, rho in enumerate((0.1, 0.5, 1.0)):
        arrangements.append((chr(ord("d") + idx), rho, "four"))
    for panel, rho, shape in arrangements:
        rows = []
        for tau in settings["tau_values"]:
            if shape == "two":
                theta = _two_point_theta(tau, rho, n)
                desc = f"two values tau and -{rho}*tau, floor(n*rho/(1+rho)) points at tau"
            else:
                spec = ThetaSpec(kind="two_point", centers=(1.0, rho, -rho, -1.0), tau=tau)
                theta = generate_theta(spec, n, placement_rng(0))
                desc = f"four equal-sized groups at +/-tau and +/-{rho}*tau"
            const2 = theory.theory_two_cluster(theta, sigma)
            mu4 = _refined_four_cluster_mu(theta, sigma)
            const4 = theory.theory_L_cluster(theta, sigma, mu4)
            rows.append((tau, "theory_js2", theory.asymptotic_loss("cluster", const2, sigma), 0.0))
            rows.append((tau, "theory_js4", theory.asymptotic_loss("cluster", const4, sigma), 0.0))
        meta = _meta("fig3", panel, "tau", desc, n=n, rho=rho)
        panels.append(PanelResult("fig3", panel, "tau", tuple(rows), meta))
    return panels


def _fig4(settings) -> list[PanelResult]:
    estimators = ("js_plus", "js1", "js2", "hybrid")
    panels = []
    for idx, n in enumerate(settings["n_values"]):
        n = int(n)
        panel = chr(ord("a") + idx)
        rows = _mc_rows(fig4_theta_spec, settings["tau_values"], n, estimators, settings["trials"], settings["seed"])
        desc = "two equal clusters at +/-tau, each spread uniformly over width 0.5*tau"
        meta = _meta(
            "fig4", panel, "tau", desc,
            n=n, trials=settings["trials"], seed=settings["seed"], delta=DELTA_NOTE,
        )
        panels.append(PanelResult("fig4", panel, "tau", tuple(rows), meta))
    return panels


_FIG5_DESCRIPTIONS = {
    "a": "300 points near 0.25*tau and 700 near -tau, widths 0.5*tau",
    "b": "200 points exactly at tau and 800 at -0.25*tau",
    "c": "300 points near tau and 700 near -tau, widths 0.125*tau",
    "d": "n points evenly spaced on [-tau, tau]",
}


def _fig5(settings) -> list[PanelResult]:
    n = 1000
    estimators = ("js_plus", "js1", "js2", "hybrid")
    panels = []
    for panel, base_spec in FIG5_SPECS.items():
        spec_for = lambda tau, s=base_spec: replace(s, tau=float(tau))
        rows = _mc_rows(spec_for, settings["tau_values"], n, estimators, settings["trials"], settings["seed"])
        meta = _meta(
            "fig5", panel, "tau", _FIG5_DESCRIPTIONS[panel],
            n=n, trials=settings["trials"], seed=settings["seed"], delta=DELTA_NOTE,
        )
        panels.append(PanelResult("fig5", panel, "tau", tuple(rows), meta))
    return panels


def _fig6(settings) -> list[PanelResult]:
    """Selection diagnostic: how often the hybrid picks each candidate and
    how often its pick matches the realized-loss oracle."""
    n, sigma = 1000, 1.0
    trials, seed = settings["trials"], settings["seed"]
    delta = default_delta(n)
    rows = []
    for tau in settings["tau_values"]:
        theta = generate_theta(fig4_theta_spec(tau), n, placement_rng(seed))
        picks = {1: 0, 2: 0}
        matches = 0
        for t in range(trials):
            y = theta + sigma * trial_rng(seed, t).standard_normal(n)
            selection, _ = select_hybrid(y, sigma, (1, 2), delta)
            e1 = estimate_lindley(y, sigma, positive_part=True).estimate - theta
            e2 = estimate_cluster_js(y, sigma, 2, delta).estimate - theta
            oracle = 1 if float(e1 @ e1) <= float(e2 @ e2) else 2
            picks[selection.chosen] += 1
            matches += selection.chosen == oracle
        for label, count in (("pick_js1", picks[1]), ("pick_js2", picks[2]), ("oracle_match", matches)):
            p = count / trials
            rows.append((tau, label, p, float(np.sqrt(p * (1.0 - p) / trials))))
    desc = "two equal clusters at +/-tau, widths 0.5*tau (selection frequencies, not losses)"
    meta = _meta("fig6", "", "tau", desc, n=n, trials=trials, seed=seed, delta=DELTA_NOTE)
    return [PanelResult("fig6", "", "tau", tuple(rows), meta)]


_FIG7_DESCRIPTIONS = {
    "a": "two equal clusters at +/-2, width 1",
    "b": "two equal clusters at +/-5, width 1.25",
    "c": "two equal clusters at +/-0.5, width 0.25",
    "d": "n points evenly spaced on [-2, 2]",
}


def _fig7(settings) -> list[PanelResult]:
    sigma = 1.0
    estimators = ("js1", "js2", "hybrid")
    panels = []
    for panel, spec in FIG7_SPECS.items():
        rows = []
        for n in settings["n_values"]:
            n = int(n)
            config = ExperimentConfig(
                n=n, theta=spec, estimators=estimators,
                trials=settings["trials"], seed=settings["seed"],
            )
            result = run_experiment(config)
            for st in result.stats:
                rows.append((n, st.label, st.mean, st.se))
            const = theory.theory_two_cluster(result.theta, sigma)
            t1 = theory.asymptotic_loss("lindley", const, sigma)
            t2 = theory.asymptotic_loss("cluster", const, sigma)
            rows.append((n, "theory_js1", t1, 0.0))
            rows.append((n, "theory_js2", t2, 0.0))
            rows.append((n, "theory_hybrid", min(t1, t2), 0.0))
        meta = _meta(
            "fig7", panel, "n", _FIG7_DESCRIPTIONS[panel],
            trials=settings["trials"], seed=settings["seed"], delta=DELTA_NOTE,
        )
        panels.append(PanelResult("fig7", panel, "n", tuple(rows), meta))
    return panels


def _fig8(settings) -> list[PanelResult]:
    n = 1000
    estimators = ("js1", "js2", "js4", "hybrid4")
    panels = []
    for panel, width in (("a", 0.5), ("b", 0.25)):
        spec_for = lambda tau, w=width: ThetaSpec(
            kind="clustered", centers=FIG8_CENTERS, widths=(w,) * 4, tau=float(tau)
        )
        rows = _mc_rows(spec_for, settings["tau_values"], n, estimators, settings["trials"], settings["seed"])
        desc = f"four equal clusters at (1.5, 0.9, -0.5, -1.25)*tau, widths {width}*tau"
        meta = _meta(
            "fig8", panel, "tau", desc,
            n=n, trials=settings["trials"], seed=settings["seed"], delta=DELTA_NOTE,
        )
        panels.append(PanelResult("fig8", panel, "tau", tuple(rows), meta))
    return panels


_FIGURE_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
}

_X_LABELS = {"tau": "tau", "n": "n", "theta_norm": "||theta||"}


def build_figure(figure: str, overrides=None) -> list[PanelResult]:
    """Compute a figure's panels without touching the filesystem."""
    settings = _resolve_settings(figure, overrides)
    return _FIGURE_BUILDERS[figure](settings)


def _render_panel(panel: PanelResult, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    labels = list(dict.fromkeys(row[1] for row in panel.rows))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label in labels:
        pts = [(x, m, s) for (x, lab, m, s) in panel.rows if lab == label]
        xs = [p[0] for p in pts]
        means = [p[1] for p in pts]
        errs = [p[2] for p in pts]
        if any(e > 0 for e in errs):
            ax.errorbar(xs, means, yerr=errs, label=label, linewidth=1.2, capsize=2)
        else:
            style = "--" if label.startswith("theory") else "-"
            ax.plot(xs, means, style, label=label, linewidth=1.4)
    ax.set_xlabel(_X_LABELS.get(panel.sweep_name, panel.sweep_name))
    ax.set_ylabel("selection frequency" if panel.figure == "fig6" else "mean squared error / n")
    ax.set_title(panel.figure + panel.panel)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def emit_figure_data(figure: str, out_dir, overrides=None, render=True) -> list[str]:
    """Write one CSV (and optionally one PNG) per panel; returns the paths.

    overrides may adjust the keys the figure actually uses (trials, seed,
    tau_values, n_values, theta_norms); anything else is rejected.
    """
    panels = build_figure(figure, overrides)
    os.makedirs(out_dir, exist_ok=True)
    fieldnames_for = lambda p: (p.sweep_name, "estimator", "mean_loss", "std_error")
    written = []
    for panel in panels:
        stem = panel.figure + panel.panel
        csv_path = os.path.join(out_dir, stem + ".csv")
        write_csv(csv_path, fieldnames_for(panel), panel.rows, panel.metadata)
        written.append(csv_path)
        if render:
            png_path = os.path.join(out_dir, stem + ".png")
            _render_panel(panel, png_path)
            written.append(png_path)
    return written
