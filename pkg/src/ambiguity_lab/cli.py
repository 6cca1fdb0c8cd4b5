"""Command-line front end: ``ambiguity-lab <subcommand> [--flags]``.

Every run writes into its own timestamped directory under the output root
(``--out``, else ``$AMBIGUITY_LAB_OUT``, else ``./runs``)::

    manifest.txt   resolved configuration as key=value (feed it back with
                   --config to reproduce the run), plus package versions
    *.csv          tables
    *.json         one report per fitted specification
    errors.csv     label, error type and message of every spec that failed

The exit status is 0 when every specification succeeded, 1 when any failed
(partial results are still written), 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import warnings
from dataclasses import replace
from datetime import datetime, timezone
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np
import pandas as pd

from ambiguity_lab import __version__
from ambiguity_lab.econ import (
    DesignSpec,
    add_centrism,
    build_lags,
    fit,
    fit_interaction,
    wald_joint_test,
)
from ambiguity_lab.errors import AmbiguityLabError, DomainError
from ambiguity_lab.game import (
    PROFILES,
    SweepGrid,
    canonical_game,
    contest_win_probabilities,
    monte_carlo_check,
    phase_table,
    solve,
    sweep_grid,
)
from ambiguity_lab.game.core import parse_profile, profile_label
from ambiguity_lab.ingest import (
    CHES_WIDE_SCHEMA,
    AggregationPolicy,
    aggregate_party_year,
    read_expert_table,
    read_panel,
    write_panel,
)
from ambiguity_lab.synth import (
    ContextParams,
    ContextTable,
    DGPParams,
    PanelSpec,
    generate_context,
    generate_expert_table,
    generate_panel,
)

OUT_ENV = "AMBIGUITY_LAB_OUT"
# run-control options that are not echoed as reproducible configuration
_META = {"command", "config", "out", "handler"}


class ConfigError(AmbiguityLabError):
    pass


# --- parsing helpers --------------------------------------------------------

def _rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _rational_list(text):
    return [_rational(t) for t in _split(text)]


def _split(text, sep=","):
    return [t.strip() for t in str(text).split(sep) if t.strip()]


def _schema(text):
    """``field=column,...`` -> dict; ``ches`` selects the built-in wide layout."""
    if text in ("", None):
        return None
    if text == "ches":
        return dict(CHES_WIDE_SCHEMA)
    out = {}
    for item in _split(text):
        key, sep, val = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"schema binding {item!r} is not field:column")
        out[key.strip()] = val.strip()
    return out


def _instruments(text):
    """``endog=z1+z2;endog2=z1+z2`` -> dict."""
    if not text:
        return None
    out = {}
    for item in _split(text, ";"):
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"instrument binding {item!r} is not endog=z1+z2")
        out[key.strip()] = _split(val, "+")
    return out


def _fe(text):
    return tuple(tuple(_split(d, ":")) if ":" in d else d for d in _split(text))


def read_config(path):
    """Parse a ``key=value`` file; ``#`` starts a comment, blank lines are ignored."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"{path}:{n}: expected key=value, got {raw.strip()!r}")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


# --- run directory ------------------------------------------------------------

class Run:
    """A timestamped output directory with manifest and error index."""

    def __init__(self, root, command, config):
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
        root = Path(root)
        path = root / f"{stamp}-{command}"
        n = 1
        while path.exists():
            path = root / f"{stamp}-{command}-{n}"
            n += 1
        path.mkdir(parents=True)
        self.path = path
        self.errors = []
        self._write_manifest(command, config)

    def _write_manifest(self, command, config):
        lines = [f"# ambiguity-lab run, {datetime.now(timezone.utc).isoformat()}",
                 f"# command: {command}", f"# argv: {' '.join(sys.argv[1:])}"]
        for mod in ("numpy", "scipy", "pandas"):
            try:
                lines.append(f"# {mod}={metadata.version(mod)}")
            except metadata.PackageNotFoundError:
                pass
        lines.append(f"# ambiguity_lab={__version__}")
        lines.append(f"# python={platform.python_version()}")
        for key in sorted(config):
            lines.append(f"{key}={_echo(config[key])}")
        (self.path / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_text(self, name, text):
        (self.path / name).write_text(text, encoding="utf-8")

    def write_frame(self, name, frame):
        frame.to_csv(self.path / name, index=False, lineterminator="\n")

    def write_json(self, name, obj):
        self.write_text(name, json.dumps(obj, indent=2, default=str) + "\n")

    def attempt(self, label, func, *args, **kwargs):
        """Run ``func``; on a library error record it under ``label`` and return None."""
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                out = func(*args, **kwargs)
            for w in caught:
                print(f"[{label}] warning: {w.message}", file=sys.stderr)
            return out
        except (AmbiguityLabError, ValueError, KeyError) as exc:
            self.errors.append((label, type(exc).__name__, str(exc)))
            print(f"[{label}] {type(exc).__name__}: {exc}", file=sys.stderr)
            return None

    def close(self):
        with open(self.path / "errors.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["label", "error", "message"])
            w.writerows(self.errors)
        return 1 if self.errors else 0


def _echo(value):
    if value is None:
        return ""
    if isinstance(value, dict):
        if value and all(isinstance(v, list) for v in value.values()):
            return ";".join(f"{k}={'+'.join(v)}" for k, v in value.items())
        return ",".join(f"{k}:{v}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return ",".join(":".join(v) if isinstance(v, tuple) else str(v) for v in value)
    return str(value)


# --- subcommands ----------------------------------------------------------------

def cmd_solve(args, run):
    report = run.attempt("solve", lambda: solve(canonical_game(args.k, args.l), eps_b=args.eps_b))
    if report is None:
        return
    payoffs = {profile_label(p): [str(v) for v in report.payoffs.entries[p]] for p in PROFILES}
    run.write_json("solve.json", {
        "k": str(args.k), "l": str(args.l), "regime": str(report.regime),
        "equilibria": [profile_label(p) for p in report.pure_equilibria],
        "payoffs_centrist_extremist": payoffs,
        "thresholds": {k: str(v) for k, v in report.thresholds.items()},
        "consistent_with_analytic": report.consistent(),
    })
    print(f"k={args.k} l={args.l} regime={report.regime} "
          f"equilibria={','.join(profile_label(p) for p in report.pure_equilibria)}")


def cmd_sweep(args, run):
    if args.k_values:
        ks = args.k_values
    else:
        if args.k_steps < 1:
            raise ConfigError("k_steps must be >= 1")
        step = (args.k_max - args.k_min) / max(args.k_steps - 1, 1)
        ks = [args.k_min + i * step for i in range(args.k_steps)]
    grid_kw = {"l_values": tuple(args.l_values)} if args.l_values else {"l_offset": args.l_offset}
    grid = SweepGrid(tuple(ks), **grid_kw)
    records = run.attempt("sweep", sweep_grid, grid, eps_b=args.eps_b, workers=args.workers)
    if records is not None:
        run.write_text("phase.csv", phase_table(records))
        print(f"{len(records)} cells written to {run.path / 'phase.csv'}")


def cmd_mc_check(args, run):
    game = canonical_game(args.k, args.l)
    profiles = PROFILES if args.profile == "all" else (parse_profile(args.profile),)
    rows = []
    for prof in profiles:
        exact = contest_win_probabilities(game, prof)[0]
        for s in range(args.seeds):
            seed = args.seed + s
            freq, se = monte_carlo_check(game, prof, args.samples, seed)
            z = (freq - float(exact)) / se if se > 0 else (0.0 if freq == float(exact) else np.inf)
            rows.append({"profile": profile_label(prof), "seed": seed, "exact_pC": str(exact),
                         "freq_pC": freq, "se": se, "z": z, "within_3se": abs(z) <= 3})
    frame = pd.DataFrame(rows)
    run.write_frame("mc_check.csv", frame)
    bad = frame[~frame["within_3se"]]
    for _, r in bad.iterrows():
        run.errors.append((f"mc-{r['profile']}-seed{r['seed']}", "MonteCarloMismatch", f"z={r['z']:.2f}"))
    print(f"{len(frame)} checks, {len(bad)} outside 3 SE")


def _panel_spec(args):
    return PanelSpec(n_countries=args.countries, n_waves=args.waves, parties_per_country=args.parties)


def _dgp(args, form=None):
    return DGPParams(form=form or args.form, persistence=args.persistence, feedback=args.feedback)


def cmd_gen(args, run):
    panel = generate_panel(_panel_spec(args), _dgp(args), args.seed)
    if args.context:
        ctx = generate_context(panel, ContextParams(theta=args.theta, dimension=args.theta_dimension), args.seed)
        run.write_frame("context_country_year.csv", ctx.country_year)
        panel = ctx.apply(panel)
    write_panel(panel, run.path / "panel.csv")
    if args.experts > 0:
        experts = generate_expert_table(panel, args.experts, args.expert_sd, args.seed,
                                        disagreement=args.disagreement)
        run.write_frame("experts.csv", experts)
    print(f"{len(panel)} party-years written to {run.path}")


def _ingest(args):
    policy = AggregationPolicy(min_experts=args.min_experts,
                               year_filter=tuple(int(y) for y in args.years) if args.years else None)
    table = read_expert_table(args.experts_file, schema_map=args.schema)
    return aggregate_party_year(table, policy)


def cmd_ingest(args, run):
    if not args.experts_file:
        raise ConfigError("ingest needs --experts-file")
    panel = _ingest(args)
    write_panel(panel, run.path / "panel.csv")
    run.write_json("aggregation.json", panel.attrs["aggregation"])
    print(f"{len(panel)} party-years; groups {panel.attrs['aggregation']}")


def _spec_from_args(args):
    return DesignSpec(args.outcome, tuple(_split(args.regressors)), fe_dims=args.fe, cluster=args.cluster,
                      instruments=args.instruments, label=args.label or "fit")


def _fit_and_report(run, label, panel, spec, wald_terms=None, fitter=fit, **kw):
    res = run.attempt(label, fitter, panel, replace(spec, label=label) if spec.label != label else spec, **kw)
    if res is None:
        return None
    report = json.loads(res.to_json())
    if wald_terms:
        W, p = wald_joint_test(res, wald_terms)
        report["wald"] = {"terms": list(wald_terms), "statistic": W, "p": p}
    run.write_json(f"{label}.json", report)
    return res


def cmd_fit(args, run):
    if not args.panel:
        raise ConfigError("fit needs --panel")
    panel = read_panel(args.panel)
    for lag_col in args.lags:
        panel = build_lags(panel, [lag_col])
    spec = _spec_from_args(args)
    res = _fit_and_report(run, spec.label, panel, spec)
    if res is not None:
        print(res.summary())


def _summary_rows(res, label, terms, truth=None):
    rows = []
    if res is None:
        return rows
    for t in terms:
        if t in res.params.index:
            rows.append({"spec": label, "term": t, "estimate": res.params[t], "std_error": res.std_errors[t],
                         "p": res.pvalues[t], "truth": np.nan if truth is None else truth,
                         "n_obs": res.n_obs, "n_clusters": res.n_clusters,
                         "first_stage_F": res.first_stage_F, "peak": res.peak()})
    return rows


def binned_profile(panel, dim, width=1.0):
    """Mean blurriness by position bin (for plotting the inverted U)."""
    pos, blur = panel[f"position_{dim}"], panel[f"blurriness_{dim}"]
    edges = np.arange(0.0, 10.0 + width, width)
    bins = pd.cut(pos, edges, include_lowest=True)
    g = blur.groupby(bins, observed=False)
    out = pd.DataFrame({"dimension": dim, "bin_low": edges[:-1], "bin_high": edges[1:],
                        "mean_blurriness": g.mean().to_numpy(), "sd": g.std().to_numpy(),
                        "n": g.count().to_numpy()})
    out["se"] = out["sd"] / np.sqrt(out["n"])
    return out


def _baseline_panel(args):
    if args.panel:
        return read_panel(args.panel)
    if args.experts_file:
        return _ingest(args)
    panel = generate_panel(_panel_spec(args), _dgp(args, "quadratic"), args.seed)
    # expert-level noise supplies the SD-of-assessments measure
    experts = generate_expert_table(panel, args.experts, args.expert_sd, args.seed, disagreement=args.disagreement)
    sds = aggregate_party_year(experts)
    keep = ["country", "party_id", "year"] + [c for c in sds.columns if c.startswith("position_sd_")]
    return panel.merge(sds[keep], on=["country", "party_id", "year"], how="left")


def cmd_replicate_baseline(args, run):
    panel = _baseline_panel(args)
    dims = args.dimensions
    fe = args.fe
    rows, bins = [], []
    for dim in dims:
        pos, blur, cen = f"position_{dim}", f"blurriness_{dim}", f"centrism_{dim}"
        if pos not in panel.columns:
            run.errors.append((dim, "SchemaError", f"panel has no {pos} column"))
            continue
        panel = add_centrism(panel, dim, "midpoint")
        panel = add_centrism(panel, dim, "median")
        quad = [pos, f"{pos}^2"]
        label = f"quadratic_{dim}"
        res = _fit_and_report(run, label, panel, DesignSpec(blur, quad, fe_dims=fe, cluster=args.cluster), wald_terms=quad)
        rows += _summary_rows(res, label, quad)
        for mode, c in (("midpoint", cen), ("median", f"centrism_median_{dim}")):
            label = f"centrism_{mode}_{dim}"
            res = _fit_and_report(run, label, panel, DesignSpec(blur, [c], fe_dims=fe, cluster=args.cluster))
            rows += _summary_rows(res, label, [c])
        label = f"monotonic_{dim}"
        res = _fit_and_report(run, label, panel, DesignSpec(blur, [pos], fe_dims=fe, cluster=args.cluster))
        rows += _summary_rows(res, label, [pos])
        sd_col = f"position_sd_{dim}"
        if sd_col in panel.columns:
            label = f"sd_outcome_{dim}"
            res = _fit_and_report(run, label, panel, DesignSpec(sd_col, quad, fe_dims=fe, cluster=args.cluster),
                                  wald_terms=quad)
            rows += _summary_rows(res, label, quad)
        lagged = build_lags(panel, [pos, cen])
        label = f"iv_quadratic_{dim}"
        z = [f"{pos}_lag1", f"{pos}_lag1^2"]
        res = _fit_and_report(run, label, lagged, DesignSpec(blur, quad, fe_dims=fe, cluster=args.cluster,
                                                             instruments={quad[0]: z, quad[1]: z}), wald_terms=quad)
        rows += _summary_rows(res, label, quad)
        label = f"iv_centrism_{dim}"
        res = _fit_and_report(run, label, lagged, DesignSpec(blur, [cen], fe_dims=fe, cluster=args.cluster,
                                                             instruments={cen: [f"{cen}_lag1"]}))
        rows += _summary_rows(res, label, [cen])
        bins.append(binned_profile(panel, dim))
    run.write_frame("summary.csv", pd.DataFrame(rows))
    if bins:
        run.write_frame("binned.csv", pd.concat(bins, ignore_index=True))
    write_panel(panel, run.path / "panel.csv")
    print(f"baseline: {len(rows)} coefficient rows, {len(run.errors)} errors -> {run.path}")


def mechanism_panel(panel, thetas, seed, **context_kw):
    """Attach synthetic context; ``thetas`` maps dimension -> interaction truth."""
    dims = list(thetas)
    ctx = generate_context(panel, ContextParams(theta=thetas[dims[0]], dimension=dims[0], **context_kw), seed)
    out = ctx.apply(panel)
    for dim in dims[1:]:
        other = ContextTable(ctx.country_year, ctx.party_year, replace(ctx.params, theta=thetas[dim], dimension=dim))
        out[f"blurriness_{dim}"] = other.apply(panel)[f"blurriness_{dim}"]
    return out


MECHANISM_DESIGNS = {
    # label suffix -> moderator columns interacted with centrism
    "triple_continuous": ("gdp_var_lag", "opposition"),
    "triple_median_dummy": ("gdp_var_high", "opposition"),
    "growth": ("growth_low",),
    "crisis": ("crisis_count",),
}


def cmd_replicate_mechanism(args, run):
    thetas = {"economic": args.theta_economic, "social": args.theta_social}
    if args.panel:
        base = read_panel(args.panel)
    else:
        base = generate_panel(_panel_spec(args), _dgp(args, "centrism"), args.seed)
    panel = mechanism_panel(base, thetas, args.seed)
    rows = []
    for dim, theta in thetas.items():
        cen = f"centrism_{dim}"
        base_spec = DesignSpec(f"blurriness_{dim}", [cen], fe_dims=args.fe, cluster=args.cluster)
        for name, mods in MECHANISM_DESIGNS.items():
            label = f"{name}_{dim}"
            term = "*".join((cen, *mods))
            res = _fit_and_report(run, label, panel, base_spec, fitter=fit_interaction,
                                  interaction_terms=[(cen, *mods)])
            truth = theta if name == "triple_continuous" else None
            rows += _summary_rows(res, label, [term], truth)
    run.write_frame("summary.csv", pd.DataFrame(rows))
    run.write_frame("context_country_year.csv", panel[["country", "year", "gdp_growth", "gdp_growth_lag",
                                                       "gdp_var_lag", "gdp_var_high", "growth_low",
                                                       "crisis_count"]].drop_duplicates())
    print(f"mechanism: {len(rows)} interaction rows, {len(run.errors)} errors -> {run.path}")


# --- parser -----------------------------------------------------------------------

def _add_panel_options(p):
    p.add_argument("--countries", type=int, default=25)
    p.add_argument("--waves", type=int, default=2)
    p.add_argument("--parties", type=int, default=8, help="parties per country")
    p.add_argument("--persistence", type=float, default=0.9)
    p.add_argument("--feedback", type=float, default=0.0, help="simultaneity strength (0 = exogenous)")


def _add_ingest_options(p):
    p.add_argument("--experts-file", default=None, help="expert-level CSV to ingest")
    p.add_argument("--schema", type=_schema, default=None,
                   help="field:column bindings, e.g. year:=2019,position.economic:lrecon; 'ches' for the wide layout")
    p.add_argument("--min-experts", type=int, default=0)
    p.add_argument("--years", type=_split, default=None)


def _add_fit_options(p):
    p.add_argument("--fe", type=_fe, default=(("country", "year"),),
                   help="fixed-effect dimensions, e.g. country:year,party_id ('' for none)")
    p.add_argument("--cluster", default="party_id")


def build_parser():
    parser = argparse.ArgumentParser(prog="ambiguity-lab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="key=value configuration file (flags override it)")
        p.add_argument("--out", default=None, help=f"output root (default ${OUT_ENV} or ./runs)")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(handler=handler)
        return p

    p = command("solve", cmd_solve, "solve the canonical game at one (k, l)")
    p.add_argument("--k", type=_rational, default=None)
    p.add_argument("--l", type=_rational, default=None)
    p.add_argument("--eps-b", type=_rational, default=Fraction(0))

    p = command("sweep", cmd_sweep, "phase table over a (k, l) grid")
    p.add_argument("--k-values", type=_rational_list, default=None)
    p.add_argument("--k-min", type=_rational, default=Fraction(11, 10))
    p.add_argument("--k-max", type=_rational, default=Fraction(2))
    p.add_argument("--k-steps", type=int, default=10)
    p.add_argument("--l-values", type=_rational_list, default=None)
    p.add_argument("--l-offset", type=_rational, default=Fraction(1))
    p.add_argument("--eps-b", type=_rational, default=Fraction(0))
    p.add_argument("--workers", type=int, default=1)

    p = command("mc-check", cmd_mc_check, "Monte Carlo check of contest win probabilities")
    p.add_argument("--k", type=_rational, default=None)
    p.add_argument("--l", type=_rational, default=None)
    p.add_argument("--profile", default="all", help="e.g. A:C, or 'all'")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds from --seed")

    p = command("gen", cmd_gen, "generate a synthetic panel (and optional expert table)")
    _add_panel_options(p)
    p.add_argument("--form", choices=("quadratic", "centrism"), default="quadratic")
    p.add_argument("--experts", type=int, default=0, help="experts per party-year (0 = no expert table)")
    p.add_argument("--expert-sd", type=float, default=1.0)
    p.add_argument("--disagreement", type=float, default=0.0)
    p.add_argument("--context", action="store_true", help="attach synthetic macro context")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--theta-dimension", default="economic")

    p = command("ingest", cmd_ingest, "read and aggregate an expert file")
    _add_ingest_options(p)

    p = command("fit", cmd_fit, "fit one specification on a panel CSV")
    p.add_argument("--panel", default=None)
    p.add_argument("--outcome", default=None)
    p.add_argument("--regressors", default=None, help="comma-separated terms, e.g. x,x^2,a*b")
    p.add_argument("--instruments", type=_instruments, default=None, help="endog=z1+z2;...")
    p.add_argument("--lags", type=_split, default=[], help="columns to lag one wave before fitting")
    p.add_argument("--label", default="fit")
    _add_fit_options(p)

    p = command("replicate-baseline", cmd_replicate_baseline, "quadratic, centrism, monotonic, SD and IV specs")
    _add_panel_options(p)
    _add_ingest_options(p)
    _add_fit_options(p)
    p.add_argument("--panel", default=None, help="panel CSV (default: synthetic)")
    p.add_argument("--dimensions", type=_split, default=["economic", "social"])
    p.add_argument("--experts", type=int, default=10)
    p.add_argument("--expert-sd", type=float, default=0.5)
    p.add_argument("--disagreement", type=float, default=0.2)

    p = command("replicate-mechanism", cmd_replicate_mechanism, "interaction designs on synthetic context")
    _add_panel_options(p)
    _add_fit_options(p)
    p.add_argument("--panel", default=None, help="panel CSV (default: synthetic)")
    p.add_argument("--theta-economic", type=float, default=0.3)
    p.add_argument("--theta-social", type=float, default=0.0)
    return parser


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv=None):
    """Parse flags; values from ``--config`` fill in anything not given as a flag."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sp = _subparser(parser, args.command)
        known = {a.dest: a for a in sp._actions if a.dest not in ("help",) and a.dest not in _META}
        values = read_config(args.config)
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"unknown configuration keys for {args.command}: {unknown}")
        tokens = list(sys.argv[1:] if argv is None else argv)
        given = {a.dest for a in sp._actions for opt in a.option_strings
                 if any(t == opt or t.startswith(opt + "=") for t in tokens)}
        for key, raw in values.items():
            if key in given:
                continue
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                val = raw.lower() in ("1", "true", "yes")
            elif raw == "" and action.default is None:
                val = None
            else:
                try:
                    val = action.type(raw) if action.type else raw
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise ConfigError(f"config key {key}: {exc}") from None
                if action.choices and val not in action.choices:
                    raise ConfigError(f"config key {key}: {val!r} not in {list(action.choices)}")
            setattr(args, key, val)
    return args


def _validate(args):
    """Check numeric parameters against module preconditions before any work starts."""
    if args.seed < 0:
        raise ConfigError("seed must be >= 0")
    if args.command in ("solve", "mc-check"):
        if args.k is None or args.l is None:
            raise ConfigError(f"{args.command} needs --k and --l")
        canonical_game(args.k, args.l)
        if args.command == "mc-check" and (args.samples < 1 or args.seeds < 1):
            raise ConfigError("samples and seeds must be >= 1")
    if args.command == "fit" and not (args.panel and args.outcome and args.regressors):
        raise ConfigError("fit needs --panel, --outcome and --regressors")
    if args.command == "ingest" and not args.experts_file:
        raise ConfigError("ingest needs --experts-file")
    if hasattr(args, "countries"):
        PanelSpec(n_countries=args.countries, n_waves=args.waves, parties_per_country=args.parties)
        DGPParams(persistence=args.persistence, feedback=args.feedback)
        if args.feedback < 0:
            raise ConfigError("feedback must be >= 0")
    if getattr(args, "experts", 0) < 0 or getattr(args, "expert_sd", 0) < 0:
        raise ConfigError("experts and expert_sd must be >= 0")
    if getattr(args, "min_experts", 0) < 0:
        raise ConfigError("min_experts must be >= 0")
    if getattr(args, "workers", 1) < 1:
        raise ConfigError("workers must be >= 1")


def main(argv=None):
    try:
        args = parse_args(argv)
        _validate(args)
    except (AmbiguityLabError, DomainError, OSError) as exc:
        print(f"ambiguity-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    root = args.out or os.environ.get(OUT_ENV) or "runs"
    config = {k: v for k, v in vars(args).items() if k not in _META}
    run = Run(root, args.command, config)
    try:
        args.handler(args, run)
    except (AmbiguityLabError, ValueError, OSError) as exc:
        run.errors.append((args.command, type(exc).__name__, str(exc)))
        print(f"ambiguity-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
    status = run.close()
    print(f"run directory: {run.path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
