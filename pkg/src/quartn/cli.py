"""Command-line interface: reproducible reports for enumeration, amplitudes,
series, oracle comparisons, renormalisability classification, divergence
surveys, torus counterterm numerics, and the built-in check suite.

Every report starts with a single header line carrying the engine version,
the hash of the effective configuration, the float precision, and the only
timestamp in the output.  Option precedence is flag > config file > default;
the config file is a flat JSON document whose fields mirror the flags.
Exit codes: 0 success, 2 usage error, 3 budget guard, 4 failed check.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .checks import DEFAULT_SEED, run_checks
from .colours import (
    ENHANCED,
    INVARIANT,
    BoundaryGraph,
    ColourSet,
    IdentityCovariance,
    ModelSpec,
    PowerLaplacian,
    full_quartic_model,
    melonic_model,
)
from .enumeration import (
    EnumSpec,
    count_plane_trees,
    count_trees_closed_form,
    count_trees_rooted,
    enumerate_maps,
)
from .errors import BudgetExceeded, QuartnError
from .graphs import ColouredGraph, invariant_amplitude
from .maps import StrandedMap, map_amplitude
from .oracle import oracle_cumulant, oracle_free_energy
from .renorm import classify_renormalisability, divergence_survey, t43_counterterms
from .series import FREE_ENERGY, LABELLED, assemble_series
from .transform import graph_to_map, map_to_graph

FLOAT_PRECISION = 15
COUNT_GUARD = 5_000_000  # enumerated tree count above this needs the override flag


# -- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    """Effective settings of one run; every field mirrors a CLI flag and a
    config-file key, and the whole record round-trips through JSON."""

    rank: int = 3
    family: str = "melonic"     # melonic | full (classify: standard | enhanced)
    scaling: str = INVARIANT
    eta: str | None = None      # propagator exponent (e.g. "1", "3/4"); None = identity covariance
    edges: int = 2
    cilia: int = 0
    vertices: int = 7
    colours: int = 3
    order: int = 2
    pairs: int = 0              # external leg pairs for series/oracle
    cutoff: int = 8
    budget: int = 2
    cilia_budget: int = 2
    checks: str | None = None   # comma-separated check numbers, None = all
    seed: int = DEFAULT_SEED
    workers: int | None = None
    out: str | None = None
    format: str = "csv"
    figure: bool = True
    override_budgets: bool = False


_CONFIG_TYPES = {f.name: f for f in fields(RunConfig)}
_ENUM_FIELDS = {
    "family": ("melonic", "full", "standard", "enhanced"),
    "scaling": (INVARIANT, ENHANCED),
    "format": ("csv", "json"),
}


_INT_FIELDS = ("rank", "edges", "cilia", "vertices", "colours", "order", "pairs",
               "cutoff", "budget", "cilia_budget", "seed", "workers")
_BOOL_FIELDS = ("figure", "override_budgets")


def _coerce_field(name: str, value):
    if name not in _CONFIG_TYPES:
        raise click.UsageError(f"config: unknown field '{name}'")
    if value is None:
        return None
    if name in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise click.UsageError(f"config field '{name}': expected true/false")
        return value
    if name in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise click.UsageError(f"config field '{name}': expected an integer")
        return value
    if not isinstance(value, str):
        raise click.UsageError(f"config field '{name}': expected a string")
    if name in _ENUM_FIELDS and value not in _ENUM_FIELDS[name]:
        allowed = ", ".join(_ENUM_FIELDS[name])
        raise click.UsageError(f"config field '{name}': must be one of {allowed}")
    return value


def load_config(path: str | None, flag_values: dict) -> RunConfig:
    """Merge defaults, config file, and explicit flags (flag > file > default)."""
    cfg = RunConfig()
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise click.UsageError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"config file {path}: invalid JSON ({exc})")
        if not isinstance(raw, dict):
            raise click.UsageError("config file must hold a JSON object")
        for key, value in raw.items():
            setattr(cfg, key, _coerce_field(key, value))
    for key, value in flag_values.items():
        if value is not None:
            setattr(cfg, key, _coerce_field(key, value))
    env_workers = os.environ.get("QUARTN_WORKERS")
    if env_workers is not None:
        try:
            cfg.workers = int(env_workers)
        except ValueError:
            raise click.UsageError("QUARTN_WORKERS must be an integer")
    return cfg


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(asdict(cfg), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _parse_eta(cfg: RunConfig, default: Fraction | None = None) -> Fraction | None:
    if cfg.eta is None:
        return default
    try:
        return Fraction(cfg.eta)
    except (ValueError, ZeroDivisionError):
        raise click.UsageError(f"config field 'eta': cannot parse '{cfg.eta}' as a rational")


def build_model(cfg: RunConfig, need_field_theory: bool = False) -> ModelSpec:
    eta = _parse_eta(cfg, Fraction(1) if need_field_theory else None)
    if need_field_theory and cfg.scaling == ENHANCED and cfg.eta is None:
        eta = Fraction(3, 4)
    prop = IdentityCovariance() if eta is None else PowerLaplacian(eta)
    if cfg.family in ("melonic", "standard"):
        return melonic_model(cfg.rank, cfg.scaling, prop)
    return full_quartic_model(cfg.rank, cfg.scaling, prop)


# -- report rendering ------------------------------------------------------------


def fmt_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return f"{x:.{FLOAT_PRECISION}g}"
    return str(x)


def _header_line(cfg_hash: str) -> str:
    ts = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return (f"# quartn {__version__} config={cfg_hash} "
            f"float_precision={FLOAT_PRECISION} generated={ts}")


def write_report(cfg: RunConfig, columns: list[str], rows: list[dict],
                 extra: dict | None = None) -> None:
    """Render rows to the configured path and format, header line first."""
    cfg_hash = config_hash(cfg)
    if cfg.format == "json":
        payload = {"columns": columns,
                   "rows": [{c: fmt_value(r.get(c)) for c in columns} for r in rows]}
        if extra:
            payload.update(extra)
        doc = {"engine": f"quartn {__version__}",
               "config_hash": cfg_hash,
               "float_precision": FLOAT_PRECISION,
               "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
               "payload": payload}
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        buf.write(_header_line(cfg_hash) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([fmt_value(r.get(c)) for c in columns])
        if extra:
            for key, value in extra.items():
                if isinstance(value, (list, tuple)):
                    for item in value:
                        writer.writerow([key, fmt_value(item)])
                else:
                    writer.writerow([key, fmt_value(value)])
        text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        click.echo(text, nl=False)


def render_figure(cfg: RunConfig, draw) -> None:
    """Render the command's companion PNG next to the output file.  Only runs
    when an output path exists and figures are enabled; draw(ax) fills the
    single axes."""
    if not cfg.out or not cfg.figure:
        return
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        drew = draw(ax)
        if drew is False:
            return
        fig.tight_layout()
        fig.savefig(Path(cfg.out).with_suffix(".png"), dpi=120)
    finally:
        plt.close(fig)


# -- shared options ----------------------------------------------------------------


def common_options(fn):
    decs = [
        click.option("--config", "config_path", type=str, default=None,
                     help="JSON config file; flags override its fields."),
        click.option("--out", type=str, default=None, help="Report path (default: stdout)."),
        click.option("--format", "format_", type=click.Choice(["csv", "json"]),
                     default=None, help="Report format."),
        click.option("--seed", type=int, default=None, help="Seed for randomised suites."),
        click.option("--workers", type=int, default=None,
                     help="Worker count (QUARTN_WORKERS overrides)."),
        click.option("--no-figure", "no_figure", is_flag=True, default=False,
                     help="Skip the companion PNG figure."),
        click.option("--override-budgets", "override", is_flag=True, default=False,
                     help="Lift combinatorial budget guards."),
    ]
    for dec in reversed(decs):
        fn = dec(fn)
    return fn


def model_options(fn):
    decs = [
        click.option("--D", "--rank", "rank", type=int, default=None,
                     help="Tensor rank (number of colours)."),
        click.option("--family", type=str, default=None,
                     help="Interaction family: melonic | full (classify: standard | enhanced)."),
        click.option("--scaling", type=click.Choice([INVARIANT, ENHANCED]),
                     default=None, help="Large-N scaling of the couplings."),
        click.option("--eta", type=str, default=None,
                     help="Propagator exponent as a rational (e.g. 3/4); omit for identity covariance."),
    ]
    for dec in reversed(decs):
        fn = dec(fn)
    return fn


def _gather(config_path, format_, no_figure, override, **flags) -> RunConfig:
    values = dict(flags)
    if format_ is not None:
        values["format"] = format_
    if no_figure:
        values["figure"] = False
    if override:
        values["override_budgets"] = True
    return load_config(config_path, values)


class EngineGroup(click.Group):
    """Translates engine errors into the documented exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except BudgetExceeded as exc:
            click.echo(f"budget exceeded: {exc}", err=True)
            sys.exit(3)
        except QuartnError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)


@click.group(cls=EngineGroup)
@click.version_option(version=__version__, prog_name="quartn")
def main():
    """Exact combinatorics and power counting for quartic tensor models."""


# -- enumerate --------------------------------------------------------------------


def _sigma_cycles_str(sigma) -> str:
    seen = [False] * len(sigma)
    parts = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        d = sigma[start]
        while d != start:
            cyc.append(d)
            seen[d] = True
            d = sigma[d]
        parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts)


def _colours_str(edge_colours) -> str:
    return "|".join("".join(str(c) for c in cs.colours) for cs in edge_colours)


@main.command(name="enumerate")
@common_options
@model_options
@click.option("--edges", type=int, default=None, help="Propagator edge count.")
@click.option("--cilia", type=int, default=None, help="External leg-pair count.")
def enumerate_cmd(config_path, out, format_, seed, workers, no_figure, override,
                  rank, family, scaling, eta, edges, cilia):
    """List every connected map at the given size, with exact amplitudes."""
    cfg = _gather(config_path, format_, no_figure, override,
                  out=out, seed=seed, workers=workers, rank=rank, family=family,
                  scaling=scaling, eta=eta, edges=edges, cilia=cilia)
    spec = build_model(cfg)
    es = EnumSpec(spec, cfg.edges, cfg.cilia, vacuum=(cfg.cilia == 0),
                  accept_blowup=cfg.override_budgets)
    rows = []
    for i, (m, w) in enumerate(enumerate_maps(es)):
        amp = map_amplitude(m, spec)
        rows.append({
            "index": i,
            "colours": _colours_str(m.edge_colours),
            "sigma": _sigma_cycles_str(m.sigma),
            "cilia": m.k,
            "weight": w,
            "internal_faces": m.internal_face_count(),
            "n_exponent": amp.n_exponent,
            "coefficient": amp.coefficient,
        })
    write_report(cfg, ["index", "colours", "sigma", "cilia", "weight",
                       "internal_faces", "n_exponent", "coefficient"], rows)

    def draw(ax):
        if not rows:
            return False
        counts: dict[Fraction, int] = {}
        for r in rows:
            counts[r["n_exponent"]] = counts.get(r["n_exponent"], 0) + 1
        xs = sorted(counts)
        ax.bar([float(x) for x in xs], [counts[x] for x in xs], width=0.6)
        ax.set_xlabel("N-exponent")
        ax.set_ylabel("maps")
        ax.set_title(f"{len(rows)} maps, E={cfg.edges}, k={cfg.cilia}, D={spec.D}")

    render_figure(cfg, draw)


# -- count ------------------------------------------------------------------------


@main.command()
@common_options
@click.option("--v", "v", type=int, default=None, help="Maximum vertex count.")
@click.option("--k", "k", type=int, default=None, help="Cilium count.")
@click.option("--q", "q", type=int, default=None, help="Edge colour count.")
def count(config_path, out, format_, seed, workers, no_figure, override, v, k, q):
    """Tree counts by explicit enumeration against the closed forms."""
    values = {}
    if v is not None:
        values["vertices"] = v
    if k is not None:
        values["cilia"] = k
    if q is not None:
        values["colours"] = q
    cfg = _gather(config_path, format_, no_figure, override, out=out,
                  seed=seed, workers=workers, **values)
    k, q = cfg.cilia, cfg.colours
    inter = tuple(ColourSet(bits=1 << (c - 1), rank=max(q, 2)) for c in range(1, q + 1))
    rows = []
    mismatch = False
    for vv in range(max(k, 1), cfg.vertices + 1):
        if k >= 1:
            closed = count_trees_rooted(vv, k, q)
            mode = "rooted"
        else:
            closed = count_trees_closed_form(vv, 0, q)
            mode = "labelled"
        if closed > COUNT_GUARD and not cfg.override_budgets:
            raise BudgetExceeded(
                f"count guard: {closed} trees at v={vv} exceeds {COUNT_GUARD} "
                f"(pass --override-budgets to enumerate anyway)")
        enumerated = count_plane_trees(vv, k, inter, mode=mode)
        match = enumerated == closed
        mismatch = mismatch or not match
        rows.append({"v": vv, "k": k, "q": q, "count_enumerated": enumerated,
                     "count_closed_form": closed, "match": match})
    write_report(cfg, ["v", "k", "q", "count_enumerated", "count_closed_form",
                       "match"], rows)

    def draw(ax):
        xs = [r["v"] for r in rows]
        ax.bar(xs, [r["count_enumerated"] for r in rows], width=0.6)
        ax.set_yscale("log")
        ax.set_xlabel("vertices")
        ax.set_ylabel("trees")
        ax.set_title(f"plane trees, k={k}, q={q}")

    render_figure(cfg, draw)
    if mismatch:
        click.echo("count mismatch between enumeration and closed form", err=True)
        sys.exit(4)


# -- transform ----------------------------------------------------------------------


def _read_payload(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise click.UsageError(f"input file not found: {path}")
    body = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    try:
        obj = json.loads(body)
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"input file {path}: invalid JSON ({exc})")
    if isinstance(obj, dict) and "payload" in obj:
        obj = obj["payload"]
    if not isinstance(obj, dict):
        raise click.UsageError(f"input file {path}: expected a JSON object")
    return obj


@main.command()
@common_options
@click.option("--in", "in_path", type=str, required=True, help="Graph or map JSON file.")
def transform(config_path, out, format_, seed, workers, no_figure, override, in_path):
    """Convert a coloured graph to its stranded map, or back."""
    cfg = _gather(config_path, format_, no_figure, override, out=out,
                  seed=seed, workers=workers)
    obj = _read_payload(in_path)
    if "half_edges" in obj:
        result = map_to_graph(StrandedMap.from_json(obj))
        kind = "graph"
    elif "vertices" in obj:
        result = graph_to_map(ColouredGraph.from_json(obj))
        kind = "map"
    else:
        raise click.UsageError(
            f"input file {in_path}: neither a graph (vertices/edges) nor a map (half_edges)")
    doc = {"engine": f"quartn {__version__}",
           "config_hash": config_hash(cfg),
           "float_precision": FLOAT_PRECISION,
           "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
           "kind": kind,
           "payload": result.to_json()}
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        click.echo(text, nl=False)


# -- amplitude ----------------------------------------------------------------------


@main.command()
@common_options
@model_options
@click.option("--in", "in_path", type=str, required=True, help="Graph or map JSON file.")
def amplitude(config_path, out, format_, seed, workers, no_figure, override,
              rank, family, scaling, eta, in_path):
    """Exact amplitude of one graph or map under the configured model."""
    cfg = _gather(config_path, format_, no_figure, override,
                  out=out, seed=seed, workers=workers, rank=rank, family=family,
                  scaling=scaling, eta=eta)
    obj = _read_payload(in_path)
    if "half_edges" in obj:
        m = StrandedMap.from_json(obj)
        cfg.rank = m.D
        spec = build_model(cfg)
        amp = map_amplitude(m, spec)
        faces = m.internal_face_count()
        legs = 2 * m.k
    else:
        g = ColouredGraph.from_json(obj)
        cfg.rank = g.D
        spec = build_model(cfg)
        amp = invariant_amplitude(g, spec)
        faces = sum(1 for f in g.faces() if f.internal and f.colour != 0)
        legs = len(g.legs)
    couplings = " ".join(f"{name}^{p}" for name, p in amp.coupling_degrees) or "1"
    rows = [{"couplings": couplings, "n_exponent": amp.n_exponent,
             "coefficient": amp.coefficient, "internal_faces": faces, "legs": legs}]
    write_report(cfg, ["couplings", "n_exponent", "coefficient",
                       "internal_faces", "legs"], rows)

    def draw(ax):
        ax.bar(["internal faces", "legs"], [faces, legs], width=0.5)
        ax.set_title(f"amplitude: N^{amp.n_exponent} x {amp.coefficient}")

    render_figure(cfg, draw)


# -- series / oracle ----------------------------------------------------------------


def _series_rows(series) -> list[dict]:
    rows = []
    for (degs, ne), c in sorted(series.terms.items(),
                                key=lambda kv: (sum(d for _, d in kv[0][0]),
                                                kv[0][0], -kv[0][1])):
        order = sum(d for _, d in degs)
        coup = " ".join(f"{name}^{p}" for name, p in degs) or "1"
        rows.append({"order": order, "couplings": coup, "n_exponent": ne,
                     "coefficient": c})
    return rows


def _max_exponent_figure(rows, title):
    def draw(ax):
        if not rows:
            return False
        tops: dict[int, Fraction] = {}
        for r in rows:
            o = r["order"]
            if o not in tops or r["n_exponent"] > tops[o]:
                tops[o] = r["n_exponent"]
        xs = sorted(tops)
        ax.step(xs, [float(tops[x]) for x in xs], where="mid", marker="o")
        ax.set_xlabel("coupling order")
        ax.set_ylabel("max N-exponent")
        ax.set_title(title)

    return draw


@main.command()
@common_options
@model_options
@click.option("--order", type=int, default=None, help="Truncation order in the coupling.")
@click.option("--pairs", type=int, default=None,
              help="External pairs: 0 = connected vacuum series, else identity-boundary kernel.")
def series(config_path, out, format_, seed, workers, no_figure, override,
           rank, family, scaling, eta, order, pairs):
    """Exact 1/N-graded series assembled from map enumeration."""
    cfg = _gather(config_path, format_, no_figure, override,
                  out=out, seed=seed, workers=workers, rank=rank, family=family,
                  scaling=scaling, eta=eta, order=order, pairs=pairs)
    spec = build_model(cfg)
    if cfg.pairs == 0:
        s = assemble_series(FREE_ENERGY, spec, cfg.order,
                            accept_blowup=cfg.override_budgets)
    else:
        b = BoundaryGraph.identity(spec.D, cfg.pairs)
        s = assemble_series(b, spec, cfg.order, accept_blowup=cfg.override_budgets)
    rows = _series_rows(s)
    write_report(cfg, ["order", "couplings", "n_exponent", "coefficient"], rows,
                 extra={"observable": s.observable})
    render_figure(cfg, _max_exponent_figure(rows, s.observable))


@main.command()
@common_options
@model_options
@click.option("--order", type=int, default=None, help="Truncation order in the coupling.")
@click.option("--pairs", type=int, default=None,
              help="External pairs: 0 = connected vacuum, else identity-boundary kernel.")
def oracle(config_path, out, format_, seed, workers, no_figure, override,
           rank, family, scaling, eta, order, pairs):
    """Brute-force pairing expansion, cross-checked against enumeration."""
    cfg = _gather(config_path, format_, no_figure, override,
                  out=out, seed=seed, workers=workers, rank=rank, family=family,
                  scaling=scaling, eta=eta, order=order, pairs=pairs)
    spec = build_model(cfg)
    if cfg.pairs == 0:
        s = oracle_free_energy(spec, cfg.order)
        ref = assemble_series(FREE_ENERGY, spec, cfg.order)
    else:
        b = BoundaryGraph.identity(spec.D, cfg.pairs)
        s = oracle_cumulant(spec, cfg.order, b)
        ref = assemble_series(b, spec, cfg.order, normalisation=LABELLED)
    rows = []
    for (degs, ne), c in sorted(s.terms.items(),
                                key=lambda kv: (sum(d for _, d in kv[0][0]),
                                                kv[0][0], -kv[0][1])):
        coup = " ".join(f"{name}^{p}" for name, p in degs) or "1"
        rows.append({"order": sum(d for _, d in degs), "couplings": coup,
                     "n_exponent": ne, "coefficient": c,
                     "matches_enumeration": ref.coefficient(dict(degs), ne) == c})
    agree = s == ref
    write_report(cfg, ["order", "couplings", "n_exponent", "coefficient",
                       "matches_enumeration"], rows,
                 extra={"observable": s.observable,
                        "agrees_with_enumeration": agree})
    render_figure(cfg, _max_exponent_figure(rows, f"oracle {s.observable}"))
    if not agree:
        click.echo("oracle and enumeration disagree", err=True)
        sys.exit(4)


# -- classify -----------------------------------------------------------------------


@main.command()
@common_options
@model_options
def classify(config_path, out, format_, seed, workers, no_figure, override,
             rank, family, scaling, eta):
    """Renormalisability verdict for the configured field theory."""
    cfg = _gather(config_path, format_, no_figure, override,
                  out=out, seed=seed, workers=workers, rank=rank, family=family,
                  scaling=scaling, eta=eta)
    if cfg.family == "enhanced":
        cfg.scaling = ENHANCED
        cfg.family = "full"
        if cfg.eta is None:
            cfg.eta = "3/4"
        if rank is None:
            cfg.rank = 4
    elif cfg.family == "standard":
        cfg.family = "melonic"
        cfg.scaling = INVARIANT
        if cfg.eta is None:
            cfg.eta = "1"
    spec = build_model(cfg, need_field_theory=True)
    verdict = classify_renormalisability(cfg.rank, spec)
    rows = [{"family": verdict.family, "rank": cfg.rank, "eta": _parse_eta(cfg),
             "category": verdict.category,
             "verdict": f"{verdict.category}-renormalisable",
             "witness": verdict.witness}]
    for legs, deg in verdict.max_degrees:
        rows.append({"family": verdict.family, "rank": cfg.rank,
                     "category": f"max-degree[{legs} legs]", "verdict": deg})
    write_report(cfg, ["family", "rank", "eta", "category", "verdict", "witness"], rows)
    click.echo(f"{verdict.category}-renormalisable")

    def draw(ax):
        if not verdict.max_degrees:
            return False
        xs = [legs for legs, _ in verdict.max_degrees]
        ys = [float(d) for _, d in verdict.max_degrees]
        ax.step(xs, ys, where="mid", marker="o")
        ax.set_xlabel("external legs")
        ax.set_ylabel("max divergence degree")
        ax.set_title(f"{verdict.family}: {verdict.category}-renormalisable")

    render_figure(cfg, draw)


# -- survey -------------------------------------------------------------------------


@main.command()
@common_options
@model_options
@click.option("--budget", type=int, default=None, help="Edge budget for the survey.")
@click.option("--cilia-budget", "cilia_budget", type=int, default=None,
              help="Cilium budget for the survey.")
def survey(config_path, out, format_, seed, workers, no_figure, override,
           rank, family, scaling, eta, budget, cilia_budget):
    """Divergent families within a size budget, grouped by boundary data."""
    cfg = _gather(config_path, format_, no_figure, override,
                  out=out, seed=seed, workers=workers, rank=rank, family=family,
                  scaling=scaling, eta=eta, budget=budget, cilia_budget=cilia_budget)
    spec = build_model(cfg, need_field_theory=True)
    reports = divergence_survey(spec, cfg.budget, cfg.cilia_budget,
                                workers=cfg.workers)
    rows = []
    for r in reports:
        E, k, sigma, cols = r.example
        example = (f"E={E} k={k} sigma={_sigma_cycles_str(sigma)} "
                   f"colours={'|'.join(''.join(map(str, cs)) for cs in cols)}")
        rows.append({"id": r.subgraph_id, "legs": r.legs, "boundary": r.boundary,
                     "omega": r.omega, "classification": r.classification,
                     "marks_internal": r.marks_internal, "count": r.count,
                     "example": example})
    write_report(cfg, ["id", "legs", "boundary", "omega", "classification",
                       "marks_internal", "count", "example"], rows)

    def draw(ax):
        if not rows:
            return False
        ax.scatter([r["legs"] for r in rows],
                   [float(r["omega"]) for r in rows],
                   s=[20 + 4 * min(r["count"], 60) for r in rows], alpha=0.6)
        ax.axhline(0.0, lw=0.8, color="grey")
        ax.set_xlabel("external legs")
        ax.set_ylabel("divergence degree")
        ax.set_title(f"divergent families, budget {cfg.budget} edges")

    render_figure(cfg, draw)


# -- t43 ----------------------------------------------------------------------------


@main.command()
@common_options
@click.option("--cutoff", type=int, default=None, help="Momentum cutoff per axis.")
@click.option("--exact/--float", "exact", default=None,
              help="Force exact rationals or floats (default: exact for small cutoffs).")
def t43(config_path, out, format_, seed, workers, no_figure, override, cutoff, exact):
    """Counterterm sums of the rank-3 torus theory at one cutoff."""
    cfg = _gather(config_path, format_, no_figure, override, out=out,
                  seed=seed, workers=workers, cutoff=cutoff)
    ct = t43_counterterms(cfg.cutoff, exact=exact)
    rows = [
        {"quantity": "delta_m", "value": ct.delta_m, "kind": "exact" if ct.exact else "float"},
        {"quantity": "pair_vacuum_1", "value": ct.v1},
        {"quantity": "pair_vacuum_2", "value": ct.v2},
        {"quantity": "squared_mass_vacuum_literal", "value": ct.v3_literal},
        {"quantity": "squared_mass_vacuum_quoted", "value": ct.v3_quoted},
        {"quantity": "mass_insertion_vacuum", "value": ct.v_mass_insertion},
        {"quantity": "recombination_residual", "value": ct.recombination_residual},
    ]
    for n, a in ct.a_table:
        rows.append({"quantity": f"A({n})", "value": a})
    write_report(cfg, ["quantity", "value", "kind"], rows,
                 extra={"note": list(ct.notes)})

    def draw(ax):
        import math as _math
        pts = [(n, float(a)) for n, a in ct.a_table]
        if len(pts) < 2:
            return False
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label="A(n)")
        top = max(p[0] for p in pts)
        grid = [x / 50 * top for x in range(1, 51)]
        scale = max((p[1] for p in pts), default=1.0) / _math.log(1.0 + top or 1)
        ax.plot(grid, [scale * _math.log(1.0 + x) for x in grid], "--",
                label="c log(1+n)")
        ax.set_xlabel("boundary momentum n")
        ax.set_ylabel("renormalised pair amplitude")
        ax.legend()
        ax.set_title(f"cutoff {cfg.cutoff}")

    render_figure(cfg, draw)


# -- check --------------------------------------------------------------------------


@main.command()
@common_options
@click.option("--only", type=str, default=None,
              help="Comma-separated check numbers (default: all).")
def check(config_path, out, format_, seed, workers, no_figure, override, only):
    """Run the built-in verification suite; exit 4 on any failure."""
    values = {}
    if only is not None:
        values["checks"] = only
    cfg = _gather(config_path, format_, no_figure, override, out=out,
                  seed=seed, workers=workers, **values)
    numbers = None
    if cfg.checks:
        try:
            numbers = [int(p) for p in cfg.checks.split(",") if p.strip()]
        except ValueError:
            raise click.UsageError(f"config field 'checks': cannot parse '{cfg.checks}'")
    try:
        results = run_checks(numbers=numbers, seed=cfg.seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    for r in results:
        click.echo(r.line)
    passed = sum(1 for r in results if r.passed)
    click.echo(f"{passed}/{len(results)} checks passed")
    if cfg.out:
        rows = [{"number": r.number, "name": r.name,
                 "status": "PASS" if r.passed else "FAIL",
                 "seconds": r.seconds, "detail": r.detail} for r in results]
        write_report(cfg, ["number", "name", "status", "seconds", "detail"], rows)

        def draw(ax):
            names = [f"{r.number} {r.name}" for r in results]
            secs = [r.seconds for r in results]
            colors = ["tab:green" if r.passed else "tab:red" for r in results]
            ax.barh(names, secs, color=colors)
            ax.invert_yaxis()
            ax.set_xlabel("seconds")
            ax.set_title(f"{passed}/{len(results)} checks passed")

        render_figure(cfg, draw)
    if passed < len(results):
        sys.exit(4)


if __name__ == "__main__":
    main()
