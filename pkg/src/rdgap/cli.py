"""Command-line entry point.

Subcommands: wf, rdrc, gap-sweep, simulate, version.  Data commands print
their CSV to stdout, or write it to --out with a `# manifest: <digest>`
comment line plus a sibling `<out>.manifest.json` recording the resolved
parameters, tool version, and output digests.  Reruns with equal parameters
are byte-identical.  `RDGAP_THREADS` caps parallelism (default: machine
parallelism).  Exit codes: 0 success, 1 numeric failure, 2 usage error.

Every subcommand accepts `--config run.json`: a JSON object whose keys are
the long option names (dashes or underscores); explicitly passed flags take
precedence over config values.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import click
from click.core import ParameterSource

from . import __version__, gapopt, rdrc, simulator, spectra, waterfill
from ._manifest import (
    build_manifest,
    canonical_json,
    csv_with_manifest_comment,
    manifest_digest,
    sha256_hex,
)
from ._svg import line_plot
from .errors import SolverError


@click.group()
def main() -> None:
    """Waterfilling vs random-coding rate-distortion curves and their gap."""


def _numeric_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except SolverError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _merged(ctx: click.Context, config: str | None, values: dict) -> dict:
    """Overlay config-file values onto click defaults; explicit flags win."""
    if config is None:
        return values
    try:
        raw = json.loads(Path(config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file {config!r}: {exc}")
    if not isinstance(raw, dict):
        raise click.UsageError("config file must hold a JSON object")
    merged = dict(values)
    for key, value in raw.items():
        name = str(key).replace("-", "_")
        if name not in values:
            raise click.UsageError(f"unknown config key {key!r}")
        if ctx.get_parameter_source(name) == ParameterSource.DEFAULT:
            merged[name] = value
    return merged


def _parse_grid(text: str) -> list[float]:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise click.UsageError(f"grid must be 'start:stop:step', got {text!r}")
    try:
        start, stop, step = (Decimal(p) for p in parts)
    except InvalidOperation:
        raise click.UsageError(f"grid must be numeric 'start:stop:step', got {text!r}")
    if step <= 0:
        raise click.UsageError("grid step must be positive")
    if stop < start:
        raise click.UsageError("grid stop must be >= start")
    out = []
    v = start
    while v <= stop:
        out.append(float(v))
        v += step
    return out


def _parse_spectrum_opt(text: str) -> spectra.Spectrum:
    try:
        return spectra.parse_spectrum(str(text))
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad spectrum {text!r}: {exc}")


def _emit(
    subcommand: str,
    parameters: dict,
    header: str,
    rows: list[str],
    out: str | None,
    svg_path: str | None = None,
    svg_text: str | None = None,
) -> str:
    payload = "\n".join([header, *rows]) + "\n"
    outputs = {"csv": sha256_hex(payload.encode("utf-8"))}
    if svg_text is not None:
        outputs["svg"] = sha256_hex(svg_text.encode("utf-8"))
    manifest = build_manifest(subcommand, parameters, __version__, outputs)
    digest = manifest_digest(manifest)
    if svg_text is not None and svg_path:
        Path(svg_path).write_text(svg_text)
    if out:
        Path(out).write_text(csv_with_manifest_comment(payload, digest))
        Path(f"{out}.manifest.json").write_text(canonical_json(manifest) + "\n")
    else:
        click.echo(payload, nl=False)
    return digest


_CONFIG_OPT = click.option(
    "--config",
    type=click.Path(),
    default=None,
    help="JSON file of option values; explicit flags take precedence.",
)


@main.command("wf")
@click.option("--spectrum", default="flat", show_default=True,
              help="flat | semiflat:<f> | v:w,v:w,... | @file.csv")
@click.option("--distortion-grid", default="0.05:0.95:0.05", show_default=True,
              help="Distortion grid start:stop:step, all in (0,1).")
@click.option("--compare", is_flag=True, default=False, show_default=True,
              help="Overlay the random-coding rate curve in the SVG.")
@click.option("--svg", type=click.Path(), default=None, help="Write a rate-vs-distortion SVG plot.")
@click.option("--out", type=click.Path(), default=None, help="Write CSV here instead of stdout.")
@_CONFIG_OPT
@click.pass_context
@_numeric_errors
def cmd_wf(ctx, spectrum, distortion_grid, compare, svg, out, config) -> None:
    """Oracle waterfilling curve: CSV rows d_star,t,rate_bits."""
    vals = _merged(ctx, config, {
        "spectrum": spectrum, "distortion_grid": distortion_grid,
        "compare": compare, "svg": svg, "out": out,
    })
    s = _parse_spectrum_opt(vals["spectrum"])
    grid = _parse_grid(vals["distortion_grid"])
    if any(not 0.0 < d < 1.0 for d in grid):
        raise click.UsageError("distortion grid values must lie in (0, 1)")
    points = [waterfill.point_at_distortion(s, d) for d in grid]
    rows = [f"{d!r},{p.level_t!r},{p.rate_bits!r}" for d, p in zip(grid, points)]
    svg_text = None
    if vals["svg"]:
        series = [("rate_wf", grid, [p.rate_bits for p in points])]
        if vals["compare"]:
            series.append(("rate_rc", grid, [rdrc.rr_rc(s, d) for d in grid]))
        svg_text = line_plot(series, "rate vs distortion", "distortion", "rate (bits)")
    _emit("wf", {
        "spectrum": s.as_literal(), "distortion_grid": vals["distortion_grid"],
        "compare": bool(vals["compare"]),
    }, "d_star,t,rate_bits", rows, vals["out"], vals["svg"], svg_text)


@main.command("rdrc")
@click.option("--spectrum", default="flat", show_default=True,
              help="flat | semiflat:<f> | v:w,v:w,... | @file.csv")
@click.option("--rate-grid", default="0.25:4:0.25", show_default=True,
              help="Rate grid start:stop:step in bits, all > 0.")
@click.option("--compare", is_flag=True, default=False, show_default=True,
              help="Overlay the waterfilling distortion curve in the SVG.")
@click.option("--svg", type=click.Path(), default=None, help="Write a distortion-vs-rate SVG plot.")
@click.option("--out", type=click.Path(), default=None, help="Write CSV here instead of stdout.")
@_CONFIG_OPT
@click.pass_context
@_numeric_errors
def cmd_rdrc(ctx, spectrum, rate_grid, compare, svg, out, config) -> None:
    """Universal random-coding curve: CSV rows rate_bits,T,d_rc."""
    vals = _merged(ctx, config, {
        "spectrum": spectrum, "rate_grid": rate_grid,
        "compare": compare, "svg": svg, "out": out,
    })
    s = _parse_spectrum_opt(vals["spectrum"])
    grid = _parse_grid(vals["rate_grid"])
    if any(r <= 0.0 for r in grid):
        raise click.UsageError("rate grid values must be positive")
    ts = [rdrc.t_rc_for_rate(s, r) for r in grid]
    ds = [rdrc.d_rc(s, T) for T in ts]
    rows = [f"{r!r},{T!r},{d!r}" for r, T, d in zip(grid, ts, ds)]
    svg_text = None
    if vals["svg"]:
        series = [("d_rc", grid, ds)]
        if vals["compare"]:
            series.append(("d_wf", grid, [waterfill.dd_wf(s, r) for r in grid]))
        svg_text = line_plot(series, "distortion vs rate", "rate (bits)", "distortion")
    _emit("rdrc", {
        "spectrum": s.as_literal(), "rate_grid": vals["rate_grid"],
        "compare": bool(vals["compare"]),
    }, "rate_bits,T,d_rc", rows, vals["out"], vals["svg"], svg_text)


@main.command("gap-sweep")
@click.option("--dstar-grid", default="0.005:0.995:0.005", show_default=True,
              help="Distortion grid start:stop:step within [0.005, 0.995].")
@click.option("--kmax", default=5, show_default=True, type=int,
              help="Largest number of spectrum levels searched per grid point.")
@click.option("--seed", default=0, show_default=True, type=int, help="Search seed.")
@click.option("--svg", type=click.Path(), default=None,
              help="Write a gap-vs-rate SVG plot (default: <out> with .svg suffix).")
@click.option("--out", type=click.Path(), default=None, help="Write CSV here instead of stdout.")
@_CONFIG_OPT
@click.pass_context
@_numeric_errors
def cmd_gap_sweep(ctx, dstar_grid, kmax, seed, svg, out, config) -> None:
    """Maximize the rate gap over spectra on a distortion grid."""
    vals = _merged(ctx, config, {
        "dstar_grid": dstar_grid, "kmax": kmax, "seed": seed, "svg": svg, "out": out,
    })
    grid = _parse_grid(vals["dstar_grid"])
    if int(vals["kmax"]) < 1:
        raise click.UsageError("kmax must be >= 1")
    search = gapopt.SearchConfig(seed=int(vals["seed"]))
    try:
        result = gapopt.sweep(grid, int(vals["kmax"]), search)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    rows = gapopt.sweep_csv_rows(result)
    svg_path = vals["svg"]
    if svg_path is None and vals["out"]:
        svg_path = str(Path(vals["out"]).with_suffix(".svg"))
    svg_text = None
    if svg_path:
        svg_text = line_plot(
            [("gap_bits", [r.rate_rc_bits for r in result.records],
              [r.gap_bits for r in result.records])],
            "universality gap vs rate", "rate_rc (bits)", "gap (bits)",
        )
    _emit("gap-sweep", {
        "dstar_grid": vals["dstar_grid"], "kmax": int(vals["kmax"]),
        "seed": int(vals["seed"]),
    }, gapopt.SWEEP_CSV_HEADER, rows, vals["out"], svg_path, svg_text)
    best = result.best
    click.echo(f"global max gap_bits = {best.gap_bits:.6f} at d_star = {best.d_star!r}")


_SIM_HEADER = (
    "mode,n,rate_bits,t,T,spectrum,trials,seed,rotation,tau_delta,tau_threshold,"
    "eta,w_batches,mean,se,analytic,p_hat,wilson_low,wilson_high,exponent,"
    "exponent_is_lower_bound,warnings"
)


def _sim_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@main.command("simulate")
@click.option("--mode", type=click.Choice(["scheme", "success", "coupling", "filter"]),
              required=True, help="Which Monte-Carlo run to perform.")
@click.option("--n", default=16, show_default=True, type=int, help="Dimension.")
@click.option("--rate", default=1.0, show_default=True, type=float,
              help="Rate in bits (scheme/success modes).")
@click.option("--spectrum", default="flat", show_default=True,
              help="flat | semiflat:<f> | v:w,v:w,... | @file.csv")
@click.option("--trials", default=1000, show_default=True, type=int,
              help="Trials (codewords per source batch in success mode).")
@click.option("--seed", default=0, show_default=True, type=int, help="Master seed.")
@click.option("--t", "t_level", default=None, type=float,
              help="Water level (coupling mode).")
@click.option("--T", "t_noise", default=None, type=float,
              help="Inverse noise level (filter mode).")
@click.option("--tau-delta", default=None, type=float,
              help="Quantize the scaling to multiples of delta times the source sup-norm.")
@click.option("--tau-threshold", default=None, type=float,
              help="Force the scaling to 0 when the source sup-norm exceeds this.")
@click.option("--rotation", type=click.Choice(["identity", "haar"]), default="identity",
              show_default=True, help="Eigenbasis rotation (scheme/success modes).")
@click.option("--eta", default=0.0, show_default=True, type=float,
              help="Distortion slack for success mode.")
@click.option("--w-batches", default=64, show_default=True, type=int,
              help="Source batches in success mode.")
@click.option("--codebook-cap", default=2**22, show_default=True, type=int,
              help="Refuse codebooks larger than this.")
@click.option("--out", type=click.Path(), default=None, help="Write CSV here instead of stdout.")
@_CONFIG_OPT
@click.pass_context
@_numeric_errors
def cmd_simulate(ctx, mode, n, rate, spectrum, trials, seed, t_level, t_noise,
                 tau_delta, tau_threshold, rotation, eta, w_batches, codebook_cap,
                 out, config) -> None:
    """Monte-Carlo runs: scheme, success probability, or exact-expectation checks."""
    vals = _merged(ctx, config, {
        "mode": mode, "n": n, "rate": rate, "spectrum": spectrum, "trials": trials,
        "seed": seed, "t": t_level, "T": t_noise, "tau_delta": tau_delta,
        "tau_threshold": tau_threshold, "rotation": rotation, "eta": eta,
        "w_batches": w_batches, "codebook_cap": codebook_cap, "out": out,
    })
    s = _parse_spectrum_opt(vals["spectrum"])
    mode = vals["mode"]
    try:
        if mode in ("scheme", "success"):
            cfg = simulator.SimConfig(
                n=int(vals["n"]), rate_bits=float(vals["rate"]), spectrum=s,
                trials=int(vals["trials"]), seed=int(vals["seed"]),
                rotation=str(vals["rotation"]), tau_delta=vals["tau_delta"],
                tau_threshold=vals["tau_threshold"],
                codebook_cap=int(vals["codebook_cap"]), eta=float(vals["eta"]),
                w_batches=int(vals["w_batches"]),
            )
            report = (simulator.run_universal_scheme(cfg) if mode == "scheme"
                      else simulator.estimate_codeword_success(cfg))
        elif mode == "coupling":
            if vals["t"] is None:
                raise click.UsageError("--t is required for mode coupling")
            report = simulator.simulate_wf_coupling(
                s, float(vals["t"]), int(vals["n"]), int(vals["trials"]), int(vals["seed"]))
        else:
            if vals["T"] is None:
                raise click.UsageError("--T is required for mode filter")
            report = simulator.simulate_mmse_filter(
                s, float(vals["T"]), int(vals["n"]), int(vals["trials"]), int(vals["seed"]))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    echo = {
        "mode": mode, "n": int(vals["n"]),
        "rate_bits": float(vals["rate"]) if mode in ("scheme", "success") else None,
        "t": vals["t"] if mode == "coupling" else None,
        "T": vals["T"] if mode == "filter" else None,
        "spectrum": s.as_literal(), "trials": int(vals["trials"]), "seed": int(vals["seed"]),
        "rotation": vals["rotation"] if mode in ("scheme", "success") else None,
        "tau_delta": vals["tau_delta"] if mode in ("scheme", "success") else None,
        "tau_threshold": vals["tau_threshold"] if mode in ("scheme", "success") else None,
        "eta": float(vals["eta"]) if mode == "success" else None,
        "w_batches": int(vals["w_batches"]) if mode == "success" else None,
    }
    record = [
        *(_sim_field(echo[k]) for k in ("mode", "n", "rate_bits", "t", "T", "spectrum",
                                        "trials", "seed", "rotation", "tau_delta",
                                        "tau_threshold", "eta", "w_batches")),
        _sim_field(report.mean), _sim_field(report.se), _sim_field(report.analytic),
        _sim_field(report.p_hat), _sim_field(report.wilson_low),
        _sim_field(report.wilson_high), _sim_field(report.exponent),
        _sim_field(report.exponent_is_lower_bound),
        ";".join(report.warnings),
    ]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(record)
    _emit("simulate", {k: v for k, v in echo.items() if v is not None},
          _SIM_HEADER, [buf.getvalue().rstrip("\n")], vals["out"])


@main.command("version")
def cmd_version() -> None:
    """Print the tool version."""
    click.echo(f"rdgap {__version__}")


if __name__ == "__main__":
    main()
