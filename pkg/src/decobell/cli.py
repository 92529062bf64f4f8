"""Command-line interface.

Subcommands: measures (single point), scan (1D series), contour (2D grid),
critical (typed transition list), classify (region boundaries), check
(oracle self-tests).  Output is CSV or JSON with numbers at 12 significant
digits; identical configurations produce byte-identical output.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 oracle-check failure.
"""

import json
import os
import sys

import click
import numpy as np

from . import __version__, oracle, phase_analysis
from . import decorated_model as dm
from .bond_spectrum import ModelParams, coefficients_K, effective_coupling
from .corrkit import bell_closed_form, bell_horodecki, concurrence_closed_form, concurrence_wootters
from .errors import NumericalFailure
from .ising_exact import nn_correlation
from .oracle import chsh_optimize, ed_bond_trace, extrapolate_shanks, strip_transfer_matrix

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4

SCAN_FIELDS = ["b", "n1", "n2", "c", "q_xx", "q_zz", "q_mumu", "m_z", "ds_z"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _jsonable(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    return value


def load_config(path: str) -> dict:
    """Parse a `key = value` config file; later keys win, '#' comments allowed."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _resolve(cli_value, config: dict, key: str, default=None, cast=float):
    if cli_value is not None:
        return cli_value
    if key in config:
        return cast(config[key])
    return default


def parse_range(text: str):
    """Parse 'lo:hi:step' into a tuple of floats."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if not (lo < hi and step > 0):
        raise ValueError(f"need lo < hi and step > 0 in {text!r}")
    return lo, hi, step


def _out_stream(out, ctx_outdir):
    if out is None or out == "-":
        return sys.stdout, False
    directory = ctx_outdir or os.environ.get("DECOBELL_OUTDIR", "")
    path = out if os.path.isabs(out) or not directory else os.path.join(directory, out)
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _emit_error(fmt: str, message: str, code: int):
    if fmt == "json":
        click.echo(json.dumps({"error": {"message": message, "exit_code": code}}))
    else:
        click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _model(config, j, delta, j1) -> ModelParams:
    return ModelParams(
        j=_resolve(j, config, "j", 1.0),
        delta=_resolve(delta, config, "delta", 2.0),
        j1=_resolve(j1, config, "j1", 0.0),
    )


def _metadata(p: ModelParams, **extra) -> dict:
    meta = {"version": __version__, "j": p.j, "delta": p.delta}
    meta.update(extra)
    return meta


@click.group()
@click.version_option(version=__version__)
@click.option("--outdir", default=None, help="Directory for relative output paths "
              "(overrides DECOBELL_OUTDIR).")
@click.pass_context
def main(ctx, outdir):
    """Exact Bell-function and concurrence engine for the decorated lattice."""
    ctx.ensure_object(dict)
    ctx.obj["outdir"] = outdir


def common_options(fn):
    fn = click.option("--config", "config_path", default=None,
                      help="key = value config file; flags take precedence.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json", "text"]),
                      default=None)(fn)
    fn = click.option("--out", default=None, help="Output file ('-' for stdout).")(fn)
    fn = click.option("--j", type=float, default=None, help="Heisenberg coupling (default 1).")(fn)
    fn = click.option("--delta", type=float, default=None, help="Exchange anisotropy (default 2).")(fn)
    return fn


@main.command("measures")
@common_options
@click.option("--j1", type=float, default=None, help="Backbone coupling.")
@click.option("--t", type=float, default=None, help="Temperature.")
@click.pass_context
def cmd_measures(ctx, config_path, fmt, out, j, delta, j1, t):
    """Correlators, Bell function, concurrence and region at one point."""
    config = load_config(config_path) if config_path else {}
    fmt = _resolve(fmt, config, "format", "text", str)

    def body():
        p = _model(config, j, delta, j1)
        temp = _resolve(t, config, "t")
        if temp is None:
            raise ValueError("a temperature is required (--t)")
        cs = dm.correlators(p, temp)
        ms = dm.measures_from_correlators(cs, p)
        record = {
            "j1": p.j1, "t": temp, "k_eff": cs.k_eff,
            "q_xx": cs.q_xx, "q_zz": cs.q_zz, "q_mumu": cs.q_mumu,
            "m_z": cs.m_z, "ds_z": cs.ds_z,
            "b": ms.b, "n1": ms.n1, "n2": ms.n2, "c": ms.c,
            "region": ms.region.value,
        }
        stream, close = _out_stream(out, ctx.obj.get("outdir"))
        try:
            if fmt == "json":
                doc = {"metadata": _metadata(p, t=temp),
                       "data": {k: _jsonable(v) for k, v in record.items()}}
                stream.write(json.dumps(doc, indent=2) + "\n")
            elif fmt == "csv":
                keys = list(record)
                stream.write(",".join(keys) + "\n")
                stream.write(",".join(_fmt(record[k]) for k in keys) + "\n")
            else:
                for key, value in record.items():
                    stream.write(f"{key:8s} = {_fmt(value)}\n")
        finally:
            if close:
                stream.close()

    _run(body, fmt)


def _run(body, fmt):
    try:
        body()
    except NumericalFailure as exc:
        _emit_error(fmt, str(exc), EXIT_NUMERICAL)
    except (ValueError, OSError) as exc:
        _emit_error(fmt, str(exc), EXIT_CONFIG)


def _write_table(stream, fmt, header, rows, metadata):
    if fmt == "json":
        doc = {"metadata": metadata,
               "data": [{k: _jsonable(v) for k, v in zip(header, row)} for row in rows]}
        stream.write(json.dumps(doc, indent=2) + "\n")
    else:
        for key, value in metadata.items():
            stream.write(f"# {key} = {value}\n")
        stream.write(",".join(header) + "\n")
        for row in rows:
            stream.write(",".join(_fmt(v) for v in row) + "\n")


@main.command("scan")
@common_options
@click.option("--axis", type=click.Choice(["t", "j1"]), default=None)
@click.option("--from", "lo", type=float, default=None)
@click.option("--to", "hi", type=float, default=None)
@click.option("--step", type=float, default=None)
@click.option("--j1", type=float, default=None, help="Fixed J1 for T scans.")
@click.option("--t", type=float, default=None, help="Fixed T for J1 scans.")
@click.option("--derivative", "want_derivative", is_flag=True, default=False,
              help="Append centered-difference dB and dC columns.")
@click.pass_context
def cmd_scan(ctx, config_path, fmt, out, j, delta, axis, lo, hi, step, j1, t,
             want_derivative):
    """Dense scan along T or J1; emits one row per grid point."""
    config = load_config(config_path) if config_path else {}
    fmt = _resolve(fmt, config, "format", "csv", str)

    def body():
        axis_name = _resolve(axis, config, "axis", None, str)
        if axis_name is None:
            raise ValueError("an axis is required (--axis t|j1)")
        axis_key = phase_analysis.AXIS_T if axis_name.lower() == "t" else phase_analysis.AXIS_J1
        lo_v = _resolve(lo, config, "from")
        hi_v = _resolve(hi, config, "to")
        step_v = _resolve(step, config, "step", 1e-3)
        if lo_v is None or hi_v is None:
            raise ValueError("scan range required (--from/--to)")
        p = _model(config, j, delta, j1)
        t_v = _resolve(t, config, "t")
        series = phase_analysis.scan(p, axis_key, lo_v, hi_v, step_v,
                                     t=t_v if axis_key == phase_analysis.AXIS_J1 else None)
        header = [axis_name.upper()] + [f.upper() if f in ("b", "n1", "n2", "c") else f
                                        for f in SCAN_FIELDS]
        columns = [series.x] + [series.field(f) for f in SCAN_FIELDS]
        if want_derivative:
            header += ["dB", "dC"]
            columns += [phase_analysis.series_derivative(series, "b"),
                        phase_analysis.series_derivative(series, "c")]
        rows = [[float(col[i]) for col in columns] for i in range(len(series.x))]
        meta = _metadata(p, axis=axis_name, range=f"{lo_v}:{hi_v}:{step_v}",
                         fixed=(t_v if axis_key == phase_analysis.AXIS_J1 else p.j1))
        stream, close = _out_stream(out, ctx.obj.get("outdir"))
        try:
            _write_table(stream, fmt, header, rows, meta)
        finally:
            if close:
                stream.close()
        if series.errors:
            click.echo(f"# {len(series.errors)} points failed to evaluate", err=True)

    _run(body, fmt)


@main.command("contour")
@common_options
@click.option("--t", "t_range", default=None, help="T range lo:hi:step.")
@click.option("--j1", "j1_range", default=None, help="J1 range lo:hi:step.")
@click.pass_context
def cmd_contour(ctx, config_path, fmt, out, j, delta, t_range, j1_range):
    """Full measures set on a rectangular (T, J1) grid (row-major in T)."""
    config = load_config(config_path) if config_path else {}
    fmt = _resolve(fmt, config, "format", "csv", str)

    def body():
        t_spec = _resolve(t_range, config, "t", "0.001:0.5:0.005", str)
        j1_spec = _resolve(j1_range, config, "j1", "0.1:2.5:0.02", str)
        t_lo, t_hi, t_step = parse_range(t_spec)
        j1_lo, j1_hi, j1_step = parse_range(j1_spec)
        p = _model(config, j, delta, None)
        grid = phase_analysis.contour_grid(p, t_lo, t_hi, t_step, j1_lo, j1_hi, j1_step)
        header = ["T", "J1", "B", "N1", "N2", "C", "q_xx", "q_zz", "q_mumu",
                  "m_z", "ds_z", "region"]
        rows = []
        nj = len(grid.j1_values)
        for it, t_val in enumerate(grid.t_values):
            for ij, j1_val in enumerate(grid.j1_values):
                ms = grid.measures[it * nj + ij]
                cs = grid.correlators[it * nj + ij]
                if ms is None:
                    continue
                rows.append([float(t_val), float(j1_val), ms.b, ms.n1, ms.n2, ms.c,
                             cs.q_xx, cs.q_zz, cs.q_mumu, cs.m_z, cs.ds_z,
                             ms.region.value])
        meta = _metadata(p, t_range=t_spec, j1_range=j1_spec, ordering="row-major in T")
        stream, close = _out_stream(out, ctx.obj.get("outdir"))
        try:
            _write_table(stream, fmt, header, rows, meta)
        finally:
            if close:
                stream.close()

    _run(body, fmt)


@main.command("critical")
@common_options
@click.option("--j1", type=float, default=None, help="Fixed J1: analyze T dependence.")
@click.option("--t-min", type=float, default=1e-3)
@click.option("--t-max", type=float, default=1.0)
@click.option("--axis", type=click.Choice(["j1"]), default=None,
              help="With --axis j1: scan J1 at fixed --t and report jumps.")
@click.option("--t", type=float, default=None)
@click.option("--from", "lo", type=float, default=None)
@click.option("--to", "hi", type=float, default=None)
@click.option("--step", type=float, default=None)
@click.pass_context
def cmd_critical(ctx, config_path, fmt, out, j, delta, j1, t_min, t_max,
                 axis, t, lo, hi, step):
    """Typed transition list: CRITICAL vs KINK vs QPT-JUMP."""
    config = load_config(config_path) if config_path else {}
    fmt = _resolve(fmt, config, "format", "text", str)

    def body():
        lines = []
        if axis == "j1":
            t_v = _resolve(t, config, "t")
            lo_v, hi_v = _resolve(lo, config, "from"), _resolve(hi, config, "to")
            step_v = _resolve(step, config, "step", 1e-3)
            if None in (t_v, lo_v, hi_v):
                raise ValueError("J1 jump detection needs --t, --from and --to")
            p = _model(config, j, delta, None)
            series = phase_analysis.scan(p, phase_analysis.AXIS_J1, lo_v, hi_v,
                                         step_v, t=t_v)
            for point in phase_analysis.detect_sudden_change(series, "b"):
                lines.append(("QPT-JUMP", "J1", point.location, point.uncertainty))
        else:
            p = _model(config, j, delta, j1)
            if _resolve(j1, config, "j1") is None:
                raise ValueError("a fixed --j1 is required")
            tc = dm.critical_temperature(p, t_lo=t_min, t_hi=t_max)
            if tc is not None:
                lines.append(("CRITICAL", "T", tc, 1e-6))
            kink = phase_analysis.detect_kink(p, t_min, t_max)
            if kink is not None:
                lines.append(("KINK", "T", kink.location, kink.uncertainty))
        stream, close = _out_stream(out, ctx.obj.get("outdir"))
        try:
            if fmt == "json":
                doc = {"metadata": {"version": __version__},
                       "data": [{"kind": k, "axis": a, "location": _jsonable(v),
                                 "uncertainty": _jsonable(u)} for k, a, v, u in lines]}
                stream.write(json.dumps(doc, indent=2) + "\n")
            else:
                for kind, axis_name, value, unc in lines:
                    stream.write(f"{kind} {axis_name}={_fmt(value)} +-{_fmt(unc)}\n")
                if not lines:
                    stream.write("# no transitions found on the bracket\n")
        finally:
            if close:
                stream.close()

    _run(body, fmt)


@main.command("classify")
@common_options
@click.option("--t", "t_opt", default=None, help="T range lo:hi:step, or scalar with --j1.")
@click.option("--j1", "j1_opt", default=None, help="J1 range lo:hi:step, or scalar with --t.")
@click.pass_context
def cmd_classify(ctx, config_path, fmt, out, j, delta, t_opt, j1_opt):
    """Region boundaries (B = 2 and C = 0 iso-lines), or one region label."""
    config = load_config(config_path) if config_path else {}
    fmt = _resolve(fmt, config, "format", "csv", str)

    def body():
        t_spec = _resolve(t_opt, config, "t", "0.001:0.5:0.005", str)
        j1_spec = _resolve(j1_opt, config, "j1", "0.1:2.5:0.02", str)
        if ":" not in t_spec and ":" not in j1_spec:
            p = _model(config, j, delta, float(j1_spec))
            region = phase_analysis.classify_region(p, float(t_spec))
            click.echo(region.value)
            return
        t_lo, t_hi, t_step = parse_range(t_spec)
        j1_lo, j1_hi, j1_step = parse_range(j1_spec)
        p = _model(config, j, delta, None)
        grid = phase_analysis.contour_grid(p, t_lo, t_hi, t_step, j1_lo, j1_hi, j1_step)
        rows = []
        for name, level, label in (("b", 2.0, "B=2"), ("c", 0.0, "C=0")):
            for (t1, j1a), (t2, j1b) in phase_analysis.iso_lines(grid, name, level):
                rows.append([label, t1, j1a, t2, j1b])
        header = ["boundary", "t1", "j1_1", "t2", "j1_2"]
        meta = _metadata(p, t_range=t_spec, j1_range=j1_spec)
        stream, close = _out_stream(out, ctx.obj.get("outdir"))
        try:
            _write_table(stream, fmt, header, rows, meta)
        finally:
            if close:
                stream.close()

    _run(body, fmt)


@main.command("check")
@click.option("--seed", type=int, default=0)
@click.option("--n-states", type=int, default=500, help="Random states per suite.")
def cmd_check(seed, n_states):
    """Run the oracle self-check suite; exits 4 on any failure."""
    failures = 0

    def report(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        failures += 0 if ok else 1
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}{(': ' + detail) if detail else ''}")

    states = oracle.random_x_states(n_states, seed=seed)
    worst = max(abs(bell_horodecki(s).b - bell_closed_form(s.q_zz, s.q_xx).b)
                for s in states)
    report("bell closed form vs spectral", worst <= 1e-10, f"max |diff| = {worst:.3g}")

    sub = states[: max(1, n_states // 5)]
    lo_ok, hi_ok, worst_lo, worst_hi = True, True, 0.0, 0.0
    for idx, s in enumerate(sub):
        ref = bell_horodecki(s).b
        val, _ = chsh_optimize(s, seed=seed + idx)
        worst_lo = max(worst_lo, ref - val)
        worst_hi = max(worst_hi, val - ref)
    report("chsh optimization window",
           worst_lo <= 1e-6 and worst_hi <= 1e-9,
           f"max shortfall {worst_lo:.3g}, max excess {worst_hi:.3g}")

    zero_ds = oracle.random_x_states(n_states, seed=seed + 1, zero_ds_z=True)
    worst_c = max(abs(concurrence_wootters(s)
                      - concurrence_closed_form(s.q_zz, s.q_xx, s.m_z))
                  for s in zero_ds)
    report("concurrence closed form vs Wootters", worst_c <= 1e-10,
           f"max |diff| = {worst_c:.3g}")

    rng = np.random.default_rng(seed + 2)
    worst_k = 0.0
    for _ in range(100):
        p = ModelParams(j=rng.uniform(0.2, 2.0), delta=rng.uniform(0.5, 3.0),
                        j1=rng.uniform(-2.5, 2.5))
        beta = rng.uniform(0.05, 30.0)
        kk = coefficients_K(p, beta)
        ref = (4.0 * ed_bond_trace(p, beta, "sxsx", 0.5, 0.5),
               4.0 * ed_bond_trace(p, beta, "sxsx", 0.5, -0.5),
               4.0 * ed_bond_trace(p, beta, "szsz", 0.5, 0.5),
               4.0 * ed_bond_trace(p, beta, "szsz", 0.5, -0.5))
        worst_k = max(worst_k, max(abs(a - b) for a, b in zip(kk, ref)))
    report("bond coefficient transcription", worst_k <= 1e-12,
           f"max |diff| = {worst_k:.3g}")

    widths = (4, 5, 6, 7, 8)
    strip = extrapolate_shanks(
        [strip_transfer_matrix(0.3, w).nn_correlation for w in widths])
    exact = nn_correlation(0.3)
    rel = abs(strip - exact) / abs(exact)
    report("strip vs exact nn correlation", rel <= 0.01, f"rel diff = {rel:.3g}")

    k_eff = effective_coupling(ModelParams(j1=1.2), 1.0 / 0.2).k_eff
    report("effective coupling finite", np.isfinite(k_eff), f"K_eff = {k_eff:.6g}")

    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        sys.exit(EXIT_CHECK)
    click.echo("all checks passed")


if __name__ == "__main__":
    main()
