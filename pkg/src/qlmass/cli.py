"""Command line interface.

Every verb reads one scenario (from --config, adjusted with --set
key=value) and writes JSON or plot-ready CSV into --out.
"""

import csv
import json
import os
import sys

import click
import numpy as np

from . import exact_slices as es
from . import harness as hn
from .conformal_glue import compose, conformal_lambda, gamma_constant, mollification_audit, \
    solve_conformal, write_audit_csv
from .embedding import convexity_report, embed_rotational, embed_static_schwarzschild, write_profile_csv
from .flows import imcf_radial, shi_tam_flow, write_flow_csv
from .jang import jang_boundary, jang_identities, solve_jang_radial, write_jang_csv
from .masses import mass_report
from .surfaces import angular_momentum, charges, round_sphere, write_surface_csv


class Context:
    def __init__(self, cfg, out, tol_scale, threads, seed):
        self.cfg = cfg
        self.out = out
        self.tol_scale = tol_scale
        self.threads = threads
        self.seed = seed

    def path(self, name: str) -> str:
        os.makedirs(self.out, exist_ok=True)
        return os.path.join(self.out, name)

    def write_json(self, name: str, obj) -> str:
        path = self.path(name)
        hn.dump_report(hn._jsonable(obj), path)
        click.echo(path)
        return path

    @property
    def tol(self) -> float:
        return self.cfg.tol * self.tol_scale


def _parse_value(key: str, val: str):
    if key == "theorems":
        return tuple(t.strip() for t in val.split(",") if t.strip())
    if key in hn._INT_KEYS:
        return int(val)
    if key in hn._FLOAT_KEYS:
        return None if val.lower() == "none" else float(val)
    return val


def _overrides(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise click.BadParameter(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        if key not in hn.ScenarioConfig.__dataclass_fields__:
            raise click.BadParameter(f"unknown scenario key {key!r}")
        out[key] = _parse_value(key, val.strip())
    return out


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Scenario INI file.")
@click.option("--set", "sets", multiple=True, help="Override one scenario key, e.g. --set Q=0.6.")
@click.option("--out", default="qlmass_out", show_default=True, help="Output directory.")
@click.option("--tol-scale", default=1.0, show_default=True, type=float, help="Multiplier on the margin tolerance.")
@click.option("--threads", default=1, show_default=True, type=int, help="Worker processes for sweeps.")
@click.option("--seed", default=None, type=int, help="Seed of the time-function search.")
@click.pass_context
def main(ctx, config_path, sets, out, tol_scale, threads, seed):
    """Quasi-local mass inequalities on exact black hole initial data."""
    if tol_scale <= 0 or threads < 1:
        raise click.BadParameter("--tol-scale must be positive and --threads at least 1")
    try:
        cfg = hn.load_config(config_path) if config_path else hn.ScenarioConfig()
        kw = dict(cfg.__dict__)
        kw.update(_overrides(sets))
        if seed is not None:
            kw["seed"] = seed
        cfg = hn.ScenarioConfig(**kw)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    ctx.obj = Context(cfg, out, tol_scale, threads, cfg.seed)


def _radius(ctx: Context, r):
    return ctx.cfg.r_outer if r is None else r


@main.command("build-data")
@click.pass_obj
def build_data(ctx):
    """Sample the slice on [horizon, r_outer] and report constraint residuals."""
    data = hn.Pipeline(ctx.cfg).data
    if isinstance(data, es.RotatingInitialData):
        ctx.write_json("data.json", {"r": data.r, "polar_order": data.polar_order,
                                      "energy_conditions": es.energy_condition_report(data)})
        return
    cols = ("r", "R", "dR", "Ainv", "krr", "kT", "E", "mu", "J")
    with open(ctx.path("data.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in zip(*(getattr(data, c) for c in cols)):
            w.writerow([repr(float(v)) for v in row])
    ctx.write_json("data.json", {"constraints": es.constraint_residuals(data),
                                  "energy_conditions": es.energy_condition_report(data)})


@main.command()
@click.option("--r", "r", type=float, default=None, help="Coordinate radius (default r_outer).")
@click.pass_obj
def surface(ctx, r):
    """Extract a coordinate sphere and its charges and angular momenta."""
    s = es.extract_surface(ctx.cfg.spec, _radius(ctx, r), ctx.cfg.polar_order)
    write_surface_csv(s, ctx.path("surface.csv"))
    ctx.write_json("surface.json", {"area": s.integrate(1.0), **charges(s),
                                     "J_BY": angular_momentum(s, "BY"), "J_LY": angular_momentum(s, "LY")})


@main.command()
@click.option("--r", "r", type=float, default=None)
@click.option("--m-ref", type=float, default=None, help="Embed into Schwarzschild of this mass.")
@click.pass_obj
def embed(ctx, r, m_ref):
    """Isometric embedding of a coordinate sphere."""
    s = es.extract_surface(ctx.cfg.spec, _radius(ctx, r), ctx.cfg.polar_order)
    try:
        prof = embed_rotational(s) if m_ref is None else embed_static_schwarzschild(s, m_ref)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    write_profile_csv(prof, ctx.path("profile.csv"))
    ctx.write_json("embed.json", convexity_report(prof))


@main.command()
@click.option("--tau-outer", type=float, default=0.0, show_default=True)
@click.option("--blowup/--no-blowup", default=True, show_default=True)
@click.pass_obj
def jang(ctx, tau_outer, blowup):
    """Radial Jang graph over the annulus."""
    p = hn.Pipeline(ctx.cfg)
    try:
        sol = solve_jang_radial(p.data, tau_outer, blowup_at_horizon=blowup)
    except (ValueError, RuntimeError) as exc:
        raise click.ClickException(str(exc))
    write_jang_csv(sol, ctx.path("jang.csv"))
    ctx.write_json("jang.json", {"boundary": jang_boundary(sol), "identities": jang_identities(sol),
                                  "ode_residual": sol.ode_residual()})


@main.command()
@click.option("--u0", type=float, default=None, help="Boundary value (default from the Jang boundary).")
@click.option("--m-ref", type=float, default=None, help="Schwarzschild reference mass.")
@click.pass_obj
def shitam(ctx, u0, m_ref):
    """Parabolic exterior flow off a round sphere of the outer area radius."""
    p = hn.Pipeline(ctx.cfg)
    R = np.sqrt(p.outer_area / (4 * np.pi))
    base = round_sphere(R, ctx.cfg.shitam_order)
    try:
        prof = embed_rotational(base) if m_ref is None else embed_static_schwarzschild(base, m_ref)
        if u0 is None:
            _, bd = p._jang()
            u0 = prof.H0[0] / bd["Hbar_minus_X"]
        ref = "flat" if m_ref is None else "schwarzschild"
        tr = shi_tam_flow(prof, u0, ctx.cfg.shitam_r_max, reference=ref, m_ref=m_ref or 0.0)
    except (ValueError, RuntimeError, hn.StageError) as exc:
        raise click.ClickException(str(exc))
    write_flow_csv(tr, ctx.path("shitam.csv"))
    ctx.write_json("shitam.json", {"u0": u0, "mass_limit": tr.mass_limit, "monotone": tr.monotone,
                                    "max_increase": tr.max_increase})


@main.command()
@click.pass_obj
def imcf(ctx):
    """Weak IMCF from the horizon to the outer sphere."""
    p = hn.Pipeline(ctx.cfg)
    try:
        tr = imcf_radial(p.data, "horizon", ctx.cfg.r_outer, n=ctx.cfg.imcf_n, polar_order=ctx.cfg.polar_order)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    write_flow_csv(tr, ctx.path("imcf.csv"))
    ctx.write_json("imcf.json", {"alpha2": tr.alpha2, "t0": tr.t0, "area0": tr.area0,
                                  "area_law_error": tr.area_law_error(), "meta": tr.meta})


def _composite(ctx):
    p = hn.Pipeline(ctx.cfg)
    sol, bd = p._jang()
    R = float(p.data.profile("R", sol.r[-1]))
    prof = embed_rotational(round_sphere(R, ctx.cfg.shitam_order))
    st = shi_tam_flow(prof, prof.H0[0] / bd["Hbar_minus_X"], ctx.cfg.shitam_r_max)
    return compose(sol, st)


@main.command()
@click.option("--inner", type=click.Choice(["dirichlet", "neumann", "robin"]), default="dirichlet",
              show_default=True)
@click.pass_obj
def conformal(ctx, inner):
    """Conformal factor on the Jang and exterior composite."""
    try:
        cs = solve_conformal(_composite(ctx), inner=inner)
    except (ValueError, RuntimeError, hn.StageError) as exc:
        raise click.ClickException(str(exc))
    ctx.write_json("conformal.json", {"A": cs.A, "P": cs.P, "gamma": gamma_constant(cs),
                                       "lambda": conformal_lambda(cs)["lambda"],
                                       "energy_interior": cs.energy_interior})


@main.command("glue-audit")
@click.option("--deltas", default="0.01,0.005,0.0025", show_default=True)
@click.pass_obj
def glue_audit(ctx, deltas):
    """Mollification audit of the corner of the composite."""
    ds = tuple(float(x) for x in deltas.split(","))
    try:
        rows = mollification_audit(_composite(ctx), ds)
    except (ValueError, RuntimeError, hn.StageError) as exc:
        raise click.ClickException(str(exc))
    write_audit_csv(rows, ctx.path("glue_audit.csv"))
    ctx.write_json("glue_audit.json", rows)


@main.command()
@click.option("--r", "r", type=float, default=None)
@click.option("--wy-sweep/--no-wy-sweep", default=False, show_default=True)
@click.pass_obj
def mass(ctx, r, wy_sweep):
    """Quasi-local masses of a coordinate sphere."""
    s = es.extract_surface(ctx.cfg.spec, _radius(ctx, r), ctx.cfg.polar_order)
    try:
        rep = mass_report(s, wy_sweep=wy_sweep, seed=ctx.seed)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    ctx.write_json("mass.json", rep)


def _exit(verdicts, tol):
    code = hn.exit_status(verdicts, tol)
    for v in verdicts:
        flag = "ok" if v.get("hypotheses_pass") else "hyp-fail"
        click.echo(f"{v.get('scenario')} {v.get('theorem')} margin={v.get('margin')} {flag}"
                   + (f" error={v['error']}" if v.get("error") else ""))
    sys.exit(code)


@main.command()
@click.option("--theorem", "theorems", multiple=True, type=click.Choice(hn.THEOREMS))
@click.pass_obj
def verify(ctx, theorems):
    """Verify theorems on the scenario and write report.json."""
    cfg = ctx.cfg
    if theorems:
        cfg = hn.ScenarioConfig(**{**cfg.__dict__, "theorems": theorems})
    rep = hn.run_scenario(cfg)
    rep["tolerances"]["margin"] = ctx.tol
    ctx.write_json("report.json", rep)
    _exit(rep["verdicts"], ctx.tol)


@main.command()
@click.option("--range", "ranges", multiple=True, required=True,
              help="Sweep one key over comma separated values, e.g. --range Q=0.2,0.4.")
@click.pass_obj
def sweep(ctx, ranges):
    """Cartesian parameter sweep of the scenario theorems."""
    grid = {}
    for item in ranges:
        key, vals = item.split("=", 1)
        if key not in hn.ScenarioConfig.__dataclass_fields__:
            raise click.BadParameter(f"unknown scenario key {key!r}")
        grid[key] = [_parse_value(key, v) for v in vals.split(",") if v.strip()]
    rows = hn.run_sweep(ctx.cfg, grid, threads=ctx.threads)
    ctx.write_json("sweep.json", {"schema": hn.SCHEMA_VERSION, "base": ctx.cfg.__dict__, "ranges": grid,
                                   "verdicts": rows, "tolerances": {"margin": ctx.tol}})
    _exit(rows, ctx.tol)


@main.command()
@click.pass_obj
def bekenstein(ctx):
    """Bekenstein-like bounds with each quasi-local mass as the energy."""
    rec = hn.verify("Bekenstein", ctx.cfg).to_dict()
    ctx.write_json("bekenstein.json", rec)
    _exit([rec], ctx.tol)


@main.command("write-config")
@click.argument("path", type=click.Path(dir_okay=False))
@click.pass_obj
def write_config(ctx, path):
    """Write the effective scenario as an INI file."""
    with open(path, "w") as fh:
        fh.write(hn.config_to_ini(ctx.cfg))
    click.echo(path)


if __name__ == "__main__":
    main()
