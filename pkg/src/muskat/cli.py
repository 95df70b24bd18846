"""muskat <command> --config <path> [--out <dir>] [--threads N]"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import certification as cert
from .errors import InvalidArgument
from .evolution import SimConfig, parabola_residual, simulate
from .grid import GridFunction, GridSpec, bump, make_grid, norms, sample
from .io import write_grid_csv, write_json, write_trajectory
from .singular import make_scheme

COMMANDS = ("simulate", "certify", "parabola-check", "cauchy", "norms")


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass(frozen=True)
class GridCfg:
    L: float = 10.0
    n: int = 2001


@dataclass(frozen=True)
class QuadCfg:
    A: float = 40.0
    tail_nodes: int = 256


@dataclass(frozen=True)
class SimCfg:
    cfl: float | None = 0.25
    dt: float | None = None
    t_end: float = 0.5
    epsilon: float = 0.0
    output_every: int = 1
    snapshot_every: int = 0
    taper_fraction: float = 0.1
    blowup_guard: float = 1e6


@dataclass(frozen=True)
class InitialCfg:
    kind: str = "bump"
    amplitude: float | tuple[float, ...] = 0.0
    width: float | tuple[float, ...] = 1.0
    center: float | tuple[float, ...] = 0.0


@dataclass(frozen=True)
class CertCfg:
    lemma_ids: tuple[str, ...] = cert.LEMMA_IDS
    lambdas: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class CauchyCfg:
    epsilons: tuple[float, ...] = (0.2, 0.1, 0.05)
    T: float = 0.25


@dataclass(frozen=True)
class ParabolaCfg:
    xs: tuple[float, ...] = tuple(float(v) for v in range(-5, 6))
    tolerance: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid: GridCfg = field(default_factory=GridCfg)
    quad: QuadCfg = field(default_factory=QuadCfg)
    sim: SimCfg = field(default_factory=SimCfg)
    initial: InitialCfg = field(default_factory=InitialCfg)
    cert: CertCfg = field(default_factory=CertCfg)
    cauchy: CauchyCfg = field(default_factory=CauchyCfg)
    parabola: ParabolaCfg = field(default_factory=ParabolaCfg)
    out_dir: str = "out"

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


SECTIONS = {
    "grid": GridCfg, "quad": QuadCfg, "sim": SimCfg, "initial": InitialCfg,
    "cert": CertCfg, "cauchy": CauchyCfg, "parabola": ParabolaCfg,
}


def _number(path, v, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{path}: expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite")
    return float(v)


def _numbers(path, v):
    if isinstance(v, list):
        if not v:
            raise ConfigError(f"{path}: must be nonempty")
        return tuple(_number(f"{path}[{i}]", x) for i, x in enumerate(v))
    return _number(path, v)


def _section(name, cls, raw):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in fields(cls)}
    for k in raw:
        if k not in known:
            raise ConfigError(f"{name}.{k}: unknown key")
    vals = {}
    for k, v in raw.items():
        path = f"{name}.{k}"
        default = getattr(cls(), k)
        if k in ("n", "tail_nodes", "output_every", "snapshot_every"):
            vals[k] = _number(path, v, integer=True)
        elif k == "kind":
            if not isinstance(v, str):
                raise ConfigError(f"{path}: expected a string")
            vals[k] = v
        elif k == "lemma_ids":
            if not isinstance(v, list) or not all(isinstance(x, str) for x in v) or not v:
                raise ConfigError(f"{path}: expected a nonempty list of strings")
            vals[k] = tuple(v)
        elif isinstance(default, tuple):
            if not isinstance(v, list):
                raise ConfigError(f"{path}: expected a list")
            vals[k] = _numbers(path, v)
        elif k in ("amplitude", "width", "center"):
            vals[k] = _numbers(path, v)
        elif v is None and k in ("cfl", "dt"):
            vals[k] = None
        else:
            vals[k] = _number(path, v)
    if cls is SimCfg and "dt" in raw and raw["dt"] is not None and "cfl" not in raw:
        vals["cfl"] = None
    return cls(**vals)


def _validate(cfg: RunConfig):
    g = cfg.grid
    if g.n < 9 or g.n % 2 == 0:
        raise ConfigError(f"grid.n: must be an odd integer >= 9, got {g.n}")
    if not g.L > 0:
        raise ConfigError(f"grid.L: must be positive, got {g.L}")
    dx = 2.0 * g.L / (g.n - 1)
    if cfg.quad.tail_nodes < 16:
        raise ConfigError(f"quad.tail_nodes: must be >= 16, got {cfg.quad.tail_nodes}")
    if cfg.quad.A < 2.0 * g.L + dx * (1 - 1e-9):
        raise ConfigError(f"quad.A: must be >= 2L + dx = {2 * g.L + dx}, got {cfg.quad.A}")
    s = cfg.sim
    if s.cfl is None and s.dt is None:
        raise ConfigError("sim.cfl: one of sim.cfl or sim.dt is required")
    if s.cfl is not None and s.dt is not None:
        raise ConfigError("sim.dt: give either sim.cfl or sim.dt, not both")
    if s.cfl is not None and not 0 < s.cfl <= 1:
        raise ConfigError(f"sim.cfl: must lie in (0, 1], got {s.cfl}")
    if s.dt is not None and not s.dt > 0:
        raise ConfigError(f"sim.dt: must be positive, got {s.dt}")
    if not s.t_end > 0:
        raise ConfigError(f"sim.t_end: must be positive, got {s.t_end}")
    if s.epsilon < 0:
        raise ConfigError(f"sim.epsilon: must be >= 0, got {s.epsilon}")
    if 0 < s.epsilon < 2.0 * dx * (1 - 1e-12):
        raise ConfigError(f"sim.epsilon: must be 0 or >= 2*dx = {2 * dx}, got {s.epsilon}")
    if s.output_every < 1:
        raise ConfigError(f"sim.output_every: must be >= 1, got {s.output_every}")
    if s.snapshot_every < 0:
        raise ConfigError(f"sim.snapshot_every: must be >= 0, got {s.snapshot_every}")
    if not 0 <= s.taper_fraction < 0.5:
        raise ConfigError(f"sim.taper_fraction: must lie in [0, 0.5), got {s.taper_fraction}")
    if not s.blowup_guard > 0:
        raise ConfigError(f"sim.blowup_guard: must be positive, got {s.blowup_guard}")
    ini = cfg.initial
    if ini.kind not in ("bump", "sum-of-bumps"):
        raise ConfigError(f"initial.kind: must be 'bump' or 'sum-of-bumps', got {ini.kind!r}")
    parts = [ini.amplitude, ini.width, ini.center]
    if ini.kind == "bump":
        for name, v in zip(("amplitude", "width", "center"), parts):
            if isinstance(v, tuple):
                raise ConfigError(f"initial.{name}: a single bump takes a number")
    else:
        lens = {len(v) for v in parts if isinstance(v, tuple)}
        if len(lens) > 1:
            raise ConfigError("initial.amplitude: amplitude, width and center lists differ in length")
    widths = ini.width if isinstance(ini.width, tuple) else (ini.width,)
    if any(not w > 0 for w in widths):
        raise ConfigError("initial.width: widths must be positive")
    for lid in cfg.cert.lemma_ids:
        if lid not in cert.LEMMAS:
            raise ConfigError(f"cert.lemma_ids: unknown lemma id {lid!r}")
    lam = cfg.cert.lambdas
    if any(v < 1 for v in lam) or any(b <= a for a, b in zip(lam, lam[1:])):
        raise ConfigError(f"cert.lambdas: must be increasing and >= 1, got {list(lam)}")
    eps = cfg.cauchy.epsilons
    if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError(f"cauchy.epsilons: must be strictly decreasing, got {list(eps)}")
    if cfg.command == "cauchy" and any(e < 2.0 * dx * (1 - 1e-12) for e in eps):
        raise ConfigError(f"cauchy.epsilons: every epsilon must be >= 2*dx = {2 * dx}")
    if not cfg.cauchy.T > 0:
        raise ConfigError(f"cauchy.T: must be positive, got {cfg.cauchy.T}")
    if not cfg.parabola.tolerance > 0:
        raise ConfigError("parabola.tolerance: must be positive")


def parse_config(text: str, command: str | None = None) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("line 1: top level must be a JSON object")
    known = {"command", "out_dir", *SECTIONS}
    for k in raw:
        if k not in known:
            raise ConfigError(f"{k}: unknown key")
    cmd = raw.get("command", command)
    if command is not None and cmd != command:
        raise ConfigError(f"command: config says {cmd!r} but {command!r} was requested")
    if cmd not in COMMANDS:
        raise ConfigError(f"command: must be one of {', '.join(COMMANDS)}, got {cmd!r}")
    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str):
        raise ConfigError("out_dir: expected a string")
    sections = {name: _section(name, cls, raw.get(name)) for name, cls in SECTIONS.items()}
    cfg = RunConfig(command=cmd, out_dir=out_dir, **sections)
    _validate(cfg)
    return cfg


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2)


# --- running ------------------------------------------------------------------

def _spec(cfg: RunConfig) -> GridSpec:
    return make_grid(cfg.grid.L, cfg.grid.n)


def initial_data(cfg: RunConfig, spec: GridSpec) -> GridFunction:
    ini = cfg.initial
    as_tuple = lambda v: v if isinstance(v, tuple) else (v,)
    amps, widths, centers = as_tuple(ini.amplitude), as_tuple(ini.width), as_tuple(ini.center)
    m = max(len(amps), len(widths), len(centers))
    pick = lambda seq, i: seq[i] if len(seq) > 1 else seq[0]
    return sample(spec, lambda x: sum(
        bump(x, pick(amps, i), pick(widths, i), pick(centers, i)) for i in range(m)
    ))


def sim_config(cfg: RunConfig, spec: GridSpec) -> SimConfig:
    s = cfg.sim
    return SimConfig(
        grid=spec, quad=make_scheme(spec, cfg.quad.A, cfg.quad.tail_nodes),
        t_end=s.t_end, dt=s.dt, cfl=s.cfl, epsilon=s.epsilon,
        output_every=s.output_every, snapshot_every=s.snapshot_every,
        taper_fraction=s.taper_fraction, blowup_guard=s.blowup_guard,
    )


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def _report_dict(r):
    return {"l2": r.l2, "d3_l2": r.d3_l2, "energy": r.energy, "c_norms": list(r.c_norms),
            "holder_2_half": r.holder_2_half, "h3": r.h3}


def _run_simulate(cfg, out):
    spec = _spec(cfg)
    sc = sim_config(cfg, spec)
    g0 = initial_data(cfg, spec)
    g0.check_support()
    _log(f"simulate: n={spec.n} dx={spec.dx:g} dt={sc.step_dt:g} steps={sc.steps}")
    traj = simulate(g0, sc, progress=lambda t, r: _log(f"  t={t:.6f} h3={r.h3:.6g}"))
    write_trajectory(out, traj)
    summary = {
        "command": "simulate", "t_final": traj.times[-1], "steps": sc.steps, "dt": traj.dt,
        "blew_up": traj.blew_up, "blowup_time": traj.blowup_time,
        "blowup_reason": traj.blowup_reason,
        "initial": _report_dict(traj.reports[0]), "final": _report_dict(traj.reports[-1]),
    }
    return summary, (2 if traj.blew_up else 0)


def _run_certify(cfg, out):
    spec = _spec(cfg)
    quad = make_scheme(spec, cfg.quad.A, cfg.quad.tail_nodes)
    base = initial_data(cfg, spec)
    results = {}
    for lid in cfg.cert.lemma_ids:
        rep = cert.certify_scaling(lid, base, cfg.cert.lambdas, quad)
        write_json(out / f"cert_{lid}.json", rep.to_json())
        _log(f"  {lid}: fitted {rep.fitted_degree:.3f} claimed {rep.claimed_degree} "
             f"{'pass' if rep.pass_ else 'FAIL'}")
        results[lid] = {"pass": rep.pass_, "fitted_degree": rep.fitted_degree,
                        "claimed_degree": rep.claimed_degree}
    summary = {"command": "certify", "all_pass": all(r["pass"] for r in results.values()),
               "lemmas": results}
    return summary, 0


def _run_parabola(cfg, out):
    spec = _spec(cfg)
    res = parabola_residual(cfg.parabola.xs, make_scheme(spec, cfg.quad.A, cfg.quad.tail_nodes))
    fine = make_grid(cfg.grid.L, 2 * cfg.grid.n - 1)
    res_half = parabola_residual(cfg.parabola.xs, make_scheme(fine, cfg.quad.A, cfg.quad.tail_nodes))
    summary = {
        "command": "parabola-check", "dx": spec.dx, "A": cfg.quad.A,
        "max_residual": res, "max_residual_half_dx": res_half,
        "reduction": (res / res_half) if res_half > 0 else None,
        "tolerance": cfg.parabola.tolerance, "within_tolerance": res < cfg.parabola.tolerance,
    }
    return summary, 0


def _run_cauchy(cfg, out):
    spec = _spec(cfg)
    sc = sim_config(cfg, spec)
    g0 = initial_data(cfg, spec)
    rep = cert.cauchy_rate(g0, cfg.cauchy.epsilons, cfg.cauchy.T, sc,
                           progress=lambda e, tr: _log(f"  epsilon={e:g} done"))
    summary = {"command": "cauchy", "epsilons": list(rep.epsilons), "gaps": list(rep.gaps),
               "rate": rep.rate}
    return summary, 0


def _run_norms(cfg, out):
    spec = _spec(cfg)
    g0 = initial_data(cfg, spec)
    write_grid_csv(out / "g0.csv", g0)
    return {"command": "norms", "support_ok": g0.support_ok(), **_report_dict(norms(g0))}, 0


RUNNERS = {
    "simulate": _run_simulate, "certify": _run_certify, "parabola-check": _run_parabola,
    "cauchy": _run_cauchy, "norms": _run_norms,
}


def run(cfg: RunConfig, out_dir: str | None = None) -> tuple[int, Path]:
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary, code = RUNNERS[cfg.command](cfg, out)
    summary["config"] = cfg.to_dict()
    path = out / "summary.json"
    write_json(path, summary)
    return code, path


def _threads(flag: int | None) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get("MUSKAT_THREADS")
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise InvalidArgument(f"MUSKAT_THREADS must be an integer, got {env!r}") from None


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="muskat", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    args = p.parse_args(argv)
    try:
        n = _threads(args.threads)
        if n is not None:
            import numba
            if not 1 <= n <= numba.config.NUMBA_NUM_THREADS:
                raise InvalidArgument(
                    f"thread count must lie in 1..{numba.config.NUMBA_NUM_THREADS}, got {n}")
            numba.set_num_threads(n)
        text = Path(args.config).read_text()
        cfg = parse_config(text, args.command)
        code, path = run(cfg, args.out)
    except (ConfigError, InvalidArgument, ValueError, OSError) as e:
        print(f"muskat: error: {e}", file=sys.stderr)
        return 1
    print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
