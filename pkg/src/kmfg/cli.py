"""Command-line entry point.

Subcommands drive the solvers, persist CSV/JSON/SVG outputs into a run
directory, and summarize every run with a manifest listing per-file
checksums.  All defaults reproduce the reference experiments
(beta = 1/2, sigma = 1).  Exit codes: 0 success, 2 configuration error,
3 stationary-solver non-convergence, 4 Picard stagnation, and further codes
per error class (see ERROR_EXIT_CODES).
"""

import argparse
import configparser
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, io, svg
from .errors import (
    CflViolation,
    ConfigError,
    HorizonTooShort,
    KmfgError,
    LambdaTooLarge,
    NonConvergence,
    PicardStagnation,
    StepRejected,
    WindowDegenerate,
)
from .eikonal import eikonal_gap, explicit_eikonal, lipschitz_check, scaled_w
from .evolution import estimate_decay_rate, solve_backward_hjb, solve_mfg
from .fixedpoint import bifurcation_scan, big_f, find_fixed_points, stationary_profile
from .hjb import drift_field, solve_stationary_hjb
from .linearized import (
    WeightedForcing,
    lambda_norm,
    mn_operators,
    remainder_probe,
    xi_operator,
)
from .particles import simulate
from .torus import Grid, Params, standard_density
from .evolution import Forcing, uniform_time_grid

ERROR_EXIT_CODES = {
    ConfigError: 2,
    NonConvergence: 3,
    PicardStagnation: 4,
    StepRejected: 5,
    CflViolation: 6,
    LambdaTooLarge: 7,
    WindowDegenerate: 8,
    HorizonTooShort: 9,
}

COMMANDS = ("stationary", "bifurcation", "evolve", "eikonal", "linearize", "particles")


@dataclass
class RunConfig:
    """Validated description of one run."""

    command: str
    beta: float = 0.5
    sigma: float = 1.0
    kappa: float = 2.0
    grid_n: int = 256
    horizon: float = 20.0
    tolerances: dict = field(default_factory=lambda: {"picard": 1e-7, "newton": 1e-10})
    initial_condition: str = "uniform"
    output_dir: str = "kmfg_out"
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not (self.beta > 0 and self.sigma > 0 and self.kappa >= 0):
            raise ConfigError("need beta > 0, sigma > 0, kappa >= 0")
        if self.grid_n < 16 or self.grid_n % 2:
            raise ConfigError("grid_n must be an even integer >= 16")
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")

    @property
    def params(self):
        return Params(self.beta, self.sigma, self.kappa)

    @property
    def grid(self):
        return Grid(self.grid_n)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time_s: float
    outputs: dict


def _initial_measure(cfg):
    name = cfg.initial_condition
    if name.endswith(".csv") or os.path.sep in name:
        return io.read_density_csv(name, cfg.grid)
    return standard_density(name, cfg.grid)


def _run_stationary(cfg, outdir, out):
    gamma = float(cfg.options.get("gamma", 1.0))
    prof = stationary_profile(gamma, cfg.params, cfg.grid, tol=cfg.tolerances["newton"])
    io.write_value_csv(os.path.join(outdir, "value.csv"), prof.value)
    io.write_density_csv(os.path.join(outdir, "density.csv"), prof.mu)
    out.extend(["value.csv", "density.csv"])
    return {
        "gamma": gamma,
        "residual_norm": prof.value.residual_norm,
        "a": prof.a,
        "b": prof.b,
        "peak_density": float(prof.mu.density.max()),
        "trough_density": float(prof.mu.density.min()),
    }


def _run_bifurcation(cfg, outdir, out):
    opts = cfg.options
    kmin = float(opts.get("kappa_min", cfg.kappa))
    kmax = float(opts.get("kappa_max", cfg.kappa))
    steps = int(opts.get("steps", 1))
    if steps == 1:
        points = [find_fixed_points(kmax, cfg.params.with_kappa(kmax), cfg.grid)]
    else:
        points = bifurcation_scan(kmin, kmax, steps, cfg.params, cfg.grid)
    io.write_bifurcation_csv(os.path.join(outdir, "bifurcation.csv"), points)
    out.append("bifurcation.csv")

    kap = points[-1].kappa
    gammas = np.linspace(0.0, kap, 60)
    fvals = np.array([big_f(kap, g, cfg.params, cfg.grid) for g in gammas])
    markers = [(fp, fp) for fp in points[-1].fixed_points]
    svg.line_plot(
        os.path.join(outdir, "bifurcation.svg"),
        gammas,
        [(fvals, "response", False), (gammas, "identity", True)],
        title=f"Self-consistency map at kappa={kap:g}",
        xlabel="forcing amplitude",
        ylabel="scaled cos moment",
        markers=markers,
    )
    out.append("bifurcation.svg")
    return {
        "kappa": kap,
        "gamma_star": points[-1].gamma_star,
        "fixed_points": points[-1].fixed_points,
        "order_parameters": points[-1].order_parameters,
        "n_points": len(points),
    }


def _run_evolve(cfg, outdir, out):
    mu0 = _initial_measure(cfg)
    sol = solve_mfg(
        mu0,
        cfg.params,
        horizon=cfg.horizon,
        tol=cfg.tolerances["picard"],
        dt=float(cfg.options.get("dt", 1e-2)),
    )
    io.write_moments_csv(os.path.join(outdir, "moments.csv"), sol.flow)
    io.write_forcing_csv(os.path.join(outdir, "forcing.csv"), sol.forcing)
    io.write_flow_csv(os.path.join(outdir, "flow.csv"), sol.flow)
    svg.heatmap(
        os.path.join(outdir, "evolve.svg"),
        sol.flow.t,
        sol.flow.grid.x,
        sol.flow.densities,
        title=f"Density flow, kappa={cfg.kappa:g}",
    )
    out.extend(["moments.csv", "forcing.csv", "flow.csv", "evolve.svg"])
    summary = {
        "iterations": sol.iterations,
        "picard_residual": sol.picard_residual,
        "d_final": float(sol.flow.d[-1]),
    }
    try:
        summary["decay_rate"] = estimate_decay_rate(
            sol.flow, (cfg.horizon / 4.0, 3.0 * cfg.horizon / 4.0)
        )
    except WindowDegenerate:
        summary["decay_rate"] = None
    return summary


def _run_eikonal(cfg, outdir, out):
    gammas = cfg.options.get("gammas", [10.0, 100.0, 1000.0, 10000.0])
    gaps = eikonal_gap(gammas, cfg.params, cfg.grid)
    sup_wx = [lipschitz_check(g, cfg.params, cfg.grid) for g in gammas]
    io.write_columns_csv(
        os.path.join(outdir, "eikonal.csv"),
        ["gamma", "sup_gap", "sup_wx"],
        [np.array(gammas), np.array([s for _, s in gaps]), np.array(sup_wx)],
    )
    out.append("eikonal.csv")
    target = explicit_eikonal(cfg.grid)
    prof = scaled_w(gammas[-1], cfg.params, cfg.grid)
    io.write_columns_csv(
        os.path.join(outdir, "profiles.csv"),
        ["x", "w_centered", "w_explicit"],
        [cfg.grid.x, prof.w_centered.values, target.values],
    )
    out.append("profiles.csv")
    svg.line_plot(
        os.path.join(outdir, "eikonal.svg"),
        cfg.grid.x,
        [
            (prof.w_centered.values, f"gamma={gammas[-1]:g}", False),
            (target.values, "limit profile", True),
        ],
        title="Rescaled value profile vs explicit limit",
        xlabel="x",
        ylabel="w",
    )
    out.append("eikonal.svg")
    return {"gaps": {f"{g:g}": s for g, s in gaps}, "sup_wx": sup_wx}


def _run_linearize(cfg, outdir, out):
    lam = float(cfg.options.get("lam", cfg.sigma**2 / 16.0))
    amplitude = float(cfg.options.get("amplitude", 0.25))
    mu0 = _initial_measure(cfg)
    t = uniform_time_grid(cfg.horizon, float(cfg.options.get("dt", 1e-2)))
    forcing = Forcing(t, amplitude * np.exp(-lam * t), np.zeros_like(t))
    wf = WeightedForcing(forcing, lam)
    mn = mn_operators(wf, cfg.params)
    xi = xi_operator(wf, cfg.params)
    r_norm, r_bound = remainder_probe(mu0, wf, cfg.params, cfg.grid)

    kappa = cfg.params.kappa
    from .evolution import apply_T
    from .torus import trig_moments

    response = apply_T(forcing, mu0, cfg.params, cfg.grid)
    a0, b0, _ = trig_moments(mu0)
    heat = np.exp(-cfg.sigma**2 * t / 2.0)
    io.write_columns_csv(
        os.path.join(outdir, "linearize.csv"),
        ["t", "M", "N", "Xi_gamma", "Xi_eta", "R_gamma", "R_eta"],
        [
            t,
            mn.gamma,
            mn.eta,
            xi.gamma,
            xi.eta,
            kappa * (response.gamma - heat * a0 - xi.gamma),
            kappa * (response.eta - heat * b0 - xi.eta),
        ],
    )
    out.append("linearize.csv")
    return {
        "lambda": lam,
        "mn_ratio": lambda_norm(mn, lam) / wf.norm_lambda,
        "mn_bound": 1.0 / cfg.params.rho,
        "xi_ratio": lambda_norm(xi, lam) / wf.norm_lambda,
        "xi_bound": 1.0 / (cfg.params.kappa_c - 2.0 * lam * cfg.params.rho),
        "r_norm": r_norm,
        "r_bound": r_bound,
    }


def _particles_drift(cfg):
    src = cfg.options.get("drift", "zero")
    if src == "zero":
        return None
    if src.startswith("stationary:"):
        gamma = float(src.split(":", 1)[1])
        return drift_field(solve_stationary_hjb(gamma, cfg.params, cfg.grid))
    if src.startswith("mfg_run:"):
        rundir = src.split(":", 1)[1]
        forcing = io.read_forcing_csv(os.path.join(rundir, "forcing.csv"))
        return solve_backward_hjb(forcing, cfg.params, cfg.grid)
    raise ConfigError(f"unknown drift source {src!r}")


def _run_particles(cfg, outdir, out):
    drift = _particles_drift(cfg)
    stats, _ = simulate(
        _initial_measure(cfg),
        drift,
        cfg.params,
        n_particles=int(cfg.options.get("n_particles", 10_000)),
        dt=float(cfg.options.get("dt", 1e-3)),
        seed=cfg.seed,
        t_max=cfg.horizon,
        sample_every=float(cfg.options.get("sample_every", 0.1)),
    )
    io.write_columns_csv(
        os.path.join(outdir, "particles.csv"),
        ["t", "a_emp", "b_emp", "se"],
        [
            np.array([s.t for s in stats]),
            np.array([s.a_emp for s in stats]),
            np.array([s.b_emp for s in stats]),
            np.array([s.se for s in stats]),
        ],
    )
    out.append("particles.csv")
    return {
        "n_particles": int(cfg.options.get("n_particles", 10_000)),
        "a_final": stats[-1].a_emp,
        "b_final": stats[-1].b_emp,
        "se_final": stats[-1].se,
    }


_RUNNERS = {
    "stationary": _run_stationary,
    "bifurcation": _run_bifurcation,
    "evolve": _run_evolve,
    "eikonal": _run_eikonal,
    "linearize": _run_linearize,
    "particles": _run_particles,
}


def run(config):
    """Execute one configured run; returns the written manifest."""
    outdir = os.environ.get("KMFG_OUTPUT_DIR", config.output_dir)
    os.makedirs(outdir, exist_ok=True)
    started = time.perf_counter()
    outputs = []
    results = _RUNNERS[config.command](config, outdir, outputs)
    summary = {"config": config.to_dict(), "results": results}
    io.write_json(os.path.join(outdir, "summary.json"), summary)
    outputs.append("summary.json")
    manifest = RunManifest(
        config=config.to_dict(),
        version=__version__,
        wall_time_s=time.perf_counter() - started,
        outputs={name: io.sha256_file(os.path.join(outdir, name)) for name in outputs},
    )
    io.write_json(os.path.join(outdir, "manifest.json"), asdict(manifest))
    return manifest


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="kmfg",
        description="Kuramoto mean-field game solvers and experiments",
    )
    parser.add_argument("--version", action="version", version=f"kmfg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI file with a section per subcommand")
        p.add_argument("--beta", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--n", dest="grid_n", type=int)
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("stationary", help="solve the stationary value/density profile")
    common(p)
    p.add_argument("--gamma", type=float)

    p = sub.add_parser("bifurcation", help="locate fixed points over a kappa range")
    common(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--kappa-min", dest="kappa_min", type=float)
    p.add_argument("--kappa-max", dest="kappa_max", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("evolve", help="solve the time-dependent game from an initial density")
    common(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--init", dest="initial_condition")
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--picard-tol", dest="picard_tol", type=float)

    p = sub.add_parser("eikonal", help="strong-interaction rescaling ladder")
    common(p)
    p.add_argument("--gammas", help="comma-separated increasing amplitudes")

    p = sub.add_parser("linearize", help="weighted response operators and remainder probe")
    common(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--init", dest="initial_condition")
    p.add_argument("--horizon", type=float)

    p = sub.add_parser("particles", help="simulate a finite oscillator ensemble")
    common(p)
    p.add_argument("--kappa", type=float)
    p.add_argument("--n-particles", dest="n_particles", type=int)
    p.add_argument("--drift", help="zero | stationary:GAMMA | mfg_run:DIR")
    p.add_argument("--init", dest="initial_condition")
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float)
    return parser


_OPTION_KEYS = {
    "stationary": ("gamma",),
    "bifurcation": ("kappa_min", "kappa_max", "steps"),
    "evolve": ("dt",),
    "eikonal": ("gammas",),
    "linearize": ("lam", "amplitude", "dt"),
    "particles": ("n_particles", "drift", "dt", "sample_every"),
}

_FIELD_KEYS = ("beta", "sigma", "kappa", "grid_n", "horizon", "initial_condition",
               "output_dir", "seed")

_CASTS = {
    "beta": float, "sigma": float, "kappa": float, "grid_n": int, "horizon": float,
    "seed": int, "gamma": float, "kappa_min": float, "kappa_max": float, "steps": int,
    "dt": float, "lam": float, "amplitude": float, "n_particles": int,
    "sample_every": float, "picard_tol": float,
}


def _load_config_file(path, command):
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path!r}")
    values = {}
    for section in ("common", command):
        if parser.has_section(section):
            values.update(parser.items(section))
    return values


def build_config(args):
    """Merge defaults, config-file section, and CLI flags into a RunConfig."""
    command = args.command
    merged = {}
    if getattr(args, "config", None):
        merged.update(_load_config_file(args.config, command))
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = value

    fields = {"command": command}
    options = {}
    tolerances = {"picard": 1e-7, "newton": 1e-10}
    for key, raw in merged.items():
        cast = _CASTS.get(key, str)
        try:
            value = cast(raw) if isinstance(raw, str) and cast is not str else raw
            if isinstance(value, str) and cast is not str:
                value = cast(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
        if key == "picard_tol":
            tolerances["picard"] = float(value)
        elif key == "gammas":
            if isinstance(value, str):
                value = [float(tok) for tok in value.split(",") if tok.strip()]
            options["gammas"] = value
        elif key in _FIELD_KEYS:
            fields[key] = value
        else:
            options[key] = value

    cfg = RunConfig(**fields, tolerances=tolerances, options=options)
    if command == "bifurcation" and "kappa_min" not in options:
        cfg.options.setdefault("kappa_min", cfg.kappa)
        cfg.options.setdefault("kappa_max", cfg.kappa)
        cfg.options.setdefault("steps", 1)
    return cfg


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config = build_config(args)
        manifest = run(config)
    except KmfgError as exc:
        print(f"kmfg: error: {exc}", file=sys.stderr)
        for cls, code in ERROR_EXIT_CODES.items():
            if isinstance(exc, cls):
                return code
        return 1
    outdir = os.environ.get("KMFG_OUTPUT_DIR", config.output_dir)
    print(f"wrote {len(manifest.outputs)} files to {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
