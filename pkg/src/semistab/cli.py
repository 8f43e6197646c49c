"""Command-line front end: ``semistab analyze | check | presets``.

Exit codes: 0 success, 1 acceptance failures, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .backends import (KoopmanSemigroup, MatrixSemigroup, cayley, cogenerator_of, foguel_split, jgdl_split,
                       mean_ergodic_projection)
from .core import NumericalError, Signal, TimeGrid, ValidationError
from .diagnostics import classify, density_one_extract, mixing_cesaro
from .io import SCHEMA_VERSION, load_config, write_json, write_plot_script, write_signal_csv
from .measures import rajchman_diagnostic, wiener_average
from .presets import PRESETS, build, preset_config
from .resolvent import ResolventProbe, chill_tomilov_integrals, plancherel_check, s0_estimate

log = logging.getLogger("semistab")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3


def _matrix_extras(backend: MatrixSemigroup, obs, horizon, dt):
    gen = backend.gen
    cert = gen.certificate()
    out = {"spectrum": {"eigenvalues": gen.eigenvalues, "bounded": cert.bounded,
                        "max_real_part": cert.max_real_part, "tol_im": cert.tol},
           "s0": {"value": s0_estimate(gen), "method": "matrix-exact"}}
    if cert.bounded:
        split = jgdl_split(gen)
        out["reversible_stable_split"] = {"dim_reversible": split.dim_reversible, "dim_stable": split.dim_stable,
                                          "imaginary_eigenvalues": split.imaginary_eigenvalues, "tol": split.tol}
        me_dt = max(dt, horizon / 1e5)
        me = mean_ergodic_projection(gen, horizon, me_dt)
        out["mean_ergodic"] = {"deviation": me.deviation, "horizon": me.horizon, "dt": me.dt,
                               "rank_P": int(round(np.trace(me.P_exact).real))}
    if gen.is_contractive():
        fs = foguel_split(gen)
        out["unitary_split"] = {"dim_weakly_stable": fs.W_basis.shape[1], "dim_unitary": fs.W_perp_basis.shape[1],
                                "iterations": fs.iterations, "cutoff": 1e-10}
    try:
        G = cogenerator_of(gen)
        mapped = cayley(gen.eigenvalues)
        err = float(np.abs(mapped[:, None] - G.eigenvalues[None, :]).min(axis=1).max())
        out["cogenerator"] = {"norm": G.norm, "eigenvalues": G.eigenvalues, "spectral_map_error": err}
    except NumericalError as exc:
        out["cogenerator"] = {"error": str(exc)}
    if not cert.bounded:
        return out
    x, y = obs[0]
    probe = ResolventProbe(backend)
    pl = plancherel_check(probe, x, y, 1.0)
    out["plancherel"] = {"a": pl.a, "lhs": pl.lhs, "rhs": pl.rhs, "rel_error": pl.rel_error,
                         "horizon": pl.horizon, "dt": pl.dt, "s_truncation": pl.s_max}
    if out["s0"]["value"] <= 1e-9 * max(1.0, gen.norm):
        ct = chill_tomilov_integrals(probe, x, y)
        out["resolvent_square_integrals"] = {
            "a_grid": ct.a, "I": ct.I, "double_integral": ct.double_integral, "I_nonincreasing": ct.monotone,
            "a_times_I_last": ct.limit.last, "a_times_I_richardson": ct.limit.richardson,
            "s_truncation": ct.s_max}
    return out


def _density(report, tol):
    o = report.observations[0]
    sig = o["_signal"]
    dens = density_one_extract(Signal(sig.grid, np.abs(sig.values) / o["scale"]), density_tol=tol)
    return {"epsilon_ladder": dens.epsilon_ladder, "excised_density": dens.excised_density,
            "thresholds": dens.thresholds, "M_density": dens.M_density, "density_tol": dens.density_tol,
            "horizon": dens.horizon, "verdict": dens.verdict,
            "M_complement_intervals": len(dens.M_complement)}


def _multiplication_extras(backend, report, config):
    mu = backend.measure
    T = float(config.horizon)
    rj = rajchman_diagnostic(mu, TimeGrid.from_horizon(T, config.dt), window=T / 10,
                             probes=tuple(config.probes))
    return {
        "measure": {"name": mu.name, "atoms": mu.size, "total_mass": mu.total_mass,
                    "atom_mass_sum": mu.atom_mass_sum()},
        "wiener_average": {"T": T, "value": wiener_average(mu, T)},
        "rajchman": {"window": rj.window, "window_sup": rj.window_sup, "trend_slope": rj.trend_slope,
                     "tail_sup": rj.tail_sup, "tail_interval": rj.tail_interval, "probes": rj.probe_values,
                     "tol": rj.tol, "verdict": rj.verdict},
        "density_one": _density(report, 0.05),
    }


def _koopman_extras(backend: KoopmanSemigroup, report, config):
    out = {"flow": {"name": backend.flow.name, "h": backend.flow.h}, "density_one": _density(report, 0.05)}
    if backend.flow.name.startswith("torus_rotation"):
        T = min(100.0, float(config.horizon))
        out["mixing"] = {"A": [[0.0, 0.5]], "B": [[0.0, 0.5]], "T": T,
                         "cesaro_abs_correlation": mixing_cesaro(backend.flow, [(0.0, 0.5)], [(0.0, 0.5)], T)}
    return out


def run_analyze(config, out_dir: Path) -> dict:
    """Classify, compute scenario extras and write the artifacts."""
    backend, obs = build(config)
    report = classify(backend, obs, config.classify_config())
    if isinstance(backend, MatrixSemigroup):
        extras = _matrix_extras(backend, obs, float(config.horizon), float(config.dt))
    elif isinstance(backend, KoopmanSemigroup):
        extras = _koopman_extras(backend, report, config)
    else:
        extras = _multiplication_extras(backend, report, config)
    sig_dir, plot_dir = out_dir / "signals", out_dir / "plots"
    sig_dir.mkdir(parents=True, exist_ok=True)
    plot_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for i, o in enumerate(report.observations):
        name = f"observation_{i}.csv"
        rows = write_signal_csv(sig_dir / name, o["_signal"], o["_running_mean"])
        write_plot_script(plot_dir / f"observation_{i}.gp", name, f"{config.name}: observation {i}")
        files.append({"csv": f"signals/{name}", "plot": f"plots/observation_{i}.gp", "rows": rows})
    doc = {"schema_version": SCHEMA_VERSION, "name": config.name, "config": config.to_dict(),
           "report": report.to_json(), "extras": extras, "artifacts": files}
    write_json(out_dir / "report.json", doc)
    return doc


def cmd_analyze(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise ValidationError("give exactly one of --config or --preset")
    if args.config is not None:
        config = load_config(args.config)
        updates = {}
        if args.horizon is not None:
            updates["horizon"] = args.horizon
        if args.seed is not None:
            updates["seed"] = args.seed
        config = dataclasses.replace(config, **updates) if updates else config
    else:
        config = preset_config(args.preset, args.horizon, args.seed if args.seed is not None else 0)
    out_dir = Path(args.out) if args.out else Path("semistab-out") / config.name
    doc = run_analyze(config, out_dir)
    print(f"{config.name}: {doc['report']['verdict']} (horizon {doc['report']['provenance']['horizon']:g})")
    print(f"report written to {out_dir / 'report.json'}")
    return EXIT_OK


def cmd_check(args) -> int:
    from .acceptance import run_suite

    results = run_suite(args.suite)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_FAILED


def cmd_presets(args) -> int:
    width = max(map(len, PRESETS))
    for name, (source, defaults) in PRESETS.items():
        print(f"{name:<{width}}  {source:<50}  {defaults}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semistab", description="Finite-horizon stability diagnostics for semigroups")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="classify a scenario and write report, signals and plot scripts")
    a.add_argument("--config", help="JSON run config")
    a.add_argument("--preset", help="named scenario (see 'presets')")
    a.add_argument("--out", help="output directory (default semistab-out/<name>)")
    a.add_argument("--horizon", type=float, help="override the time horizon")
    a.add_argument("--seed", type=int, help="seed for randomized scenarios")
    a.set_defaults(func=cmd_analyze)
    c = sub.add_parser("check", help="run the acceptance suite")
    c.add_argument("--suite", choices=("fast", "full"), default="fast")
    c.set_defaults(func=cmd_check)
    s = sub.add_parser("presets", help="list named scenarios")
    s.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
