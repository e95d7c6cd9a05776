"""Command-line entry point: simulate | solve | map | verify | sweep | riemann.

Run configuration is a line-oriented ``key = value`` file with sections
(INI), copied verbatim into the output directory next to the results so an
experiment archive diffs cleanly.  Identical configuration (seed included)
produces byte-identical outputs; replicas run on a worker pool when
--threads > 1 and are merged in replica order, so parallelism never changes
the files.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import harness, mapping, measures, pde
from .core import (ExclusionConfig, LineWindow, Torus, ZeroRangeConfig,
                   classify_exclusion, read_snapshot, write_snapshot)
from .dynamics import SimParams, run_coupled_fzrp, run_fep, run_fzrp
from .measures import Profile


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _parse_floats(s: str):
    return tuple(float(x) for x in s.replace(",", " ").split())


def load_profile(section) -> Profile:
    kind = section.get("profile", "constant")
    if kind == "constant":
        return Profile.constant(section.getfloat("value"))
    if kind == "step":
        return Profile.step(section.getfloat("left"), section.getfloat("right"),
                            section.getfloat("split", 0.5))
    if kind == "piecewise":
        return Profile.piecewise(_parse_floats(section["xs"]), _parse_floats(section["ys"]))
    if kind == "grid":
        return Profile.grid(_parse_floats(section["values"]),
                            section.getfloat("lo", 0.0), section.getfloat("hi", 1.0))
    raise ValueError(f"unknown profile kind {kind!r}")


def load_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    read = cfg.read(path)
    if not read:
        raise FileNotFoundError(path)
    return cfg


def build_sim_params(run, seed_override=None) -> SimParams:
    mode = run.get("mode", "symmetric")
    T = run.getfloat("t")
    seed = seed_override if seed_override is not None else run.getint("seed", 0)
    obs = _parse_floats(run.get("obs_times", str(T)))
    p = run.getfloat("p", 1.0)
    if mode == "symmetric":
        return SimParams.symmetric(T=T, seed=seed, obs_times=obs, p=p)
    if mode == "asymmetric":
        return SimParams.asymmetric(T=T, seed=seed, obs_times=obs, p=p)
    raise ValueError(f"unknown mode {mode!r}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _copy_config(args, out: Path) -> None:
    if getattr(args, "config", None):
        shutil.copy(args.config, out / "run.ini")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _one_replica(job):
    (process, profile, n, params, replica, ell) = job
    if process == "fep":
        eta0 = measures.sample_bernoulli_profile(profile, n, params.seed, replica=replica)
        obs = run_fep(eta0, params, replica=replica)
        fields = obs.snapshots
    elif process == "fzrp":
        om0 = measures.sample_geometric_profile(profile, n, params.seed, replica=replica)
        obs = run_fzrp(om0, params, replica=replica)
        fields = obs.snapshots
    else:
        raise ValueError(process)
    blocks = []
    stride = max(ell, 1)
    for k in range(len(obs.times)):
        avg, start = harness.block_average(fields[k], ell, obs.geometry.periodic)
        idx = np.arange(0, avg.size, stride)
        blocks.append((obs.times[k], idx + start, avg[idx]))
    x1 = obs.x1.tolist() if obs.x1 is not None else None
    return {
        "replica": replica,
        "blocks": blocks,
        "x1": x1,
        "n_events": obs.n_events.tolist(),
        "degenerate": obs.degenerate,
        "pad_touched": obs.pad_touched,
    }


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    run = cfg["run"]
    out = _out_dir(args)
    _copy_config(args, out)
    process = run.get("process", "fep")
    if process == "coupled":
        return _simulate_coupled(args, cfg, out)
    n = run.getint("n", fallback=None) or run.getint("m")
    replicas = run.getint("replicas", 1)
    profile = load_profile(cfg["profile"]) if cfg.has_section("profile") else Profile.constant(0.5)
    if process == "fep" and profile.sup() >= 1.0:
        print("error: exclusion profile must stay below 1", file=sys.stderr)
        return 2
    ell = run.getint("block_radius", harness.default_block_radius(n))
    params = build_sim_params(run, seed_override=args.seed)

    jobs = [(process, profile, n, params, r, ell) for r in range(replicas)]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_one_replica, jobs))
    else:
        results = [_one_replica(j) for j in jobs]
    results.sort(key=lambda d: d["replica"])

    rows = []
    for res in results:
        for t, idx, avg in res["blocks"]:
            rows.extend((res["replica"], repr(float(t)), int(i), repr(float(v)))
                        for i, v in zip(idx, avg))
    _write_csv(out / "block_density.csv", ("replica", "time", "site", "value"), rows)
    if process == "fep":
        rows = [(res["replica"], repr(float(t)), "", int(x))
                for res in results
                for t, x in zip(params.observation_times, res["x1"])]
        _write_csv(out / "tagged.csv", ("replica", "time", "site", "value"), rows)
    rows = [(res["replica"], repr(float(t)), "", int(c))
            for res in results
            for t, c in zip(params.observation_times, res["n_events"])]
    _write_csv(out / "events.csv", ("replica", "time", "site", "value"), rows)
    meta = {
        "process": process,
        "n": n,
        "replicas": replicas,
        "block_radius": ell,
        "observation_times": list(params.observation_times),
        "degenerate_runs": sum(r["degenerate"] for r in results),
        "pad_touched_runs": sum(r["pad_touched"] for r in results),
        "total_events": int(sum(r["n_events"][-1] for r in results)),
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


def _simulate_coupled(args, cfg, out: Path) -> int:
    run = cfg["run"]
    m = run.getint("m")
    profile = load_profile(cfg["profile"])
    alpha_bar = run.getfloat("alpha_bar", profile.sup() + 1.0)
    params = build_sim_params(run, seed_override=args.seed)
    replicas = run.getint("replicas", 1)
    rows = []
    violations = 0
    sign_inc = 0
    for r in range(replicas):
        om0, ze0 = measures.sample_monotone_coupling(profile, alpha_bar, m,
                                                     params.seed, replica=r)
        cr = run_coupled_fzrp(om0, ze0, params, check_order=True,
                              track_sign_changes=True, replica=r)
        violations += cr.order_violations
        sign_inc = max(sign_inc, cr.max_sign_change_increase)
        for k, t in enumerate(params.observation_times):
            rows.append((r, repr(float(t)), "lower_mean",
                         repr(float(cr.first.snapshots[k].mean()))))
            rows.append((r, repr(float(t)), "upper_mean",
                         repr(float(cr.second.snapshots[k].mean()))))
    _write_csv(out / "coupled.csv", ("replica", "time", "site", "value"), rows)
    meta = {"order_violations": violations, "max_sign_change_increase": sign_inc}
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0 if violations == 0 else 1


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

_FLUXES = {"H": pde.H, "G": pde.G, "frakH": pde.FRAK_H}


def _field_path(out: Path, t: float) -> Path:
    return out / f"field_t{t:.6f}.txt"


def write_field(field: pde.DensityField, path, time: float) -> None:
    with open(path, "w") as f:
        geo = "torus" if field.periodic else f"interval {field.lo!r} {field.hi!r}"
        f.write(f"# facgas-field geometry={geo.replace(' ', ':')} "
                f"n={field.cells.size} dx={field.dx!r} time={time!r}\n")
        for v in field.cells:
            f.write(f"{v!r}\n")


def read_field(path):
    with open(path) as f:
        header = f.readline().split()
        fields = dict(part.split("=", 1) for part in header[2:])
        cells = np.array([float(line) for line in f if line.strip()])
    geo = fields["geometry"].split(":")
    t = float(fields["time"])
    if geo[0] == "torus":
        return pde.DensityField.torus(cells), t
    return pde.DensityField.interval(cells, float(geo[1]), float(geo[2])), t


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    sv = cfg["solve"]
    out = _out_dir(args)
    _copy_config(args, out)
    equation = sv.get("equation", "parabolic")
    flux_name = sv.get("flux", "H" if equation == "parabolic" else "G")
    eps = sv.getfloat("eps", fallback=None)
    if eps is not None and flux_name in ("H", "G"):
        spec = pde.build_smoothed_flux(flux_name, eps)
    else:
        spec = _FLUXES[flux_name]
    n = sv.getint("grid", 512)
    T = sv.getfloat("t")
    obs = _parse_floats(sv.get("obs_times", str(T)))
    profile = load_profile(cfg["profile"])
    cfl = sv.getfloat("cfl", fallback=None)
    if cfl is not None:
        limit = 0.5 / spec.lipschitz_bound if equation == "parabolic" else 0.5
        if cfl > limit + 1e-12:
            print(f"error: cfl {cfl} violates the stability limit {limit}",
                  file=sys.stderr)
            return 2
    try:
        if equation == "parabolic":
            f0 = pde.DensityField.from_profile(profile, n)
            traj = pde.solve_parabolic(f0, spec, T, obs_times=obs)
        elif equation == "hyperbolic":
            lo, hi = sv.getfloat("lo", -1.0), sv.getfloat("hi", 1.0)
            f0 = pde.DensityField.from_profile(profile, n, lo, hi, periodic=False)
            traj = pde.solve_hyperbolic(f0, spec, sv.getfloat("p", 1.0), T,
                                        viscosity=sv.getfloat("viscosity", fallback=None),
                                        obs_times=obs)
        else:
            print(f"error: unknown equation {equation!r}", file=sys.stderr)
            return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for k, t in enumerate(traj.times):
        write_field(pde.DensityField(traj.cells[k], traj.lo, traj.hi, traj.periodic),
                    _field_path(out, t), t)
    meta = {"equation": equation, "flux": flux_name, "eps": eps, "grid": n,
            "mass_initial": traj.cells[0].mean(), "mass_final": traj.cells[-1].mean()}
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# map
# ---------------------------------------------------------------------------

def cmd_map(args) -> int:
    out = _out_dir(args)
    src = Path(args.input)
    records = []
    first = src.open().readline()
    if first.startswith("# facgas-snapshot"):
        config, t = read_snapshot(str(src))
        if isinstance(config, ExclusionConfig):
            omega, tag = mapping.map_exclusion_to_zr(config)
            write_snapshot(omega, str(out / "mapped_zerorange.txt"), time=t)
            records.append({"direction": "exclusion->zerorange", "time": t,
                            "m_holes": tag.m_holes, "x1": tag.x1,
                            "degenerate": tag.degenerate})
        else:
            if args.n is None or args.x1 is None:
                print("error: reverse snapshot mapping needs --n and --x1",
                      file=sys.stderr)
                return 2
            tag = mapping.TagState(args.x1, config.heights.size)
            eta = mapping.map_zr_to_exclusion(config, tag, args.n)
            write_snapshot(eta, str(out / "mapped_exclusion.txt"), time=t)
            records.append({"direction": "zerorange->exclusion", "time": t})
    elif first.startswith("# facgas-field"):
        field, t = read_field(str(src))
        alpha, tr = mapping.macro_ex_to_zr(field)
        write_field(alpha, out / "mapped_alpha.txt", t)
        records.append({"direction": "rho->alpha", "time": t, "theta": tr.theta,
                        "chi": tr.chi})
    else:
        print("error: unrecognized input file", file=sys.stderr)
        return 2
    with open(out / "mapping_meta.jsonl", "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# riemann
# ---------------------------------------------------------------------------

def cmd_riemann(args) -> int:
    out = _out_dir(args)
    sol = pde.riemann_exact(args.alpha_l, args.alpha_r, args.p)
    xi = np.linspace(args.lo, args.hi, args.grid)
    vals = sol(xi / args.t if args.t > 0 else xi)
    rows = [(repr(float(x)), repr(float(a))) for x, a in zip(xi, vals)]
    _write_csv(out / "riemann.csv", ("v", "alpha"), rows)
    return 0


# ---------------------------------------------------------------------------
# verify scenarios
# ---------------------------------------------------------------------------

def _scenario_flux_relation(rng, opts):
    r = np.concatenate((np.array([0.0, 0.5, 1.0, 2.0, 10.0]),
                        rng.uniform(0.0, 20.0, 100_000)))
    g = pde.flux_eval(pde.G, r)
    h = pde.flux_eval(pde.H, r / (1.0 + r))
    fr = (1.0 + r) * pde.flux_eval(pde.FRAK_H, r / (1.0 + r))
    err = max(np.max(np.abs(g - h)), np.max(np.abs(g - fr))) / max(1.0, np.max(np.abs(g)))
    return [("flux-relation", "r in [0,20] x 1e5", err, 1e-12, err <= 1e-12)]


def _scenario_mapping_commutation(rng, opts):
    rows = []
    occ = (rng.random(10) < 0.6).astype(np.uint8)
    eta0 = ExclusionConfig(Torus(10), occ)
    params = SimParams.symmetric(T=40.0, seed=3, obs_times=(40.0,))
    rep = mapping.trajectory_commutation_check(eta0, params, max_events=100_000)
    rows.append(("mapping-commutation/symmetric", f"N=10 events={rep.n_events}",
                 0 if rep.ok else 1, 0, rep.ok))
    geom = LineWindow(-8, 8, 64)
    occ = np.zeros(geom.n_sim, np.uint8)
    occ[geom.window_slice()] = (rng.random(16) < 0.7).astype(np.uint8)
    params = SimParams.asymmetric(T=1.0, seed=4, obs_times=(1.0,))
    rep = mapping.trajectory_commutation_check(ExclusionConfig(geom, occ), params,
                                               max_events=100_000)
    rows.append(("mapping-commutation/asymmetric", f"N=16 events={rep.n_events}",
                 0 if rep.ok else 1, 0, rep.ok))
    return rows


def _scenario_roundtrip_micro(rng, opts):
    n = 10
    bad = 0
    for code in range(1, 2 ** n):  # skip the all-ones (no hole) configuration
        occ = np.array([(code >> i) & 1 for i in range(n)], dtype=np.uint8)
        occ = 1 - occ  # ensure at least one hole for every code
        eta = ExclusionConfig(Torus(n), occ)
        om, tag = mapping.map_exclusion_to_zr(eta)
        back = mapping.map_zr_to_exclusion(om, tag, n)
        if not np.array_equal(back.occupancy, occ):
            bad += 1
    return [("roundtrip-micro", "exhaustive N=10", bad, 0, bad == 0)]


def _scenario_small_n(rng, opts):
    states, q = harness.enumerate_fep_chain(6, 4)
    pi = harness.stationary_distribution(q)
    keys = [int(np.sum((1 << np.arange(6)) * s)) for s in states]
    pi_map = dict(zip(keys, pi))
    eta0 = ExclusionConfig(Torus(6), np.array([1, 1, 0, 1, 1, 0], np.uint8))
    T = 11000.0
    obs = run_fep(eta0, SimParams.symmetric(T=T, seed=12, obs_times=(T,)),
                  record_events=True, max_events=2_000_000)
    emp = harness.occupancy_from_events(eta0, obs.events, T)
    tv = 0.5 * sum(abs(emp.get(k, 0.0) - pi_map.get(k, 0.0))
                   for k in set(emp) | set(pi_map))
    return [("small-n-stationarity", f"N=6 events={obs.events.times.size}",
             tv, 0.01, tv <= 0.01)]


def _scenario_attractiveness(rng, opts):
    om0, ze0 = measures.sample_monotone_coupling(Profile.constant(2.0), 3.5, 256, 21)
    params = SimParams.symmetric(T=0.02, seed=22, obs_times=(0.02,))
    cr = run_coupled_fzrp(om0, ze0, params, check_order=True, track_sign_changes=True)
    ok = cr.order_violations == 0 and cr.max_sign_change_increase <= 0
    return [("attractiveness", f"M=256 events={int(cr.first.n_events[-1])}",
             cr.order_violations + max(cr.max_sign_change_increase, 0), 0, ok)]


def _scenario_hydro_symmetric_step(rng, opts, out=None, emit_plots=False):
    n = int(opts.get("n", 2048))
    replicas = int(opts.get("replicas", 8))
    t = float(opts.get("t", 0.02))
    profile = Profile.step(0.8, 0.3, 0.5)
    pde_field = pde.solve_parabolic(pde.DensityField.from_profile(profile, 1024),
                                    pde.H, t).final
    params = SimParams.symmetric(T=t, seed=int(opts.get("seed", 7)), obs_times=(t,))
    snaps = []
    for r in range(replicas):
        eta0 = measures.sample_bernoulli_profile(profile, n, params.seed, replica=r)
        snaps.append(run_fep(eta0, params, replica=r).snapshots[0])
    ell = harness.default_block_radius(n)
    err = harness.hydro_error(snaps, Torus(n), pde_field, ell)
    if emit_plots and out is not None:
        _overlay_plot(out / f"hydro_overlay_t{t:.4f}.svg", snaps, Torus(n),
                      pde_field, ell, t)
    return [("hydro-symmetric-step", f"N={n} replicas={replicas} t={t}",
             err, 0.05, err <= 0.05)]


def _overlay_plot(path, snaps, geometry, field, ell, t):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    avg, start = harness.block_average(np.mean([s.astype(float) for s in snaps], axis=0),
                                       ell, geometry.periodic)
    u = (np.arange(avg.size) + start) / geometry.scale
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(u, avg, lw=0.8, label="block density")
    ax.plot(field.centers(), field.cells, lw=1.2, ls="--", label="PDE")
    ax.set_xlabel("u")
    ax.set_ylabel("density")
    ax.set_title(f"t = {t}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _scenario_equilibration(rng, opts):
    m = int(opts.get("m", 1024))
    res = harness.equilibration_check(2.0, m, [0.002, 0.02], seed=31, replicas=8)
    tv = res["tv"][0.02]
    return [("equilibration", f"alpha=2 M={m}", tv, 0.03, tv <= 0.03)]


_SCENARIOS = {
    "flux-relation": _scenario_flux_relation,
    "mapping-commutation": _scenario_mapping_commutation,
    "roundtrip-micro": _scenario_roundtrip_micro,
    "small-n-stationarity": _scenario_small_n,
    "attractiveness": _scenario_attractiveness,
    "hydro-symmetric-step": _scenario_hydro_symmetric_step,
    "equilibration": _scenario_equilibration,
}


def cmd_verify(args) -> int:
    out = _out_dir(args)
    names = list(_SCENARIOS) if args.scenario == "all" else [args.scenario]
    opts = dict(kv.split("=", 1) for kv in (args.opt or []))
    rng = np.random.default_rng(args.seed or 0)
    rows = []
    all_ok = True
    for name in names:
        fn = _SCENARIOS[name]
        if name == "hydro-symmetric-step":
            results = fn(rng, opts, out=out, emit_plots=args.emit_plots)
        else:
            results = fn(rng, opts)
        for check, pstr, value, threshold, ok in results:
            rows.append((check, pstr, repr(float(value)), repr(float(threshold)),
                         "pass" if ok else "FAIL"))
            all_ok &= bool(ok)
            print(f"[{'PASS' if ok else 'FAIL'}] {check}: {value!r} (<= {threshold!r})")
    _write_csv(out / "report.csv", ("check", "parameters", "value", "threshold", "result"),
               rows)
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    sw = cfg["sweep"]
    key = sw.get("key", "n")
    values = [int(v) for v in sw.get("values").replace(",", " ").split()]
    out = _out_dir(args)
    _copy_config(args, out)
    rows = []
    for v in values:
        sub = out / f"{key}_{v}"
        sub.mkdir(exist_ok=True)
        cfg.set("run", key, str(v))
        tmp = sub / "config.ini"
        with open(tmp, "w") as f:
            cfg.write(f)
        sub_args = argparse.Namespace(config=str(tmp), out=str(sub), seed=args.seed,
                                      threads=args.threads, emit_plots=False)
        code = cmd_simulate(sub_args)
        meta = json.loads((sub / "metadata.json").read_text())
        rows.append((key, v, meta["total_events"], code))
    _write_csv(out / "sweep_summary.csv", ("key", "value", "total_events", "exit"), rows)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="facgas",
                                 description="facilitated lattice gases and their Stefan limits")
    ap.add_argument("--config", help="INI run configuration")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="seed override")
    ap.add_argument("--threads", type=int, default=1, help="worker pool size")
    ap.add_argument("--emit-plots", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="run particle dynamics from a config")
    sub.add_parser("solve", help="run a PDE solve from a config")

    mp = sub.add_parser("map", help="map a snapshot or field file")
    mp.add_argument("input")
    mp.add_argument("--n", type=int, default=None)
    mp.add_argument("--x1", type=int, default=None)

    rp = sub.add_parser("riemann", help="evaluate the exact Riemann solution")
    rp.add_argument("--alpha-l", type=float, required=True)
    rp.add_argument("--alpha-r", type=float, required=True)
    rp.add_argument("--p", type=float, default=1.0)
    rp.add_argument("--t", type=float, default=1.0)
    rp.add_argument("--lo", type=float, default=-1.0)
    rp.add_argument("--hi", type=float, default=1.0)
    rp.add_argument("--grid", type=int, default=401)

    vp = sub.add_parser("verify", help="run a named acceptance scenario")
    vp.add_argument("--scenario", default="all", choices=list(_SCENARIOS) + ["all"])
    vp.add_argument("--opt", action="append", help="scenario option key=value")

    sub.add_parser("sweep", help="run simulate over a parameter list")

    args = ap.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "map":
            return cmd_map(args)
        if args.command == "riemann":
            return cmd_riemann(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sweep":
            return cmd_sweep(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
