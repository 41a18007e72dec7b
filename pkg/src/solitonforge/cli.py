"""Batch experiment runner.

    solitonforge <job> --config path [--out dir] [--workers N]

Jobs: profile | assemble | evolve | glue | sweep | check.  Configs are TOML
(JSON accepted); unknown keys are rejected.  Every run writes manifest.json
(inputs echoed, package and library versions, phase-convention tag) plus the
job's CSV/binary artifacts.  Exit codes: 0 success, 2 admissibility-check
failure, 1 runtime or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import PHASE_CONVENTION, __version__
from . import nonlinearity as nl
from . import profiles as pf
from . import waveforms as wf
from .containers import write_csv, write_fld, write_manifest, write_prof
from .errors import AdmissibilityError, ConfigError, ExponentInfeasible, SolitonForgeError
from .evolution import EvolveConfig, SpongeConfig, conserved, nls_evolve
from .fitting import DecayFit
from .gluing import (
    convergence_curve,
    glue_multikink,
    glue_train,
    picard_iterate,
    solve_final_data,
)
from .grid import Grid1D, norm_l2

# -- config schema -----------------------------------------------------------

_NUM = (int, float)
SCHEMA = {
    "job": {"kind": str},
    "nonlinearity": {"kind": str, "alpha": _NUM, "alpha1": _NUM, "alpha2": _NUM, "d": int},
    "grid": {"L": _NUM, "N": int},
    "output": {"dir": str, "seed": int},
    "profile": {"type": str, "omega": _NUM, "omega1": (str, *_NUM), "method": str,
                 "X": _NUM, "dx": _NUM},
    "train": {
        "truncation": int,
        "solitons": [{"omega": _NUM, "v": _NUM, "x0": _NUM, "gamma": _NUM, "scaled": bool}],
        "left_kink": {"omega1": (str, *_NUM), "v": _NUM, "x0": _NUM, "gamma": _NUM},
        "right_kink": {"omega1": (str, *_NUM), "v": _NUM, "x0": _NUM, "gamma": _NUM},
        "generator": {"vbar": _NUM, "omega_ratio": _NUM, "velocity_ratio": _NUM},
    },
    "assemble": {"times": [_NUM]},
    "evolve": {"t0": _NUM, "t1": _NUM, "dt": _NUM, "snapshot_stride": int,
                "initial": str, "sponge": bool},
    "glue": {"method": str, "T_max": _NUM, "lam": _NUM, "dtau": _NUM, "tol": _NUM,
              "k_max": int, "dt": _NUM, "J": int, "j_alt": int,
              "value_window_lo": _NUM, "value_window_hi": _NUM},
    "check": {"type": str, "r1": _NUM, "beta1": _NUM, "beta2": _NUM, "dim": int,
               "M": _NUM, "n_random": int, "omega0": _NUM},
    "sweep": {"axis": str, "values": [_NUM], "job": str},
}


def _validate(node, schema, path=""):
    if isinstance(schema, dict):
        if not isinstance(node, dict):
            raise ConfigError(f"config key '{path or '<root>'}' must be a table")
        for key, val in node.items():
            if key not in schema:
                raise ConfigError(f"unknown config key '{path + key}'")
            _validate(val, schema[key], path + key + ".")
    elif isinstance(schema, list):
        if not isinstance(node, list):
            raise ConfigError(f"config key '{path[:-1]}' must be an array")
        for i, item in enumerate(node):
            _validate(item, schema[0], f"{path[:-1]}[{i}].")
    else:
        if isinstance(node, bool) and schema is not bool and bool not in np.atleast_1d(schema):
            raise ConfigError(f"config key '{path[:-1]}' has wrong type bool")
        if not isinstance(node, schema):
            raise ConfigError(
                f"config key '{path[:-1]}' has wrong type {type(node).__name__}"
            )


def load_config(path) -> dict:
    if str(path).endswith(".json"):
        with open(path) as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as err:
                raise ConfigError(f"{path}: line {err.lineno}: {err.msg}") from err
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            try:
                cfg = tomllib.load(fh)
            except Exception as err:
                raise ConfigError(f"{path}: {err}") from err
    _validate(cfg, SCHEMA)
    if "job" not in cfg or "kind" not in cfg["job"]:
        raise ConfigError("config needs a [job] table with a 'kind' key")
    return cfg


# -- builders ----------------------------------------------------------------


def _build_spec(cfg) -> nl.NonlinearitySpec:
    sec = cfg.get("nonlinearity", {"kind": "power", "alpha": 2.0})
    kind = sec.get("kind", "power")
    d = sec.get("d", 1)
    if kind == "power":
        return nl.power(sec.get("alpha", 2.0), d=d)
    if kind == "combined":
        return nl.combined(sec["alpha1"], sec["alpha2"], d=d)
    if kind == "gross_pitaevskii":
        return nl.gross_pitaevskii(d=d)
    raise ConfigError(f"unsupported nonlinearity kind {kind!r} in configs")


def _build_grid(cfg) -> Grid1D:
    sec = cfg.get("grid", {})
    return Grid1D(sec.get("L", 256.0), sec.get("N", 4096))


def _bound_profile(spec, omega):
    if spec.kind == "power":
        return pf.ground_state_closed_form(spec, omega)
    return pf.shoot_bound_state(spec, omega)


def _kink_for(spec, omega1):
    if omega1 == "auto":
        omega1 = pf.find_kink_frequency(spec).omega1
    return pf.kink_profile(spec, float(omega1)), float(omega1)


def _build_train(cfg, spec, grid) -> wf.TrainSpec:
    sec = cfg.get("train", {})
    gen_sec = sec.get("generator")
    if gen_sec is not None and cfg.get("glue", {}).get("J", 0) > 0:
        # truncation handled by the glue job itself
        pass
    solitons = []
    profiles_cache = {}
    for s in sec.get("solitons", []):
        omega = s.get("omega", 1.0)
        v = grid.quantize_velocity(s.get("v", 0.0))
        if s.get("scaled", False):
            solitons.append(
                wf.SolitonParams(omega=omega, v=v, x0=s.get("x0", 0.0),
                                 gamma=s.get("gamma", 0.0), scaled=True)
            )
            continue
        if omega not in profiles_cache:
            profiles_cache[omega] = _bound_profile(spec, omega)
        solitons.append(
            wf.SolitonParams(omega=omega, v=v, x0=s.get("x0", 0.0),
                             gamma=s.get("gamma", 0.0), profile=profiles_cache[omega])
        )
    kinks = {}
    for side in ("left_kink", "right_kink"):
        ks = sec.get(side)
        if ks is None:
            continue
        profile, omega1 = _kink_for(spec, ks.get("omega1", "auto"))
        kinks[side] = wf.KinkParams(
            profile=profile, omega=omega1, v=grid.quantize_velocity(ks.get("v", 0.0)),
            x0=ks.get("x0", 0.0), gamma=ks.get("gamma", 0.0),
            side="left" if side == "left_kink" else "right",
        )
    generator = None
    if gen_sec is not None:
        generator = wf.GeometricTrainGenerator(
            vbar=gen_sec["vbar"],
            omega_ratio=gen_sec.get("omega_ratio", 0.5),
            velocity_ratio=gen_sec.get("velocity_ratio", 2.0),
        )
    return wf.TrainSpec(
        nonlinearity=spec, solitons=solitons,
        left_kink=kinks.get("left_kink"), right_kink=kinks.get("right_kink"),
        truncation=sec.get("truncation", 0), generator=generator,
    )


def _manifest(cfg, outdir, outputs, extra=None):
    import scipy

    payload = {
        "config": cfg,
        "package_version": __version__,
        "phase_convention": PHASE_CONVENTION,
        "versions": {"numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": sorted(outputs),
    }
    if extra:
        payload.update(extra)
    write_manifest(os.path.join(outdir, "manifest.json"), payload)


def _fitdict(fit: DecayFit | None):
    if fit is None:
        return None
    return {
        "rate": fit.rate, "prefactor": fit.prefactor,
        "r_squared": fit.r_squared, "window": list(fit.window),
        "n_points": fit.n_points,
    }


# -- jobs --------------------------------------------------------------------


def _job_profile(cfg, outdir):
    spec = _build_spec(cfg)
    sec = cfg.get("profile", {})
    kind = sec.get("type", "bound_state")
    outputs = []
    if kind == "bound_state":
        omega = sec.get("omega", 1.0)
        method = sec.get("method", "auto")
        if method == "shooting" or (method == "auto" and spec.kind != "power"):
            prof = pf.shoot_bound_state(spec, omega)
        else:
            prof = pf.ground_state_closed_form(spec, omega)
        path = os.path.join(outdir, "profile.prof")
        write_prof(path, prof, kind=spec.kind)
        report = {
            "omega": omega, "residual": prof.residual,
            "fitted_decay": prof.fitted_decay, "method": prof.method,
            "action": pf.action(prof, spec),
        }
    else:
        profile, omega1 = _kink_for(spec, sec.get("omega1", "auto"))
        path = os.path.join(outdir, "profile.prof")
        write_prof(path, profile, kind=spec.kind)
        report = {
            "omega1": omega1, "zeta1": profile.zeta1,
            "first_integral_residual": pf.first_integral_residual(profile, spec),
            "fitted_decay_left": profile.fitted_decay_left,
            "fitted_decay_right": profile.fitted_decay_right,
        }
    outputs.append(path)
    rpath = os.path.join(outdir, "profile_report.json")
    write_manifest(rpath, report)
    outputs.append(rpath)
    _manifest(cfg, outdir, outputs)
    return 0


def _job_assemble(cfg, outdir):
    spec = _build_spec(cfg)
    grid = _build_grid(cfg)
    train = _build_train(cfg, spec, grid)
    times = cfg.get("assemble", {}).get("times", [0.0])
    outputs, rows = [], []
    for i, t in enumerate(times):
        field = wf.assemble(train, grid, float(t))
        path = os.path.join(outdir, f"field_{i:04d}.fld")
        write_fld(path, field)
        outputs.append(path)
        h = wf.source_term(train, grid, float(t))
        rows.append((float(t), norm_l2(field), float(np.abs(h.values).max())))
    cpath = os.path.join(outdir, "norms.csv")
    write_csv(cpath, ("t", "l2", "source_inf"), rows)
    outputs.append(cpath)
    _manifest(cfg, outdir, outputs)
    return 0


def _job_evolve(cfg, outdir):
    spec = _build_spec(cfg)
    grid = _build_grid(cfg)
    train = _build_train(cfg, spec, grid)
    sec = cfg.get("evolve", {})
    t0, t1 = sec.get("t0", 0.0), sec.get("t1", 1.0)
    initial = sec.get("initial", "assemble")
    if initial == "assemble":
        field = wf.assemble(train, grid, t0)
    else:
        from .containers import read_fld

        field = read_fld(initial)
    sponge = None
    if sec.get("sponge", False):
        sponge = SpongeConfig(reference=lambda t: wf.assemble(train, grid, t).values)
    evc = EvolveConfig(
        dt=sec.get("dt", 1e-3) * (1 if t1 >= t0 else -1),
        t_span=(t0, t1),
        snapshot_stride=sec.get("snapshot_stride", 100),
        sponge=sponge,
    )
    traj = nls_evolve(field, spec, evc)
    outputs, rows = [], []
    for i, snap in enumerate(traj):
        path = os.path.join(outdir, f"snapshot_{i:04d}.fld")
        write_fld(path, snap)
        outputs.append(path)
        rep = conserved(snap, spec)
        rows.append((snap.t, rep.mass, rep.energy, rep.momentum))
    cpath = os.path.join(outdir, "conserved.csv")
    write_csv(cpath, ("t", "mass", "energy", "momentum"), rows)
    outputs.append(cpath)
    _manifest(cfg, outdir, outputs, extra={"snapshot_times": [s.t for s in traj]})
    return 0


def _picard_json(report):
    return {
        "iterates": report.iterates,
        "converged": report.converged,
        "contraction_factors": report.contraction_factors,
        "weighted_norms": report.weighted_norms,
        "lambda": report.lam,
        "final_residual": report.final_residual,
        "tolerance": report.tol,
        "tail_bound": report.tail_bound,
        "lebesgue_p": report.lebesgue_p,
        "decay_fit": _fitdict(report.decay_fit),
        "truncation": {
            k: (v if not hasattr(v, "passes") else vars(v))
            for k, v in (report.truncation or {}).items()
        } or None,
        "uniqueness_class": report.uniqueness_class,
    }


def _job_glue(cfg, outdir):
    spec = _build_spec(cfg)
    grid = _build_grid(cfg)
    sec = cfg.get("glue", {})
    T_max = sec.get("T_max", 10.0)
    lam = sec.get("lam", 0.0) or None
    dtau = sec.get("dtau", 0.01)
    tol = sec.get("tol", 1e-8)
    k_max = sec.get("k_max", 25)
    method = sec.get("method", "picard")
    outputs = []

    J = sec.get("J", 0)
    if J > 0:
        gen_sec = cfg.get("train", {}).get("generator")
        if gen_sec is None:
            raise ConfigError("glue.J > 0 needs a [train.generator] table")
        generator = wf.GeometricTrainGenerator(
            vbar=gen_sec["vbar"], omega_ratio=gen_sec.get("omega_ratio", 0.5),
            velocity_ratio=gen_sec.get("velocity_ratio", 2.0),
        )
        report = glue_train(
            generator, spec, J, grid, T_max, lam=lam, k_max=k_max, tol=tol,
            dtau=dtau, j_alt=sec.get("j_alt", 0) or None,
            cache_dtype=np.complex64,
        )
        train = generator.truncate(spec, J, grid=grid)
    else:
        train = _build_train(cfg, spec, grid)
        if train.has_kinks():
            report = glue_multikink(
                train, grid, T_max, lam=lam, k_max=k_max, tol=tol, dtau=dtau
            )
        else:
            report = (
                picard_iterate(train, grid, T_max, lam=lam, k_max=k_max,
                               tol=tol, dtau=dtau)
                if method in ("picard", "both")
                else None
            )

    if report is not None:
        ppath = os.path.join(outdir, "picard.json")
        write_manifest(ppath, _picard_json(report))
        outputs.append(ppath)
        epath = os.path.join(outdir, "eta0.fld")
        write_fld(epath, report.eta0)
        outputs.append(epath)
        rows = list(
            zip(report.decay_t, report.decay_l2, report.decay_h1, report.decay_lp)
        )
        cpath = os.path.join(outdir, "convergence.csv")
        write_csv(cpath, ("t", "L2", "H1", "Lalpha2"), rows)
        outputs.append(cpath)

    if method in ("final_data", "both") and not train.has_kinks():
        traj = solve_final_data(train, grid, T_max, dt=sec.get("dt", 1e-3))
        series, fits = convergence_curve(
            traj, train,
            value_window=(sec.get("value_window_lo", 1e-9),
                          sec.get("value_window_hi", 1e-2)),
        )
        rows = list(zip(series["t"], series["l2"], series["h1"], series["lp"]))
        cpath = os.path.join(outdir, "convergence_final_data.csv")
        write_csv(cpath, ("t", "L2", "H1", "Lalpha2"), rows)
        outputs.append(cpath)
        fpath = os.path.join(outdir, "fits.json")
        write_manifest(fpath, {k: _fitdict(v) for k, v in fits.items()})
        outputs.append(fpath)

    _manifest(cfg, outdir, outputs)
    return 0


def _job_check(cfg, outdir):
    spec = _build_spec(cfg)
    sec = cfg.get("check", {})
    ctype = sec.get("type", "bounds")
    result: dict = {"type": ctype}
    code = 0
    if ctype == "train_admissibility":
        grid = _build_grid(cfg)
        train = _build_train(cfg, spec, grid)
        rep = wf.check_train_admissibility(train, sec.get("r1", 2.0))
        result.update(vars(rep))
        code = 0 if rep.passes else 2
    elif ctype == "exponents":
        sel = wf.select_exponents(sec["beta1"], sec["beta2"], sec.get("dim", 1))
        result.update(vars(sel))
    elif ctype == "exponents_random":
        seed = cfg.get("output", {}).get("seed", 0)
        n = sec.get("n_random", 1000)
        rng = np.random.default_rng(seed)
        failures = 0
        for _ in range(n):
            d = int(rng.choice([1, 2, 3, 5]))
            amax = nl.alpha_max(d)
            b2 = rng.uniform(0.05, min(amax * 0.98, 12.0))
            lo = b2 / (amax + 1.0 - b2) * (1 + 1e-9) if (d >= 3 and b2 >= amax / 2) else b2 / (1 + b2)
            if lo > b2:
                continue
            b1 = rng.uniform(lo, b2)
            try:
                sel = wf.select_exponents(b1, b2, d)
                tol = 1e-12
                ok = (
                    -tol <= sel.r1 - 2 <= b1 + tol
                    and b2 <= sel.r2 - 2 + tol
                    and sel.r1 * b2 <= sel.r1 * sel.r2 - sel.r1 - sel.r2 + tol
                    and sel.r1 * sel.r2 - sel.r1 - sel.r2 <= sel.r2 * b1 + tol
                )
            except ExponentInfeasible:
                ok = False
            failures += 0 if ok else 1
        result.update(n=n, failures=failures, seed=seed)
        code = 0 if failures == 0 else 2
    elif ctype == "bounds":
        rep = nl.validate_bounds(spec, omega0=sec.get("omega0"))
        result.update(
            passed=rep.passed, c_empirical=rep.c_empirical, g_zero=rep.g_zero,
            reason=rep.reason,
            focusing=None if rep.focusing is None else vars(rep.focusing),
        )
        code = 0 if rep.passed else 2
    elif ctype == "velocity_growth":
        grid = _build_grid(cfg)
        train = _build_train(cfg, spec, grid)
        ok = wf.check_speed_balance(train, sec.get("M", 1.0))
        result.update(passed=bool(ok))
        code = 0 if ok else 2
    else:
        raise ConfigError(f"unknown check type {ctype!r}")
    path = os.path.join(outdir, "check.json")
    write_manifest(path, result)
    _manifest(cfg, outdir, [path])
    return code


def _sweep_point(args):
    cfg, outdir = args
    os.makedirs(outdir, exist_ok=True)
    try:
        code = _JOBS[cfg["job"]["kind"]](cfg, outdir)
        rate, r2 = _extract_rate(outdir)
        return {"status": "ok" if code == 0 else "check_failed", "rate": rate, "r2": r2}
    except SolitonForgeError as err:
        return {"status": f"error: {type(err).__name__}", "rate": math.nan, "r2": math.nan}


def _extract_rate(outdir):
    for name in ("picard.json", "fits.json"):
        path = os.path.join(outdir, name)
        if os.path.exists(path):
            with open(path) as fh:
                data = json.load(fh)
            fit = data.get("decay_fit") if name == "picard.json" else data.get("h1")
            if fit:
                return fit["rate"], fit["r_squared"]
    return math.nan, math.nan


def _set_axis(cfg, axis, value):
    if axis == "v_star":
        sols = cfg.get("train", {}).get("solitons", [])
        if len(sols) != 2:
            raise ConfigError("axis 'v_star' needs exactly two solitons")
        sols[0]["v"] = -value / 2.0
        sols[1]["v"] = +value / 2.0
        return
    node = cfg
    *parents, leaf = axis.split(".")
    for key in parents:
        node = node.setdefault(key, {})
    node[leaf] = value


def _job_sweep(cfg, outdir, workers=1):
    import copy
    import warnings

    sec = cfg.get("sweep", {})
    axis = sec.get("axis")
    values = sec.get("values", [])
    if not values:
        raise ConfigError("sweep needs a nonempty values array")
    uniq = sorted(set(values))
    if len(uniq) != len(values):
        warnings.warn("duplicate sweep values deduplicated")
    tasks = []
    for i, v in enumerate(uniq):
        sub = copy.deepcopy(cfg)
        sub["job"] = {"kind": sec.get("job", "glue")}
        sub.pop("sweep", None)
        _set_axis(sub, axis, v)
        tasks.append((sub, os.path.join(outdir, f"point_{i:03d}")))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = [
        (v, r["rate"], r["r2"], r["status"]) for v, r in zip(uniq, results)
    ]
    cpath = os.path.join(outdir, "rates.csv")
    write_csv(cpath, (axis, "rate", "r_squared", "status"), rows)
    _manifest(cfg, outdir, [cpath])
    return 0


_JOBS = {
    "profile": _job_profile,
    "assemble": _job_assemble,
    "evolve": _job_evolve,
    "glue": _job_glue,
    "check": _job_check,
}


def run(config_path, outdir=None, workers=None) -> int:
    """Execute one job; returns the process exit code."""
    try:
        cfg = load_config(config_path)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    kind = cfg["job"]["kind"]
    outdir = outdir or cfg.get("output", {}).get("dir", "out")
    os.makedirs(outdir, exist_ok=True)
    if workers is None:
        workers = int(os.environ.get("SOLITONFORGE_WORKERS", "1"))
    try:
        if kind == "sweep":
            return _job_sweep(cfg, outdir, workers=workers)
        if kind not in _JOBS:
            raise ConfigError(f"unknown job kind {kind!r}")
        return _JOBS[kind](cfg, outdir)
    except AdmissibilityError as err:
        print(f"admissibility check failed: {err}", file=sys.stderr)
        return 2
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except SolitonForgeError as err:
        print(f"runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="solitonforge",
        description="soliton/kink/train construction and gluing experiments",
    )
    parser.add_argument("job", choices=[*_JOBS, "sweep"],
                        help="job kind (must match the config's job.kind)")
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    if cfg["job"]["kind"] != args.job:
        print(
            f"config error: job.kind = {cfg['job']['kind']!r} does not match "
            f"the requested job {args.job!r}",
            file=sys.stderr,
        )
        return 1
    return run(args.config, outdir=args.out, workers=args.workers)


if __name__ == "__main__":
    sys.exit(main())
