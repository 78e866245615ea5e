"""Command-line front end.

Subcommands: compare, sweep, chi2, discerr, gradcheck, check. Configuration
comes from an INI-style file with sections [objective], [dynamics],
[diagnostics], [output]; ``--set key=value`` overrides win left to right, and
``--seed`` overrides dynamics.seed. Every CSV carries the canonical config
echo so outputs are self-describing.

Exit codes: 0 success, 2 configuration/usage error, 3 divergence,
4 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from .diagnostics import chi2_decay_experiment
from .errors import ConfigError, DivergenceError, RelexError
from .harness import (SimConfig, build_objective, comparison_configs,
                      discretization_error_experiment, kappa_sweep,
                      run_comparison, write_bestsofar_csv, write_chi2decay_csv,
                      write_discerr_csv, write_summary_csv)
from .objective import check_gradient
from .rng import PURPOSE_INIT, derive_stream

DEFAULTS = {
    "objective": {
        "kind": "gaussian_mixture",
        "kappa": "0.1",
        "kappas": "0.05,0.1,0.2,0.3",
        "confinement": "0",
    },
    "dynamics": {
        "tau1": "0.01",
        "tau2": "1",
        "intensity": "1",
        "eta": "0.01",
        "steps": "10000",
        "ensemble": "20",
        "seed": "0",
        "init": "2,2",
        "stride": "10",
    },
    "diagnostics": {
        "sample_times": "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
        "bounds": "-3,3",
        "resolution": "24",
        "fit_floor": "0.01",
        "etas": "0.04,0.02,0.01,0.005",
        "horizon": "1",
        "eta_ref": "",
    },
    "output": {
        "dir": "results",
    },
}


# ---------------------------------------------------------------------------
# Config loading, overrides, canonical echo.

def load_config(path: str | None = None, overrides=(), seed=None) -> dict:
    """Defaults, then the config file, then --set overrides, then --seed."""
    cfg = {section: dict(keys) for section, keys in DEFAULTS.items()}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        for section in parser.sections():
            if section not in cfg:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if key not in cfg[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                cfg[section][key] = value.strip()
    for item in overrides:
        apply_override(cfg, item)
    if seed is not None:
        cfg["dynamics"]["seed"] = str(int(seed))
    return cfg


def apply_override(cfg: dict, item: str):
    """Apply one KEY=VALUE override; KEY is section.key or an unambiguous key."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not KEY=VALUE")
    key, value = item.split("=", 1)
    key = key.strip()
    if "." in key:
        section, name = key.split(".", 1)
        if section not in cfg or name not in cfg[section]:
            raise ConfigError(f"unknown config key {key}")
        cfg[section][name] = value.strip()
        return
    hits = [section for section in cfg if key in cfg[section]]
    if not hits:
        raise ConfigError(f"unknown config key {key}")
    if len(hits) > 1:
        raise ConfigError(f"ambiguous config key {key} (in sections {hits})")
    cfg[hits[0]][key] = value.strip()


def emit_canonical_config(cfg: dict) -> str:
    """Deterministic single-line rendering: sorted section.key=value pairs."""
    pairs = []
    for section in sorted(cfg):
        for key in sorted(cfg[section]):
            pairs.append(f"{section}.{key}={cfg[section][key]}")
    return " ".join(pairs)


def parse_canonical_config(line: str) -> dict:
    """Inverse of emit_canonical_config."""
    cfg: dict = {}
    for token in line.split():
        key, _, value = token.partition("=")
        section, _, name = key.partition(".")
        if not section or not name:
            raise ConfigError(f"bad canonical config token {token!r}")
        cfg.setdefault(section, {})[name] = value
    return cfg


# Typed accessors -----------------------------------------------------------

def _get_float(cfg, section, key):
    try:
        return float(cfg[section][key])
    except ValueError as exc:
        raise ConfigError(f"{section}.{key} must be a number, got "
                          f"{cfg[section][key]!r}") from exc


def _get_int(cfg, section, key):
    try:
        return int(cfg[section][key])
    except ValueError as exc:
        raise ConfigError(f"{section}.{key} must be an integer, got "
                          f"{cfg[section][key]!r}") from exc


def _get_floats(cfg, section, key):
    raw = cfg[section][key]
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{section}.{key} must be comma-separated numbers, "
                          f"got {raw!r}") from exc


def _get_init(cfg):
    raw = cfg["dynamics"]["init"]
    if raw.startswith("uniform:"):
        return raw
    try:
        return tuple(float(v) for v in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"dynamics.init must be coordinates or uniform:lo,hi, "
                          f"got {raw!r}") from exc


def _objective_cfg(cfg) -> dict:
    obj = {"kind": cfg["objective"]["kind"]}
    if obj["kind"] == "gaussian_mixture":
        obj["kappa"] = _get_float(cfg, "objective", "kappa")
        obj["confinement"] = _get_float(cfg, "objective", "confinement")
    return obj


def build_sim_config(cfg: dict, algorithm: str = "replica-exchange") -> SimConfig:
    return SimConfig(
        objective=_objective_cfg(cfg),
        tau1=_get_float(cfg, "dynamics", "tau1"),
        tau2=_get_float(cfg, "dynamics", "tau2"),
        intensity=_get_float(cfg, "dynamics", "intensity"),
        eta=_get_float(cfg, "dynamics", "eta"),
        steps=_get_int(cfg, "dynamics", "steps"),
        ensemble=_get_int(cfg, "dynamics", "ensemble"),
        seed=_get_int(cfg, "dynamics", "seed"),
        init=_get_init(cfg),
        algorithm=algorithm,
        stride=_get_int(cfg, "dynamics", "stride"),
    )


def _out_dir(cfg, out_flag):
    path = out_flag if out_flag is not None else cfg["output"]["dir"]
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Subcommand handlers.

def cmd_compare(cfg, out_flag) -> int:
    base = build_sim_config(cfg)
    summaries = run_comparison(comparison_configs(base))
    out = _out_dir(cfg, out_flag)
    echo = emit_canonical_config(cfg)
    write_bestsofar_csv(os.path.join(out, "bestsofar.csv"), summaries, echo)
    write_summary_csv(os.path.join(out, "summary.csv"), summaries, echo)
    finals = {s.algorithm: float(np.median(s.final_best)) for s in summaries}
    print(f"compare: wrote {out}/bestsofar.csv, {out}/summary.csv; "
          f"median final best {finals}")
    return 0


def cmd_sweep(cfg, out_flag) -> int:
    kappas = _get_floats(cfg, "objective", "kappas")
    base = build_sim_config(cfg)
    results = kappa_sweep(kappas, base)
    out = _out_dir(cfg, out_flag)
    for kappa, summaries in zip(kappas, results):
        sweep_cfg = {sec: dict(keys) for sec, keys in cfg.items()}
        sweep_cfg["objective"]["kappa"] = f"{kappa:g}"
        echo = emit_canonical_config(sweep_cfg)
        tag = f"{kappa:g}".replace(".", "p")
        write_bestsofar_csv(os.path.join(out, f"bestsofar_kappa{tag}.csv"),
                            summaries, echo)
        write_summary_csv(os.path.join(out, f"summary_kappa{tag}.csv"),
                          summaries, echo)
    print(f"sweep: wrote {2 * len(kappas)} files under {out}")
    return 0


def cmd_chi2(cfg, out_flag) -> int:
    f = build_objective(_objective_cfg(cfg))
    lo, hi = _get_floats(cfg, "diagnostics", "bounds")
    times = np.asarray(_get_floats(cfg, "diagnostics", "sample_times"))
    intensity = _get_float(cfg, "dynamics", "intensity")
    fits = {}
    for a in (0.0, intensity) if intensity > 0 else (0.0,):
        fits[a] = chi2_decay_experiment(
            f,
            tau1=_get_float(cfg, "dynamics", "tau1"),
            tau2=_get_float(cfg, "dynamics", "tau2"),
            a=a,
            eta=_get_float(cfg, "dynamics", "eta"),
            ensemble=_get_int(cfg, "dynamics", "ensemble"),
            sample_times=times,
            bounds=np.array([[lo, hi]]),
            resolution=_get_int(cfg, "diagnostics", "resolution"),
            seed=_get_int(cfg, "dynamics", "seed"),
            fit_floor=_get_float(cfg, "diagnostics", "fit_floor"),
        )
    out = _out_dir(cfg, out_flag)
    write_chi2decay_csv(os.path.join(out, "chi2decay.csv"), fits,
                        emit_canonical_config(cfg))
    rates = {a: f"{fit.rate:.4g}" for a, fit in fits.items()}
    print(f"chi2: wrote {out}/chi2decay.csv; fitted decay rates {rates}")
    return 0


def cmd_discerr(cfg, out_flag) -> int:
    f = build_objective(_objective_cfg(cfg))
    raw_ref = cfg["diagnostics"]["eta_ref"]
    result = discretization_error_experiment(
        f,
        tau1=_get_float(cfg, "dynamics", "tau1"),
        tau2=_get_float(cfg, "dynamics", "tau2"),
        a=_get_float(cfg, "dynamics", "intensity"),
        etas=_get_floats(cfg, "diagnostics", "etas"),
        T=_get_float(cfg, "diagnostics", "horizon"),
        ensemble=_get_int(cfg, "dynamics", "ensemble"),
        seed=_get_int(cfg, "dynamics", "seed"),
        eta_ref=float(raw_ref) if raw_ref else None,
    )
    out = _out_dir(cfg, out_flag)
    write_discerr_csv(os.path.join(out, "discerr.csv"), result,
                      emit_canonical_config(cfg))
    print(f"discerr: wrote {out}/discerr.csv; log-log slope {result.slope:.4g}")
    return 0


def cmd_gradcheck(cfg, out_flag) -> int:
    f = build_objective(_objective_cfg(cfg))
    rng = derive_stream(_get_int(cfg, "dynamics", "seed"), PURPOSE_INIT)
    points = -1.0 + 7.0 * rng.uniform((100, f.dimension))
    worst = max(check_gradient(f, p) for p in points)
    ok = worst < 1e-5
    print(f"gradcheck: max relative error {worst:.3e} over 100 points "
          f"-> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 4


def cmd_check(cfg, out_flag) -> int:
    from .acceptance import run_all
    records = run_all()
    all_pass = True
    for rec in records:
        status = "PASS" if rec.passed else "FAIL"
        all_pass &= rec.passed
        print(f"[{status}] {rec.name}: {rec.detail} ({rec.runtime:.1f}s)")
    print(f"check: {sum(r.passed for r in records)}/{len(records)} criteria passed")
    return 0 if all_pass else 4


HANDLERS = {
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "chi2": cmd_chi2,
    "discerr": cmd_discerr,
    "gradcheck": cmd_gradcheck,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relex",
        description="Replica-exchange Langevin dynamics experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="config file path")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="root seed override")
        p.add_argument("--threads", type=int, default=0,
                       help="worker count (0 = auto); runs are vectorized")
    return parser


def main(argv=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, args.overrides, args.seed)
        if args.threads < 0:
            raise ConfigError(f"--threads must be >= 0, got {args.threads}")
        return HANDLERS[args.subcommand](cfg, args.out)
    except ConfigError as exc:
        print(f"relex: config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"relex: divergence: {exc}", file=sys.stderr)
        return 3
    except RelexError as exc:
        print(f"relex: error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())
