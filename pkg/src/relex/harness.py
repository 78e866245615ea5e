"""Experiment orchestration: the three-algorithm comparison, the kappa sweep,
the coupled discretization-error experiment, and CSV emission.

All randomness flows from one root seed. Each seed of a comparison owns three
derived streams (particle-1 noise, particle-2 noise, swap uniforms); the
single-temperature baselines reuse the particle streams, so a replica run
with intensity 0 reproduces the low-temperature baseline bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError
from .langevin import check_finite, em_update
from .objective import (DEFAULT_CENTERS, DEFAULT_WEIGHTS, GaussianMixtureSpec,
                        ObjectiveFunction, build_gaussian_mixture, double_well,
                        quadratic)
from .replica import SwapPolicy, swap_probability, swap_rate
from .rng import (PURPOSE_INIT, PURPOSE_POS1, PURPOSE_POS2, PURPOSE_SWAP,
                  derive_stream)

ALGORITHMS = ("low-temp", "high-temp", "replica-exchange")


@dataclass
class SimConfig:
    """One experiment arm. ``objective`` is the parsed objective section,
    e.g. {"kind": "gaussian_mixture", "kappa": 0.1}."""

    objective: dict
    tau1: float
    tau2: float
    intensity: float
    eta: float
    steps: int
    ensemble: int            # number of seeds (independent runs)
    seed: int
    init: object             # point tuple, or "uniform:lo,hi"
    algorithm: str
    stride: int = 10

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if not (self.tau1 > 0 and self.tau2 > 0):
            raise ConfigError("temperatures must be positive")
        if self.algorithm == "replica-exchange" and not (self.tau1 < self.tau2):
            raise ConfigError("replica exchange requires tau1 < tau2")
        if self.intensity < 0:
            raise ConfigError("intensity must be nonnegative")
        if not (self.eta > 0):
            raise ConfigError("eta must be positive")
        if self.steps < 1 or self.ensemble < 1:
            raise ConfigError("steps and ensemble must be positive")
        if self.stride < 1 or self.steps % self.stride != 0:
            raise ConfigError(f"stride {self.stride} must divide steps {self.steps}")

    @property
    def horizon(self) -> float:
        return self.steps * self.eta


@dataclass
class RunSummary:
    algorithm: str
    iterations: np.ndarray       # thinned iteration indices, starting at 0
    best_curves: np.ndarray      # (nseeds, npoints) running minima, per seed
    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray
    final_best: np.ndarray       # (nseeds,)
    swap_counts: np.ndarray | None = None
    wall_time: float = 0.0


@dataclass
class DiscretizationResult:
    etas: np.ndarray
    mse: np.ndarray
    stderr: np.ndarray
    slope: float


@dataclass
class StabilityEntry:
    eta: float
    max_second_moment: float
    flagged: bool       # eta >= alpha / L^2
    diverged: bool


@dataclass
class StabilityReport:
    entries: list
    caveat: str | None = None


def build_objective(obj_cfg: dict) -> ObjectiveFunction:
    """Construct the objective named by a config section."""
    cfg = dict(obj_cfg)
    kind = cfg.pop("kind", "gaussian_mixture")
    cfg.pop("kappas", None)   # sweep list, consumed by kappa_sweep
    if kind == "gaussian_mixture":
        centers = np.asarray(cfg.pop("centers", DEFAULT_CENTERS), dtype=float)
        weights = np.asarray(cfg.pop("weights", DEFAULT_WEIGHTS), dtype=float)
        kappa = float(cfg.pop("kappa", 0.1))
        confinement = float(cfg.pop("confinement", 0.0))
        if cfg:
            raise ConfigError(f"unknown objective keys: {sorted(cfg)}")
        return build_gaussian_mixture(
            GaussianMixtureSpec(centers, weights, kappa, confinement)
        )
    if kind == "double_well":
        if cfg:
            raise ConfigError(f"unknown objective keys: {sorted(cfg)}")
        return double_well()
    if kind == "quadratic":
        dim = int(cfg.pop("dim", 2))
        if cfg:
            raise ConfigError(f"unknown objective keys: {sorted(cfg)}")
        return quadratic(dim)
    raise ConfigError(f"unknown objective kind {kind!r}")


def resolve_init(init, dim: int, nseeds: int, seed: int) -> np.ndarray:
    """Initial positions of shape (nseeds, dim) from a point or a box spec."""
    if isinstance(init, str):
        if not init.startswith("uniform:"):
            raise ConfigError(f"unrecognized init spec {init!r}")
        try:
            lo, hi = (float(v) for v in init[len("uniform:"):].split(","))
        except ValueError as exc:
            raise ConfigError(f"bad uniform init spec {init!r}") from exc
        rng = derive_stream(seed, PURPOSE_INIT)
        return lo + (hi - lo) * rng.uniform((nseeds, dim))
    point = np.asarray(init, dtype=float).ravel()
    if point.shape[0] != dim:
        raise ConfigError(f"init point has dimension {point.shape[0]}, expected {dim}")
    return np.tile(point, (nseeds, 1))


def pregenerate_noise(seed: int, nseeds: int, steps: int, dim: int):
    """Per-seed noise blocks: particle-1 normals, particle-2 normals, swap
    uniforms, each drawn from that seed's own derived stream."""
    noise1 = np.empty((steps, nseeds, dim))
    noise2 = np.empty((steps, nseeds, dim))
    uswap = np.empty((steps, nseeds))
    for s in range(nseeds):
        noise1[:, s] = derive_stream(seed, PURPOSE_POS1, s).normal((steps, dim))
        noise2[:, s] = derive_stream(seed, PURPOSE_POS2, s).normal((steps, dim))
        uswap[:, s] = derive_stream(seed, PURPOSE_SWAP, s).uniform(steps)
    return noise1, noise2, uswap


def run_single_trajectories(init, f: ObjectiveFunction, tau: float, eta: float,
                            noise: np.ndarray) -> np.ndarray:
    """Vectorized single-temperature chains; returns (steps+1, nseeds, d)."""
    steps, nseeds, _ = noise.shape
    pos = np.array(init, dtype=float)
    temps = np.full(nseeds, float(tau))
    traj = np.empty((steps + 1,) + pos.shape)
    traj[0] = pos
    for k in range(steps):
        pos = em_update(pos, f.grad(pos), temps, eta, noise[k])
        check_finite(pos, k + 1)
        traj[k + 1] = pos
    return traj


def run_replica_trajectories(init1, init2, f: ObjectiveFunction, tau1: float,
                             tau2: float, policy: SwapPolicy,
                             noise1, noise2, uswap):
    """Vectorized temperature-swapping pairs sharing the baselines' noise.

    Returns (low-temp trajectory (steps+1, nseeds, d), particle-1 trajectory,
    particle-2 trajectory, swap counts per seed).
    """
    steps, nseeds, _ = noise1.shape
    p1 = np.array(init1, dtype=float)
    p2 = np.array(init2, dtype=float)
    t1 = np.full(nseeds, float(tau1))
    t2 = np.full(nseeds, float(tau2))
    swap_counts = np.zeros(nseeds, dtype=int)
    low_traj = np.empty((steps + 1,) + p1.shape)
    p1_traj = np.empty_like(low_traj)
    p2_traj = np.empty_like(low_traj)
    low_traj[0] = p1
    p1_traj[0] = p1
    p2_traj[0] = p2
    for k in range(steps):
        rate = swap_rate(f.eval(p1), f.eval(p2), t1, t2)
        p1 = em_update(p1, f.grad(p1), t1, policy.eta, noise1[k])
        p2 = em_update(p2, f.grad(p2), t2, policy.eta, noise2[k])
        check_finite(p1, k + 1)
        check_finite(p2, k + 1)
        fire = uswap[k] < swap_probability(rate, policy)
        t1, t2 = np.where(fire, t2, t1), np.where(fire, t1, t2)
        swap_counts += fire
        low_is_1 = (t1 <= t2)[:, None]
        low_traj[k + 1] = np.where(low_is_1, p1, p2)
        p1_traj[k + 1] = p1
        p2_traj[k + 1] = p2
    return low_traj, p1_traj, p2_traj, swap_counts


def _summarize(algorithm: str, traj: np.ndarray, f: ObjectiveFunction,
               stride: int, swap_counts=None, wall_time: float = 0.0) -> RunSummary:
    values = np.asarray(f.eval(traj))            # (steps+1, nseeds)
    best = np.minimum.accumulate(values, axis=0)
    thin = best[::stride].T                      # (nseeds, npoints)
    iterations = np.arange(0, traj.shape[0], stride)
    return RunSummary(
        algorithm=algorithm,
        iterations=iterations,
        best_curves=thin,
        median=np.median(thin, axis=0),
        q25=np.quantile(thin, 0.25, axis=0),
        q75=np.quantile(thin, 0.75, axis=0),
        final_best=best[-1],
        swap_counts=swap_counts,
        wall_time=wall_time,
    )


def comparison_configs(base: SimConfig) -> tuple[SimConfig, SimConfig, SimConfig]:
    """The protocol triple: low-temp baseline, high-temp baseline, replica."""
    def variant(algorithm):
        return SimConfig(base.objective, base.tau1, base.tau2, base.intensity,
                         base.eta, base.steps, base.ensemble, base.seed,
                         base.init, algorithm, base.stride)
    return variant("low-temp"), variant("high-temp"), variant("replica-exchange")


def run_comparison(configs: Sequence[SimConfig]):
    """Run the three algorithms over a shared seed set and noise blocks.

    ``configs`` must contain one config per algorithm, agreeing on objective,
    temperatures, stepsize, step count, seed, and ensemble size.
    """
    if len(configs) != 3:
        raise ConfigError("run_comparison expects exactly three configs")
    by_alg = {c.algorithm: c for c in configs}
    if set(by_alg) != set(ALGORITHMS):
        raise ConfigError(f"configs must cover algorithms {ALGORITHMS}")
    base = by_alg["replica-exchange"]
    for c in configs:
        shared = (c.objective, c.tau1, c.tau2, c.eta, c.steps, c.ensemble,
                  c.seed, c.init, c.stride)
        if shared != (base.objective, base.tau1, base.tau2, base.eta, base.steps,
                      base.ensemble, base.seed, base.init, base.stride):
            raise ConfigError("comparison configs must share everything but the algorithm")

    f = build_objective(base.objective)
    init = resolve_init(base.init, f.dimension, base.ensemble, base.seed)
    noise1, noise2, uswap = pregenerate_noise(base.seed, base.ensemble,
                                              base.steps, f.dimension)
    policy = SwapPolicy(intensity=base.intensity, eta=base.eta)

    t0 = time.perf_counter()
    low_traj = run_single_trajectories(init, f, base.tau1, base.eta, noise1)
    t_low = time.perf_counter()
    high_traj = run_single_trajectories(init, f, base.tau2, base.eta, noise2)
    t_high = time.perf_counter()
    re_traj, _, _, swap_counts = run_replica_trajectories(
        init, init, f, base.tau1, base.tau2, policy, noise1, noise2, uswap)
    t_re = time.perf_counter()

    return (
        _summarize("low-temp", low_traj, f, base.stride, wall_time=t_low - t0),
        _summarize("high-temp", high_traj, f, base.stride, wall_time=t_high - t_low),
        _summarize("replica-exchange", re_traj, f, base.stride,
                   swap_counts=swap_counts, wall_time=t_re - t_high),
    )


def kappa_sweep(kappas: Sequence[float], base: SimConfig):
    """One comparison triple per mixture width kappa."""
    kappas = list(kappas)
    if not kappas:
        raise ConfigError("kappa sweep needs at least one kappa")
    results = []
    for kappa in kappas:
        if not (kappa > 0):
            raise ConfigError(f"kappa must be positive, got {kappa}")
        obj = dict(base.objective)
        obj["kappa"] = float(kappa)
        cfg = SimConfig(obj, base.tau1, base.tau2, base.intensity, base.eta,
                        base.steps, base.ensemble, base.seed, base.init,
                        base.algorithm, base.stride)
        results.append(run_comparison(comparison_configs(cfg)))
    return results


def discretization_error_experiment(f: ObjectiveFunction, tau1: float, tau2: float,
                                    a: float, etas: Sequence[float], T: float,
                                    ensemble: int, seed: int,
                                    eta_ref: float | None = None,
                                    init=(1.0, -1.0)) -> DiscretizationResult:
    """Coupled coarse-vs-fine mean squared error at time T.

    Every run shares one fine-grid Brownian path and one fine-grid swap
    uniform table. A coarse step of width m * eta_ref consumes the sum of its
    m constituent fine Gaussian increments, and its swap fires iff any of the
    m fine uniforms falls below a * eta_ref * s evaluated at the coarse step's
    start. The finest grid is the brute-force reference for the continuous
    process.
    """
    etas = np.asarray(sorted(etas, reverse=True), dtype=float)
    if np.any(etas <= 0):
        raise ConfigError("all stepsizes must be positive")
    if eta_ref is None:
        eta_ref = float(etas.min()) / 16.0
    ratios = etas / eta_ref
    if np.any(np.abs(ratios - np.rint(ratios)) > 1e-9):
        raise ConfigError("every eta must be an integer multiple of eta_ref")
    n_fine = T / eta_ref
    if abs(n_fine - round(n_fine)) > 1e-9:
        raise ConfigError("horizon T must be an integer number of reference steps")
    n_fine = int(round(n_fine))
    for eta in etas:
        if abs(T / eta - round(T / eta)) > 1e-9:
            raise ConfigError(f"T = {T} is not an integer number of steps of eta = {eta}")

    d = f.dimension
    xi1 = derive_stream(seed, PURPOSE_POS1).normal((n_fine, ensemble, d))
    xi2 = derive_stream(seed, PURPOSE_POS2).normal((n_fine, ensemble, d))
    usw = derive_stream(seed, PURPOSE_SWAP).uniform((n_fine, ensemble))
    cum1 = np.cumsum(xi1, axis=0)
    cum2 = np.cumsum(xi2, axis=0)

    init1 = np.broadcast_to(np.asarray(init[0], float).reshape(-1), (d,))
    init2 = np.broadcast_to(np.asarray(init[1], float).reshape(-1), (d,))

    def coupled_run(m: int):
        p1 = np.tile(init1, (ensemble, 1))
        p2 = np.tile(init2, (ensemble, 1))
        t1 = np.full(ensemble, float(tau1))
        t2 = np.full(ensemble, float(tau2))
        eta = m * eta_ref
        for k in range(n_fine // m):
            lo, hi = k * m, (k + 1) * m
            inc1 = xi1[lo:hi].sum(axis=0)
            inc2 = xi2[lo:hi].sum(axis=0)
            if k == 0:
                # coupled-increment invariant: block sums match the shared
                # cumulative Brownian path
                assert np.allclose(inc1, cum1[hi - 1] - (cum1[lo - 1] if lo else 0.0))
            rate = swap_rate(f.eval(p1), f.eval(p2), t1, t2)
            p1 = p1 - eta * f.grad(p1) + np.sqrt(2.0 * eta_ref * t1)[:, None] * inc1
            p2 = p2 - eta * f.grad(p2) + np.sqrt(2.0 * eta_ref * t2)[:, None] * inc2
            check_finite(p1, (k + 1) * m)
            check_finite(p2, (k + 1) * m)
            p_sub = np.minimum(1.0, a * eta_ref * rate)
            fire = (usw[lo:hi] < p_sub[None, :]).any(axis=0)
            t1, t2 = np.where(fire, t2, t1), np.where(fire, t1, t2)
        return p1, p2

    ref1, ref2 = coupled_run(1)
    mses = np.empty(len(etas))
    stderrs = np.empty(len(etas))
    for i, eta in enumerate(etas):
        c1, c2 = coupled_run(int(round(eta / eta_ref)))
        sq = np.sum((c1 - ref1) ** 2, axis=1) + np.sum((c2 - ref2) ** 2, axis=1)
        mses[i] = sq.mean()
        stderrs[i] = sq.std(ddof=1) / np.sqrt(ensemble)
    positive = mses > 0
    if positive.sum() >= 2:
        slope = float(np.polyfit(np.log(etas[positive]), np.log(mses[positive]), 1)[0])
    else:
        slope = float("nan")
    return DiscretizationResult(etas=etas, mse=mses, stderr=stderrs, slope=slope)


def stability_bound_check(f: ObjectiveFunction, tau2: float, etas: Sequence[float],
                          L_est: float, alpha_est: float, steps: int = 5000,
                          ensemble: int = 200, seed: int = 0) -> StabilityReport:
    """Empirical second-moment stability report for a list of stepsizes.

    Runs single-temperature ensembles at tau2 and records the running maximum
    of E||Z||^2; stepsizes at or above alpha / L^2 are flagged. Reporting
    only: nothing raises.
    """
    if not (L_est > 0 and alpha_est > 0):
        raise InputError("L and alpha estimates must be positive")
    threshold = alpha_est / L_est ** 2
    entries = []
    for i, eta in enumerate(etas):
        rng = derive_stream(seed, PURPOSE_POS1, i)
        pos = np.zeros((ensemble, f.dimension))
        max_m2 = 0.0
        diverged = False
        for k in range(steps):
            xi = rng.normal(pos.shape)
            pos = em_update(pos, f.grad(pos), tau2, eta, xi)
            if not np.all(np.isfinite(pos)) or np.max(np.abs(pos)) > 1e12:
                diverged = True
                break
            max_m2 = max(max_m2, float(np.mean(np.sum(pos * pos, axis=1))))
        entries.append(StabilityEntry(
            eta=float(eta),
            max_second_moment=float("nan") if diverged else max_m2,
            flagged=eta >= threshold,
            diverged=diverged,
        ))
    caveat = None
    if not f.dissipative:
        caveat = "objective is not globally dissipative; the moment bound does not apply"
    return StabilityReport(entries=entries, caveat=caveat)


# ---------------------------------------------------------------------------
# CSV emission. All files start with a canonical config echo comment and a
# header row; doubles are written with 17 significant digits.

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{v:.17g}"
    return str(v)


def _write_rows(path, config_line: str, header: Sequence[str], rows):
    with open(path, "w") as fh:
        fh.write(f"# config: {config_line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_bestsofar_csv(path, summaries: Sequence[RunSummary], config_line: str = ""):
    def rows():
        for summary in summaries:
            for s in range(summary.best_curves.shape[0]):
                for it, v in zip(summary.iterations, summary.best_curves[s]):
                    yield (it, summary.algorithm, s, v)
    _write_rows(path, config_line, ["iteration", "algorithm", "seed", "best_so_far"], rows())


def write_summary_csv(path, summaries: Sequence[RunSummary], config_line: str = ""):
    def rows():
        for summary in summaries:
            for i, it in enumerate(summary.iterations):
                yield (it, summary.algorithm, summary.median[i],
                       summary.q25[i], summary.q75[i])
    _write_rows(path, config_line, ["iteration", "algorithm", "median", "q25", "q75"], rows())


def write_chi2decay_csv(path, fits_by_intensity: dict, config_line: str = ""):
    """``fits_by_intensity`` maps the swap intensity a to its DecayFit."""
    def rows():
        for a, fit in fits_by_intensity.items():
            for t, c, b in zip(fit.times, fit.chi2, fit.bootstrap_std):
                yield (t, a, c, b)
    _write_rows(path, config_line, ["time", "a", "chi2", "bootstrap_std"], rows())


def write_discerr_csv(path, result: DiscretizationResult, config_line: str = ""):
    rows = zip(result.etas, result.mse, result.stderr)
    _write_rows(path, config_line, ["eta", "mse", "stderr"], rows)
