"""Numerical convergence diagnostics: Gibbs densities on grids, histogram
chi-square divergence and its fitted decay rate, and the swap term of the
Dirichlet form.

Grids are uniform with a fixed number of cells per axis; masses live at cell
centers and sum to one. These are desk-scale estimators, not proofs: the
chi-square of an N-chain histogram carries an O(ncells / N) noise floor,
which is why decay fits are restricted to a window above it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyInputError, FitError, GridMismatchError, InputError,
                     TruncationError)
from .langevin import Trace
from .objective import ObjectiveFunction
from .replica import SwapPolicy, run_pair_ensemble, swap_rate
from .rng import PURPOSE_POS1, PURPOSE_POS2, PURPOSE_SWAP, derive_stream

PI_FLOOR = 1e-12
BOUNDARY_MASS_LIMIT = 1e-6


@dataclass
class GridMeasure:
    """Probability mass on a uniform rectangular grid.

    ``bounds`` is (d, 2); ``mass`` has shape (resolution,) * d. ``overflow``
    is the fraction of source points that fell outside the bounds (histogram
    use only; excluded from the normalized mass).
    """

    bounds: np.ndarray
    resolution: int
    mass: np.ndarray
    overflow: float = 0.0

    def __post_init__(self):
        self.bounds = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        self.mass = np.asarray(self.mass, dtype=float)

    @property
    def ndim(self):
        return self.bounds.shape[0]

    def centers(self, axis: int = 0) -> np.ndarray:
        lo, hi = self.bounds[axis]
        width = (hi - lo) / self.resolution
        return lo + (np.arange(self.resolution) + 0.5) * width

    def cell_volume(self) -> float:
        widths = (self.bounds[:, 1] - self.bounds[:, 0]) / self.resolution
        return float(np.prod(widths))

    def same_grid(self, other: "GridMeasure") -> bool:
        return (self.resolution == other.resolution
                and self.bounds.shape == other.bounds.shape
                and np.array_equal(self.bounds, other.bounds))

    def to_csv(self, path):
        """Rows of cell-center coordinates plus mass, row-major order."""
        axes = [self.centers(k) for k in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        cols = [m.ravel() for m in mesh] + [self.mass.ravel()]
        header = ",".join(["x", "y"][: self.ndim] + ["mass"])
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in zip(*cols):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass
class DecayFit:
    """Exponential-decay fit of a chi-square trajectory."""

    times: np.ndarray
    chi2: np.ndarray
    rate: float
    r2: float
    bootstrap_std: np.ndarray = field(default_factory=lambda: np.empty(0))
    rate_std: float = float("nan")


def _boundary_mass(mass: np.ndarray) -> float:
    interior = mass
    for axis in range(mass.ndim):
        interior = np.take(interior, np.arange(1, mass.shape[axis] - 1), axis=axis)
    return float(mass.sum() - interior.sum())


def _max_boundary_cell(mass: np.ndarray) -> float:
    mask = np.zeros(mass.shape, dtype=bool)
    for axis in range(mass.ndim):
        sl = [slice(None)] * mass.ndim
        sl[axis] = 0
        mask[tuple(sl)] = True
        sl[axis] = -1
        mask[tuple(sl)] = True
    return float(mass[mask].max())


def gibbs_density(f: ObjectiveFunction, tau: float, bounds, resolution: int) -> GridMeasure:
    """Normalized exp(-U/tau) on a uniform grid (midpoint quadrature).

    Raises TruncationError when a boundary cell carries visible mass,
    meaning the requested bounds truncate the density.
    """
    if not (tau > 0):
        raise InputError(f"tau must be positive, got {tau}")
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    if bounds.shape[0] != f.dimension:
        raise InputError(f"bounds must have {f.dimension} rows")
    gm = GridMeasure(bounds, int(resolution), np.empty((int(resolution),) * f.dimension))
    axes = [gm.centers(k) for k in range(f.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    u = np.asarray(f.eval(pts), dtype=float).reshape(gm.mass.shape)
    w = np.exp(-(u - u.min()) / tau)
    mass = w / w.sum()
    # A flat density carries edge mass by construction; truncation is only
    # detectable (and only meaningful) when the density varies.
    flat = w.max() - w.min() <= 1e-12 * w.max()
    if not flat and _max_boundary_cell(mass) > BOUNDARY_MASS_LIMIT:
        raise TruncationError(
            "boundary cells carry non-negligible Gibbs mass; enlarge the bounds"
        )
    gm.mass = mass
    return gm


def pair_gibbs_density(f: ObjectiveFunction, tau1: float, tau2: float,
                       bounds, resolution: int) -> GridMeasure:
    """Product-grid Gibbs density exp(-U(x1)/tau1 - U(x2)/tau2), d = 1 only."""
    if f.dimension != 1:
        raise InputError("pair grid diagnostics require a 1-D objective")
    if not (tau1 > 0 and tau2 > 0):
        raise InputError("temperatures must be positive")
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    if bounds.shape[0] == 1:
        bounds = np.vstack([bounds, bounds])
    gm = GridMeasure(bounds, int(resolution), np.empty((int(resolution),) * 2))
    c1 = gm.centers(0)[:, None]
    c2 = gm.centers(1)[:, None]
    u1 = np.asarray(f.eval(c1), dtype=float)
    u2 = np.asarray(f.eval(c2), dtype=float)
    w = np.exp(-(u1 - u1.min()) / tau1)[:, None] * np.exp(-(u2 - u2.min()) / tau2)[None, :]
    mass = w / w.sum()
    flat = w.max() - w.min() <= 1e-12 * w.max()
    if not flat and _max_boundary_cell(mass) > BOUNDARY_MASS_LIMIT:
        raise TruncationError(
            "boundary cells carry non-negligible Gibbs mass; enlarge the bounds"
        )
    gm.mass = mass
    return gm


def empirical_histogram(positions, bounds, resolution: int) -> GridMeasure:
    """Normalized occupancy histogram; out-of-bounds mass reported separately."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    if positions.shape[0] == 0:
        raise EmptyInputError("no positions to histogram")
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    counts, _ = np.histogramdd(positions, bins=int(resolution),
                               range=[tuple(b) for b in bounds])
    total = positions.shape[0]
    inside = counts.sum()
    if inside == 0:
        raise EmptyInputError("all positions fall outside the histogram bounds")
    return GridMeasure(bounds, int(resolution), counts / inside,
                       overflow=float(1.0 - inside / total))


def chi_square_divergence(mu: GridMeasure, pi: GridMeasure) -> float:
    """sum over cells of (mu_c / pi_c - 1)^2 * pi_c, with pi floored at 1e-12."""
    if not mu.same_grid(pi):
        raise GridMismatchError("chi-square needs identical grids")
    p = np.maximum(pi.mass, PI_FLOOR)
    return float(np.sum((mu.mass / p - 1.0) ** 2 * p))


def total_variation(mu: GridMeasure, pi: GridMeasure) -> float:
    if not mu.same_grid(pi):
        raise GridMismatchError("total variation needs identical grids")
    return float(0.5 * np.abs(mu.mass - pi.mass).sum())


def _chi2_of_points(points, pi: GridMeasure) -> float:
    return chi_square_divergence(
        empirical_histogram(points, pi.bounds, pi.resolution), pi
    )


def chi2_decay_experiment(f: ObjectiveFunction, tau1: float, tau2: float,
                          a: float, eta: float, ensemble: int, sample_times,
                          bounds, resolution: int, seed: int,
                          init=(1.0, -1.0), fit_floor: float = 0.01,
                          n_bootstrap: int = 40) -> DecayFit:
    """Estimate the chi-square decay of the pair law toward the pair Gibbs
    measure from an ensemble of replica pairs started at a point mass.

    The pair state is tracked in (low-temperature coordinate, high-temperature
    coordinate) order. log chi2 is fitted by least squares over the sample
    times where chi2 exceeds ``fit_floor``; ``rate`` is the fitted decay rate
    (positive means decaying). Bootstrap resampling over chains supplies
    per-time chi2 standard errors and a standard error for the rate.
    """
    if f.dimension != 1:
        raise InputError("chi-square decay experiment requires a 1-D objective")
    if ensemble < 1000:
        raise InputError(f"ensemble must be >= 1000, got {ensemble}")
    sample_times = np.asarray(sample_times, dtype=float)
    if sample_times.size < 1 or np.any(np.diff(sample_times) <= 0):
        raise InputError("sample times must be strictly increasing")
    policy = SwapPolicy(intensity=a, eta=eta)
    pi = pair_gibbs_density(f, tau1, tau2, bounds, resolution)

    sample_steps = np.maximum(1, np.rint(sample_times / eta).astype(int))
    times = sample_steps * eta
    p1 = np.full((ensemble, 1), float(init[0]))
    p2 = np.full((ensemble, 1), float(init[1]))
    snaps, _, _ = run_pair_ensemble(
        p1, p2, f, tau1, tau2, policy, int(sample_steps[-1]),
        derive_stream(seed, PURPOSE_POS1), derive_stream(seed, PURPOSE_POS2),
        derive_stream(seed, PURPOSE_SWAP),
        mode="position", snapshot_steps=sample_steps,
    )
    pair_points = [
        np.column_stack([snaps[s][0][:, 0], snaps[s][1][:, 0]]) for s in sample_steps
    ]
    chi2 = np.array([_chi2_of_points(pts, pi) for pts in pair_points])

    boot_rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0xB007], dtype=np.uint64)))
    boot = np.empty((n_bootstrap, len(times)))
    for b in range(n_bootstrap):
        idx = boot_rng.integers(0, ensemble, size=ensemble)
        boot[b] = [_chi2_of_points(pts[idx], pi) for pts in pair_points]
    bootstrap_std = boot.std(axis=0, ddof=1)

    def fit_rate(values):
        keep = values > fit_floor
        if keep.sum() < 3:
            raise FitError(
                f"only {int(keep.sum())} sample times have chi2 > {fit_floor}"
            )
        slope, intercept = np.polyfit(times[keep], np.log(values[keep]), 1)
        pred = slope * times[keep] + intercept
        resid = np.log(values[keep]) - pred
        tot = np.log(values[keep]) - np.log(values[keep]).mean()
        r2 = 1.0 - resid @ resid / max(tot @ tot, 1e-300)
        return -slope, r2

    rate, r2 = fit_rate(chi2)
    boot_rates = []
    for b in range(n_bootstrap):
        try:
            boot_rates.append(fit_rate(boot[b])[0])
        except FitError:
            continue
    rate_std = float(np.std(boot_rates, ddof=1)) if len(boot_rates) > 1 else float("nan")
    return DecayFit(times=times, chi2=chi2, rate=rate, r2=r2,
                    bootstrap_std=bootstrap_std, rate_std=rate_std)


def dirichlet_acceleration_term(f_test, f: ObjectiveFunction, tau1: float,
                                tau2: float, a: float, pair_pi: GridMeasure) -> float:
    """Grid quadrature of the swap term of the Dirichlet form:
    integral of a/2 * s(x1, x2) * (f(x2, x1) - f(x1, x2))^2 dpi.

    ``f_test`` must accept two broadcastable coordinate arrays. The grid must
    be square (both axes identical) so the exchange (x1, x2) -> (x2, x1)
    stays on grid points.
    """
    if pair_pi.ndim != 2 or not np.array_equal(pair_pi.bounds[0], pair_pi.bounds[1]):
        raise GridMismatchError("pair grid must be square for the exchange map")
    if a < 0:
        raise InputError(f"swap intensity must be nonnegative, got {a}")
    c = pair_pi.centers(0)
    u = np.asarray(f.eval(c[:, None]), dtype=float)
    s = swap_rate(u[:, None], u[None, :], tau1, tau2)
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    diff = np.asarray(f_test(x2, x1), dtype=float) - np.asarray(f_test(x1, x2), dtype=float)
    return float(0.5 * a * np.sum(s * diff * diff * pair_pi.mass))


def best_so_far(trace) -> np.ndarray:
    """Running minimum of the objective values along a trace."""
    values = trace.values if isinstance(trace, Trace) else np.asarray(trace, dtype=float)
    if values.size == 0:
        raise EmptyInputError("empty trace")
    return np.minimum.accumulate(values)
