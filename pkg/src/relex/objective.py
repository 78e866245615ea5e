"""Objective functions: generic interface, the 25-component Gaussian-mixture
benchmark, and a few standard test potentials.

All objectives evaluate in a vectorized way: ``eval`` maps an array of shape
(..., d) to (...), ``grad`` maps (..., d) to (..., d). A single point is just
the shape-(d,) case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError

# Centers of the benchmark mixture: (0,0), (0,1), ..., (0,4), (1,0), ..., (4,4).
DEFAULT_CENTERS = np.array(
    [(i, j) for i in range(5) for j in range(5)], dtype=float
)

# Normalized ascending weights i/325 (325 = 1 + ... + 25), so the last
# center (4, 4) is the deepest well and the first the shallowest.
DEFAULT_WEIGHTS = np.arange(1, 26, dtype=float) / 325.0


@dataclass(frozen=True)
class ObjectiveFunction:
    """A scalar field on R^d with an analytic gradient.

    ``dissipative`` marks whether the quadratic-growth drift condition holds
    globally; pure Gaussian mixtures (which flatten out at infinity) do not
    satisfy it unless a confinement term is added.
    """

    dimension: int
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    dissipative: bool = True
    name: str = "objective"


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Isotropic Gaussian mixture: centers, nonnegative weights, shared
    variance kappa. The objective is the negative mixture density."""

    centers: np.ndarray   # (n, 2)
    weights: np.ndarray   # (n,)
    kappa: float
    confinement: float = 0.0   # optional lambda * ||x||^2 term, off by default

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "weights", weights)
        if centers.shape[0] == 0:
            raise InputError("mixture needs at least one center")
        if centers.shape[0] != weights.shape[0]:
            raise InputError(
                f"{centers.shape[0]} centers but {weights.shape[0]} weights"
            )
        if np.any(weights < 0):
            raise InputError("mixture weights must be nonnegative")
        if not np.any(weights > 0):
            raise InputError("at least one mixture weight must be positive")
        if not (self.kappa > 0):
            raise InputError(f"kappa must be positive, got {self.kappa}")
        if self.confinement < 0:
            raise InputError("confinement must be nonnegative")


def build_gaussian_mixture(spec: GaussianMixtureSpec) -> ObjectiveFunction:
    """Negative Gaussian-mixture objective with analytic gradient.

    U(x) = -sum_i w_i / (2 pi kappa) * exp(-||x - c_i||^2 / (2 kappa))
           [+ lambda * ||x||^2 when confinement is enabled]
    """
    centers = spec.centers
    weights = spec.weights
    kappa = float(spec.kappa)
    lam = float(spec.confinement)
    dim = centers.shape[1]
    amp = weights / (2.0 * np.pi * kappa)

    def _components(x):
        x = np.asarray(x, dtype=float)
        diff = x[..., None, :] - centers          # (..., n, d)
        sq = np.sum(diff * diff, axis=-1)         # (..., n)
        return diff, amp * np.exp(-sq / (2.0 * kappa))

    def eval_fn(x):
        x = np.asarray(x, dtype=float)
        _, comps = _components(x)
        u = -np.sum(comps, axis=-1)
        if lam > 0:
            u = u + lam * np.sum(x * x, axis=-1)
        return u

    def grad_fn(x):
        x = np.asarray(x, dtype=float)
        diff, comps = _components(x)
        g = np.sum(comps[..., None] * diff, axis=-2) / kappa
        if lam > 0:
            g = g + 2.0 * lam * x
        return g

    return ObjectiveFunction(
        dimension=dim,
        eval=eval_fn,
        grad=grad_fn,
        dissipative=lam > 0,
        name="gaussian_mixture",
    )


def benchmark_mixture(kappa: float, weights=None, confinement: float = 0.0) -> ObjectiveFunction:
    """The standard 25-center benchmark on the 5x5 integer grid with the
    default ascending weight vector."""
    w = DEFAULT_WEIGHTS if weights is None else np.asarray(weights, dtype=float)
    spec = GaussianMixtureSpec(DEFAULT_CENTERS, w, kappa, confinement)
    return build_gaussian_mixture(spec)


def quadratic(dim: int = 2, scale: float = 0.5) -> ObjectiveFunction:
    """U(x) = scale * ||x||^2. With scale 0.5 the gradient is x itself."""
    return ObjectiveFunction(
        dimension=dim,
        eval=lambda x: scale * np.sum(np.asarray(x, float) ** 2, axis=-1),
        grad=lambda x: 2.0 * scale * np.asarray(x, float),
        name="quadratic",
    )


def double_well() -> ObjectiveFunction:
    """1-D double well U(x) = (x^2 - 1)^2 with minima at x = +-1."""

    def eval_fn(x):
        x = np.asarray(x, float)[..., 0]
        return (x * x - 1.0) ** 2

    def grad_fn(x):
        x = np.asarray(x, float)
        return 4.0 * x * (x[..., 0:1] ** 2 - 1.0)

    return ObjectiveFunction(dimension=1, eval=eval_fn, grad=grad_fn, name="double_well")


def zero_potential(dim: int = 1) -> ObjectiveFunction:
    """Flat objective; gradient vanishes everywhere (swap rate is 1)."""
    return ObjectiveFunction(
        dimension=dim,
        eval=lambda x: np.zeros(np.asarray(x, float).shape[:-1]),
        grad=lambda x: np.zeros_like(np.asarray(x, float)),
        name="zero",
    )


def check_gradient(f: ObjectiveFunction, point, step: float = 1e-6) -> float:
    """Max over coordinates of |analytic - central difference| / (1 + |analytic|)."""
    point = np.asarray(point, dtype=float)
    if not (step > 0):
        raise InputError(f"step must be positive, got {step}")
    if not np.all(np.isfinite(point)):
        raise InputError("point must be finite")
    analytic = np.asarray(f.grad(point), dtype=float)
    fd = np.empty_like(analytic)
    for k in range(point.shape[-1]):
        hi = point.copy()
        lo = point.copy()
        hi[k] += step
        lo[k] -= step
        fd[k] = (f.eval(hi) - f.eval(lo)) / (2.0 * step)
    return float(np.max(np.abs(analytic - fd) / (1.0 + np.abs(analytic))))
