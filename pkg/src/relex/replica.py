"""Coupled two-particle dynamics: the swap-rate function, the discrete swap
decision, and the exchange stepper in both formulations.

Temperature swapping (the discrete algorithm): both particles advance one
Euler-Maruyama step at their current temperatures, then exchange
temperatures with probability a * eta * s evaluated at the PRE-update
positions. Position swapping is the distributionally equivalent variant
where the particles keep their temperatures and exchange positions instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .langevin import check_finite, em_update
from .objective import ObjectiveFunction
from .rng import RngStream


@dataclass
class ReplicaState:
    pos1: np.ndarray
    pos2: np.ndarray
    temp1: float
    temp2: float
    iteration: int = 0
    swap_count: int = 0


@dataclass(frozen=True)
class SwapPolicy:
    """Swap intensity a >= 0 plus the integrator stepsize it is paired with.

    The per-step swap probability is a * eta * s, clamped to [0, 1]. Values
    of a * eta >= 1 are allowed (the clamp keeps the probability valid) but
    warned about once, since the nominal probability is then ill-defined.
    """

    intensity: float
    eta: float

    def __post_init__(self):
        if self.intensity < 0:
            raise InputError(f"swap intensity must be nonnegative, got {self.intensity}")
        if not (self.eta > 0):
            raise InputError(f"eta must be positive, got {self.eta}")
        if self.intensity * self.eta >= 1:
            warnings.warn(
                f"intensity * eta = {self.intensity * self.eta:g} >= 1; "
                "swap probabilities will be clamped to 1",
                RuntimeWarning,
                stacklevel=2,
            )


def swap_rate(u1, u2, tau1, tau2):
    """s = exp(min(0, (1/tau1 - 1/tau2) * (u1 - u2))), always in (0, 1].

    With tau1 < tau2 the rate increases as the first particle's objective
    value exceeds the second's; equal values or equal temperatures give 1.
    Vectorized over array inputs.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
        raise InputError("objective values in swap rate must be finite")
    if not (np.all(np.asarray(tau1) > 0) and np.all(np.asarray(tau2) > 0)):
        raise InputError("temperatures must be positive")
    expo = (1.0 / np.asarray(tau1, float) - 1.0 / np.asarray(tau2, float)) * (u1 - u2)
    out = np.exp(np.minimum(0.0, expo))
    return out if out.ndim else float(out)


def swap_probability(rate, policy: SwapPolicy):
    return np.clip(policy.intensity * policy.eta * np.asarray(rate, float), 0.0, 1.0)


def swap_decision(rate, policy: SwapPolicy, rng: RngStream) -> bool:
    """True with probability clamp(a * eta * rate, 0, 1); one uniform draw."""
    return bool(rng.uniform() < swap_probability(rate, policy))


def _advance_pair(state: ReplicaState, f: ObjectiveFunction, policy: SwapPolicy,
                  rng1: RngStream, rng2: RngStream, rng_swap: RngStream):
    """Shared step logic: returns (new_pos1, new_pos2, swap fired)."""
    pos1 = np.asarray(state.pos1, dtype=float)
    pos2 = np.asarray(state.pos2, dtype=float)
    if pos1.shape[-1] != f.dimension or pos2.shape[-1] != f.dimension:
        raise InputError(f"positions must have dimension {f.dimension}")
    # Swap rate uses the pre-update positions and the current temperatures.
    rate = swap_rate(f.eval(pos1), f.eval(pos2), state.temp1, state.temp2)
    xi1 = rng1.normal(pos1.shape)
    xi2 = rng2.normal(pos2.shape)
    new1 = em_update(pos1, f.grad(pos1), state.temp1, policy.eta, xi1)
    new2 = em_update(pos2, f.grad(pos2), state.temp2, policy.eta, xi2)
    check_finite(new1, state.iteration + 1)
    check_finite(new2, state.iteration + 1)
    return new1, new2, swap_decision(rate, policy, rng_swap)


def replica_step(state: ReplicaState, f: ObjectiveFunction, policy: SwapPolicy,
                 rng1: RngStream, rng2: RngStream, rng_swap: RngStream) -> ReplicaState:
    """Temperature-swapping step: positions advance, temperatures may trade."""
    new1, new2, fired = _advance_pair(state, f, policy, rng1, rng2, rng_swap)
    t1, t2 = (state.temp2, state.temp1) if fired else (state.temp1, state.temp2)
    return ReplicaState(new1, new2, t1, t2,
                        iteration=state.iteration + 1,
                        swap_count=state.swap_count + int(fired))


def position_swap_step(state: ReplicaState, f: ObjectiveFunction, policy: SwapPolicy,
                       rng1: RngStream, rng2: RngStream, rng_swap: RngStream) -> ReplicaState:
    """Position-swapping step: temperatures stay put, positions may trade."""
    new1, new2, fired = _advance_pair(state, f, policy, rng1, rng2, rng_swap)
    if fired:
        new1, new2 = new2, new1
    return ReplicaState(new1, new2, state.temp1, state.temp2,
                        iteration=state.iteration + 1,
                        swap_count=state.swap_count + int(fired))


def low_temperature_position(state: ReplicaState) -> np.ndarray:
    """The optimization iterate: the particle currently at the lower temperature."""
    return state.pos1 if state.temp1 <= state.temp2 else state.pos2


def run_pair_ensemble(pos1, pos2, f: ObjectiveFunction, tau1: float, tau2: float,
                      policy: SwapPolicy, steps: int,
                      rng1: RngStream, rng2: RngStream, rng_swap: RngStream,
                      mode: str = "temperature", snapshot_steps=()):
    """Run n independent replica pairs in lockstep.

    ``pos1``/``pos2`` have shape (n, d). In "position" mode slot 1 always
    carries tau1 and snapshots record (pos1, pos2) directly; in "temperature"
    mode snapshots record (low-temp position, high-temp position) so both
    modes report the same pair coordinates. Returns
    (snapshots dict, final low-temp positions, swap counts).
    """
    if mode not in ("temperature", "position"):
        raise InputError(f"unknown pair mode {mode!r}")
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")
    p1 = np.array(pos1, dtype=float)
    p2 = np.array(pos2, dtype=float)
    n = p1.shape[0]
    t1 = np.full(n, float(tau1))
    t2 = np.full(n, float(tau2))
    swap_counts = np.zeros(n, dtype=int)
    wanted = set(int(s) for s in snapshot_steps)
    snaps = {}

    def low_high():
        low_is_1 = (t1 <= t2)[:, None]
        return np.where(low_is_1, p1, p2), np.where(low_is_1, p2, p1)

    for k in range(1, steps + 1):
        rate = swap_rate(f.eval(p1), f.eval(p2), t1, t2)
        xi1 = rng1.normal(p1.shape)
        xi2 = rng2.normal(p2.shape)
        p1 = em_update(p1, f.grad(p1), t1, policy.eta, xi1)
        p2 = em_update(p2, f.grad(p2), t2, policy.eta, xi2)
        check_finite(p1, k)
        check_finite(p2, k)
        fire = rng_swap.uniform(n) < swap_probability(rate, policy)
        if mode == "temperature":
            t1, t2 = np.where(fire, t2, t1), np.where(fire, t1, t2)
        else:
            fire_col = fire[:, None]
            p1, p2 = np.where(fire_col, p2, p1), np.where(fire_col, p1, p2)
        swap_counts += fire
        if k in wanted:
            lo, hi = low_high()
            snaps[k] = (lo.copy(), hi.copy())
    low, _ = low_high()
    return snaps, low, swap_counts
