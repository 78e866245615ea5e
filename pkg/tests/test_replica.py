"""Tests for the swap rate and the replica-pair steppers."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relex.errors import InputError
from relex.objective import double_well, quadratic, zero_potential
from relex.replica import (ReplicaState, SwapPolicy, low_temperature_position,
                           position_swap_step, replica_step, run_pair_ensemble,
                           swap_decision, swap_probability, swap_rate)
from relex.rng import PURPOSE_POS1, PURPOSE_POS2, PURPOSE_SWAP, derive_stream

# ranges chosen so exp(min(0, delta)) never underflows to an exact zero
values = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
temps = st.floats(min_value=0.05, max_value=5.0, allow_nan=False)


class TestSwapRate:
    @given(values, values, temps, temps)
    def test_range(self, u1, u2, t1, t2):
        s = swap_rate(u1, u2, t1, t2)
        assert 0.0 < s <= 1.0

    @given(values, temps, temps)
    def test_equal_values_give_one(self, u, t1, t2):
        assert swap_rate(u, u, t1, t2) == 1.0

    @given(values, values, temps)
    def test_equal_temperatures_give_one(self, u1, u2, t):
        assert swap_rate(u1, u2, t, t) == 1.0

    @given(values, values, values, temps, temps)
    def test_monotone_in_first_value(self, u1a, u1b, u2, t1, t2):
        # with tau1 < tau2 the rate is nondecreasing in u1
        lo, hi = sorted((t1, t2))
        if lo == hi:
            return
        ua, ub = sorted((u1a, u1b))
        assert swap_rate(ua, u2, lo, hi) <= swap_rate(ub, u2, lo, hi)

    @given(values, values, temps, temps)
    def test_detailed_balance(self, u1, u2, t1, t2):
        # s(x1,x2) mu(x1,x2) = s(x2,x1) mu(x2,x1) in log space
        s12 = swap_rate(u1, u2, t1, t2)
        s21 = swap_rate(u2, u1, t1, t2)
        lhs = np.log(s12) + (-u1 / t1 - u2 / t2)
        rhs = np.log(s21) + (-u2 / t1 - u1 / t2)
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))

    def test_vectorized(self):
        u1 = np.array([0.0, -1.0, -2.0])
        u2 = np.array([0.0, 0.0, 0.0])
        s = swap_rate(u1, u2, 0.1, 1.0)
        assert s.shape == (3,)
        assert s[0] == 1.0 and np.all(np.diff(s) < 0)

    def test_invalid_inputs(self):
        with pytest.raises(InputError):
            swap_rate(np.nan, 0.0, 0.1, 1.0)
        with pytest.raises(InputError):
            swap_rate(0.0, 0.0, -0.1, 1.0)
        with pytest.raises(InputError):
            swap_rate(0.0, 0.0, 0.1, 0.0)


class TestSwapPolicy:
    def test_validation(self):
        with pytest.raises(InputError):
            SwapPolicy(intensity=-1.0, eta=0.01)
        with pytest.raises(InputError):
            SwapPolicy(intensity=1.0, eta=0.0)

    def test_clamp_warning(self):
        with pytest.warns(RuntimeWarning):
            policy = SwapPolicy(intensity=2.0, eta=1.0)
        assert swap_probability(1.0, policy) == 1.0

    def test_probability_clamped_to_unit_interval(self):
        policy = SwapPolicy(intensity=5.0, eta=0.1)
        assert swap_probability(0.0, policy) == 0.0
        assert swap_probability(1.0, policy) == 0.5
        assert 0.0 <= swap_probability(1.0, SwapPolicy(5.0, 0.001)) <= 1.0

    def test_zero_intensity_never_swaps(self):
        policy = SwapPolicy(intensity=0.0, eta=0.01)
        rng = derive_stream(0, PURPOSE_SWAP)
        assert not any(swap_decision(1.0, policy, rng) for _ in range(1000))


class TestSteppers:
    def _streams(self, seed):
        return (derive_stream(seed, PURPOSE_POS1),
                derive_stream(seed, PURPOSE_POS2),
                derive_stream(seed, PURPOSE_SWAP))

    def test_certain_swap_exchanges_temperatures(self):
        # flat potential: s = 1; intensity * eta = 1 clamps probability to 1
        f = zero_potential(1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            policy = SwapPolicy(intensity=100.0, eta=0.01)
        state = ReplicaState(np.zeros(1), np.ones(1), temp1=0.1, temp2=1.0)
        new = replica_step(state, f, policy, *self._streams(0))
        assert (new.temp1, new.temp2) == (1.0, 0.1)
        assert new.swap_count == 1

    def test_formulations_move_the_same_coordinates(self):
        # with identical streams the two formulations produce the same pair of
        # post-step positions, just labeled differently
        f = double_well()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            policy = SwapPolicy(intensity=100.0, eta=0.01)   # certain swap
        state = ReplicaState(np.array([1.0]), np.array([-1.0]), 0.1, 1.0)
        t_new = replica_step(state, f, policy, *self._streams(1))
        p_new = position_swap_step(state, f, policy, *self._streams(1))
        assert np.array_equal(t_new.pos1, p_new.pos2)
        assert np.array_equal(t_new.pos2, p_new.pos1)
        assert np.array_equal(low_temperature_position(t_new),
                              low_temperature_position(p_new))

    def test_low_temperature_position_tracks_swaps(self):
        state = ReplicaState(np.array([1.0]), np.array([2.0]), 0.1, 1.0)
        assert np.array_equal(low_temperature_position(state), state.pos1)
        swapped = ReplicaState(state.pos1, state.pos2, 1.0, 0.1)
        assert np.array_equal(low_temperature_position(swapped), swapped.pos2)

    def test_dimension_mismatch(self):
        f = quadratic(2)
        state = ReplicaState(np.zeros(3), np.zeros(3), 0.1, 1.0)
        with pytest.raises(InputError):
            replica_step(state, f, SwapPolicy(1.0, 0.01), *self._streams(0))


class TestPairEnsemble:
    def test_zero_intensity_counts_no_swaps(self):
        f = double_well()
        n = 16
        snaps, low, counts = run_pair_ensemble(
            np.ones((n, 1)), -np.ones((n, 1)), f, 0.1, 1.0,
            SwapPolicy(0.0, 0.01), 200,
            derive_stream(0, PURPOSE_POS1), derive_stream(0, PURPOSE_POS2),
            derive_stream(0, PURPOSE_SWAP))
        assert counts.sum() == 0
        assert low.shape == (n, 1)

    def test_snapshots_ordered_low_then_high(self):
        # flat potential with certain swaps: temperatures trade every step,
        # yet snapshots stay keyed by temperature
        f = zero_potential(1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            policy = SwapPolicy(intensity=100.0, eta=0.01)
        for mode in ("temperature", "position"):
            snaps, low, counts = run_pair_ensemble(
                np.zeros((8, 1)), np.zeros((8, 1)), f, 0.1, 1.0, policy, 10,
                derive_stream(1, PURPOSE_POS1), derive_stream(1, PURPOSE_POS2),
                derive_stream(1, PURPOSE_SWAP), mode=mode,
                snapshot_steps=(10,))
            assert np.array_equal(snaps[10][0], low)
            assert np.all(counts == 10)

    def test_invalid_mode_and_steps(self):
        f = double_well()
        args = (np.ones((2, 1)), -np.ones((2, 1)), f, 0.1, 1.0,
                SwapPolicy(1.0, 0.01))
        streams = (derive_stream(0, PURPOSE_POS1),
                   derive_stream(0, PURPOSE_POS2),
                   derive_stream(0, PURPOSE_SWAP))
        with pytest.raises(InputError):
            run_pair_ensemble(*args, 10, *streams, mode="bogus")
        with pytest.raises(InputError):
            run_pair_ensemble(*args, 0, *streams)
