"""Tests for the Euler-Maruyama integrator."""

import numpy as np
import pytest

from relex.errors import DivergenceError, InputError
from relex.langevin import (ChainState, em_update, langevin_step, run_chain,
                            run_ensemble)
from relex.objective import double_well, quadratic, zero_potential
from relex.rng import PURPOSE_POS1, derive_stream


class TestEmUpdate:
    def test_formula(self):
        pos = np.array([1.0, -2.0])
        grad = np.array([0.5, 0.5])
        xi = np.array([1.0, -1.0])
        out = em_update(pos, grad, temperature=2.0, eta=0.1, xi=xi)
        expected = pos - 0.1 * grad + np.sqrt(2 * 0.1 * 2.0) * xi
        assert np.allclose(out, expected)

    def test_zero_temperature_is_gradient_descent(self):
        pos = np.array([1.0, 1.0])
        out = em_update(pos, pos, temperature=0.0, eta=0.25, xi=np.ones(2))
        assert np.allclose(out, 0.75 * pos)

    def test_per_chain_temperature_broadcast(self):
        pos = np.zeros((3, 2))
        xi = np.ones((3, 2))
        temps = np.array([0.0, 0.5, 2.0])
        out = em_update(pos, np.zeros_like(pos), temps, eta=0.1, xi=xi)
        assert np.allclose(out[:, 0], np.sqrt(2 * 0.1 * temps))
        assert np.allclose(out[:, 1], np.sqrt(2 * 0.1 * temps))


class TestLangevinStep:
    def test_noise_replay_reproduces_step(self):
        f = quadratic(2)
        state = ChainState(np.array([1.0, 2.0]), temperature=0.5)
        rng = derive_stream(0, PURPOSE_POS1)
        new = langevin_step(state, f, eta=0.01, rng=rng)
        assert rng.counter == 2   # exactly d draws

        replay = derive_stream(0, PURPOSE_POS1).normal((2,))
        expected = em_update(state.position, f.grad(state.position), 0.5,
                             0.01, replay)
        assert np.array_equal(new.position, expected)
        assert new.iteration == 1

    def test_zero_temperature_descends_deterministically(self):
        f = quadratic(2)   # grad = x, so x <- (1 - eta) x
        state = ChainState(np.array([4.0, -4.0]), temperature=0.0)
        rng = derive_stream(1, PURPOSE_POS1)
        for _ in range(200):
            state = langevin_step(state, f, eta=0.1, rng=rng)
        assert np.all(np.abs(state.position) < 1e-8)

    def test_invalid_inputs(self):
        f = quadratic(2)
        rng = derive_stream(0, PURPOSE_POS1)
        with pytest.raises(InputError):
            langevin_step(ChainState(np.zeros(2), 1.0), f, eta=0.0, rng=rng)
        with pytest.raises(InputError):
            langevin_step(ChainState(np.zeros(2), -1.0), f, eta=0.1, rng=rng)
        with pytest.raises(InputError):
            langevin_step(ChainState(np.zeros(3), 1.0), f, eta=0.1, rng=rng)

    def test_divergence_detected(self):
        f = quadratic(1)   # x <- (1 - eta) x diverges for eta > 2
        state = ChainState(np.array([1.0]), temperature=0.0)
        rng = derive_stream(0, PURPOSE_POS1)
        with pytest.raises(DivergenceError) as err:
            for _ in range(1000):
                state = langevin_step(state, f, eta=3.0, rng=rng)
        assert err.value.iteration is not None


class TestRunChain:
    def test_trace_length_and_stride(self):
        f = double_well()
        trace = run_chain(np.array([0.5]), f, tau=0.5, eta=0.01, steps=100,
                          rng=derive_stream(2, PURPOSE_POS1), stride=10)
        assert len(trace) == 11
        assert trace.iterations[0] == 0 and trace.iterations[-1] == 100
        assert np.isclose(trace.values[0], f.eval(np.array([0.5])))

    def test_stride_must_divide_steps(self):
        f = double_well()
        with pytest.raises(InputError):
            run_chain(np.array([0.0]), f, 0.5, 0.01, steps=100,
                      rng=derive_stream(0, PURPOSE_POS1), stride=7)

    def test_reproducible(self):
        f = double_well()
        t1 = run_chain(np.array([0.0]), f, 0.5, 0.01, 50,
                       derive_stream(3, PURPOSE_POS1))
        t2 = run_chain(np.array([0.0]), f, 0.5, 0.01, 50,
                       derive_stream(3, PURPOSE_POS1))
        assert np.array_equal(t1.positions, t2.positions)


class TestRunEnsemble:
    def test_shapes_and_snapshots(self):
        f = quadratic(2)
        init = np.zeros((8, 2))
        final, snaps = run_ensemble(init, f, 1.0, 0.05, 40,
                                    derive_stream(4, PURPOSE_POS1),
                                    snapshot_steps=(10, 40))
        assert final.shape == (8, 2)
        assert set(snaps) == {10, 40}
        assert np.array_equal(snaps[40], final)

    def test_stationary_second_moment_matches_ou_oracle(self):
        # For U = ||x||^2 / 2 the chain is AR(1): x <- (1 - eta) x + noise,
        # stationary variance 2 eta tau / (1 - (1 - eta)^2) per coordinate.
        f = quadratic(1)
        eta, tau = 0.1, 1.0
        oracle = 2 * eta * tau / (1.0 - (1.0 - eta) ** 2)
        final, _ = run_ensemble(np.zeros((4000, 1)), f, tau, eta, 2000,
                                derive_stream(5, PURPOSE_POS1))
        assert np.isclose(np.mean(final ** 2), oracle, rtol=0.1)

    def test_flat_potential_is_pure_diffusion(self):
        f = zero_potential(1)
        eta, tau, steps = 0.01, 1.0, 500
        final, _ = run_ensemble(np.zeros((4000, 1)), f, tau, eta, steps,
                                derive_stream(6, PURPOSE_POS1))
        assert np.isclose(np.mean(final ** 2), 2 * tau * eta * steps, rtol=0.1)

    def test_bad_init_shape(self):
        with pytest.raises(InputError):
            run_ensemble(np.zeros((4, 3)), quadratic(2), 1.0, 0.1, 10,
                         derive_stream(0, PURPOSE_POS1))
