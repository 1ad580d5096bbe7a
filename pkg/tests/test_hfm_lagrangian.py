"""Semi-Lagrangian solver: exact transport, trapezoid update, entanglement."""

import numpy as np
import pytest

from lagrom.core import PERIODIC
from lagrom.errors import GridEntanglement
from lagrom.hfm_eulerian import run_eulerian_hfm
from lagrom.hfm_lagrangian import (
    LagrangianState,
    advance_lagrangian,
    initial_lagrangian_state,
    run_lagrangian_hfm,
)
from lagrom.presets import gaussian_pulse, one_plus_sin

from conftest import make_spec


class TestSingleStep:
    def test_constant_speed_shifts_positions_and_freezes_values(self):
        spec = make_spec(speed="const", c=0.8, n=64, m_steps=50)
        state = initial_lagrangian_state(spec)
        out = advance_lagrangian(state, spec)
        assert np.array_equal(out.values, state.values)  # transported bit-exactly
        assert np.allclose(out.positions.nodes, state.positions.nodes + 0.8 * spec.dt, atol=1e-15)

    def test_burgers_first_step_increment(self):
        # Without diffusion the carried values are frozen, so the trapezoidal
        # update degenerates to dt * f(u0).
        spec = make_spec(speed="burgers", bc=PERIODIC, n=128, m_steps=100)
        state = initial_lagrangian_state(spec)
        out = advance_lagrangian(state, spec)
        expected = state.positions.nodes + spec.dt * one_plus_sin(state.positions.nodes)
        assert np.allclose(out.positions.nodes, expected, atol=1e-15)

    def test_trapezoid_consistency(self):
        spec = make_spec(speed="burgers", diffusion=0.1, bc=PERIODIC, n=100, m_steps=100)
        state = initial_lagrangian_state(spec)
        for _ in range(5):
            new = advance_lagrangian(state, spec)
            f_old = state.values  # f(u) = u for Burgers
            f_new = new.values
            recon = state.positions.nodes + 0.5 * spec.dt * (f_old + f_new)
            assert np.max(np.abs(new.positions.nodes - recon)) <= 1e-12
            state = new

    def test_entanglement_detected_with_time_index(self):
        # A steep decreasing velocity profile crosses characteristics within
        # one step of this size.
        spec = make_spec(speed="burgers", bc=PERIODIC, n=16, m_steps=2, t_final=1.0)
        grid = spec.grid()
        u = -3.0 * np.sin(grid.nodes)
        state = LagrangianState(grid, u, grid, 0)
        with pytest.raises(GridEntanglement) as err:
            advance_lagrangian(state, spec)
        assert err.value.time_index == 1


class TestDiffusionSubsteps:
    def test_constant_advection_with_diffusion_matches_split_oracle(self):
        # For f = 1 the moving frame rigidly translates, so the carried values
        # must match a diffusion-only fixed-grid solve of the same data. The
        # tolerance covers the accumulated interpolation error, bounded by
        # steps * dx^2/8 * max|u''| plus the splitting error.
        n, steps = 400, 20
        lagr_spec = make_spec(speed="const", c=1.0, diffusion=0.01, n=n, m_steps=100)
        diff_spec = make_spec(speed="const", c=0.0, diffusion=0.01, n=n, m_steps=100)
        state = initial_lagrangian_state(lagr_spec)
        for _ in range(steps):
            state = advance_lagrangian(state, lagr_spec)
        oracle = run_eulerian_hfm(diff_spec, steps).trajectory[:, steps]
        dx = lagr_spec.dx
        u0 = gaussian_pulse(state.eulerian_grid.nodes)
        curvature = np.max(np.abs(np.diff(u0, 2))) / dx**2
        tol = steps * (dx**2 / 8.0) * curvature + 5e-4
        assert np.max(np.abs(state.values - oracle)) <= tol

    def test_explicit_zero_diffusion_round_trip_order(self):
        # Passing an explicit zero coefficient forces the interpolation round
        # trips; the per-step smearing must vanish at second order in dx.
        errors = {}
        for n in (100, 200):
            spec = make_spec(speed="const", c=1.0, diffusion=0.0, n=n, m_steps=100)
            state = initial_lagrangian_state(spec)
            u0 = state.values.copy()
            for _ in range(10):
                state = advance_lagrangian(state, spec)
            errors[n] = np.max(np.abs(state.values - u0))
        order = np.log2(errors[100] / errors[200])
        assert order >= 1.8

    def test_none_diffusion_skips_round_trip_entirely(self):
        spec = make_spec(speed="const", c=1.0, n=100, m_steps=100)
        state = initial_lagrangian_state(spec)
        u0 = state.values
        for _ in range(10):
            state = advance_lagrangian(state, spec)
        assert np.array_equal(state.values, u0)


class TestRun:
    def test_single_snapshot_shape(self):
        spec = make_spec(speed="const", c=1.0, n=50, m_steps=10)
        run = run_lagrangian_hfm(spec, 1)
        assert run.snapshots.data.shape == (100, 1)
        col = run.snapshots.data[:, 0]
        assert np.array_equal(col[:50], run.positions[:, 1])
        assert np.array_equal(col[50:], run.values[:, 1])

    def test_pure_advection_values_bit_exact(self, advection_spec):
        run = run_lagrangian_hfm(advection_spec, 25)
        u0 = gaussian_pulse(run.eulerian_grid.nodes)
        for k in range(run.values.shape[1]):
            assert np.array_equal(run.values[:, k], u0)

    def test_burgers_untangled_over_full_horizon(self, burgers_spec):
        # Shock forms exactly at t = 1; discrete node spacing stays positive
        # throughout the integration window.
        run = run_lagrangian_hfm(burgers_spec, burgers_spec.n_steps)
        assert np.all(np.diff(run.positions, axis=0) > 0.0)

    def test_periodic_positions_stay_unwrapped(self, burgers_spec):
        run = run_lagrangian_hfm(burgers_spec, 10)
        # Rightmost characteristics advance past the domain end; snapshots
        # keep the monotone lift rather than wrapping.
        assert run.positions[:, -1].max() > burgers_spec.domain_hi

    def test_viscous_burgers_runs_and_damps(self, viscous_burgers_spec):
        run = run_lagrangian_hfm(viscous_burgers_spec, 25)
        spread0 = run.values[:, 0].max() - run.values[:, 0].min()
        spread1 = run.values[:, -1].max() - run.values[:, -1].min()
        assert spread1 < spread0
        assert run.wall_seconds > 0.0
