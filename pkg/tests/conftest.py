"""Shared problem builders for the test suite."""

import numpy as np
import pytest

from lagrom.core import DIRICHLET_ZERO, PERIODIC, ProblemSpec
from lagrom.presets import (
    burgers_flux,
    burgers_speed,
    constant_diffusion,
    constant_speed_flux,
    gaussian_pulse,
    one_plus_sin,
)


def make_spec(
    speed="const",
    c=1.0,
    diffusion=None,
    n=200,
    m_steps=100,
    t_final=1.0,
    bc=DIRICHLET_ZERO,
    ic=None,
):
    """Small advection-diffusion problem with preset-style ingredients."""
    if speed == "burgers":
        f, flux = burgers_speed, burgers_flux
        lo, hi = 0.0, 2.0 * np.pi
        ic = ic or one_plus_sin
    else:
        f, flux = constant_speed_flux(c)
        lo, hi = 0.0, 2.0
        ic = ic or gaussian_pulse
    return ProblemSpec(
        domain_lo=lo,
        domain_hi=hi,
        n_cells=n,
        n_steps=m_steps,
        t_final=t_final,
        flux_f=f,
        flux_F=flux,
        diffusion_D=None if diffusion is None else constant_diffusion(diffusion),
        initial_u0=ic,
        bc=bc,
    )


@pytest.fixture
def advection_spec():
    return make_spec(speed="const", c=1.0, n=200, m_steps=100)


@pytest.fixture
def burgers_spec():
    return make_spec(speed="burgers", n=200, m_steps=100, bc=PERIODIC)


@pytest.fixture
def viscous_burgers_spec():
    return make_spec(speed="burgers", diffusion=0.1, n=200, m_steps=100, bc=PERIODIC)
