"""Photon creation from vacuum in a resonantly vibrating cavity.

Simulates a massive scalar field on an oscillating interval (equivalently,
TE-mode photons of a three-dimensional rectangular cavity with one vibrating
wall): integrates the truncated coupled mode equations, extracts Bogoliubov
coefficients and particle spectra, and analyses the intermode coupling
structure.
"""

from .model import (
    Cavity3DSpec,
    CouplingCoefficients,
    SimulationConfig,
    SinusoidalWall,
    aspect_from_mass,
    coupling_a,
    coupling_c,
    coupling_coefficients,
    coupling_m_matrix,
    kpar_from_cavity,
    mass_from_aspect,
    omega_instant,
    omega_static,
    resonant_omega,
    wall_position,
    wall_velocity,
)
from .evolution import (
    EvolutionRecord,
    EvolutionState,
    IntegrationFailure,
    apply_w,
    assemble_w,
    evolve,
    initial_state_matrix,
    second_order_oracle,
)
from .bogoliubov import (
    BogoliubovMatrices,
    ParticleSpectrum,
    ShapeMismatch,
    bogoliubov_from_state,
    bogoliubov_residuals,
    delta_pm,
    particle_numbers,
    particle_numbers_period_reduced,
    particle_spectrum,
    residual_series,
)
from .analysis import (
    CouplingGraph,
    CouplingLink,
    MassSweepResult,
    NoSolution,
    convergence_check,
    coupling_scan,
    exact_coupling_mass,
    exact_coupling_partner,
    mass_sweep,
    sinh_prediction,
)

__version__ = "0.1.0"
