"""Physical configuration, wall trajectory, mode frequencies and coupling coefficients.

Everything is expressed in dimensionless units with hbar = c = 1 and lengths
measured in units of the equilibrium cavity size ``l0`` (kept as an explicit
field but pinned to 1). Mode indices are 1-based throughout, matching the
quantum numbers they represent; array storage is 0-based with mode ``n``
living at index ``n - 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SimulationConfig",
    "Cavity3DSpec",
    "CouplingCoefficients",
    "SinusoidalWall",
    "wall_position",
    "wall_velocity",
    "omega_static",
    "omega_static_array",
    "omega_instant",
    "omega_instant_array",
    "resonant_omega",
    "kpar_from_cavity",
    "mass_from_aspect",
    "aspect_from_mass",
    "coupling_m_matrix",
    "m_matrix_base",
    "m_matrix_dot",
    "coupling_c",
    "coupling_a",
    "coupling_coefficients",
    "c_matrix_bases",
]

INTEGRATORS = ("dop853", "rkf45")


@dataclass(frozen=True)
class SinusoidalWall:
    """Prescribed wall motion l(t) = l0 * (1 + epsilon * sin(omega * t)).

    Position and velocity form an analytic pair; the velocity is the exact
    derivative, never a finite difference. Other trajectory shapes can be
    added with the same two-method surface.
    """

    l0: float
    epsilon: float
    omega: float

    def position(self, t):
        return self.l0 * (1.0 + self.epsilon * np.sin(self.omega * t))

    def velocity(self, t):
        return self.l0 * self.epsilon * self.omega * np.cos(self.omega * t)

    def acceleration(self, t):
        return -self.l0 * self.epsilon * self.omega ** 2 * np.sin(self.omega * t)


@dataclass(frozen=True)
class SimulationConfig:
    """Run parameters for one evolution of the truncated mode system.

    Attributes
    ----------
    epsilon : dimensionless oscillation amplitude, 0 < epsilon < 0.1.
    omega : wall angular frequency in units 1/l0.
    mass : dimensionless mass parameter M = l0 * k_par >= 0.
    kmax : mode cutoff K >= 1 (number of retained modes).
    t_max : final time in units l0.
    sample_dt : output sampling interval in units l0.
    err : relative and absolute tolerance handed to the integrator.
    l0 : equilibrium cavity length; the unit convention pins it to 1.
    method : integrator pair, "dop853" (8th order, default) or "rkf45".
    """

    epsilon: float
    omega: float
    mass: float = 0.0
    kmax: int = 20
    t_max: float = 100.0
    sample_dt: float = 1.0
    err: float = 1e-10
    l0: float = 1.0
    method: str = "dop853"

    def __post_init__(self):
        if self.l0 != 1.0:
            raise ValueError(f"l0 is fixed to 1 by the unit convention, got {self.l0}")
        if not 0.0 <= self.epsilon < 0.1:
            raise ValueError(f"epsilon must satisfy 0 <= epsilon < 0.1, got {self.epsilon}")
        if self.epsilon > 0.01:
            warnings.warn(
                f"epsilon = {self.epsilon} is large; analytic small-amplitude "
                "comparisons assume epsilon <~ 0.01",
                stacklevel=2,
            )
        if self.mass < 0.0:
            raise ValueError(f"mass must be >= 0, got {self.mass}")
        if self.kmax < 1:
            raise ValueError(f"kmax must be >= 1, got {self.kmax}")
        if self.t_max <= 0.0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if self.sample_dt <= 0.0:
            raise ValueError(f"sample_dt must be > 0, got {self.sample_dt}")
        if self.err <= 0.0:
            raise ValueError(f"err must be > 0, got {self.err}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.method not in INTEGRATORS:
            raise ValueError(f"method must be one of {INTEGRATORS}, got {self.method!r}")

    @property
    def trajectory(self) -> SinusoidalWall:
        return SinusoidalWall(self.l0, self.epsilon, self.omega)

    @property
    def period(self) -> float:
        """Period of the wall oscillation, 2*pi/omega."""
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class Cavity3DSpec:
    """Transverse geometry of the equivalent three-dimensional rectangular cavity.

    ly, lz are the non-dynamical edge lengths in units of l0; ny, nz the
    transverse quantum numbers of the mode family under study.
    """

    ly: float
    lz: float
    ny: int = 1
    nz: int = 1

    def __post_init__(self):
        if self.ly <= 0.0 or self.lz <= 0.0:
            raise ValueError(f"ly, lz must be > 0, got ly={self.ly}, lz={self.lz}")
        if self.ny < 1 or self.nz < 1:
            raise ValueError(f"ny, nz must be >= 1, got ny={self.ny}, nz={self.nz}")


@dataclass(frozen=True)
class CouplingCoefficients:
    """Snapshot of all coefficients entering the first-order evolution equations.

    a_plus/a_minus are the diagonal frequency terms (length K), c_plus/c_minus
    the K x K intermode coupling matrices; entry [i, j] couples the evolution
    of mode i+1 to mode j+1, with an exactly zero diagonal.
    """

    a_plus: np.ndarray
    a_minus: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray


def wall_position(t, cfg: SimulationConfig):
    """Wall coordinate l(t) = l0 * (1 + epsilon * sin(omega * t))."""
    return cfg.trajectory.position(t)


def wall_velocity(t, cfg: SimulationConfig):
    """Exact analytic wall velocity l0 * epsilon * omega * cos(omega * t)."""
    return cfg.trajectory.velocity(t)


def omega_static(n: int, cfg: SimulationConfig) -> float:
    """Static-cavity frequency of mode n: sqrt((n*pi)^2 + M^2) / l0."""
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    return math.sqrt((n * math.pi) ** 2 + cfg.mass ** 2) / cfg.l0


def omega_static_array(cfg: SimulationConfig) -> np.ndarray:
    """Static frequencies of modes 1..K as an array."""
    n = np.arange(1, cfg.kmax + 1, dtype=float)
    return np.sqrt((n * np.pi) ** 2 + cfg.mass ** 2) / cfg.l0


def omega_instant(n: int, t, cfg: SimulationConfig):
    """Instantaneous frequency sqrt((n*pi/l(t))^2 + (M/l0)^2) of mode n."""
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    l = wall_position(t, cfg)
    return np.sqrt((n * np.pi / l) ** 2 + (cfg.mass / cfg.l0) ** 2)


def omega_instant_array(t: float, cfg: SimulationConfig) -> np.ndarray:
    """Instantaneous frequencies of modes 1..K at time t."""
    l = wall_position(t, cfg)
    n = np.arange(1, cfg.kmax + 1, dtype=float)
    return np.sqrt((n * np.pi / l) ** 2 + (cfg.mass / cfg.l0) ** 2)


def resonant_omega(n: int, mass: float, l0: float = 1.0) -> float:
    """Wall frequency 2 * Omega_n^0 driving the principal resonance of mode n."""
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    return 2.0 * math.sqrt((n * math.pi) ** 2 + mass ** 2) / l0


def kpar_from_cavity(spec: Cavity3DSpec) -> float:
    """Transverse wavenumber k_par = pi * sqrt((ny/ly)^2 + (nz/lz)^2)."""
    return math.pi * math.hypot(spec.ny / spec.ly, spec.nz / spec.lz)


def mass_from_aspect(ell: float, n_par: int = 1) -> float:
    """Mass parameter of a square-section cavity with aspect ratio ell = l_par/l0.

    Equal transverse sizes and equal transverse quantum numbers n_par give
    M = sqrt(2) * n_par * pi / ell.
    """
    if ell <= 0.0:
        raise ValueError(f"aspect ratio must be > 0, got {ell}")
    if n_par < 1:
        raise ValueError(f"n_par must be >= 1, got {n_par}")
    return math.sqrt(2.0) * n_par * math.pi / ell


def aspect_from_mass(mass: float, n_par: int = 1) -> float:
    """Inverse of mass_from_aspect: ell = sqrt(2) * n_par * pi / M."""
    if mass <= 0.0:
        raise ValueError(f"mass must be > 0, got {mass}")
    if n_par < 1:
        raise ValueError(f"n_par must be >= 1, got {n_par}")
    return math.sqrt(2.0) * n_par * math.pi / mass


def coupling_m_matrix(n: int, k: int, t, cfg: SimulationConfig):
    """Velocity coupling matrix element M_nk(t).

    Zero on the diagonal by an explicit branch; off the diagonal
    (ldot/l) * (-1)^(n+k) * 2nk / (k^2 - n^2). Antisymmetric in (n, k).
    """
    if n < 1 or k < 1:
        raise ValueError(f"mode indices must be >= 1, got n={n}, k={k}")
    if n == k:
        return 0.0
    v = wall_velocity(t, cfg) / wall_position(t, cfg)
    return v * (-1.0) ** (n + k) * 2.0 * n * k / (k * k - n * n)


def m_matrix_base(kmax: int) -> np.ndarray:
    """Time-independent factor G of the coupling matrix, M_nk(t) = (ldot/l) * G[n-1, k-1].

    G[i, j] = (-1)^(n+k) * 2nk / (k^2 - n^2) with n = i+1, k = j+1 and an
    exactly zero diagonal (never evaluated from the singular formula).
    """
    n = np.arange(1, kmax + 1, dtype=float)
    nn = n[:, None]
    kk = n[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (-1.0) ** (nn + kk) * 2.0 * nn * kk / (kk * kk - nn * nn)
    np.fill_diagonal(g, 0.0)
    return g


def m_matrix_dot(n: int, k: int, t, cfg: SimulationConfig):
    """Exact time derivative of M_nk(t), via d/dt(ldot/l) = lddot/l - (ldot/l)^2."""
    if n == k:
        return 0.0
    traj = cfg.trajectory
    l = traj.position(t)
    v = traj.velocity(t) / l
    a = traj.acceleration(t) / l - v * v
    return a * (-1.0) ** (n + k) * 2.0 * n * k / (k * k - n * n)


def coupling_c(n: int, k: int, t, cfg: SimulationConfig):
    """Pair (c+_kn, c-_kn) of first-order coupling coefficients.

    Closed form -(ldot/l) * (-1)^(k+n) * kn/(n^2-k^2) * [1 -/+ Omega_n^0/Omega_k^0]
    for n != k, exactly (0, 0) on the diagonal and for a resting wall.
    """
    if n < 1 or k < 1:
        raise ValueError(f"mode indices must be >= 1, got n={n}, k={k}")
    if n == k:
        return 0.0, 0.0
    v = wall_velocity(t, cfg) / wall_position(t, cfg)
    ratio = omega_static(n, cfg) / omega_static(k, cfg)
    base = -v * (-1.0) ** (k + n) * k * n / (n * n - k * k)
    return base * (1.0 - ratio), base * (1.0 + ratio)


def coupling_a(n: int, t, cfg: SimulationConfig):
    """Pair (a+_nn, a-_nn) = (Omega_n^0 / 2) * (1 +/- [Omega_n(t)/Omega_n^0]^2).

    The pair satisfies a+ + a- = Omega_n^0 and a+ - a- = Omega_n(t)^2/Omega_n^0.
    """
    om0 = omega_static(n, cfg)
    r2 = (omega_instant(n, t, cfg) / om0) ** 2
    return 0.5 * om0 * (1.0 + r2), 0.5 * om0 * (1.0 - r2)


def c_matrix_bases(cfg: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Constant matrices (Cb+, Cb-) with c+-_kn(t) = (ldot/l) * Cb+-[k-1, n-1].

    The wall velocity enters the coupling only through the scalar ldot/l, so
    the full matrices factorize; the evolution hot path reuses these bases.
    """
    om0 = omega_static_array(cfg)
    idx = np.arange(1, cfg.kmax + 1, dtype=float)
    kk = idx[:, None]
    nn = idx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        base = -((-1.0) ** (kk + nn)) * kk * nn / (nn * nn - kk * kk)
    np.fill_diagonal(base, 0.0)
    ratio = om0[None, :] / om0[:, None]
    c_plus = base * (1.0 - ratio)
    c_minus = base * (1.0 + ratio)
    np.fill_diagonal(c_plus, 0.0)
    np.fill_diagonal(c_minus, 0.0)
    return c_plus, c_minus


def coupling_coefficients(t: float, cfg: SimulationConfig) -> CouplingCoefficients:
    """All coupling coefficients of the truncated system at time t."""
    om0 = omega_static_array(cfg)
    om_t = omega_instant_array(t, cfg)
    r2 = (om_t / om0) ** 2
    a_plus = 0.5 * om0 * (1.0 + r2)
    a_minus = 0.5 * om0 * (1.0 - r2)
    cb_plus, cb_minus = c_matrix_bases(cfg)
    v = wall_velocity(t, cfg) / wall_position(t, cfg)
    return CouplingCoefficients(a_plus, a_minus, v * cb_plus, v * cb_minus)
