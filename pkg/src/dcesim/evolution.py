"""Time evolution of the truncated 4K-dimensional real first-order mode system.

Each initial-condition column m carries the real/imaginary split (u, x, v, y)
of the complex auxiliary functions; all K columns share the same linear
system and are integrated as one stacked state by default, in exact
``sample_dt`` segments with the integrator restarted at every sample point.
Columns can also be split into chunks and integrated in parallel processes.

``second_order_oracle`` integrates the equivalent second-order mode equation
with an independent solver (scipy) for cross-validation of the production
path.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrators import SEGMENT_KERNELS, STATUS_NONFINITE
from .model import (
    SimulationConfig,
    m_matrix_base,
    omega_static_array,
    wall_position,
    wall_velocity,
)

__all__ = [
    "IntegrationFailure",
    "EvolutionState",
    "EvolutionRecord",
    "initial_state_matrix",
    "assemble_w",
    "apply_w",
    "evolve",
    "second_order_oracle",
]


class IntegrationFailure(RuntimeError):
    """Adaptive step-size underflow or non-finite state during evolution."""

    def __init__(self, message: str, t: float, columns=None):
        super().__init__(message)
        self.t = t
        self.columns = tuple(columns) if columns is not None else None


@dataclass(frozen=True)
class EvolutionState:
    """State of one initial-condition column m at time t.

    u, x, v, y are the real/imaginary parts of the auxiliary functions per
    mode: xi_n = u_n + i v_n, eta_n = x_n + i y_n.
    """

    m: int
    t: float
    u: np.ndarray
    x: np.ndarray
    v: np.ndarray
    y: np.ndarray

    @property
    def xi(self) -> np.ndarray:
        return self.u + 1j * self.v

    @property
    def eta(self) -> np.ndarray:
        return self.x + 1j * self.y


@dataclass(frozen=True)
class EvolutionRecord:
    """Sampled evolution of all columns.

    data[i] is the (4K, K) state matrix at times[i]; block rows are
    (u, x, v, y), columns are the initial-excitation labels m = 1..K.
    """

    times: np.ndarray
    data: np.ndarray
    cfg: SimulationConfig

    def sample_index(self, t: float) -> int:
        """Index of the sample at time t (must lie on the grid)."""
        i = int(round(t / self.cfg.sample_dt))
        if i < 0 or i >= len(self.times) or abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not on the sample grid")
        return i

    def states_at(self, index: int) -> list[EvolutionState]:
        """All K column states at sample ``index``."""
        K = self.cfg.kmax
        S = self.data[index]
        t = float(self.times[index])
        return [
            EvolutionState(
                m=m + 1,
                t=t,
                u=S[0:K, m].copy(),
                x=S[K : 2 * K, m].copy(),
                v=S[2 * K : 3 * K, m].copy(),
                y=S[3 * K : 4 * K, m].copy(),
            )
            for m in range(K)
        ]

    def epsilon_functions(self, index: int) -> np.ndarray:
        """Complex mode functions (xi + eta) / 2 at a sample, indexed [n, m]."""
        K = self.cfg.kmax
        S = self.data[index]
        u, x, v, y = S[0:K], S[K : 2 * K], S[2 * K : 3 * K], S[3 * K : 4 * K]
        return 0.5 * ((u + x) + 1j * (v + y))


def initial_state_matrix(cfg: SimulationConfig) -> np.ndarray:
    """Vacuum initial conditions: u_n^(m)(0) = 2 delta_nm, all else zero."""
    K = cfg.kmax
    S = np.zeros((4 * K, K))
    S[0:K, 0:K] = 2.0 * np.eye(K)
    return S


def _coupling_base(cfg: SimulationConfig) -> np.ndarray:
    """Constant factor F with c+-_kn(t) = (ldot/l) * F[k-1,n-1] * (1 -+ ratio)."""
    return -0.5 * m_matrix_base(cfg.kmax)


def assemble_w(t: float, cfg: SimulationConfig) -> np.ndarray:
    """Dense 4K x 4K system matrix W(t) of the stacked real state."""
    from .model import coupling_coefficients

    co = coupling_coefficients(t, cfg)
    ap = np.diag(co.a_plus)
    am = np.diag(co.a_minus)
    cp = co.c_plus
    cm = co.c_minus
    return -np.block(
        [
            [cm, cp, -ap, am],
            [cp, cm, -am, ap],
            [ap, -am, cm, cp],
            [am, -ap, cp, cm],
        ]
    )


def apply_w(t: float, state: np.ndarray, cfg: SimulationConfig) -> np.ndarray:
    """Matrix-free product W(t) @ state for a (4K,) vector or (4K, C) matrix."""
    K = cfg.kmax
    squeeze = state.ndim == 1
    S = state.reshape(4 * K, -1)
    U, X, V, Y = S[0:K], S[K : 2 * K], S[2 * K : 3 * K], S[3 * K : 4 * K]

    om0 = omega_static_array(cfg)
    fmat = _coupling_base(cfg)
    l = wall_position(t, cfg)
    v = wall_velocity(t, cfg) / l
    om2 = (np.arange(1, K + 1) * np.pi / l) ** 2 + (cfg.mass / cfg.l0) ** 2
    ap = (0.5 * (om0 + om2 / om0))[:, None]
    am = (0.5 * (om0 - om2 / om0))[:, None]

    w = om0[:, None]
    p1 = fmat @ (U + X)
    p2 = (fmat @ (w * (U - X))) / w
    q1 = fmat @ (V + Y)
    q2 = (fmat @ (w * (V - Y))) / w

    out = np.empty_like(S)
    out[0:K] = -v * (p1 + p2) + ap * V - am * Y
    out[K : 2 * K] = -v * (p1 - p2) + am * V - ap * Y
    out[2 * K : 3 * K] = -ap * U + am * X - v * (q1 + q2)
    out[3 * K : 4 * K] = -am * U + ap * X - v * (q1 - q2)
    return out[:, 0] if squeeze else out


def sample_times(cfg: SimulationConfig) -> np.ndarray:
    """Output grid 0, dt, 2dt, ...; t_max is truncated to whole segments."""
    n_seg = int(math.floor(cfg.t_max / cfg.sample_dt + 1e-9))
    if n_seg < 1:
        raise ValueError("t_max must cover at least one sample_dt segment")
    return np.arange(n_seg + 1) * cfg.sample_dt


def _kernel_args(cfg: SimulationConfig):
    om0 = omega_static_array(cfg)
    npi = np.arange(1, cfg.kmax + 1, dtype=float) * np.pi
    kpar2 = (cfg.mass / cfg.l0) ** 2
    return _coupling_base(cfg), om0, npi, kpar2, cfg.epsilon, cfg.omega, cfg.l0

def _integrate_columns(cfg: SimulationConfig, s0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Integrate a (4K, C) state over the sample grid; returns (n_t, 4K, C)."""
    kernel = SEGMENT_KERNELS[cfg.method]
    fmat, om0, npi, kpar2, eps, omega, l0 = _kernel_args(cfg)
    K = cfg.kmax
    ncol = s0.shape[1]
    out = np.empty((len(times), 4 * K, ncol))
    out[0] = s0
    y = np.ascontiguousarray(s0).ravel().copy()
    for i in range(1, len(times)):
        status, t_fail = kernel(
            float(times[i - 1]), float(times[i]), y, cfg.err,
            fmat, om0, npi, kpar2, eps, omega, l0, K, ncol,
        )
        if status != 0:
            kind = "non-finite state" if status == STATUS_NONFINITE else "step size underflow"
            raise IntegrationFailure(
                f"{kind} at t={t_fail:.6g} while integrating towards t={times[i]:.6g}",
                t=float(t_fail),
            )
        out[i] = y.reshape(4 * K, ncol)
    return out


def _evolve_chunk(cfg: SimulationConfig, cols: np.ndarray) -> np.ndarray:
    times = sample_times(cfg)
    K = cfg.kmax
    s0 = np.zeros((4 * K, len(cols)))
    for j, m in enumerate(cols):
        s0[m, j] = 2.0
    try:
        return _integrate_columns(cfg, s0, times)
    except IntegrationFailure as exc:
        raise IntegrationFailure(
            f"columns {[int(c) + 1 for c in cols]}: {exc}", t=exc.t,
            columns=[int(c) + 1 for c in cols],
        ) from None


def evolve(cfg: SimulationConfig, jobs: int = 1) -> EvolutionRecord:
    """Integrate all K initial-condition columns over the sample grid.

    Deterministic for a fixed (cfg, jobs): columns are merged by index
    regardless of execution order. jobs > 1 splits the columns into chunks
    integrated in parallel worker processes.
    """
    times = sample_times(cfg)
    K = cfg.kmax
    all_cols = np.arange(K)
    if jobs <= 1 or K == 1:
        data = _evolve_chunk(cfg, all_cols)
        return EvolutionRecord(times=times, data=data, cfg=cfg)

    jobs = min(jobs, K)
    chunks = np.array_split(all_cols, jobs)
    data = np.empty((len(times), 4 * K, K))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_evolve_chunk, cfg, c) for c in chunks]
        for cols, fut in zip(chunks, futures):
            data[:, :, cols] = fut.result()
    return EvolutionRecord(times=times, data=data, cfg=cfg)


def second_order_oracle(
    cfg: SimulationConfig,
    k_small: int,
    n_sum: int | None = None,
    oracle_err: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Directly integrate the second-order mode equation as a cross-check.

    Returns (times, eps) with eps[i, n-1, m-1] the complex mode function of
    mode n for initial excitation column m, for comparison against
    ``(xi + eta) / 2`` from :func:`evolve` at cutoff ``kmax = k_small``.

    The inner sum of the squared-coupling matrix runs over ``n_sum`` modes.
    By default it is truncated at ``k_small``, which makes the second-order
    system mathematically identical to the truncated first-order one; larger
    bounds probe the truncation difference instead of the integrator.
    Integration uses scipy's DOP853, entirely independent of the production
    kernels.
    """
    from scipy.integrate import solve_ivp

    if k_small < 1 or k_small > 6:
        raise ValueError(f"k_small must be in 1..6, got {k_small}")
    if n_sum is None:
        n_sum = k_small
    if n_sum < k_small:
        raise ValueError("n_sum must be >= k_small")
    err = cfg.err if oracle_err is None else oracle_err

    oc = SimulationConfig(
        epsilon=cfg.epsilon, omega=cfg.omega, mass=cfg.mass, kmax=k_small,
        t_max=cfg.t_max, sample_dt=cfg.sample_dt, err=err, l0=cfg.l0,
    )
    times = sample_times(oc)
    Ks = k_small
    g_full = m_matrix_base(max(Ks, n_sum))
    g = g_full[:Ks, :Ks]
    gn = g_full[:Ks, :n_sum] @ g_full[:Ks, :n_sum].T
    gt = g.T.copy()
    om0 = omega_static_array(oc)
    npi = np.arange(1, Ks + 1, dtype=float) * np.pi
    kpar2 = (oc.mass / oc.l0) ** 2
    traj = oc.trajectory

    def rhs(t, z):
        zz = z.reshape(2, Ks, Ks)
        e, d = zz[0], zz[1]
        l = traj.position(t)
        v = traj.velocity(t) / l
        adot = traj.acceleration(t) / l - v * v
        om2 = (npi / l) ** 2 + kpar2
        de = d
        dd = -om2[:, None] * e - 2.0 * v * (gt @ d) - adot * (gt @ e) + v * v * (gn @ e)
        return np.concatenate([de.ravel(), dd.ravel()])

    v0 = traj.velocity(0.0) / traj.position(0.0)
    e0 = np.eye(Ks, dtype=complex)
    d0 = -1j * np.diag(om0).astype(complex) - v0 * gt
    z = np.concatenate([e0.ravel(), d0.ravel()])

    eps_out = np.empty((len(times), Ks, Ks), dtype=complex)
    eps_out[0] = e0
    for i in range(1, len(times)):
        sol = solve_ivp(
            rhs, (times[i - 1], times[i]), z, method="DOP853",
            rtol=err, atol=err, t_eval=[times[i]],
        )
        if not sol.success:
            raise IntegrationFailure(
                f"oracle integration failed near t={times[i]:.6g}: {sol.message}",
                t=float(times[i - 1]),
            )
        z = sol.y[:, -1]
        eps_out[i] = z.reshape(2, Ks, Ks)[0]
    return times, eps_out
