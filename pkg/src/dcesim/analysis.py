"""Resonance structure analysis, analytic growth law, and parameter sweeps.

The intermode coupling condition omega = |Omega_l^0 +- Omega_k^0| rarely has
integer solutions; modes are dragged into the resonance whenever the
continuous solution l-tilde lands close enough to an integer. Chains of such
links (1 -> 7 -> 12 -> ...) are discovered by a shortest-detuning search:
each link stores its own mismatch |l - l_tilde| / l and the classification
uses the detuning accumulated along the discovery path, which is what makes
chains die out after a few hops even when individual link mismatches stay
comparable.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bogoliubov import bogoliubov_from_state, bogoliubov_residuals, particle_numbers
from .evolution import IntegrationFailure, evolve
from .model import SimulationConfig, omega_static, resonant_omega

__all__ = [
    "NoSolution",
    "CouplingLink",
    "CouplingGraph",
    "MassSweepResult",
    "ConvergenceResult",
    "sinh_prediction",
    "coupling_scan",
    "exact_coupling_mass",
    "exact_coupling_partner",
    "mass_sweep",
    "convergence_check",
]

WEAK_FACTOR = 10.0


class NoSolution(ValueError):
    """The requested exact coupling condition has no real mass solution."""


@dataclass(frozen=True)
class CouplingLink:
    """One candidate intermode link discovered by the scan.

    source : already-reached mode k the condition was solved from.
    branch : '+' for omega = Omega_l + Omega_k, '-' for omega = |Omega_l - Omega_k|.
    l_tilde : continuous solution of the coupling condition.
    l : nearest integer mode.
    detuning : per-link mismatch |l - l_tilde| / l.
    cumulative : detuning summed along the discovery path from the seed.
    classification : 'strong', 'weak' or 'none'.
    """

    source: int
    branch: str
    l_tilde: float
    l: int
    detuning: float
    cumulative: float
    classification: str


@dataclass(frozen=True)
class CouplingGraph:
    """Result of a coupling scan seeded at the resonant mode."""

    seed: int
    mass: float
    omega: float
    strong_threshold: float
    entries: tuple[CouplingLink, ...]

    def strong_modes(self) -> set[int]:
        """Seed plus every mode reached through strong links."""
        return {self.seed} | {e.l for e in self.entries if e.classification == "strong"}

    def weak_modes(self) -> set[int]:
        return {e.l for e in self.entries if e.classification == "weak"}


@dataclass(frozen=True)
class MassSweepResult:
    """Resonant-mode occupation across a mass grid at a fixed evaluation time.

    residual_leading / residual_trailing hold, per grid point, the largest
    |d_k| at t_eval over the first five and the last five modes (NaN for
    failed points).
    """

    masses: np.ndarray
    N_resonant: np.ndarray
    sinh_prediction: np.ndarray
    exact_coupling_flag: np.ndarray
    coupled_partner: np.ndarray
    residual_leading: np.ndarray
    residual_trailing: np.ndarray
    notes: tuple[str, ...]

    def argmax_mass(self) -> float:
        finite = np.where(np.isfinite(self.N_resonant), self.N_resonant, -np.inf)
        return float(self.masses[int(np.argmax(finite))])


@dataclass(frozen=True)
class ConvergenceResult:
    """Per-cutoff mode occupations and their consecutive relative deviations."""

    cutoffs: tuple[int, ...]
    modes: tuple[int, ...]
    values: np.ndarray  # shape (len(cutoffs), len(modes))
    max_rel_change: np.ndarray  # shape (len(cutoffs) - 1,)


def sinh_prediction(n: int, cfg: SimulationConfig, t: float) -> float:
    """Uncoupled-resonance growth law N_n(t) = sinh^2(n gamma_n epsilon t).

    gamma_n = n (pi/l0)^2 / (2 Omega_n^0). Valid only while the resonant mode
    is not coupled to others; the caller is responsible for checking that.
    """
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    gamma = n * (math.pi / cfg.l0) ** 2 / (2.0 * omega_static(n, cfg))
    return math.sinh(n * gamma * cfg.epsilon * t) ** 2


def _solve_l_tilde(target_omega: float, mass: float, l0: float) -> float | None:
    """Continuous l with Omega_l^0 = target, or None when no real solution."""
    arg = (l0 * target_omega) ** 2 - mass * mass
    if target_omega <= 0.0 or arg <= 0.0:
        return None
    return math.sqrt(arg) / math.pi


def coupling_scan(
    cfg: SimulationConfig,
    max_mode: int | None = None,
    strong_threshold: float = 1e-2,
) -> CouplingGraph:
    """Discover the intermode coupling structure for the configured drive.

    Starting from the resonant mode n (omega = 2 Omega_n^0 within rounding;
    otherwise the closest mode), the scan solves the coupling condition on
    both branch signs from every reached mode, records nearest-integer
    candidates, and expands transitively through strong links only. Weak and
    unclassified candidates are reported one step beyond the strong frontier.
    The search processes modes in order of accumulated detuning, so each
    reported link carries the smallest cumulative mismatch over discovery
    paths. Deterministic: entries are ordered by (source, branch, l).
    """
    if max_mode is None:
        max_mode = cfg.kmax
    if max_mode < 1:
        raise ValueError(f"max_mode must be >= 1, got {max_mode}")
    if strong_threshold <= 0.0:
        raise ValueError(f"strong_threshold must be > 0, got {strong_threshold}")

    # identify the seed: mode whose principal resonance matches the drive
    seed_l = _solve_l_tilde(cfg.omega / 2.0, cfg.mass, cfg.l0)
    seed = max(1, int(round(seed_l))) if seed_l is not None else 1

    reached: dict[int, float] = {seed: 0.0}
    links: dict[int, CouplingLink] = {}
    frontier: list[tuple[float, int]] = [(0.0, seed)]
    candidates: list[CouplingLink] = []

    while frontier:
        cum_k, k = heapq.heappop(frontier)
        if cum_k > reached.get(k, math.inf):
            continue
        om_k = omega_static(k, cfg)
        for branch, target in (
            ("+", cfg.omega - om_k),
            ("-", om_k + cfg.omega),
            ("-", om_k - cfg.omega),
        ):
            l_tilde = _solve_l_tilde(target, cfg.mass, cfg.l0)
            if l_tilde is None or l_tilde < 0.5:
                continue
            l = int(round(l_tilde))
            if l < 1 or l > max_mode or l == k:
                continue
            detuning = abs(l - l_tilde) / l
            cumulative = cum_k + detuning
            if cumulative <= strong_threshold:
                classification = "strong"
            elif cumulative <= WEAK_FACTOR * strong_threshold:
                classification = "weak"
            else:
                classification = "none"
            link = CouplingLink(
                source=k, branch=branch, l_tilde=l_tilde, l=l,
                detuning=detuning, cumulative=cumulative,
                classification=classification,
            )
            if l in reached:
                if cumulative >= reached[l]:
                    continue
            candidates.append(link)
            prev = links.get(l)
            if prev is None or cumulative < prev.cumulative:
                links[l] = link
            if classification == "strong" and cumulative < reached.get(l, math.inf):
                reached[l] = cumulative
                heapq.heappush(frontier, (cumulative, l))

    # keep, per target mode, the minimal-cumulative link; order deterministically
    entries = sorted(links.values(), key=lambda e: (e.source, e.branch, e.l))
    return CouplingGraph(
        seed=seed, mass=cfg.mass, omega=cfg.omega,
        strong_threshold=strong_threshold, entries=tuple(entries),
    )


def exact_coupling_mass(n: int, k: int) -> float:
    """Mass for which 3 Omega_n^0 = Omega_k^0 exactly: M = pi sqrt((k^2 - 9n^2)/8).

    A real solution requires k > 3n; NoSolution is raised otherwise.
    """
    if n < 1 or k < 1:
        raise ValueError(f"mode indices must be >= 1, got n={n}, k={k}")
    if k <= 3 * n:
        raise NoSolution(f"exact coupling needs k > 3n, got n={n}, k={k}")
    return math.pi * math.sqrt((k * k - 9 * n * n) / 8.0)


def exact_coupling_partner(mass: float, n: int, tol: float = 1e-9) -> int | None:
    """Integer k with 3 Omega_n^0 = Omega_k^0 at this mass, if one exists.

    Inverse of exact_coupling_mass: k_tilde = sqrt(9 n^2 + 8 (M/pi)^2); the
    partner is reported when k_tilde is within tol of an integer.
    """
    if mass < 0.0:
        raise ValueError(f"mass must be >= 0, got {mass}")
    k_tilde = math.sqrt(9.0 * n * n + 8.0 * (mass / math.pi) ** 2)
    k = int(round(k_tilde))
    if k > 3 * n and abs(k_tilde - k) <= tol * max(1.0, k_tilde):
        return k
    return None


def _sweep_point(
    cfg_template: SimulationConfig, mass: float, resonant_n: int, t_eval: float
) -> tuple[float, float, float]:
    cfg = replace(
        cfg_template,
        mass=mass,
        omega=resonant_omega(resonant_n, mass, cfg_template.l0),
        t_max=t_eval,
        sample_dt=t_eval,
    )
    record = evolve(cfg)
    states = record.states_at(len(record.times) - 1)
    n_res = float(particle_numbers(states, cfg, t_eval)[resonant_n - 1])
    bog = bogoliubov_from_state(states, cfg)
    d, _ = bogoliubov_residuals(bog)
    lead = float(np.abs(d[: min(5, cfg.kmax)]).max())
    trail = float(np.abs(d[-min(5, cfg.kmax):]).max())
    return n_res, lead, trail


def mass_sweep(
    cfg_template: SimulationConfig,
    masses,
    resonant_n: int,
    t_eval: float,
    jobs: int = 1,
    partner_tol: float = 1e-9,
) -> MassSweepResult:
    """Resonant-mode occupation at t_eval across a mass grid.

    The drive is re-derived as omega = 2 Omega_n^0(M) at every grid point.
    Masses that coincide with an exact two-mode coupling are flagged (and the
    partner mode reported), never silently dropped. Integration failures are
    recorded as NaN rows with a note; results are assembled in grid order
    regardless of execution order.
    """
    masses = np.asarray(list(masses), dtype=float)
    n_pts = len(masses)
    N_res = np.full(n_pts, np.nan)
    res_lead = np.full(n_pts, np.nan)
    res_trail = np.full(n_pts, np.nan)
    notes: list[str] = []

    if jobs <= 1 or n_pts == 1:
        results: list[tuple | Exception] = []
        for i in range(n_pts):
            try:
                results.append(_sweep_point(cfg_template, float(masses[i]), resonant_n, t_eval))
            except IntegrationFailure as exc:
                results.append(exc)
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, n_pts)) as pool:
            futures = [
                pool.submit(_sweep_point, cfg_template, float(masses[i]), resonant_n, t_eval)
                for i in range(n_pts)
            ]
            results = []
            for fut in futures:
                try:
                    results.append(fut.result())
                except IntegrationFailure as exc:
                    results.append(exc)

    for i, res in enumerate(results):
        if isinstance(res, Exception):
            notes.append(f"M={masses[i]:g}: {res}")
        else:
            N_res[i], res_lead[i], res_trail[i] = res

    sinh_vals = np.empty(n_pts)
    flags = np.zeros(n_pts, dtype=bool)
    partners = np.zeros(n_pts, dtype=int)
    for i, mass in enumerate(masses):
        cfg_i = replace(
            cfg_template, mass=float(mass),
            omega=resonant_omega(resonant_n, float(mass), cfg_template.l0),
        )
        sinh_vals[i] = sinh_prediction(resonant_n, cfg_i, t_eval)
        partner = exact_coupling_partner(float(mass), resonant_n, tol=partner_tol)
        if partner is not None:
            flags[i] = True
            partners[i] = partner
    return MassSweepResult(
        masses=masses, N_resonant=N_res, sinh_prediction=sinh_vals,
        exact_coupling_flag=flags, coupled_partner=partners,
        residual_leading=res_lead, residual_trailing=res_trail, notes=tuple(notes),
    )


def convergence_check(
    cfg: SimulationConfig,
    K_list,
    modes_of_interest,
    t_eval: float,
    jobs: int = 1,
) -> ConvergenceResult:
    """Re-run the pipeline per cutoff and report stability of the low modes.

    values[j, i] is N_n(t_eval) for mode modes_of_interest[i] at cutoff
    K_list[j]; max_rel_change[j] the largest relative deviation of the
    monitored modes between consecutive cutoffs.
    """
    K_list = [int(k) for k in K_list]
    if any(b <= a for a, b in zip(K_list, K_list[1:])):
        raise ValueError(f"K_list must be strictly ascending, got {K_list}")
    modes = [int(m) for m in modes_of_interest]
    if max(modes) > min(K_list):
        raise ValueError("every monitored mode must lie below the smallest cutoff")

    values = np.empty((len(K_list), len(modes)))
    for j, K in enumerate(K_list):
        cfg_k = replace(cfg, kmax=K, t_max=t_eval, sample_dt=t_eval)
        record = evolve(cfg_k, jobs=jobs)
        N = particle_numbers(record.states_at(len(record.times) - 1), cfg_k, t_eval)
        values[j] = [N[m - 1] for m in modes]

    rel = np.empty(max(len(K_list) - 1, 0))
    for j in range(len(K_list) - 1):
        denom = np.where(values[j + 1] == 0.0, 1.0, np.abs(values[j + 1]))
        rel[j] = np.max(np.abs(values[j + 1] - values[j]) / denom)
    return ConvergenceResult(
        cutoffs=tuple(K_list), modes=tuple(modes), values=values, max_rel_change=rel,
    )
