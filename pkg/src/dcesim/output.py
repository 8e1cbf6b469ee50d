"""Fixed-format data emission: CSV files, run manifests, flat config files.

Serialization is pinned so that re-running a command with identical flags
produces byte-identical data files: floats are written with 17 significant
digits, separators and line endings are fixed (",", LF), rows are emitted in
deterministic order. Every data file is accompanied by exactly one manifest
(same path plus ".manifest") in flat key=value form; manifests carry the
wall-clock duration and are therefore not byte-stable themselves.
"""

from __future__ import annotations

import os
from typing import Iterable, Mapping

import numpy as np

from .analysis import CouplingGraph, MassSweepResult
from .bogoliubov import ParticleSpectrum


def fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


def manifest_path(data_path: str) -> str:
    return str(data_path) + ".manifest"


def write_manifest(data_path: str, fields: Mapping[str, object]) -> str:
    path = manifest_path(data_path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in fields.items():
            if isinstance(value, float):
                value = fmt_float(value)
            fh.write(f"{key}={value}\n")
    return path


def write_spectrum_csv(
    path: str,
    spectrum: ParticleSpectrum,
    d_series: np.ndarray,
) -> None:
    """Spectrum samples: t, N_1..N_K, N_total, d_1..d_K, period_aligned."""
    n_t, K = spectrum.N.shape
    if d_series.shape != (n_t, K):
        raise ValueError(f"residual series shape {d_series.shape} != {(n_t, K)}")
    header = (
        ["t"]
        + [f"N_{n}" for n in range(1, K + 1)]
        + ["N_total"]
        + [f"d_{n}" for n in range(1, K + 1)]
        + ["period_aligned"]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n_t):
            row = [fmt_float(spectrum.times[i])]
            row += [fmt_float(v) for v in spectrum.N[i]]
            row.append(fmt_float(spectrum.N_total[i]))
            row += [fmt_float(v) for v in d_series[i]]
            row.append("1" if spectrum.period_aligned[i] else "0")
            fh.write(",".join(row) + "\n")


def write_sweep_csv(path: str, result: MassSweepResult) -> None:
    """Sweep rows: M, N_resonant, sinh_prediction, exact_coupling_flag, coupled_partner."""
    header = ["M", "N_resonant", "sinh_prediction", "exact_coupling_flag", "coupled_partner"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(result.masses)):
            fh.write(
                ",".join(
                    [
                        fmt_float(result.masses[i]),
                        fmt_float(result.N_resonant[i]),
                        fmt_float(result.sinh_prediction[i]),
                        "1" if result.exact_coupling_flag[i] else "0",
                        str(int(result.coupled_partner[i])),
                    ]
                )
                + "\n"
            )


def write_couplings_csv(path: str, graph: CouplingGraph) -> None:
    """Coupling links: k, branch, l_tilde, l, detuning, class."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,branch,l_tilde,l,detuning,class\n")
        for e in graph.entries:
            fh.write(
                f"{e.source},{e.branch},{fmt_float(e.l_tilde)},{e.l},"
                f"{fmt_float(e.detuning)},{e.classification}\n"
            )


def couplings_table(graph: CouplingGraph) -> str:
    """Human-readable table of a coupling scan."""
    lines = [
        f"seed mode {graph.seed}  (mass={graph.mass:g}, omega={graph.omega:g}, "
        f"strong threshold {graph.strong_threshold:g})",
        f"{'k':>4} {'branch':>6} {'l_tilde':>12} {'l':>4} {'detuning':>12} "
        f"{'cumulative':>12} class",
    ]
    for e in graph.entries:
        lines.append(
            f"{e.source:>4} {e.branch:>6} {e.l_tilde:>12.6f} {e.l:>4} "
            f"{e.detuning:>12.4e} {e.cumulative:>12.4e} {e.classification}"
        )
    if not graph.entries:
        lines.append("  (no candidate links below the detuning cutoff)")
    return "\n".join(lines)


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value configuration file; '#' starts a comment."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def read_csv_columns(path: str) -> dict[str, list[str]]:
    """Parse one of our CSV files back into named string columns (for tests/tools)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        cols: dict[str, list[str]] = {h: [] for h in header}
        for raw in fh:
            parts = raw.rstrip("\n").split(",")
            for h, v in zip(header, parts):
                cols[h].append(v)
    return cols
