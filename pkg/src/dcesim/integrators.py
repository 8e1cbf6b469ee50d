"""Adaptive embedded Runge-Kutta kernels for the mode-evolution system.

Two pairs are provided, selected by ``SimulationConfig.method``:

* ``dop853`` -- 8th-order Dormand-Prince pair with the combined 5th/3rd
  order error estimate (default; used for tight tolerances).
* ``rkf45`` -- classic Runge-Kutta-Fehlberg 4(5).

The kernels are numba-compiled together with the system right-hand side so
that the step loop runs without interpreter overhead; a single segment call
advances the stacked state of one column chunk between two sample times and
restarts step-size selection, keeping runs bit-reproducible for a fixed
configuration. Step-size control follows the standard practice (safety 0.9,
growth clamped to [0.2, 10], error exponent -1/(q+1)).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._tableaus import (
    DP853_A,
    DP853_B,
    DP853_C,
    DP853_E3,
    DP853_E5,
    RKF45_A,
    RKF45_B,
    RKF45_C,
    RKF45_E,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_NONFINITE = 2


@njit(cache=True)
def _eval_deriv(t, y, out, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol):
    """Derivative of the stacked real state, out = W(t) @ y.

    y and out are flat views of the (4, K, C) block state (u, x, v, yb).
    The intermode blocks factorize as C-+ = (ldot/l) * (F +- D^-1 F D) with
    D = diag(Omega^0), so one F product per block pair suffices.
    """
    l = l0 * (1.0 + eps * np.sin(omega * t))
    v = l0 * eps * omega * np.cos(omega * t) / l

    S = y.reshape(4, kdim, ncol)
    O = out.reshape(4, kdim, ncol)
    U = S[0]
    X = S[1]
    V = S[2]
    Yb = S[3]

    s1 = np.empty((kdim, ncol))
    s2 = np.empty((kdim, ncol))
    s3 = np.empty((kdim, ncol))
    s4 = np.empty((kdim, ncol))
    for i in range(kdim):
        w = om0[i]
        for c in range(ncol):
            s1[i, c] = U[i, c] + X[i, c]
            s2[i, c] = w * (U[i, c] - X[i, c])
            s3[i, c] = V[i, c] + Yb[i, c]
            s4[i, c] = w * (V[i, c] - Yb[i, c])

    p1 = np.dot(fmat, s1)
    p2 = np.dot(fmat, s2)
    q1 = np.dot(fmat, s3)
    q2 = np.dot(fmat, s4)

    for i in range(kdim):
        w0 = om0[i]
        om2 = (npi[i] / l) ** 2 + kpar2
        ap = 0.5 * (w0 + om2 / w0)
        am = 0.5 * (w0 - om2 / w0)
        inv = 1.0 / w0
        for c in range(ncol):
            cu = p1[i, c] + inv * p2[i, c]
            cx = p1[i, c] - inv * p2[i, c]
            cv = q1[i, c] + inv * q2[i, c]
            cy = q1[i, c] - inv * q2[i, c]
            O[0, i, c] = -v * cu + ap * V[i, c] - am * Yb[i, c]
            O[1, i, c] = -v * cx + am * V[i, c] - ap * Yb[i, c]
            O[2, i, c] = -ap * U[i, c] + am * X[i, c] - v * cv
            O[3, i, c] = -am * U[i, c] + ap * X[i, c] - v * cy


@njit(cache=True)
def _initial_step(t0, t_bound, y, f0, tol, order, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol):
    """Hairer-style empirical initial step selection."""
    n = y.size
    interval = t_bound - t0
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = tol + tol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, interval)

    y1 = y + h0 * f0
    f1 = np.empty_like(f0)
    _eval_deriv(t0 + h0, y1, f1, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)
    d2 = 0.0
    for i in range(n):
        sc = tol + tol * abs(y[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0

    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1.0))
    return min(100.0 * h0, h1, interval)


@njit(cache=True)
def _segment_dop853(t0, t1, y, tol, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol):
    """Advance y in place from t0 to t1; returns (status, t_at_failure)."""
    n = y.size
    nstages = 12
    kst = np.empty((nstages + 1, n))
    f = np.empty(n)
    _eval_deriv(t0, y, f, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)
    h = _initial_step(t0, t1, y, f, tol, 7.0, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)

    t = t0
    y_new = np.empty(n)
    err_exp = -1.0 / 8.0
    while t < t1:
        min_step = 10.0 * np.abs(np.spacing(t))
        if h < min_step:
            return STATUS_STEP_UNDERFLOW, t
        if t + h > t1:
            h = t1 - t

        rejected = False
        while True:
            for i in range(n):
                kst[0, i] = f[i]
            for s in range(1, nstages):
                ys = y + h * np.dot(DP853_A[s, :s], kst[:s])
                _eval_deriv(t + DP853_C[s] * h, ys, kst[s], fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)
            y_new[:] = y + h * np.dot(DP853_B, kst[:nstages])
            _eval_deriv(t + h, y_new, kst[nstages], fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)

            err5_2 = 0.0
            err3_2 = 0.0
            for i in range(n):
                e5 = 0.0
                e3 = 0.0
                for s in range(nstages + 1):
                    e5 += kst[s, i] * DP853_E5[s]
                    e3 += kst[s, i] * DP853_E3[s]
                sc = tol + tol * max(abs(y[i]), abs(y_new[i]))
                e5 /= sc
                e3 /= sc
                err5_2 += e5 * e5
                err3_2 += e3 * e3
            if err5_2 == 0.0 and err3_2 == 0.0:
                err_norm = 0.0
            else:
                err_norm = abs(h) * err5_2 / np.sqrt((err5_2 + 0.01 * err3_2) * n)
            if not np.isfinite(err_norm):
                err_norm = 1e10

            if err_norm < 1.0:
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err_norm ** err_exp)
                if rejected:
                    factor = min(1.0, factor)
                t = t + h
                for i in range(n):
                    y[i] = y_new[i]
                    f[i] = kst[nstages, i]
                h = h * factor
                break
            rejected = True
            h = h * max(MIN_FACTOR, SAFETY * err_norm ** err_exp)
            if h < min_step:
                return STATUS_STEP_UNDERFLOW, t

    for i in range(n):
        if not np.isfinite(y[i]):
            return STATUS_NONFINITE, t
    return STATUS_OK, t


@njit(cache=True)
def _segment_rkf45(t0, t1, y, tol, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol):
    """Fehlberg 4(5) segment integrator, same contract as _segment_dop853."""
    n = y.size
    nstages = 6
    kst = np.empty((nstages, n))
    f = np.empty(n)
    _eval_deriv(t0, y, f, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)
    h = _initial_step(t0, t1, y, f, tol, 4.0, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)

    t = t0
    y_new = np.empty(n)
    err_exp = -1.0 / 5.0
    while t < t1:
        min_step = 10.0 * np.abs(np.spacing(t))
        if h < min_step:
            return STATUS_STEP_UNDERFLOW, t
        if t + h > t1:
            h = t1 - t

        rejected = False
        while True:
            for i in range(n):
                kst[0, i] = f[i]
            for s in range(1, nstages):
                ys = y + h * np.dot(RKF45_A[s, :s], kst[:s])
                _eval_deriv(t + RKF45_C[s] * h, ys, kst[s], fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)
            y_new[:] = y + h * np.dot(RKF45_B, kst)

            err_2 = 0.0
            for i in range(n):
                e = 0.0
                for s in range(nstages):
                    e += kst[s, i] * RKF45_E[s]
                sc = tol + tol * max(abs(y[i]), abs(y_new[i]))
                err_2 += (h * e / sc) ** 2
            err_norm = np.sqrt(err_2 / n)
            if not np.isfinite(err_norm):
                err_norm = 1e10

            if err_norm < 1.0:
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err_norm ** err_exp)
                if rejected:
                    factor = min(1.0, factor)
                t = t + h
                for i in range(n):
                    y[i] = y_new[i]
                _eval_deriv(t, y, f, fmat, om0, npi, kpar2, eps, omega, l0, kdim, ncol)
                h = h * factor
                break
            rejected = True
            h = h * max(MIN_FACTOR, SAFETY * err_norm ** err_exp)
            if h < min_step:
                return STATUS_STEP_UNDERFLOW, t

    for i in range(n):
        if not np.isfinite(y[i]):
            return STATUS_NONFINITE, t
    return STATUS_OK, t


SEGMENT_KERNELS = {
    "dop853": _segment_dop853,
    "rkf45": _segment_rkf45,
}
