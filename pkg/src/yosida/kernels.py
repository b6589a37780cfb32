"""Exact exponential-kernel convolution of piecewise-linear samples.

For a rate rho and step h, the integral of e^{rho(h-s)} times the linear
interpolant of (u_k, u_{k+1}) over [0, h] equals
h * ((phi1 - phi2) u_k + phi2 u_{k+1}) with x = rho*h and

    phi1(x) = (e^x - 1)/x,   phi2(x) = (e^x - 1 - x)/x**2.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter


def phi12(x: float) -> tuple[float, float]:
    """phi1 and phi2 evaluated without cancellation near x = 0."""
    x = float(x)
    if abs(x) < 1e-3:
        phi1 = 1 + x / 2 + x * x / 6 + x ** 3 / 24 + x ** 4 / 120
        phi2 = 0.5 + x / 6 + x * x / 24 + x ** 3 / 120 + x ** 4 / 720
        return phi1, phi2
    em1 = np.expm1(x)
    return em1 / x, (em1 - x) / (x * x)


def decay_weights(r: float) -> tuple[float, float, float]:
    """(E, w0, w1) for the normalized kernel (1/lam) e^{-tau/lam} with r = dt/lam.

    C_{k+1} = E C_k + w0 u_k + w1 u_{k+1} is exact for piecewise-linear u.
    The weights are nonnegative and E + w0 + w1 = 1.
    """
    phi1, phi2 = phi12(-r)
    w1 = r * phi2
    w0 = r * (phi1 - phi2)
    return float(np.exp(-r)), w0, w1


def rate_weights(rho: float, h: float) -> tuple[float, float, float]:
    """(E, a, b) for I_{k+1} = E I_k + a u_k + b u_{k+1}, I(t) = int_{t0}^t e^{rho(t-s)} u(s) ds."""
    phi1, phi2 = phi12(rho * h)
    return float(np.exp(rho * h)), h * (phi1 - phi2), h * phi2


def exp_filter(values: np.ndarray, E: float, a: float, b: float, init) -> np.ndarray:
    """Run C_0 = init, C_k = E C_{k-1} + a u_{k-1} + b u_k along axis 0."""
    values = np.asarray(values, dtype=float)
    drive = np.empty_like(values)
    drive[0] = init
    drive[1:] = a * values[:-1] + b * values[1:]
    return lfilter([1.0], [1.0, -E], drive, axis=0)
