"""Modified Bessel functions I0 and I1 of real nonnegative argument.

Power series up to x = 20 and the large-argument expansion
I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k beyond. Scaled
variants (times e^{-x}) let kernels like I0(z) e^{-z - ...} be formed
without overflow.
"""

from __future__ import annotations

import numpy as np

SERIES_MAX = 20.0


def _check(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("modified Bessel functions here need x >= 0")
    return x


def _series(x: np.ndarray, nu: int) -> np.ndarray:
    """sum_k (x^2/4)^k / (k! (k+nu)!); the x^nu/2^nu prefactor is left out."""
    q = 0.25 * x * x
    term = np.full_like(x, 1.0 if nu == 0 else 1.0 / np.prod(range(1, nu + 1)))
    total = term.copy()
    for k in range(1, 120):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    return total


def _asymptotic_scaled(x: np.ndarray, nu: int) -> np.ndarray:
    """e^{-x} I_nu(x) from the large-argument expansion (x > 20)."""
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, 60):
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if np.all(np.abs(new) <= 1e-17 * np.abs(total)):
            total += new
            break
        # stop where the expansion starts to diverge for a given x
        grow = np.abs(new) > np.abs(term)
        new = np.where(grow, 0.0, new)
        term = np.where(grow, 0.0, new)
        total += new
    return total / np.sqrt(2.0 * np.pi * x)


def _eval(x, nu: int, scaled: bool) -> np.ndarray:
    x = _check(x)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_MAX
    xs = flat[small]
    s = _series(xs, nu)
    if nu == 1:
        s = s * (0.5 * xs)
    out[small] = s * np.exp(-xs) if scaled else s
    big = ~small
    if np.any(big):
        xb = flat[big]
        a = _asymptotic_scaled(xb, nu)
        out[big] = a if scaled else a * np.exp(xb)
    return out.reshape(x.shape) if x.ndim else out[0]


def bessel_i0(x):
    return _eval(x, 0, False)


def bessel_i1(x):
    return _eval(x, 1, False)


def bessel_i0e(x):
    """e^{-x} I0(x)."""
    return _eval(x, 0, True)


def bessel_i1e(x):
    """e^{-x} I1(x)."""
    return _eval(x, 1, True)


def bessel_i1_over_x(x):
    """I1(x)/x, which tends to 1/2 at x = 0."""
    x = _check(x)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_MAX
    out[small] = 0.5 * _series(flat[small], 1)
    big = ~small
    if np.any(big):
        xb = flat[big]
        out[big] = _asymptotic_scaled(xb, 1) * np.exp(xb) / xb
    return out.reshape(x.shape) if x.ndim else out[0]


def bessel_i1e_over_x(x):
    """e^{-x} I1(x)/x."""
    x = _check(x)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_MAX
    xs = flat[small]
    out[small] = 0.5 * _series(xs, 1) * np.exp(-xs)
    big = ~small
    if np.any(big):
        xb = flat[big]
        out[big] = _asymptotic_scaled(xb, 1) / xb
    return out.reshape(x.shape) if x.ndim else out[0]
