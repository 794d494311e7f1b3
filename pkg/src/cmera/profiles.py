"""Entangler profiles g(x), g(k) and the exponential integral they require.

Two profiles are supported:

* ``gaussian``: g(x) = 1/2 exp(-sigma (Lambda x)^2 / 4), sigma = exp(euler_gamma)
* ``magic``:    g(x) = Lambda/4 exp(-Lambda |x|)

Momentum-space profiles use g(k) = int dx exp(-i k x) g(x), which gives
g(0) = 1/2 for both kinds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243
SIGMA = math.exp(EULER_GAMMA)

ProfileKind = Literal["gaussian", "magic"]

# Below this |x| the power series is used, above it the continued fraction.
EI_CROSSOVER = 1.0


@dataclass(frozen=True)
class Profile:
    """An entangler profile with UV momentum scale ``lam`` (Lambda)."""

    kind: ProfileKind = "gaussian"
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "magic"):
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"Lambda must be positive and finite, got {self.lam}")

    @property
    def sigma(self) -> float | None:
        return SIGMA if self.kind == "gaussian" else None

    def with_lam(self, lam: float) -> "Profile":
        return Profile(self.kind, lam)


def _out(values, scalar_input):
    return float(values) if scalar_input else values


def g_position(profile: Profile, x):
    """Position-space profile g(x)."""
    x = np.asarray(x, dtype=float)
    lam = profile.lam
    if profile.kind == "gaussian":
        val = 0.5 * np.exp(-SIGMA * (lam * x) ** 2 / 4.0)
    else:
        val = 0.25 * lam * np.exp(-lam * np.abs(x))
    return _out(val, x.ndim == 0)


def g_momentum(profile: Profile, k):
    """Momentum-space profile g(k), the Fourier transform of :func:`g_position`."""
    k = np.asarray(k, dtype=float)
    q = k / profile.lam
    if profile.kind == "gaussian":
        val = 0.5 * np.exp(-q * q / SIGMA)
    else:
        val = 0.5 / (q * q + 1.0)
    return _out(val, k.ndim == 0)


def _ei_series(x):
    # gamma + ln|x| + sum x^n / (n n!), accurate for |x| <= 1
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for n in range(1, 60):
        term = term * x / n
        total += term / n
    return EULER_GAMMA + np.log(-x) + total


def _e1_continued_fraction(z, tol=1e-16, max_iter=1000):
    # modified Lentz evaluation of E1(z), z > 1
    tiny = 1e-300
    b = z + 1.0
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, max_iter):
        an = -float(i * i)
        b = b + 2.0
        d_new = 1.0 / (an * d + b)
        c_new = b + an / c
        delta = c_new * d_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > tol
        if not active.any():
            break
    else:
        raise ArithmeticError("E1 continued fraction did not converge")
    return h * np.exp(-z)


def exp_integral_ei(x):
    """Exponential integral Ei(x) for negative real ``x``.

    Power series for |x| <= 1 and a continued fraction for E1(-x) beyond;
    relative accuracy is better than 1e-13 across the whole negative axis.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)) or np.any(xa >= 0):
        raise DomainError("Ei is only implemented for negative arguments")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    small = np.abs(flat) <= EI_CROSSOVER
    large = ~small
    if small.any():
        out[small] = _ei_series(flat[small])
    if large.any():
        out[large] = -_e1_continued_fraction(-flat[large])
    out = out.reshape(xa.shape)
    return _out(out, xa.ndim == 0)
