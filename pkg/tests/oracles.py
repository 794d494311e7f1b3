"""Reference implementations that share no code with the package."""
import math

import mpmath as mp
import numpy as np
from scipy.special import sici

mp.mp.dps = 30
SIGMA = math.exp(float(mp.euler))


def ei(x):
    return float(mp.ei(x))


def alpha_gaussian_fixed(k, lam=1.0):
    q = mp.mpf(k) / lam
    return float(lam * mp.exp(mp.ei(-q * q / mp.exp(mp.euler)) / 2))


def alpha_by_quadrature(g_of_k, k, s, lam=1.0):
    """Lambda exp(-2 int_0^s g(k e^u) du) with mpmath quadrature."""
    val = mp.quad(lambda u: g_of_k(k * mp.exp(u)), [0, s])
    return float(lam * mp.exp(-2 * val))


def alpha_rk4(g_of_k, k, s, steps=4000, lam=1.0):
    """Integrate d/du log alpha = -2 g(k e^u) with classical RK4 along the characteristic."""
    h = s / steps
    y = math.log(lam)
    u = 0.0
    for _ in range(steps):
        f = lambda uu: -2.0 * g_of_k(k * math.exp(uu))
        k1 = f(u)
        k2 = f(u + h / 2)
        k4 = f(u + h)
        y += h * (k1 + 4 * k2 + k4) / 6
        u += h
    return math.exp(y)


def magic_pi_mpmath(x):
    """(1/pi) int_0^oo cos(kx) (k/sqrt(k^2+1) - 1)/2 dk, Lambda = 1."""
    f = lambda k: mp.cos(k * x) * (k / mp.sqrt(k * k + 1) - 1) / 2
    return float(mp.quadosc(f, [0, mp.inf], omega=x) / mp.pi)


def magic_pi_struve(x):
    """Same quantity through modified Bessel and Struve functions."""
    x = mp.mpf(x)
    return float((mp.besseli(1, x) - mp.struvel(1, x)) / 4 - 1 / (2 * mp.pi))


def magic_pi_simpson(x, K=200.0, n=1_000_000):
    """Composite Simpson on [0, K] plus the -1/(4k^2) tail in closed form."""
    k = np.linspace(0.0, K, n + 1)
    f = np.cos(k * x) * (k / np.sqrt(k * k + 1.0) - 1.0) / 2.0
    h = K / n
    body = h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())
    # int_K^oo cos(kx) k^-2 dk = cos(Kx)/K - x (pi/2 - Si(Kx))
    si, _ = sici(K * x)
    tail = -0.25 * (math.cos(K * x) / K - x * (math.pi / 2 - si))
    return (body + tail) / math.pi


def cft_pi(r):
    return -1.0 / (2.0 * math.pi * r * r)


def cft_phi(r):
    return -math.log(abs(r)) / (2.0 * math.pi)
