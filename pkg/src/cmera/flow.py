"""The entangling flow alpha(k, s) of a Gaussian cMERA.

Every state along the flow is annihilated by
sqrt(alpha/2) phi(k) + i sqrt(1/(2 alpha)) pi(k), and

    alpha(k, s) = Lambda exp(-2 int_0^s du g(k e^u)).

:func:`alpha_flow` evaluates this integral by adaptive quadrature for any
profile; :func:`alpha_closed` holds the closed forms, which exist for both
supported profiles at every s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .profiles import SIGMA, Profile, exp_integral_ei, g_momentum
from .transforms import MomentumKernel

# Upper flow time standing in for s = infinity in quadrature checks.
FIXED_POINT_S = 40.0


def _check_s(s):
    if not (s >= 0):
        raise DomainError(f"flow time must be non-negative, got {s}")


def ir_mass(profile: Profile, s: float) -> float:
    """m(s) = Lambda exp(-s); zero at the fixed point."""
    _check_s(s)
    return 0.0 if math.isinf(s) else profile.lam * math.exp(-s)


def alpha_closed(profile: Profile, k, s: float = math.inf):
    """Closed-form alpha(k, s) for the two supported profiles.

    gaussian: Lambda exp(Ei(-q^2/sigma)/2 - Ei(-q^2 e^{2s}/sigma)/2), q = k/Lambda
    magic:    Lambda sqrt(k^2 + m^2) / sqrt(k^2 + Lambda^2)
    """
    _check_s(s)
    k = np.asarray(k, dtype=float)
    lam = profile.lam
    q = np.abs(k) / lam
    if profile.kind == "magic":
        mu = 0.0 if math.isinf(s) else math.exp(-2.0 * s)
        val = lam * np.sqrt((q * q + mu) / (q * q + 1.0))
    else:
        val = np.empty_like(q)
        zero = q == 0
        val[zero] = 0.0 if math.isinf(s) else lam * math.exp(-s)
        z = q[~zero] ** 2 / SIGMA
        expo = 0.5 * exp_integral_ei(-z)
        if not math.isinf(s):
            zs = z * math.exp(2.0 * s)
            far = np.zeros_like(zs)
            live = zs < 745.0
            far[live] = exp_integral_ei(-zs[live])
            expo = expo - 0.5 * far
        val[~zero] = lam * np.exp(expo)
    return float(val) if k.ndim == 0 else val


def alpha_fixed(profile: Profile, k):
    """Fixed-point alpha(k) = lim_{s->oo} alpha(k, s); zero at k = 0."""
    return alpha_closed(profile, k, math.inf)


def _flow_exponent(profile: Profile, q: float, s: float, epsabs: float) -> float:
    # int_0^s g(q e^u) du in Lambda = 1 units
    unit = profile.with_lam(1.0)

    def integrand(u):
        return g_momentum(unit, q * math.exp(u))

    u_star = -math.log(q)
    cuts = [0.0]
    for c in (u_star - 3.0, u_star, u_star + 3.0, u_star + 8.0):
        if cuts[-1] < c < s:
            cuts.append(c)
    cuts.append(s)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=epsabs, epsrel=1e-13, limit=400)
        total += val
    return total


def alpha_flow(profile: Profile, k, s: float, epsabs: float = 1e-13):
    """alpha(k, s) by direct quadrature of the flow integral in u.

    Independent of :func:`alpha_closed`; used to validate the closed forms.
    """
    _check_s(s)
    k = np.asarray(k, dtype=float)
    flat = np.abs(np.atleast_1d(k)).ravel() / profile.lam
    out = np.empty_like(flat)
    for i, q in enumerate(flat):
        if q == 0.0:
            out[i] = 0.0 if math.isinf(s) else math.exp(-s)
        else:
            out[i] = math.exp(-2.0 * _flow_exponent(profile, q, s, epsabs))
    out = profile.lam * out.reshape(k.shape)
    return float(out) if k.ndim == 0 else out


def _series_sqrt(a):
    b = [1.0]
    for n in range(1, len(a)):
        b.append((a[n] - sum(b[j] * b[n - j] for j in range(1, n))) / 2.0)
    return b


def _series_reciprocal(b):
    r = [1.0]
    for n in range(1, len(b)):
        r.append(-sum(b[j] * r[n - j] for j in range(1, n + 1)))
    return r


def _magic_tails(mu: float, order: int = 3):
    # alpha/Lambda = sqrt((1 + mu t) / (1 + t)) with t = (Lambda/k)^2
    a = [1.0] + [(-1.0) ** n * (1.0 - mu) for n in range(1, order + 1)]
    b = _series_sqrt(a)
    r = _series_reciprocal(b)
    pi_tail = tuple((2 * n, 0.5 * b[n]) for n in range(1, order + 1))
    phi_tail = tuple((2 * n, 0.5 * r[n]) for n in range(1, order + 1))
    return pi_tail, phi_tail


@dataclass(frozen=True)
class AlphaFn:
    """alpha(k, s) for a profile at flow time ``s`` (``inf`` for the fixed point)."""

    profile: Profile
    s: float = math.inf

    def __post_init__(self):
        _check_s(self.s)

    @property
    def lam(self) -> float:
        return self.profile.lam

    @property
    def m(self) -> float:
        return ir_mass(self.profile, self.s)

    @property
    def is_fixed_point(self) -> bool:
        return math.isinf(self.s)

    @classmethod
    def with_mass(cls, profile: Profile, m: float) -> "AlphaFn":
        if not (0 < m <= profile.lam):
            raise DomainError("IR mass must lie in (0, Lambda]")
        return cls(profile, math.log(profile.lam / m))

    def __call__(self, k):
        return alpha_closed(self.profile, k, self.s)

    def unit(self) -> "AlphaFn":
        return AlphaFn(self.profile.with_lam(1.0), self.s)

    def pi_kernel(self) -> MomentumKernel:
        """alpha/2 in Lambda = 1 units, contact value 1/2 subtracted downstream."""
        unit = self.unit()
        tail = ()
        if self.profile.kind == "magic":
            tail, _ = _magic_tails(unit.m ** 2)
        return MomentumKernel(lambda k: 0.5 * unit(k), uv_limit=0.5, tail=tail, name="alpha/2")

    def phi_kernel(self) -> MomentumKernel:
        """1/(2 alpha) in Lambda = 1 units; log-divergent at k -> 0 at the fixed point."""
        unit = self.unit()
        tail = ()
        if self.profile.kind == "magic":
            _, tail = _magic_tails(unit.m ** 2)
        ir = "log-divergent" if self.is_fixed_point else "integrable"

        def evaluate(k):
            with np.errstate(divide="ignore"):
                return 0.5 / unit(k)

        return MomentumKernel(evaluate, uv_limit=0.5, ir_class=ir, tail=tail, name="1/(2 alpha)")
