"""Oscillatory cosine transforms of momentum-space kernels.

The engine evaluates

    (1/pi) int_0^oo dk cos(k x) (f(k) - f_uv)

on an array of x at once. [0, K] is covered by Gauss-Legendre panels no
wider than ``panel_fraction * pi / x_max`` plus a geometric refinement
towards k = 0. Beyond K the kernel is replaced by its large-k expansion
sum_p c_p k^-p, which is integrated in closed form through Ci/Si and a
recurrence; what remains is bounded with the second mean value theorem
and K is doubled until that bound fits the tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.special import sici

from .errors import DomainError, IRDivergenceError, ToleranceNotMet

IRClass = Literal["integrable", "log-divergent"]


@dataclass(frozen=True)
class MomentumKernel:
    """A momentum-space kernel f(k) for k >= 0.

    Parameters
    ----------
    evaluate : callable
        Vectorized map from an array of k to f(k).
    uv_limit : float
        f(oo), subtracted as the contact term.
    ir_class : {"integrable", "log-divergent"}
        Whether f is integrable at k = 0.
    tail : tuple of (p, c_p)
        Large-k expansion f(k) - uv_limit ~ sum c_p k^-p, integrated
        analytically beyond the split point. Empty for kernels that decay
        faster than any power.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    uv_limit: float = 0.0
    ir_class: IRClass = "integrable"
    tail: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.ir_class not in ("integrable", "log-divergent"):
            raise DomainError(f"unknown ir_class {self.ir_class!r}")
        if any(p < 1 for p, _ in self.tail):
            raise DomainError("tail powers must be >= 1")

    def subtracted(self, k):
        return np.asarray(self.evaluate(np.asarray(k, dtype=float)), dtype=float) - self.uv_limit

    def remainder(self, k):
        """f(k) - uv_limit minus the analytic tail, the part bounded numerically."""
        k = np.asarray(k, dtype=float)
        r = self.subtracted(k)
        for p, c in self.tail:
            r = r - c * k ** (-float(p))
        return r

    @property
    def remainder_power(self) -> int:
        """Decay power q assumed for the remainder when bounding its integral."""
        return max((p for p, _ in self.tail), default=0) + 2


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and panel rules for :func:`cosine_transform`.

    ``k_max`` is the initial split point in units of Lambda (the kernels are
    dimensionless); it is doubled as needed up to ``k_limit``.
    """

    abs_tol: float = 1e-10
    k_max: float = 10.0
    panel_fraction: float = 0.25
    max_panel: float = 0.5
    order: int = 16
    check_order: int = 24
    ir_levels: int = 40
    k_limit: float = 1e7
    chunk_elements: int = 4_000_000
    _rules: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise DomainError("abs_tol must be positive")
        if not (self.k_max >= 10.0):
            raise DomainError("k_max must be at least 10 Lambda")
        if not (0 < self.panel_fraction <= 0.25):
            raise DomainError("panel_fraction must lie in (0, 1/4]")

    def halved(self) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol / 2, self.k_max, self.panel_fraction, self.max_panel,
                              self.order, self.check_order, self.ir_levels, self.k_limit,
                              self.chunk_elements)

    def rule(self, n: int):
        if n not in self._rules:
            self._rules[n] = np.polynomial.legendre.leggauss(n)
        return self._rules[n]


def _panel_edges(K: float, h: float, levels: int) -> np.ndarray:
    n = max(1, math.ceil(K / h))
    uniform = np.linspace(0.0, K, n + 1)
    fine = h * 2.0 ** -np.arange(levels, 0, -1)
    return np.concatenate(([0.0], fine, uniform[1:]))


def _nodes(edges: np.ndarray, spec: QuadratureSpec, n: int):
    t, w = spec.rule(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    k = (a + half * (t[None, :] + 1.0)).ravel()
    wk = (half * w[None, :]).ravel()
    return k, wk


_NODE_CHUNK = 2048


def _chunked_sum(k, wf, idx, spec, matrix):
    # sum_j matrix(k, idx)[i, j] wf_j, chunked over nodes and outputs. Node chunks
    # are fixed and every row is reduced along its own contiguous axis, so a value
    # does not depend on which other outputs share the batch.
    out = np.zeros(idx.size)
    block = max(1, spec.chunk_elements // _NODE_CHUNK)
    for o in range(0, idx.size, block):
        sub = idx[o:o + block]
        acc = np.zeros(sub.size)
        for i in range(0, k.size, _NODE_CHUNK):
            M = matrix(k[None, i:i + _NODE_CHUNK], sub)
            M *= wf[None, i:i + _NODE_CHUNK]
            acc += M.sum(axis=1)
        out[o:o + block] = acc
    return out


# Above this K*x the forward Ci/Si recurrence loses digits to cancellation.
_RECURRENCE_LIMIT = 2.0


def _expn_imag(p: int, y: np.ndarray) -> np.ndarray:
    """E_p(-i y) for y >= _RECURRENCE_LIMIT by a modified Lentz continued fraction."""
    z = -1j * y
    tiny = 1e-300
    b = z + p
    c = np.full(z.shape, 1.0 / tiny, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 2000):
        an = -i * (p - 1 + i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 4e-16):
            break
    else:
        raise ToleranceNotMet("continued fraction for the tail integral did not converge")
    return h * np.exp(-z)


def _tail_integrals(K: float, x: np.ndarray, pmax: int):
    """J_p = int_K^oo cos(kx) k^-p dk for p = 1..pmax (x > 0)."""
    y = K * x
    near = y < _RECURRENCE_LIMIT
    J = {p: np.empty_like(x) for p in range(1, pmax + 1)}
    if near.any():
        xn = x[near]
        si, ci = sici(y[near])
        Jn = {1: -ci}
        Sn = {1: 0.5 * np.pi - si}
        c, s = np.cos(y[near]), np.sin(y[near])
        for p in range(1, pmax):
            Kp = K ** p
            Jn[p + 1] = c / (p * Kp) - (xn / p) * Sn[p]
            Sn[p + 1] = s / (p * Kp) + (xn / p) * Jn[p]
        for p in J:
            J[p][near] = Jn[p]
    if (~near).any():
        for p in J:
            J[p][~near] = K ** (1 - p) * _expn_imag(p, y[~near]).real
    return J


def _analytic_tail(kernel: MomentumKernel, K: float, x: np.ndarray) -> np.ndarray:
    if not kernel.tail:
        return np.zeros_like(x)
    pmax = max(p for p, _ in kernel.tail)
    J = _tail_integrals(K, x, pmax)
    return sum(c * J[p] for p, c in kernel.tail)


def _remainder_bound(kernel: MomentumKernel, K: float, x: float) -> float:
    # |int_K^oo cos(kx) r(k) dk| <= |r(K)| min(2/x, K/(q-1)) for monotone |r| ~ k^-q
    probe = K * np.array([1.0, 1.5, 2.0, 4.0, 16.0])
    r = np.abs(kernel.remainder(probe))
    if not np.all(np.isfinite(r)):
        return math.inf
    # values below the rounding floor of f(k) - uv carry no shape information
    floor = 64 * np.finfo(float).eps * max(abs(kernel.uv_limit), 1e-300)
    clipped = np.maximum(r, floor)
    if np.any(np.diff(clipped) > 1e-12 * clipped[0]):
        return math.inf
    q = kernel.remainder_power
    return float(r[0]) * min(2.0 / x, K / (q - 1)) / math.pi


def _choose_split(kernel: MomentumKernel, x_low: float, n_terms: int, spec: QuadratureSpec) -> float:
    K = spec.k_max
    while True:
        bound = n_terms * _remainder_bound(kernel, K, x_low)
        if bound <= spec.abs_tol / 4:
            return K
        K *= 2.0
        if K > spec.k_limit:
            raise ToleranceNotMet(
                f"tail bound {bound:.3e} exceeds abs_tol/4 = {spec.abs_tol / 4:.3e} "
                f"even at k = {K / 2:.3e}")


def _as_positive(x, label="x"):
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)) or np.any(xa <= 0):
        raise DomainError(f"{label} must be positive and finite")
    return xa


def _octave(x):
    return np.floor(np.log2(x)).astype(int)


def _integrate(kernel, x_low, x_high, n_terms, matrix, tail, spec):
    """Panel quadrature plus analytic tail, grouped by octave of x.

    Panel width and split point depend only on the octaves of the smallest
    and largest length in each output, so every value is a deterministic
    function of its own arguments whatever batch it is evaluated in.
    """
    lo, hi = _octave(x_low), _octave(x_high)
    out = np.empty(x_low.size)
    for key in sorted(set(zip(lo.tolist(), hi.tolist()))):
        idx = np.nonzero((lo == key[0]) & (hi == key[1]))[0]
        K = _choose_split(kernel, 2.0 ** key[0], n_terms, spec)
        h = min(spec.max_panel, spec.panel_fraction * math.pi / 2.0 ** (key[1] + 1))
        edges = _panel_edges(K, h, spec.ir_levels)
        results = []
        for n in (spec.order, spec.check_order):
            k, w = _nodes(edges, spec, n)
            fk = kernel.subtracted(k)
            if not np.all(np.isfinite(fk)):
                raise ToleranceNotMet("kernel is not finite at a quadrature node")
            results.append(_chunked_sum(k, w * fk, idx, spec, matrix))
        body, check = results
        err = float(np.max(np.abs(body - check)))
        if err > spec.abs_tol / 2:
            raise ToleranceNotMet(f"panel quadrature self-check differs by {err:.3e}")
        out[idx] = (check + tail(K, idx)) / math.pi
    return out


def cosine_transform(kernel: MomentumKernel, x, spec: QuadratureSpec | None = None):
    """(1/pi) int_0^oo cos(k x) (kernel(k) - uv_limit) dk for x > 0.

    Raises
    ------
    IRDivergenceError
        If the kernel is log-divergent at k = 0.
    ToleranceNotMet
        If the tail bound or the panel self-check cannot reach ``abs_tol``.
    """
    spec = spec or QuadratureSpec()
    if kernel.ir_class != "integrable":
        raise IRDivergenceError(
            "single cosine transform of an IR log-divergent kernel; use a difference transform")
    xa = _as_positive(x)
    xs = np.atleast_1d(xa).ravel()
    out = _integrate(kernel, xs, xs, 1,
                     lambda kk, idx: np.cos(xs[idx, None] * kk),
                     lambda K, idx: _analytic_tail(kernel, K, xs[idx]),
                     spec).reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


def cosine_difference_transform(kernel: MomentumKernel, x1, x2, spec: QuadratureSpec | None = None):
    """(1/pi) int_0^oo (cos(k x1) - cos(k x2)) (kernel(k) - uv_limit) dk.

    IR-finite for log-divergent kernels. The integrand is formed as
    -2 sin(k(x1+x2)/2) sin(k(x1-x2)/2) to avoid cancellation at small k.
    """
    spec = spec or QuadratureSpec()
    a, b = np.broadcast_arrays(_as_positive(x1, "x1"), _as_positive(x2, "x2"))
    shape = a.shape
    xa, xb = a.ravel().copy(), b.ravel().copy()
    half_sum = 0.5 * (xa + xb)
    half_diff = 0.5 * (xa - xb)
    out = _integrate(kernel, np.minimum(xa, xb), np.maximum(xa, xb), 2,
                     lambda kk, idx: -2.0 * np.sin(half_sum[idx, None] * kk) * np.sin(half_diff[idx, None] * kk),
                     lambda K, idx: _analytic_tail(kernel, K, xa[idx]) - _analytic_tail(kernel, K, xb[idx]),
                     spec).reshape(shape)
    return float(out) if out.ndim == 0 else out


def correlator_pi_full(alpha, x, spec: QuadratureSpec | None = None):
    """Full-line C_pipi(x) of a cMERA with flow function ``alpha``, contact term excluded."""
    lam = alpha.lam
    xa = _as_positive(x)
    return lam * lam * cosine_transform(alpha.pi_kernel(), lam * xa, spec)


def correlator_phi_diff_full(alpha, x1, x2, spec: QuadratureSpec | None = None):
    """C_phiphi(x1) - C_phiphi(x2) on the full line."""
    lam = alpha.lam
    return cosine_difference_transform(alpha.phi_kernel(), lam * np.asarray(x1, dtype=float),
                                       lam * np.asarray(x2, dtype=float), spec)
