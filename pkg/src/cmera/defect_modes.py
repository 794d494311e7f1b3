"""Mode functions of the free boson with a conformal defect of the first family.

For an angle theta the matching conditions at the origin are

    d_x phi(0-) = tan(theta) d_x phi(0+),   d_t phi(0-) = cot(theta) d_t phi(0+),

and an orthonormal basis of solutions is

    f_k(x) = A_+ e^{ikx} + A_- e^{-ikx}

with side-dependent coefficients (see :func:`mode_coefficients`). This
module evaluates the basis, checks its gluing and orthonormality, and
integrates defect correlators directly over modes as an oracle for the
image-form expressions in :mod:`cmera.correlators`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .errors import DomainError, ToleranceNotMet
from .flow import AlphaFn
from .profiles import Profile
from .transforms import (MomentumKernel, QuadratureSpec, _nodes, _panel_edges, _remainder_bound,
                         _tail_integrals)

_PREFACTOR = cmath.exp(1j * math.pi / 4) / (2.0 * math.sqrt(math.pi))


@dataclass(frozen=True)
class DefectParams:
    """Derived data of the defect with angle ``theta``.

    ``cosh_eta`` and ``sinh_eta`` follow (tan + cot)/2 and (tan - cot)/2;
    they are infinite at the totally reflective angles.
    """

    theta: float

    @property
    def sin2(self) -> float:
        return math.sin(2 * self.theta)

    @property
    def cos2(self) -> float:
        return math.cos(2 * self.theta)

    def _rt(self):
        # the larger of cos^2, sin^2 lies in [1/2, 1], so 1 - larger is exact and R + T == 1
        r, t = self.cos2 ** 2, self.sin2 ** 2
        return (r, 1.0 - r) if r >= t else (1.0 - t, t)

    @property
    def R(self) -> float:
        return self._rt()[0]

    @property
    def T(self) -> float:
        return self._rt()[1]

    @property
    def reflective(self) -> bool:
        return abs(self.sin2) < 1e-15

    @property
    def cosh_eta(self) -> float:
        return math.inf if self.reflective else 1.0 / self.sin2

    @property
    def sinh_eta(self) -> float:
        return math.copysign(math.inf, -self.cos2) if self.reflective else -self.cos2 / self.sin2

    @property
    def eta(self) -> float:
        return math.asinh(self.sinh_eta) if not self.reflective else self.sinh_eta

    def gluing_matrix(self) -> np.ndarray:
        """R(eta) = [[cosh eta, sinh eta], [sinh eta, cosh eta]], mapping left to right coefficients."""
        if self.reflective:
            raise DomainError("gluing matrix diverges for a totally reflective defect")
        ch, sh = self.cosh_eta, self.sinh_eta
        return np.array([[ch, sh], [sh, ch]])


def mode_coefficients(theta: float):
    """Coefficient vectors (A_+, A_-) of f_k on the left and on the right of the defect."""
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    left = _PREFACTOR * np.array([s - 1j, -1j * c])
    right = _PREFACTOR * np.array([1 - 1j * s, -c])
    return left, right


def mode_function(theta: float, k, x):
    """f_k(x) for k != 0; vectorized over broadcastable ``k`` and ``x``."""
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(k == 0):
        raise DomainError("mode functions are defined for k != 0")
    left, right = mode_coefficients(theta)
    a = np.where(x < 0, left[0], right[0])
    b = np.where(x < 0, left[1], right[1])
    phase = np.exp(1j * k * x)
    out = a * phase + b * np.conj(phase)
    return complex(out) if out.ndim == 0 else out


def extract_coefficients(theta: float, k: float, side: int, points=(0.37, 1.41)):
    """Recover (A_+, A_-) on one side by solving a 2x2 system from sampled f_k."""
    xs = side * np.abs(np.asarray(points, dtype=float))
    M = np.stack([np.exp(1j * k * xs), np.exp(-1j * k * xs)], axis=1)
    return np.linalg.solve(M, mode_function(theta, k, xs))


def matching_ratio(theta: float, k: float) -> complex:
    """d_x f_k(0-) / d_x f_k(0+) from the closed form; equals tan(theta)."""
    left, right = mode_coefficients(theta)
    return (left[0] - left[1]) / (right[0] - right[1])


@dataclass(frozen=True)
class Packet:
    """Gaussian window w(k) = amplitude exp(-(k - center)^2 / (2 width^2)), cut at +-span widths."""

    center: float
    width: float
    amplitude: complex = 1.0
    span: float = 8.0

    def support(self):
        lo = max(self.center - self.span * self.width, 1e-12)
        return lo, self.center + self.span * self.width

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return self.amplitude * np.exp(-0.5 * ((k - self.center) / self.width) ** 2)


def _gl_interval(a, b, h, n=16):
    edges = np.linspace(a, b, max(1, math.ceil((b - a) / h)) + 1)
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * np.diff(edges)[:, None]
    nodes = (edges[:-1, None] + half * (t[None, :] + 1)).ravel()
    return nodes, (half * w[None, :]).ravel()


def packet_norm(p1: Packet, p2: Packet) -> complex:
    """int dk conj(w1(k)) w2(k), the k-space value of a smeared orthonormality relation."""
    lo = min(p1.support()[0], p2.support()[0])
    hi = max(p1.support()[1], p2.support()[1])
    k, w = _gl_interval(lo, hi, min(p1.width, p2.width) / 4)
    return complex(np.sum(w * np.conj(p1(k)) * p2(k)))


def _packet_profile(theta, packet: Packet, x, k_step):
    k, w = _gl_interval(*packet.support(), k_step)
    out = np.empty(x.size, dtype=complex)
    step = max(1, 2_000_000 // k.size)
    for i in range(0, x.size, step):
        out[i:i + step] = mode_function(theta, k[None, :], x[i:i + step, None]) @ (w * packet(k))
    return out


def mode_overlap_packet(theta: float, packet1: Packet, packet2: Packet, x_extent: float | None = None) -> complex:
    """int dx conj(F1(x)) F2(x) with F(x) = int dk w(k) f_k(x), by position-space quadrature.

    Should equal :func:`packet_norm` when the basis is orthonormal.
    """
    k_top = max(packet1.support()[1], packet2.support()[1])
    width = min(packet1.width, packet2.width)
    L = x_extent if x_extent is not None else 12.0 / width
    h = math.pi / (2.0 * k_top)
    total = 0.0j
    for side in (-1.0, 1.0):
        xs, wx = _gl_interval(0.0, L, h)
        xs = side * xs
        k_step = math.pi / (2.0 * L)
        F1 = _packet_profile(theta, packet1, xs, k_step)
        F2 = _packet_profile(theta, packet2, xs, k_step)
        total += np.sum(wx * np.conj(F1) * F2)
    return complex(total)


def _exact_phi_kernel():
    return MomentumKernel(lambda k: 0.5 / k, uv_limit=0.0, ir_class="log-divergent",
                          tail=((1, 0.5),), name="1/(2|k|)")


def _pair_terms(theta, x, y):
    """Cosine decomposition f_k(x) conj(f_k(y)) + (k -> -k) = sum_j C_j cos(k nu_j)."""
    left, right = mode_coefficients(theta)
    ax = left if x < 0 else right
    ay = left if y < 0 else right
    terms = []
    for i, sx in enumerate((1.0, -1.0)):
        for j, sy in enumerate((1.0, -1.0)):
            terms.append((2.0 * (ax[i] * np.conj(ay[j])).real, abs(sx * x - sy * y)))
    return terms


def _merge(terms, zero_tol=1e-12):
    merged = {}
    for coef, nu in terms:
        key = round(nu, 12)
        merged[key] = merged.get(key, 0.0) + coef
    out = []
    for nu, coef in merged.items():
        if nu < zero_tol:
            if abs(coef) > 1e-12:
                raise DomainError("non-oscillating mode term does not cancel (mirror points x = -y?)")
            continue
        if coef != 0.0:
            out.append((coef, nu))
    return out


def _mode_integral(theta, kernel: MomentumKernel, pairs, spec: QuadratureSpec):
    """int_R dk of sum over pairs of sign * f_k(a) conj(f_k(b)) (w(|k|) - uv)."""
    terms = []
    for sign, a, b in pairs:
        terms += [(sign * c, nu) for c, nu in _pair_terms(theta, a, b)]
    terms = _merge(terms)
    nus = np.array([nu for _, nu in terms])
    coefs = np.array([c for c, _ in terms])
    if nus.size == 0:
        return 0.0
    K = spec.k_max
    while True:
        bound = sum(abs(c) * _remainder_bound(kernel, K, nu) * math.pi for c, nu in terms)
        if bound <= spec.abs_tol / 4:
            break
        K *= 2.0
        if K > spec.k_limit:
            raise ToleranceNotMet(f"mode-integral tail bound {bound:.3e} not reached")
    h = min(spec.max_panel, spec.panel_fraction * math.pi / float(nus.max()))
    edges = _panel_edges(K, h, spec.ir_levels)
    k, w = _nodes(edges, spec, spec.order)
    weight = w * kernel.subtracted(k)
    body = 0.0
    step = max(1, spec.chunk_elements // 8)
    for i in range(0, k.size, step):
        kk = k[i:i + step]
        acc = np.zeros(kk.size)
        for sign, a, b in pairs:
            pos = mode_function(theta, kk, a) * np.conj(mode_function(theta, kk, b))
            neg = mode_function(theta, -kk, a) * np.conj(mode_function(theta, -kk, b))
            acc += sign * (pos + neg).real
        body += float(acc @ weight[i:i + step])
    tail = 0.0
    if kernel.tail:
        pmax = max(p for p, _ in kernel.tail)
        J = _tail_integrals(K, nus, pmax)
        tail = float(sum(c * (coefs @ J[p]) for p, c in kernel.tail))
    return body + tail


def defect_correlator_mode_oracle(theta: float, source, x: float, y: float, observable: str = "pipi",
                                  x_ref: float | None = None, spec: QuadratureSpec | None = None) -> float:
    """Defect correlator from direct integration over the mode basis.

    ``source`` is ``"exact"`` (phi-phi differences only, weight 1/(2|k|)), or a
    :class:`Profile` / :class:`AlphaFn` (weights alpha/2 for pipi with the
    contact term removed, 1/(2 alpha) for phiphi-diff). phiphi-diff returns
    G(x, y) - G(x_ref, y).
    """
    spec = spec or QuadratureSpec(abs_tol=1e-10)
    if x == 0 or y == 0 or x == y:
        raise DomainError("x, y must be nonzero and distinct")
    if source == "exact":
        lam = 1.0
        if observable != "phiphi-diff":
            raise DomainError("the exact mode oracle supports phiphi-diff only")
        kernel = _exact_phi_kernel()
    else:
        alpha = AlphaFn(source) if isinstance(source, Profile) else source
        lam = alpha.lam
        kernel = alpha.pi_kernel() if observable == "pipi" else alpha.phi_kernel()
    x, y = lam * x, lam * y
    if observable == "pipi":
        return lam * lam * _mode_integral(theta, kernel, [(1.0, x, y)], spec)
    if observable == "phiphi-diff":
        if x_ref is None:
            raise DomainError("phiphi-diff requires x_ref")
        xr = lam * x_ref
        if (xr < 0) != (x < 0) or xr == y:
            raise DomainError("x_ref must be on the side of x and differ from y")
        return _mode_integral(theta, kernel, [(1.0, x, y), (-1.0, xr, y)], spec)
    raise DomainError(f"unknown observable {observable!r}")


def second_family_obstruction(theta: float, k: float, q: float, with_pole: bool = False) -> complex:
    """Coefficient of the i/(k+q) overlap between positive-momentum solutions of the second family.

    The second family glues d_x phi(0-) = cot(theta) d_t phi(0+) and
    d_t phi(0-) = tan(theta) d_x phi(0+). For k > 0 these restrict the
    coefficients (alpha, beta, alpha', beta') to a two-dimensional space.
    With a real orthonormal basis (e1, e2) of that space, oriented so the
    left blocks have non-negative determinant, the returned value is
    B(e1, e2) - B(e1', e2') with B(u, v) = conj(u_1) v_2 - conj(u_2) v_1,
    the form multiplying i/(k+q). It vanishes only when no solution pair
    overlaps, i.e. for totally reflective gluings.
    """
    if not (k > 0 and q > 0):
        raise DomainError("k and q must be positive")
    s, c = math.sin(theta), math.cos(theta)
    M = np.array([[s, -s, c, c], [c, c, s, -s]])
    N = null_space(M)
    e1, e2 = N[:, 0], N[:, 1]
    det_left = e1[0] * e2[1] - e1[1] * e2[0]
    det_right = e1[2] * e2[3] - e1[3] * e2[2]
    if det_left < -1e-14 or (abs(det_left) <= 1e-14 and det_right < 0):
        e2 = -e2

    def form(u, v):
        return np.conj(u[0]) * v[1] - np.conj(u[1]) * v[0]

    coef = complex(form(e1[:2], e2[:2]) - form(e1[2:], e2[2:]))
    return coef * 1j / (k + q) if with_pole else coef
