"""Structure specific to the exponential ("magic") profile.

Covers the local parent-Hamiltonian dispersion, the occupation number of the
cMERA state in the unentangled-state basis, and the finite-state automata
that write the entanglers as continuous MPOs in the field

    psi(x) = sqrt(Lambda/2) phi(x) + i pi(x) / sqrt(2 Lambda).

States of the automata are numbered 1..chi in docstrings and 0..chi-1 in code.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import erfcx

from .errors import DomainError
from .flow import ir_mass
from .geometry import Geometry
from .mpo import Generator, MpoChain, PathKernel, discretize, mpo_path_product
from .profiles import Profile


def mass(s: float, lam: float = 1.0) -> float:
    """IR mass m(s) = Lambda e^{-s}."""
    return ir_mass(Profile("magic", lam), s)


def dispersion(k, s: float = math.inf, lam: float = 1.0):
    """Parent-Hamiltonian dispersion sqrt(k^2 + m^2) sqrt(k^2 + Lambda^2) / Lambda."""
    k = np.asarray(k, dtype=float)
    m = mass(s, lam)
    val = np.sqrt(k * k + m * m) * np.sqrt(k * k + lam * lam) / lam
    return float(val) if val.ndim == 0 else val


def occupation_number(k, s: float = math.inf, lam: float = 1.0):
    """Mean occupation of the unentangled modes, (alpha/Lambda + Lambda/alpha - 2)/4.

    Written as (r - 1)^2 / (4 r) with r = alpha/Lambda and r - 1 computed
    without cancellation, so the k^-4 tail stays accurate.
    """
    k = np.asarray(k, dtype=float)
    m = mass(s, lam)
    k2 = k * k
    a = k2 + m * m
    b = k2 + lam * lam
    sa, sb = np.sqrt(a), np.sqrt(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = sa / sb
        rm1 = (a - b) / (sb * (sa + sb))
        val = rm1 * rm1 / (4.0 * r)
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# automata

def generator_k(lam: float) -> Generator:
    """A_K (chi = 4): the full-line entangler, <1| ... |4>."""
    return Generator(
        diag=(0.0, -lam, -lam, 0.0),
        edges=((0, 1, "psi", -0.25j * lam), (0, 2, "psid", 0.25j * lam),
               (1, 3, "psi", 1.0), (2, 3, "psid", 1.0)),
    )


def generator_r(lam: float) -> Generator:
    """A_R (chi = 5): A_K plus an image source in state 5, used on x > 0 with <1| + xi <5|."""
    k = generator_k(lam)
    return Generator(
        diag=k.diag + (-2.0 * lam,),
        edges=k.edges + ((4, 1, "psi", -0.25j * lam), (4, 2, "psid", 0.25j * lam)),
    )


def generator_l(lam: float) -> Generator:
    """A_L (chi = 5): A_K plus an image sink in state 5, used on x < 0 with |4> + xi |5>."""
    k = generator_k(lam)
    return Generator(
        diag=k.diag + (-2.0 * lam,),
        edges=k.edges + ((1, 4, "psi", 1.0), (2, 4, "psid", 1.0)),
    )


def example_mpo(E, F, lam_factor: float, positions=None) -> MpoChain:
    """The 3 x 3 chain [[1, E_m, 0], [0, lambda, F_m], [0, 0, 1]] with psi-valued E_m, F_m.

    E and F are the psi coefficients per site.
    """
    E = np.asarray(E, dtype=complex)
    F = np.asarray(F, dtype=complex)
    if E.shape != F.shape or E.ndim != 1:
        raise DomainError("E and F must be 1-d arrays of equal length")
    n = E.size
    c = np.zeros((3, n, 3, 3), dtype=complex)
    c[0, :, 0, 0] = 1.0
    c[0, :, 1, 1] = lam_factor
    c[0, :, 2, 2] = 1.0
    c[1, :, 0, 1] = E
    c[1, :, 1, 2] = F
    x = np.arange(1, n + 1, dtype=float) if positions is None else np.asarray(positions, dtype=float)
    return MpoChain(c, x, 1.0)


def defect_matrix(theta: float) -> np.ndarray:
    """Scalar insertion D at the defect (chi = 5) with s = sin 2theta, c = cos 2theta."""
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    D = np.zeros((5, 5), dtype=complex)
    D[0, 0] = 1.0
    D[0, 4] = -c
    D[1, 1] = s
    D[2, 2] = s
    D[3, 3] = 1.0
    D[4, 3] = c
    return D


def _sites(a: float, b: float, eps: float) -> np.ndarray:
    n = int(round((b - a) / eps))
    if n < 1 or not math.isclose(n * eps, b - a, rel_tol=1e-9, abs_tol=1e-12):
        raise DomainError("the interval length must be a multiple of eps")
    return a + (np.arange(n) + 0.5) * eps


def _basis(chi, i):
    e = np.zeros(chi, dtype=complex)
    e[i] = 1.0
    return e


def full_line_kernel(lam: float, eps: float, half_width: float) -> PathKernel:
    """A_K on [-L, L] with <1| ... |4>."""
    chain = discretize(generator_k(lam), _sites(-half_width, half_width, eps), eps)
    return mpo_path_product(chain, _basis(4, 0), _basis(4, 3))


def boundary_kernel(lam: float, eps: float, length: float, xi: int, side: str = "right") -> PathKernel:
    """Half-line automaton: A_R on [0, L] with <1| + xi <5|, or A_L on [-L, 0] with |4> + xi |5>."""
    if xi not in (-1, 1):
        raise DomainError("xi must be -1 or +1")
    if side == "right":
        chain = discretize(generator_r(lam), _sites(0.0, length, eps), eps)
        return mpo_path_product(chain, _basis(5, 0) + xi * _basis(5, 4), _basis(5, 3))
    if side == "left":
        chain = discretize(generator_l(lam), _sites(-length, 0.0, eps), eps)
        return mpo_path_product(chain, _basis(5, 0), _basis(5, 3) + xi * _basis(5, 4))
    raise DomainError("side must be 'left' or 'right'")


def defect_kernel(lam: float, eps: float, half_width: float, theta: float) -> PathKernel:
    """A_L on [-L, 0], D at the origin, A_R on [0, L]; <1| ... |4>."""
    left = discretize(generator_l(lam), _sites(-half_width, 0.0, eps), eps)
    right = discretize(generator_r(lam), _sites(0.0, half_width, eps), eps)
    chain = left.join(right, defect_matrix(theta))
    return mpo_path_product(chain, _basis(5, 0), _basis(5, 3))


# ---------------------------------------------------------------------------
# continuum targets and checks

def target_kernel(geometry: Geometry, lam: float, x, y, xi_image=None):
    """Symmetrized psi psi coefficient of the magic entangler.

    Bulk (-i Lambda/8) e^{-Lambda|x-y|} plus the image term (-i Lambda/8) w e^{-Lambda(|x|+|y|)}
    with w = xi (boundary) or c_theta (defect).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = geometry.image_weight(x, y) if xi_image is None else xi_image
    return -0.125j * lam * (np.exp(-lam * np.abs(x - y)) + w * np.exp(-lam * (np.abs(x) + np.abs(y))))


def _sample_rows(n: int, count: int) -> np.ndarray:
    return np.unique(np.linspace(0, n - 2, count).round().astype(int))


@dataclass
class KernelReport:
    geometry: dict
    epsilon: float
    kernel_error: float
    conjugate_error: float
    cross_species_weight: float
    lower_degree_weight: float

    def to_dict(self) -> dict:
        return asdict(self)


def kernel_to_entangler_check(kernel: PathKernel, geometry: Geometry, lam: float = 1.0,
                              rows: int = 9) -> KernelReport:
    """Compare the automaton kernel with the continuum entangler at lattice points.

    For m < n the psi psi weight of a chain equals eps^2 times twice the
    symmetrized continuum coefficient. psid psid must be the complex
    conjugate and the mixed species must vanish.
    """
    chain = kernel.chain
    eps = chain.eps
    ms = _sample_rows(chain.n, rows)
    x = chain.x
    err = conj = cross = 0.0
    pp = kernel.rows("psi psi", ms)
    dd = kernel.rows("psid psid", ms)
    mixed = np.abs(kernel.rows("psi psid", ms)) + np.abs(kernel.rows("psid psi", ms))
    for r, m in enumerate(ms):
        n = np.arange(m + 1, chain.n)
        target = target_kernel(geometry, lam, x[m], x[n])
        got = pp[r, n] / (2.0 * eps * eps)
        scale = np.abs(target) + 1e-300
        live = np.abs(target) > 1e-13 * lam
        if np.any(live):
            err = max(err, float(np.max(np.abs(got - target)[live] / scale[live])))
        conj = max(conj, float(np.max(np.abs(dd[r, n] - np.conj(pp[r, n])), initial=0.0)) / eps**2)
        cross = max(cross, float(np.max(mixed[r], initial=0.0)) / eps**2)
    low = abs(kernel.degree0) + max(float(np.max(np.abs(v), initial=0.0)) for v in kernel.degree1.values())
    return KernelReport(geometry.to_dict(), eps, err, conj, cross, low)


def _smearing(lam: float):
    # two distinct Gaussian test functions, centres 1/Lambda apart
    mu_a, mu_b, width = -0.5 / lam, 0.5 / lam, 1.0 / lam
    return mu_a, mu_b, width


def smeared_exact(lam: float) -> complex:
    """(-i Lambda/4) int_{x<y} e^{-Lambda(y-x)} a(x) b(y) for the fixed test functions.

    The inner integral is done in closed form with erfcx and the outer
    one with a dense Gauss-Legendre rule.
    """
    mu_a, mu_b, s = _smearing(lam)
    nodes, weights = np.polynomial.legendre.leggauss(400)
    half = 12.0 * s
    y = mu_b + half * nodes
    wy = half * weights
    # int_{-inf}^y e^{-lam (y - x)} e^{-(x - mu_a)^2 / (2 s^2)} dx
    u = (lam * s * s - (y - mu_a)) / (s * math.sqrt(2.0))
    inner = s * math.sqrt(math.pi / 2.0) * np.exp(-((y - mu_a) ** 2) / (2 * s * s)) * erfcx(u)
    b = np.exp(-((y - mu_b) ** 2) / (2 * s * s))
    return complex(-0.25j * lam * np.sum(wy * inner * b))


def smeared_chain(lam: float, eps: float, half_width: float = 20.0) -> complex:
    """Automaton counterpart of :func:`smeared_exact` on [-L, L]."""
    pk = full_line_kernel(lam, eps, half_width / lam)
    mu_a, mu_b, s = _smearing(lam)
    x = pk.chain.x
    a = np.exp(-((x - mu_a) ** 2) / (2 * s * s))
    b = np.exp(-((x - mu_b) ** 2) / (2 * s * s))
    return pk.smeared("psi psi", a, b)


@dataclass
class ConvergenceReport:
    epsilon: list
    kernel_error: list
    pointwise_error: list
    convergence_order: list

    @property
    def min_order(self) -> float:
        return min(self.convergence_order)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["min_order"] = self.min_order
        return d


def convergence_study(lam: float = 1.0, epsilons=(4e-3, 2e-3, 1e-3), half_width: float = 20.0,
                      rows: int = 5) -> ConvergenceReport:
    """Error of the A_K chain against the continuum entangler as eps shrinks.

    The kernel error is measured on the smeared operator: lattice-point
    values are exact, and the O(eps) discretization error comes from the
    excluded coincident pairs m = n.
    """
    exact = smeared_exact(lam)
    errs, pointwise = [], []
    for eps in epsilons:
        errs.append(abs(smeared_chain(lam, eps / lam, half_width) - exact) / abs(exact))
        pk = full_line_kernel(lam, eps / lam, half_width / lam)
        pointwise.append(kernel_to_entangler_check(pk, Geometry.full(), lam, rows).kernel_error)
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(epsilons[i] / epsilons[i + 1])
              for i in range(len(errs) - 1)]
    return ConvergenceReport(list(epsilons), errs, pointwise, orders)


def _pair_block(kernel: PathKernel, species: str, rows_idx, cols_mask):
    block = kernel.rows(species, rows_idx)
    return block[:, cols_mask]


@dataclass
class FactorizationReport:
    theta: float
    epsilon: float
    xi_left: int
    xi_right: int
    cross_side_weight: float
    left_deviation: float
    right_deviation: float
    factorization_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def cmpo_defect_factorization_check(theta: float, lam: float = 1.0, eps: float = 1e-2,
                                    half_width: float = 10.0, tol: float = 1e-12) -> FactorizationReport:
    """At a totally reflecting defect the A_L-D-A_R kernel splits into two half-line kernels.

    Cross-side psi psi and psid psid weights must vanish and each side must
    equal the boundary automaton with xi_L = cos 2theta, xi_R = -cos 2theta.
    """
    c2 = math.cos(2 * theta)
    if abs(abs(c2) - 1.0) > 1e-12:
        raise DomainError("factorization needs a totally reflecting defect, theta in {0, pi/2}")
    xi_l, xi_r = int(round(c2)), int(round(-c2))
    L = half_width / lam
    dk = defect_kernel(lam, eps / lam, L, theta)
    left = boundary_kernel(lam, eps / lam, L, xi_l, "left")
    right = boundary_kernel(lam, eps / lam, L, xi_r, "right")
    nl = left.chain.n
    n = dk.chain.n
    idx_l = np.arange(nl)
    idx_r = np.arange(nl, n)
    scale = lam * (eps / lam) ** 2
    cross = 0.0
    dev_l = dev_r = 0.0
    for species in ("psi psi", "psid psid"):
        full_rows_l = dk.rows(species, idx_l)
        cross = max(cross, float(np.max(np.abs(full_rows_l[:, nl:]))) / scale)
        dev_l = max(dev_l, float(np.max(np.abs(full_rows_l[:, :nl] - left.matrix(species)))) / scale)
        full_rows_r = dk.rows(species, idx_r)
        dev_r = max(dev_r, float(np.max(np.abs(full_rows_r[:, nl:] - right.matrix(species)))) / scale)
    ok = cross <= tol and dev_l <= tol and dev_r <= tol
    return FactorizationReport(theta, eps / lam, xi_l, xi_r, cross, dev_l, dev_r, ok)


def defect_trivial_check(lam: float = 1.0, eps: float = 1e-2, half_width: float = 10.0) -> float:
    """Max |K_defect - K_bulk| / (Lambda eps^2) at theta = pi/4 over all pairs and species."""
    L = half_width / lam
    dk = defect_kernel(lam, eps / lam, L, math.pi / 4)
    bulk = full_line_kernel(lam, eps / lam, L)
    dev = 0.0
    for species in ("psi psi", "psid psid", "psi psid", "psid psi"):
        dev = max(dev, float(np.max(np.abs(dk.matrix(species) - bulk.matrix(species)))))
    return dev / (lam * (eps / lam) ** 2)


def write_report(payload: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path
