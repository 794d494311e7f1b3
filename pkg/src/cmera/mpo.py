"""Matrix product operators with entries linear in a bosonic field.

Each site m carries a chi x chi matrix whose entries are combinations
a 1 + b psi(x_m) + c psi^dagger(x_m), stored as three coefficient arrays.
Scalar matrices (no physical legs) can be inserted between sites. The
operator <v| A_1 ... A_N |w> is expanded in powers of the field; products
of fields at distinct sites commute, so the degree-2 part is a kernel
K_s(m, n), m < n, for each species s in {psi psi, psi psid, psid psi, psid psid}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeOverflow, DimensionMismatch

SPECIES = ("psi psi", "psi psid", "psid psi", "psid psid")
_FIELD = {"psi": 1, "psid": 2}


@dataclass(frozen=True)
class MpoMatrix:
    """One site: ``entries[0]`` multiplies 1, ``entries[1]`` psi and ``entries[2]`` psi^dagger."""

    entries: np.ndarray
    position: float

    @property
    def chi(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class Generator:
    """Continuum matrix A(x): diagonal identity rates plus field edges (i, j, species, coef)."""

    diag: tuple
    edges: tuple

    @property
    def chi(self) -> int:
        return len(self.diag)


@dataclass
class MpoChain:
    """A chain of sites with optional scalar insertions.

    ``insertions[i]`` acts between site i - 1 and site i (so index 0 is
    before the first site and index N after the last).
    """

    coeffs: np.ndarray  # (3, N, chi, chi)
    x: np.ndarray
    eps: float
    insertions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coeffs.ndim != 4 or self.coeffs.shape[0] != 3 or self.coeffs.shape[2] != self.coeffs.shape[3]:
            raise DimensionMismatch("coefficients must have shape (3, N, chi, chi)")
        if self.coeffs.shape[1] != self.x.size:
            raise DimensionMismatch("one position per site is required")
        for i, D in self.insertions.items():
            if not 0 <= i <= self.n:
                raise DimensionMismatch(f"insertion index {i} outside the chain")
            if np.shape(D) != (self.chi, self.chi):
                raise DimensionMismatch("insertion does not match the bond dimension")

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def chi(self) -> int:
        return self.coeffs.shape[2]

    def matrix(self, m: int) -> MpoMatrix:
        return MpoMatrix(self.coeffs[:, m], float(self.x[m]))

    @classmethod
    def from_matrices(cls, matrices, eps: float = 1.0, insertions=None) -> "MpoChain":
        chis = {M.chi for M in matrices}
        if len(chis) != 1:
            raise DimensionMismatch(f"inconsistent bond dimensions {sorted(chis)}")
        coeffs = np.stack([M.entries for M in matrices], axis=1).astype(complex)
        x = np.array([M.position for M in matrices], dtype=float)
        return cls(coeffs, x, eps, dict(insertions or {}))

    def join(self, other: "MpoChain", insertion=None) -> "MpoChain":
        """Concatenate two chains, optionally with a scalar matrix between them."""
        if other.chi != self.chi:
            raise DimensionMismatch("cannot join chains of different bond dimension")
        ins = dict(self.insertions)
        for i, D in other.insertions.items():
            ins[i + self.n] = D if i != 0 or insertion is None else D
        if insertion is not None:
            if self.n in ins:
                ins[self.n] = ins[self.n] @ np.asarray(insertion)
            else:
                ins[self.n] = np.asarray(insertion, dtype=complex)
        return MpoChain(np.concatenate([self.coeffs, other.coeffs], axis=1),
                        np.concatenate([self.x, other.x]), self.eps, ins)

    def scaled(self, species: str, rows, factor: complex) -> "MpoChain":
        """Copy with the ``species`` entries on the given rows multiplied by ``factor``."""
        c = self.coeffs.copy()
        c[_FIELD[species], :, rows, :] *= factor
        return MpoChain(c, self.x.copy(), self.eps, dict(self.insertions))


def discretize(gen: Generator, x, eps: float) -> MpoChain:
    """Sites A_m = 1 + eps A(x_m) in exponentiated form.

    Diagonal entries become exp(eps d_i) and an edge i -> j becomes
    eps * coef * exp(eps (d_i + d_j) / 2), which reproduces the
    exp(-Lambda eps / 2) factors of the discretized magic MPO exactly.
    """
    x = np.asarray(x, dtype=float)
    chi = gen.chi
    d = np.asarray(gen.diag, dtype=float)
    base = np.zeros((3, chi, chi), dtype=complex)
    base[0][np.diag_indices(chi)] = np.exp(eps * d)
    for i, j, species, coef in gen.edges:
        base[_FIELD[species], i, j] += eps * coef * np.exp(0.5 * eps * (d[i] + d[j]))
    coeffs = np.broadcast_to(base[:, None], (3, x.size, chi, chi)).copy()
    return MpoChain(coeffs, x, eps)


def _apply_insertion_row(chain, i, u):
    D = chain.insertions.get(i)
    return u if D is None else u @ D


def _apply_insertion_col(chain, i, u):
    D = chain.insertions.get(i)
    return u if D is None else D @ u


@dataclass
class PathKernel:
    """Field expansion of <v| chain |w> up to degree two."""

    chain: MpoChain
    v: np.ndarray
    w: np.ndarray
    left_env: np.ndarray   # (N, chi): <v| up to (not including) site m
    right_env: np.ndarray  # (N, chi): from after site n to |w>
    degree0: complex
    degree1: dict

    def rows(self, species: str, m_indices) -> np.ndarray:
        """K_s(m, n) for the requested m and all n (zero for n <= m)."""
        first, second = species.split()
        P = self.chain.coeffs[_FIELD[first]]
        Q = self.chain.coeffs[_FIELD[second]]
        ident = self.chain.coeffs[0]
        m_indices = np.atleast_1d(np.asarray(m_indices, dtype=int))
        out = np.zeros((m_indices.size, self.chain.n), dtype=complex)
        U = np.zeros((m_indices.size, self.chain.chi), dtype=complex)
        start = int(m_indices.min())
        for n in range(start, self.chain.n):
            U = _apply_insertion_row(self.chain, n, U)
            out[:, n] = U @ (Q[n] @ self.right_env[n])
            U = U @ ident[n]
            hit = m_indices == n
            if hit.any():
                U[hit] += self.left_env[n] @ P[n]
        return out

    def matrix(self, species: str) -> np.ndarray:
        """Full N x N kernel; only sensible for short chains."""
        return self.rows(species, np.arange(self.chain.n))

    def smeared(self, species: str, a, b) -> complex:
        """sum_{m<n} K_s(m, n) a_m b_n by a single graded sweep."""
        first, second = species.split()
        P = self.chain.coeffs[_FIELD[first]]
        Q = self.chain.coeffs[_FIELD[second]]
        ident = self.chain.coeffs[0]
        a = np.asarray(a)
        b = np.asarray(b)
        u0 = self.v.astype(complex)
        u1 = np.zeros_like(u0)
        u2 = np.zeros_like(u0)
        for n in range(self.chain.n):
            u0 = _apply_insertion_row(self.chain, n, u0)
            u1 = _apply_insertion_row(self.chain, n, u1)
            u2 = _apply_insertion_row(self.chain, n, u2)
            u2 = u2 @ ident[n] + b[n] * (u1 @ Q[n])
            u1 = u1 @ ident[n] + a[n] * (u0 @ P[n])
            u0 = u0 @ ident[n]
        u2 = _apply_insertion_row(self.chain, self.chain.n, u2)
        return complex(u2 @ self.w)


def _check_degree(chain: MpoChain, v, w, max_degree: int = 2):
    # propagate absolute values graded by field degree; any weight beyond max_degree is an overflow
    A0 = np.abs(chain.coeffs[0])
    A1 = np.abs(chain.coeffs[1]) + np.abs(chain.coeffs[2])
    grades = np.zeros((max_degree + 2, chain.chi))
    grades[0] = np.abs(v)
    for n in range(chain.n):
        D = chain.insertions.get(n)
        if D is not None:
            grades = grades @ np.abs(D)
        new = grades @ A0[n]
        new[1:] += grades[:-1] @ A1[n]
        grades = new / max(1.0, float(grades.max(initial=0.0)))  # rescale, only support matters
    D = chain.insertions.get(chain.n)
    if D is not None:
        grades = grades @ np.abs(D)
    if grades[max_degree + 1] @ np.abs(w) > 0:
        raise DegreeOverflow(f"automaton produces field products of degree > {max_degree}")


def mpo_path_product(chain: MpoChain, v, w) -> PathKernel:
    """Expand <v| A_1 (D) ... A_N |w> to degree two in the fields.

    Raises
    ------
    DimensionMismatch
        If boundary vectors do not match the bond dimension.
    DegreeOverflow
        If some path carries three or more field insertions.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != (chain.chi,) or w.shape != (chain.chi,):
        raise DimensionMismatch("boundary vectors must have length chi")
    _check_degree(chain, v, w)
    ident = chain.coeffs[0]
    N = chain.n
    left = np.zeros((N, chain.chi), dtype=complex)
    u = v.copy()
    for m in range(N):
        u = _apply_insertion_row(chain, m, u)
        left[m] = u
        u = u @ ident[m]
    u = _apply_insertion_row(chain, N, u)
    degree0 = complex(u @ w)
    right = np.zeros((N, chain.chi), dtype=complex)
    r = _apply_insertion_col(chain, N, w.copy())
    for m in range(N - 1, -1, -1):
        right[m] = r
        r = ident[m] @ r
        r = _apply_insertion_col(chain, m, r)
    degree1 = {s: np.einsum("mi,mij,mj->m", left, chain.coeffs[_FIELD[s]], right) for s in _FIELD}
    return PathKernel(chain, v, w, left, right, degree0, degree1)
