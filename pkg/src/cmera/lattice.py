"""Lattice discretization of the magic parent Hamiltonian and its exact ground state.

On sites x_j with spacing a, the Hamiltonian

    H = 1/2 int [pi^2 + (d phi)^2 + (d pi)^2 / Lambda^2 + m^2 phi^2]

becomes H = 1/2 (p^T A p + q^T B q) with q_j = sqrt(a) phi(x_j),
p_j = sqrt(a) pi(x_j) and

    A = 1 + L / (Lambda a)^2,    B = L / a^2 + m^2,

where L is the second-difference stencil for the chosen boundary. The
ground-state covariances follow from one symmetric eigendecomposition of
A and one of M = A^{1/2} B A^{1/2}. Dividing by a gives continuum values. When A and B
are both functions of the stencil (always true for :meth:`LatticeModel.magic`)
a single eigendecomposition of L diagonalizes everything at once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.linalg import LinAlgError, eigh

from .errors import DomainError, ToleranceNotMet

Boundary = Literal["periodic", "dirichlet", "neumann"]

# eigenvalues below this fraction of the largest count as zero modes
_SINGULAR = 1e-12


def laplacian(n: int, boundary: Boundary) -> np.ndarray:
    """Second-difference matrix (positive semidefinite).

    Dirichlet pins phi at x_0 = 0 and at x_{n+1}; Neumann mirrors the
    stencil across the half-integer end points, so the end diagonals are 1.
    """
    if n < 1:
        raise DomainError("need at least one site")
    L = 2.0 * np.eye(n)
    i = np.arange(n - 1)
    L[i, i + 1] = L[i + 1, i] = -1.0
    if boundary == "periodic":
        if n > 2:
            L[0, -1] = L[-1, 0] = -1.0
        elif n == 2:
            L[0, 1] = L[1, 0] = -2.0
        else:
            L[0, 0] = 0.0
    elif boundary == "neumann":
        L[0, 0] = L[-1, -1] = 1.0
        if n == 1:
            L[0, 0] = 0.0
    elif boundary != "dirichlet":
        raise DomainError(f"unknown boundary {boundary!r}")
    return L


@dataclass
class LatticeModel:
    n_sites: int
    a: float
    A: np.ndarray
    B: np.ndarray
    boundary: Boundary
    positions: np.ndarray
    # (L, lam, m) when A and B are the magic functions of the stencil L
    stencil: tuple | None = None

    def __post_init__(self):
        for name in ("A", "B"):
            M = getattr(self, name)
            if M.shape != (self.n_sites, self.n_sites):
                raise DomainError(f"{name} must be {self.n_sites} x {self.n_sites}")
            if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, float(np.abs(M).max()))):
                raise DomainError(f"{name} must be symmetric")

    @classmethod
    def magic(cls, n: int, a: float, lam: float, m: float, boundary: Boundary = "periodic") -> "LatticeModel":
        """Parent Hamiltonian of the magic cMERA at IR mass ``m``.

        Sites sit at x_j = j a (periodic, Dirichlet) or (j - 1/2) a (Neumann), j = 1..n.
        """
        if not (a > 0 and lam > 0 and m >= 0):
            raise DomainError("need a > 0, Lambda > 0 and m >= 0")
        L = laplacian(n, boundary)
        A = np.eye(n) + L / (lam * a) ** 2
        B = L / a**2 + m * m * np.eye(n)
        j = np.arange(1, n + 1, dtype=float)
        x = (j - 0.5) * a if boundary == "neumann" else j * a
        return cls(n, a, A, B, boundary, x, (L, lam, m))


def _sym_eigh(M: np.ndarray, name: str):
    try:
        w, V = eigh(M)
    except LinAlgError as exc:
        raise ToleranceNotMet(f"eigendecomposition of {name} failed: {exc}") from exc
    return w, V


def _spectral_covariance(model: LatticeModel):
    L, lam, m = model.stencil
    w, V = _sym_eigh(L, "the stencil")
    w = np.clip(w, 0.0, None)
    a_eig = 1.0 + w / (lam * model.a) ** 2
    b_eig = w / model.a**2 + m * m
    if b_eig.min() <= _SINGULAR * b_eig.max():
        raise DomainError("B must be positive definite for a normalizable ground state")
    ratio = np.sqrt(a_eig / b_eig)
    phi = (V * (0.5 * ratio)) @ V.T
    pi = (V * (0.5 / ratio)) @ V.T
    return 0.5 * (phi + phi.T), 0.5 * (pi + pi.T)


def ground_covariance(model: LatticeModel, method: str = "auto"):
    """Return (<q q^T>, <p p^T>) for the ground state of 1/2 (p^T A p + q^T B q).

    ``method`` is ``"general"`` (eigendecompositions of A and M),
    ``"spectral"`` (one eigendecomposition of the stencil; needs a model
    from :meth:`LatticeModel.magic`) or ``"auto"`` (spectral when possible).

    Raises
    ------
    DomainError
        If A is not positive definite or M is not strictly positive (B
        singular, e.g. a massless periodic chain).
    """
    if method not in ("auto", "general", "spectral"):
        raise DomainError(f"unknown method {method!r}")
    if method == "spectral" and model.stencil is None:
        raise DomainError("the spectral route needs a stencil-based model")
    if method != "general" and model.stencil is not None:
        return _spectral_covariance(model)
    wa, Va = _sym_eigh(model.A, "A")
    if wa.min() <= _SINGULAR * abs(wa).max():
        raise DomainError("A must be positive definite")
    A_half = (Va * np.sqrt(wa)) @ Va.T
    A_mhalf = (Va / np.sqrt(wa)) @ Va.T
    M = A_half @ model.B @ A_half
    M = 0.5 * (M + M.T)
    wm, Vm = _sym_eigh(M, "A^1/2 B A^1/2")
    if wm.min() <= _SINGULAR * abs(wm).max():
        raise DomainError("B must be positive definite for a normalizable ground state")
    M_mhalf = (Vm / np.sqrt(wm)) @ Vm.T
    M_half = (Vm * np.sqrt(wm)) @ Vm.T
    phi = 0.5 * A_half @ M_mhalf @ A_half
    pi = 0.5 * A_mhalf @ M_half @ A_mhalf
    return 0.5 * (phi + phi.T), 0.5 * (pi + pi.T)


def boundary_ground_covariance(model: LatticeModel, method: str = "auto"):
    """:func:`ground_covariance` restricted to half-line models."""
    if model.boundary not in ("dirichlet", "neumann"):
        raise DomainError("boundary_ground_covariance needs a dirichlet or neumann model")
    return ground_covariance(model, method)


def purity_deviation(phi: np.ndarray, pi: np.ndarray) -> float:
    """max |(<qq><pp> - 1/4)_ij|.

    Without q-p cross correlations a Gaussian state is pure exactly when
    <qq><pp> = 1/4, so this vanishes (to rounding) only for the ground state.
    """
    return float(np.max(np.abs(phi @ pi - 0.25 * np.eye(phi.shape[0]))))


def write_report(payload: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path
