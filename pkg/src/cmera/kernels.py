"""Position-space entangler kernels and the minimal-update envelope.

The entangler is K = int dx dy k(x, y) phi(x) pi(y) + h.c. with

    full line:  k = g(x - y)
    boundary:   k = g(x - y) + xi g(x + y),              x, y > 0
    defect:     k = g(x - y) + s c_theta(x, y) g(|x| + |y|)

where s is ``image_scale`` (1 by default). With s = 1 the defect kernel at
theta in {0, pi/2} is exactly a pair of decoupled boundary kernels, which
is what the magic automaton produces.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .geometry import Geometry
from .profiles import Profile, g_position


@dataclass(frozen=True)
class KernelFn:
    geometry: Geometry
    profile: Profile
    image_scale: float = 1.0

    def __call__(self, x, y):
        return kernel_value(self, x, y)

    def image_weight(self, x, y):
        w = self.geometry.image_weight(x, y)
        return self.image_scale * w if self.geometry.kind == "defect" else w

    @property
    def max_weight(self) -> float:
        """sup of |image weight| over the geometry."""
        g = self.geometry
        if g.kind == "full-line":
            return 0.0
        if g.kind == "boundary":
            return 1.0
        c2, s2 = math.cos(2 * g.theta), math.sin(2 * g.theta)
        return abs(self.image_scale) * max(abs(c2), abs(s2 - 1.0))


def _coords(kernel: KernelFn, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kernel.geometry.check(x, y)
    return x, y


def modification_value(kernel: KernelFn, x, y):
    """The image (modification) part w(x, y) g(|x| + |y|); zero on the full line."""
    x, y = _coords(kernel, x, y)
    w = kernel.image_weight(x, y)
    val = w * g_position(kernel.profile, np.abs(x) + np.abs(y))
    return float(val) if np.ndim(val) == 0 else val


def kernel_value(kernel: KernelFn, x, y):
    """Full kernel k(x, y) = g(x - y) + modification."""
    x, y = _coords(kernel, x, y)
    val = g_position(kernel.profile, x - y) + modification_value(kernel, x, y)
    return float(val) if np.ndim(val) == 0 else val


def minimal_update_envelope(kernel: KernelFn, d: float) -> float:
    """sup over |x|, |y| >= d of |modification(x, y)|.

    The profile decreases in |x| + |y| and the weight is constant on each
    quadrant, so the sup sits at the corner |x| = |y| = d.
    """
    if not d > 0:
        raise DomainError("d must be positive")
    return kernel.max_weight * float(g_position(kernel.profile, 2.0 * d))


def envelope_grid_sup(kernel: KernelFn, d: float, span: float | None = None, n: int = 201) -> float:
    """Brute-force sup of |modification| over a grid in every admissible quadrant.

    The grid starts at |x| = |y| = d exactly and extends ``span`` (default 10/Lambda).
    """
    if not d > 0:
        raise DomainError("d must be positive")
    span = 10.0 / kernel.profile.lam if span is None else span
    r = d + np.linspace(0.0, span, n)
    signs = [1.0] if kernel.geometry.kind == "boundary" else [-1.0, 1.0]
    best = 0.0
    for sx in signs:
        for sy in signs:
            X, Y = np.meshgrid(sx * r, sy * r, indexing="ij")
            best = max(best, float(np.max(np.abs(modification_value(kernel, X, Y)))))
    return best


@dataclass
class KernelGrid:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # |modification|, shape (len(x), len(y))
    kernel: KernelFn

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "abs_modification"])
            for i, xv in enumerate(self.x):
                for j, yv in enumerate(self.y):
                    writer.writerow([repr(float(xv)), repr(float(yv)), repr(float(self.values[i, j]))])
        return path


def kernel_grid(kernel: KernelFn, extent: float, n: int = 101) -> KernelGrid:
    """|modification| on an n x n grid: (0, extent] for a boundary, [-extent, extent] for a defect.

    Defect grids use an even n so that the origin is not sampled.
    """
    if kernel.geometry.kind == "full-line":
        raise DomainError("the full-line kernel has no modification term")
    if not extent > 0 or n < 2:
        raise DomainError("extent must be positive and n >= 2")
    if kernel.geometry.kind == "boundary":
        axis = np.linspace(extent / n, extent, n)
    else:
        n += n % 2
        axis = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    return KernelGrid(axis, axis.copy(), np.abs(modification_value(kernel, X, Y)), kernel)
