"""Geometries (full line, half-line with a boundary, line with a defect) and c_theta."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError

GeometryKind = Literal["full-line", "boundary", "defect"]

DIRICHLET = -1
NEUMANN = 1


def c_theta(theta: float, x, y):
    """Quadrant weight of the image term for the defect with angle ``theta``.

    cos 2theta for x, y < 0; sin 2theta - 1 on opposite sides; -cos 2theta for x, y > 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    out = np.where((x < 0) & (y < 0), c2, np.where((x > 0) & (y > 0), -c2, s2 - 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CThetaFn:
    """Callable form of :func:`c_theta` at fixed angle."""

    theta: float

    def __call__(self, x, y):
        return c_theta(self.theta, x, y)


@dataclass(frozen=True)
class Geometry:
    """Where the free boson lives.

    ``xi`` is -1 (Dirichlet) or +1 (Neumann) for a boundary at the origin;
    ``theta`` in (-pi/2, pi/2] labels the conformal defect at the origin.
    """

    kind: GeometryKind = "full-line"
    xi: int | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.kind == "full-line":
            if self.xi is not None or self.theta is not None:
                raise DomainError("full-line geometry takes neither xi nor theta")
        elif self.kind == "boundary":
            if self.xi not in (DIRICHLET, NEUMANN):
                raise DomainError(f"boundary sign xi must be -1 or +1, got {self.xi}")
        elif self.kind == "defect":
            if self.theta is None or not (-math.pi / 2 < self.theta <= math.pi / 2):
                raise DomainError(f"defect angle must lie in (-pi/2, pi/2], got {self.theta}")
        else:
            raise DomainError(f"unknown geometry {self.kind!r}")

    @classmethod
    def full(cls) -> "Geometry":
        return cls("full-line")

    @classmethod
    def boundary(cls, xi: int) -> "Geometry":
        return cls("boundary", xi=int(xi))

    @classmethod
    def defect(cls, theta: float) -> "Geometry":
        return cls("defect", theta=float(theta))

    def check(self, x, y) -> None:
        """Raise :class:`DomainError` for coordinates outside the geometry."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("coordinates must be finite")
        if self.kind == "boundary" and (np.any(x <= 0) or np.any(y <= 0)):
            raise DomainError("boundary geometry requires x, y > 0")
        if self.kind == "defect" and (np.any(x == 0) or np.any(y == 0)):
            raise DomainError("the defect point x = 0 is excluded")

    def image_weight(self, x, y):
        """Coefficient of the image term: 0, xi or c_theta(x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "full-line":
            w = np.zeros(np.broadcast(x, y).shape)
        elif self.kind == "boundary":
            w = np.full(np.broadcast(x, y).shape, float(self.xi))
        else:
            w = np.asarray(c_theta(self.theta, x, y), dtype=float)
        return w

    def image_distance(self, x, y):
        """|x| + |y|, the distance to the mirror image (x + y on the half-line)."""
        return np.abs(np.asarray(x, dtype=float)) + np.abs(np.asarray(y, dtype=float))

    def label(self) -> str:
        if self.kind == "boundary":
            return "boundary-" + ("dirichlet" if self.xi == DIRICHLET else "neumann")
        if self.kind == "defect":
            return f"defect-theta={self.theta:.6g}"
        return "full-line"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "xi": self.xi, "theta": self.theta}
