"""Exact and cMERA two-point functions on the line, the half-line and across a defect.

Every correlator has the image form

    G(x, y) = C(x - y) + w(x, y) C(|x| + |y|),

with w = 0 (full line), xi (boundary) or c_theta(x, y) (defect). The exact
theory uses the massless closed forms; the cMERA replaces C by the
regularized C^Lambda from :mod:`cmera.transforms`. Contact terms at x = y
are never part of the returned values.

The massless phi-phi correlator is only defined up to a constant, so it is
exposed as the difference G(x, y) - G(x_ref, y).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DomainError, ToleranceNotMet
from .flow import AlphaFn
from .geometry import Geometry, c_theta
from .profiles import Profile
from .transforms import QuadratureSpec, correlator_phi_diff_full, correlator_pi_full

Observable = Literal["pipi", "phiphi-diff"]
OBSERVABLES = ("pipi", "phiphi-diff")

# Points closer than this (in units of 1/Lambda) to the contact x = y are dropped from tables.
CONTACT_EXCLUSION = 1e-9


def exact_pi(r):
    """Massless C_pipi(r) = -1/(2 pi r^2)."""
    r = np.asarray(r, dtype=float)
    return -1.0 / (2.0 * np.pi * r * r)


def exact_phi(r):
    """Massless C_phiphi(r) = -log|r| / (2 pi), fixed up to an additive constant."""
    return -np.log(np.abs(np.asarray(r, dtype=float))) / (2.0 * np.pi)


def _prepare(geometry: Geometry, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    geometry.check(x, y)
    if np.any(x == y):
        raise DomainError("x = y is a contact point and is excluded")
    return np.broadcast_arrays(x, y)


def _check_ref(geometry: Geometry, x, x_ref, y):
    x_ref = np.broadcast_to(np.asarray(x_ref, dtype=float), x.shape)
    geometry.check(x_ref, y)
    if np.any(x_ref == y):
        raise DomainError("x_ref = y is a contact point")
    if geometry.kind == "defect":
        same = c_theta(geometry.theta, x, y) == c_theta(geometry.theta, x_ref, y)
        if not np.all(np.asarray(same)):
            raise DomainError("x_ref must lie on the same side of the defect as x")
    return x_ref


def _out(v, like):
    v = np.asarray(v, dtype=float)
    return float(v) if np.ndim(like) == 0 else v


def _assemble(geometry, base, x, y):
    """C(|x-y|) + w C(|x|+|y|), skipping the image term on the full line."""
    direct = base(np.abs(x - y))
    if geometry.kind == "full-line":
        return direct
    return direct + geometry.image_weight(x, y) * base(geometry.image_distance(x, y))


def _assemble_diff(geometry, base_diff, x, x_ref, y):
    """G(x, y) - G(x_ref, y) from a difference of base correlators."""
    direct = base_diff(np.abs(x - y), np.abs(x_ref - y))
    if geometry.kind == "full-line":
        return direct
    w = geometry.image_weight(x, y)
    return direct + w * base_diff(geometry.image_distance(x, y), geometry.image_distance(x_ref, y))


def exact_correlator(geometry: Geometry, observable: str, x, y, x_ref=None):
    """Exact CFT/BCFT/DCFT correlator.

    ``observable`` is ``"pipi"``, ``"phiphi"`` (closed form with the
    constant fixed by log 1 = 0) or ``"phiphi-diff"`` (needs ``x_ref``).
    """
    xa, ya = _prepare(geometry, x, y)
    if observable == "pipi":
        val = _assemble(geometry, exact_pi, xa, ya)
    elif observable == "phiphi":
        val = _assemble(geometry, exact_phi, xa, ya)
    elif observable == "phiphi-diff":
        if x_ref is None:
            raise DomainError("phiphi-diff requires x_ref")
        xr = _check_ref(geometry, xa, x_ref, ya)
        val = _assemble_diff(geometry, lambda a, b: exact_phi(a) - exact_phi(b), xa, xr, ya)
    else:
        raise DomainError(f"unknown observable {observable!r}")
    return _out(val, np.broadcast(np.asarray(x), np.asarray(y)))


def cmera_correlator(geometry: Geometry, profile: Profile, observable: str, x, y,
                     spec: QuadratureSpec | None = None, x_ref=None, s: float = math.inf):
    """cMERA correlator in the same image form, built on the full-line C^Lambda.

    ``s`` selects a finite flow time; boundary and defect results are only
    meaningful at the fixed point but the algebra is the same.
    """
    alpha = AlphaFn(profile, s)
    xa, ya = _prepare(geometry, x, y)

    if observable == "pipi":
        def base(r):
            return correlator_pi_full(alpha, r, spec)
        val = _assemble(geometry, base, xa, ya)
    elif observable == "phiphi-diff":
        if x_ref is None:
            raise DomainError("phiphi-diff requires x_ref")
        xr = _check_ref(geometry, xa, x_ref, ya)

        def base_diff(a, b):
            out = np.zeros(np.broadcast(a, b).shape)
            live = a != b
            if np.any(live):
                out[live] = correlator_phi_diff_full(alpha, a[live], b[live], spec)
            return out
        val = _assemble_diff(geometry, base_diff, xa, xr, ya)
    else:
        raise DomainError(f"unknown observable {observable!r}")
    return _out(val, np.broadcast(np.asarray(x), np.asarray(y)))


@dataclass
class CorrelatorTable:
    """A sweep of exact and cMERA correlators at fixed geometry and observable."""

    geometry: Geometry
    observable: str
    profile: Profile
    x: np.ndarray
    y: np.ndarray
    exact: np.ndarray
    cmera: np.ndarray
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    x_ref: float | None = None

    @property
    def lam(self) -> float:
        return self.profile.lam

    @property
    def rel_err(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(self.cmera - self.exact) / np.abs(self.exact)

    def metadata(self) -> dict:
        return {
            "geometry": self.geometry.to_dict(),
            "profile": self.profile.kind,
            "lambda": self.lam,
            "observable": self.observable,
            "x_ref": self.x_ref,
            "spec": {"abs_tol": self.spec.abs_tol, "k_max": self.spec.k_max,
                     "panel_fraction": self.spec.panel_fraction},
        }

    def rows(self):
        for row in zip(self.x, self.y, self.exact, self.cmera, self.rel_err):
            yield [float(v) for v in row]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "exact", "cmera", "rel_err"])
            for row in self.rows():
                writer.writerow([repr(v) for v in row])
        return path

    def to_json(self, path) -> Path:
        path = Path(path)
        payload = dict(self.metadata())
        payload["points"] = [dict(zip(["x", "y", "exact", "cmera", "rel_err"], r)) for r in self.rows()]
        path.write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n")
        return path


def correlator_table(geometry: Geometry, profile: Profile, observable: str, xs, y: float,
                     spec: QuadratureSpec | None = None, x_ref: float | None = None) -> CorrelatorTable:
    """Evaluate a sweep in x at fixed y, dropping points at the contact x = y.

    For ``phiphi-diff`` the reference point is ``x_ref`` mirrored onto the side
    of each x (only relevant across a defect).
    """
    spec = spec or QuadratureSpec()
    xs = np.asarray(xs, dtype=float)
    xs = xs[np.abs(xs - y) > CONTACT_EXCLUSION / profile.lam]
    ys = np.full_like(xs, float(y))
    ref = None
    if observable == "phiphi-diff":
        if x_ref is None:
            raise DomainError("phiphi-diff requires x_ref")
        ref = np.where(xs < 0, -abs(x_ref), abs(x_ref)) if geometry.kind == "defect" else np.full_like(xs, x_ref)
    exact = np.atleast_1d(exact_correlator(geometry, observable, xs, ys, x_ref=ref))
    cm = np.atleast_1d(cmera_correlator(geometry, profile, observable, xs, ys, spec, x_ref=ref))
    return CorrelatorTable(geometry, observable, profile, xs, ys, exact, cm, spec, x_ref)


@dataclass(frozen=True)
class MatchingReport:
    """Left/right x-derivatives of the phi-phi correlator at the defect."""

    source: str
    theta: float
    y: float
    left: float
    right: float
    ratio: float
    expected: float
    step: float
    stability: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def defect_matching_check(source, theta: float, y: float, lam: float = 1.0, h: float | None = None,
                          spec: QuadratureSpec | None = None, stability_tol: float = 1e-6) -> MatchingReport:
    """Ratio d/dx G(0-, y) / d/dx G(0+, y) of the defect phi-phi correlator.

    ``source`` is ``"exact"`` or a :class:`Profile`. One-sided derivatives
    come from central differences with step ``h`` (default 1e-4/Lambda)
    centred at 2h and 4h away from the defect, extrapolated to the defect
    point. Each difference G(a, y) - G(b, y) is a single difference
    transform, so no large constant cancels.

    Raises
    ------
    ToleranceNotMet
        If repeating the estimate with step h/2 changes the ratio by more
        than ``stability_tol`` relative.
    """
    if y == 0:
        raise DomainError("y must be nonzero")
    geometry = Geometry.defect(theta)
    if source == "exact":
        lam_eff = lam

        def diff(a, b):
            return exact_correlator(geometry, "phiphi-diff", a, np.full_like(a, y), x_ref=b)
        label = "exact"
    elif isinstance(source, Profile):
        lam_eff = source.lam
        qspec = spec or QuadratureSpec(abs_tol=1e-13)

        def diff(a, b):
            return cmera_correlator(geometry, source, "phiphi-diff", a, np.full_like(a, y), qspec, x_ref=b)
        label = source.kind
    else:
        raise DomainError("source must be 'exact' or a Profile")
    h0 = 1e-4 / lam_eff if h is None else h

    def one_sided(step):
        out = []
        for side in (-1.0, 1.0):
            c = side * np.array([2.0 * step, 4.0 * step])
            d = np.asarray(diff(c + step, c - step)) / (2.0 * step)
            out.append(2.0 * d[0] - d[1])
        return out

    left, right = one_sided(h0)
    left2, right2 = one_sided(h0 / 2)
    # both derivatives vanish when y sits on a decoupled Neumann side; the ratio is then undefined
    natural = 1.0 / (2.0 * math.pi * abs(y))
    scale = max(abs(left), abs(right), natural)
    stability = max(abs(left - left2), abs(right - right2)) / scale
    if max(abs(left), abs(right)) < 1e-9 * natural:
        ratio = math.nan
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.float64(left) / np.float64(right)
    if not math.isfinite(stability) or stability > stability_tol:
        raise ToleranceNotMet(f"difference quotient unstable at step {h0:g}: change {stability:.2e}")
    return MatchingReport(label, theta, y, float(left), float(right), float(ratio),
                          math.tan(theta), h0, float(stability))
