"""Invariant suites behind ``cmera verify``.

Each suite returns a :class:`SuiteReport` with one :class:`Check` per
assertion, carrying the measured value, its threshold and the margin.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import magic
from .correlators import cmera_correlator, defect_matching_check
from .defect_modes import (DefectParams, Packet, defect_correlator_mode_oracle, mode_overlap_packet,
                           packet_norm, second_family_obstruction)
from .flow import AlphaFn, alpha_fixed, alpha_flow
from .geometry import Geometry
from .kernels import KernelFn, envelope_grid_sup, minimal_update_envelope
from .lattice import LatticeModel, ground_covariance, purity_deviation
from .profiles import Profile
from .transforms import correlator_phi_diff_full, correlator_pi_full

SUITES = ("flow", "minimal-update", "modes", "mpo", "oracle")
DEFAULT_SEED = 20240607


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    kind: str = "max"  # "max": value <= threshold; "min": value >= threshold

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.threshold if self.kind == "max" else self.value >= self.threshold

    @property
    def margin(self) -> float:
        return self.threshold - self.value if self.kind == "max" else self.value - self.threshold

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "kind": self.kind, "margin": self.margin, "passed": self.passed}


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    seconds: float = 0.0
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, kind="max") -> Check:
        c = Check(name, float(value), float(threshold), kind)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "seconds": self.seconds, "seed": self.seed,
                "checks": [c.to_dict() for c in self.checks], "tables": self.tables}


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def suite_flow() -> SuiteReport:
    rep = SuiteReport("flow")
    k = np.logspace(-3, 3, 25)
    for kind in ("gaussian", "magic"):
        p = Profile(kind)
        flow = np.array([alpha_flow(p, kk, 40.0) for kk in k])
        rep.add(f"{kind}: closed form vs flow quadrature at s=40", _rel(alpha_fixed(p, k), flow), 1e-9)
        rep.add(f"{kind}: IR slope alpha/k at k=1e-4", abs(alpha_fixed(p, 1e-4) / 1e-4 - 1.0), 1e-3)
    p = Profile("magic")
    for s in (0.5, 1.0, 3.0):
        kk = np.array([0.1, 1.0, 10.0])
        rep.add(f"magic: finite-s closed form at s={s}",
                _rel(alpha_flow(p, kk, s), AlphaFn(p, s)(kk)), 1e-9)
    rep.add("occupation: 16 n k^4 at k=100", abs(16 * magic.occupation_number(100.0) * 100.0**4 - 1.0), 1e-3)
    slope = math.log(magic.occupation_number(100.0) / magic.occupation_number(10.0)) / math.log(10.0)
    rep.add("occupation: log-log slope on [10, 100] (+4)", abs(slope + 4.0), 0.05)
    rep.add("dispersion: eps(0, s=1) = m(1)", abs(magic.dispersion(0.0, 1.0) - math.exp(-1.0)), 1e-15)
    return rep


def suite_minimal_update() -> SuiteReport:
    rep = SuiteReport("minimal-update")
    ds = (0.5, 1.0, 2.0, 5.0)
    geoms = [Geometry.boundary(-1), Geometry.boundary(1), Geometry.defect(0.0),
             Geometry.defect(math.pi / 3), Geometry.defect(3 * math.pi / 8)]
    for kind in ("gaussian", "magic"):
        p = Profile(kind)
        for g in geoms:
            kf = KernelFn(g, p)
            env = np.array([minimal_update_envelope(kf, d) for d in ds])
            grid = np.array([envelope_grid_sup(kf, d) for d in ds])
            rep.add(f"{kind} {g.label()}: grid sup vs envelope", _rel(grid, env), 1e-10)
            fine = np.array([minimal_update_envelope(kf, d) for d in np.linspace(0.1, 10, 200)])
            rep.add(f"{kind} {g.label()}: envelope monotone (max increase)", float(np.max(np.diff(fine))), 0.0)
            rep.add(f"{kind} {g.label()}: envelope(8)/envelope(1)",
                    minimal_update_envelope(kf, 8.0) / minimal_update_envelope(kf, 1.0), 1e-6)
        law = np.array([0.25 * math.exp(-2 * d) if kind == "magic" else 0.5 * math.exp(-p.sigma * d * d)
                        for d in ds])
        env = np.array([minimal_update_envelope(KernelFn(Geometry.boundary(-1), p), d) for d in ds])
        rep.add(f"{kind} boundary: analytic decay law", _rel(env, law), 1e-10)
    return rep


def suite_modes(seed: int = DEFAULT_SEED, triples: int = 20) -> SuiteReport:
    rep = SuiteReport("modes", seed=seed)
    th = np.linspace(-math.pi / 2, math.pi / 2, 1001)[1:]
    rep.add("R + T = 1 on 1000 angles",
            max(abs(DefectParams(t).R + DefectParams(t).T - 1.0) for t in th), 1e-15)
    rows = []
    for theta in (math.pi / 8, math.pi / 3, 3 * math.pi / 8, -math.pi / 5):
        for source in ("exact", Profile("gaussian"), Profile("magic")):
            r = defect_matching_check(source, theta, 3.0)
            rows.append(r.to_dict())
            name = source if source == "exact" else source.kind
            rep.add(f"matching ratio vs tan(theta), {name}, theta={theta:.4f}",
                    abs(r.ratio - math.tan(theta)) / max(1.0, abs(math.tan(theta))), 1e-4)
    rep.tables["matching"] = rows
    rep.add("second family: |obstruction| at pi/3", abs(second_family_obstruction(math.pi / 3, 1.0, 2.0)),
            0.5, kind="min")
    for theta in (0.0, math.pi):
        rep.add(f"second family: |obstruction| at {theta:.4f}",
                abs(second_family_obstruction(theta, 1.0, 2.0)), 1e-12)
    rng = np.random.default_rng(seed)
    worst = 0.0
    table = []
    for i in range(triples):
        theta = float(rng.uniform(-math.pi / 2, math.pi / 2))
        while True:
            x, y = (rng.choice([-1.0, 1.0], 2) * rng.uniform(0.3, 12.0, 2)).tolist()
            if abs(x - y) > 0.2:
                break
        p = Profile("gaussian" if i % 2 == 0 else "magic")
        g = Geometry.defect(theta)
        x_ref = math.copysign(abs(x) + 1.5, x)
        d1 = abs(defect_correlator_mode_oracle(theta, p, x, y) - cmera_correlator(g, p, "pipi", x, y))
        d2 = abs(defect_correlator_mode_oracle(theta, p, x, y, "phiphi-diff", x_ref)
                 - cmera_correlator(g, p, "phiphi-diff", x, y, x_ref=x_ref))
        table.append({"theta": theta, "x": x, "y": y, "profile": p.kind, "pipi": d1, "phiphi_diff": d2})
        worst = max(worst, d1, d2)
    rep.tables["mode_oracle"] = table
    rep.add(f"mode oracle vs closed form, {triples} random triples (abs)", worst, 1e-6)
    theta = 0.6
    p1, p2, p3 = Packet(1.0, 0.25), Packet(1.2, 0.3, 0.5 - 0.2j), Packet(4.0, 0.25)
    dev = max(abs(mode_overlap_packet(theta, a, b) - packet_norm(a, b)) for a, b in ((p1, p2), (p1, p3)))
    rep.add("packet-smeared orthonormality", dev, 1e-6)
    return rep


def suite_mpo() -> SuiteReport:
    rep = SuiteReport("mpo")
    conv = magic.convergence_study()
    rep.tables["convergence"] = conv.to_dict()
    rep.add("smeared kernel error at eps=1e-3", conv.kernel_error[-1], 1e-2)
    rep.add("first-order convergence: |order - 1|", max(abs(o - 1.0) for o in conv.convergence_order), 0.01)
    rep.add("pointwise kernel error at lattice points", max(conv.pointwise_error), 1e-10)
    rep.add("defect theta=pi/4 vs no-defect chain", magic.defect_trivial_check(), 1e-12)
    fact = []
    for theta in (0.0, math.pi / 2):
        r = magic.cmpo_defect_factorization_check(theta)
        fact.append(r.to_dict())
        rep.add(f"theta={theta:.4f}: cross-side weight", r.cross_side_weight, 1e-12)
        rep.add(f"theta={theta:.4f}: halves match boundary automata",
                max(r.left_deviation, r.right_deviation), 1e-12)
        want = (1, -1) if theta == 0.0 else (-1, 1)
        rep.add(f"theta={theta:.4f}: (xi_L, xi_R) = {want}", float((r.xi_left, r.xi_right) != want), 0.0)
    rep.tables["factorization"] = fact
    for g, pk in ((Geometry.boundary(1), magic.boundary_kernel(1.0, 1e-2, 10.0, 1)),
                  (Geometry.boundary(-1), magic.boundary_kernel(1.0, 1e-2, 10.0, -1)),
                  (Geometry.defect(3 * math.pi / 8), magic.defect_kernel(1.0, 1e-2, 10.0, 3 * math.pi / 8))):
        r = magic.kernel_to_entangler_check(pk, g)
        rep.add(f"{g.label()}: automaton vs entangler kernel", r.kernel_error, 1e-10)
        rep.add(f"{g.label()}: unwanted species weight", r.cross_species_weight + r.lower_degree_weight, 1e-14)
    return rep


def suite_oracle(n: int = 4096, a: float = 0.05, m: float = 0.1) -> SuiteReport:
    """Lattice ground state of the magic parent Hamiltonian vs the analytic finite-s correlators (Lambda = 1)."""
    rep = SuiteReport("oracle")
    alpha = AlphaFn.with_mass(Profile("magic"), m)
    steps = np.arange(int(round(1.0 / a)), int(round(20.0 / a)) + 1)
    ref_step = int(round(0.5 / a))
    for bc in ("periodic", "dirichlet", "neumann"):
        model = LatticeModel.magic(n, a, 1.0, m, bc)
        q, p = ground_covariance(model)
        rep.add(f"{bc}: purity", purity_deviation(q, p), 1e-10)
        q, p = q / a, p / a
        if bc == "periodic":
            i0, tol = 0, 1e-3
            r = steps * a
            js = (i0 + steps) % n
            pi_lat = p[i0, js]
            pi_an = correlator_pi_full(alpha, r)
            phi_lat = q[i0, js] - q[i0, ref_step]
            phi_an = correlator_phi_diff_full(alpha, r, np.full_like(r, ref_step * a))
        else:
            xi = -1 if bc == "dirichlet" else 1
            tol = 2e-3
            iy = int(np.argmin(np.abs(model.positions - 5.0)))
            y = model.positions[iy]
            keep = steps * a >= 2.0
            js = iy + steps[keep]
            x = model.positions[js]
            xr = model.positions[iy + ref_step]
            pi_lat = p[iy, js]
            pi_an = correlator_pi_full(alpha, x - y) + xi * correlator_pi_full(alpha, x + y)
            phi_lat = q[iy, js] - q[iy, iy + ref_step]
            phi_an = (correlator_phi_diff_full(alpha, x - y, np.full_like(x, xr - y))
                      + xi * correlator_phi_diff_full(alpha, x + y, np.full_like(x, xr + y)))
        e_pi = np.abs(pi_lat / pi_an - 1.0)
        e_phi = np.abs(phi_lat / phi_an - 1.0)
        rep.tables[bc] = {"max_rel_pipi": float(e_pi.max()), "max_rel_phiphi_diff": float(e_phi.max()),
                          "n": n, "a": a, "m": m}
        rep.add(f"{bc}: pipi lattice vs analytic (rel)", e_pi.max(), tol)
        rep.add(f"{bc}: phiphi-diff lattice vs analytic (rel)", e_phi.max(), tol)
    return rep


_RUNNERS = {"flow": suite_flow, "minimal-update": suite_minimal_update, "modes": suite_modes,
            "mpo": suite_mpo, "oracle": suite_oracle}


def run_suite(name: str, **kwargs) -> SuiteReport:
    t0 = time.perf_counter()
    rep = _RUNNERS[name](**kwargs)
    rep.seconds = time.perf_counter() - t0
    return rep


def write_reports(reports, path) -> Path:
    path = Path(path)
    payload = {"passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
    path.write_text(json.dumps(payload, indent=2, default=float) + "\n")
    return path
