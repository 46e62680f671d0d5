"""The twelve acceptance criteria as runnable checks.

Each ``criterion_N(budget)`` returns a :class:`CriterionResult` with one
:class:`Check` per asserted quantity.  A criterion passes when every check
passes and it finished inside its runtime limit.  ``budget`` only changes
Monte Carlo sample counts; tolerances never change.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constants as K
from .asymptotics import (
    RegimeLabel,
    bbm_sweep,
    blowup_matching,
    classify_regime,
    critical_sweep,
    dyadic_ladder,
    parse_schedule,
    predicted_limit,
    run_sweep,
)
from .geometry import BaseDomain, FractionalParams, ThinFilm
from .kernelquad import (
    Engine,
    QuadratureSpec,
    planar_seminorm,
    planar_seminorm_mc,
    seminorm_grid,
    seminorm_mc,
    vertical_seminorm,
)
from .testfns import Affine, Constant, PlanarLinear, PlanarSine, Sum, VerticalProfile

GRID = QuadratureSpec(engine=Engine.GRID, panels=16)
MC_SAMPLES = {"quick": 1_000_000, "full": 4_000_000}


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool


@dataclass
class CriterionResult:
    number: int
    title: str
    limit_s: float
    checks: list[Check] = field(default_factory=list)
    runtime_s: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks) and self.runtime_s <= self.limit_s

    def check(self, name, value, target, tol, relative=True):
        value, target = float(value), float(target)
        gap = abs(value - target) / abs(target) if relative and target else abs(value - target)
        self.checks.append(Check(name, value, target, tol, bool(gap <= tol)))

    def bound(self, name, value, limit):
        self.checks.append(Check(name, float(value), float(limit), 0.0, bool(value <= limit)))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def line(self) -> str:
        failed = [c.name for c in self.checks if not c.passed]
        status = "PASS" if self.passed else "FAIL"
        tail = f" failing: {', '.join(failed)}" if failed else ""
        if self.runtime_s > self.limit_s:
            tail += f" runtime {self.runtime_s:.1f}s > {self.limit_s:.0f}s"
        return f"[{status}] {self.number:2d} {self.title} ({self.runtime_s:.1f}s){tail}"


def _timed(number, title, limit):
    def wrap(fn):
        def run(budget="quick"):
            res = CriterionResult(number, title, limit)
            t0 = time.perf_counter()
            fn(res, budget)
            res.runtime_s = time.perf_counter() - t0
            return res

        run.__name__ = fn.__name__
        run.number = number
        return run

    return wrap


S_GRID = [round(0.05 * k, 2) for k in range(1, 20)]


@_timed(1, "constants closed vs quadrature", 10)
def criterion_1(res, budget):
    worst_c = worst_k = worst_ck = 0.0
    for d in (2, 3):
        for s in S_GRID:
            c = K.c_closed(s, d)
            cq = K.c_quadrature(s, d)
            worst_c = max(worst_c, abs(c - cq) / c)
            if s > 0.5:
                k, kq = K.k_closed(s, d), K.k_quadrature(s, d)
                worst_k = max(worst_k, abs(k - kq) / k)
                worst_ck = max(worst_ck, abs(kq * (2 * s - 1) * (3 - 2 * s) / cq - 1))
    res.bound("max C gap", worst_c, 1e-8)
    res.bound("max K gap", worst_k, 1e-8)
    res.bound("max |K(2s-1)(3-2s)/C - 1|", worst_ck, 1e-8)


@_timed(2, "appendix identities", 5)
def criterion_2(res, budget):
    for s in (0.25, 0.5, 0.75):
        for d in (4, 5):
            res.bound(f"J recursion s={s} d={d}", K.j_recursion_residual(s, d), 1e-8)
    for d in (2, 3):
        res.bound(f"I^1 identity d={d}", K.i1_identity_gap(d), 1e-8)
        lim = K.surface_measure(d) / (2 * d)
        res.check(f"K(0.999,{d}) vs sigma_d/2d", K.k_closed(0.999, d), lim, 5e-3)
        res.check(f"K Gamma form d={d}", K.k_gamma_form(0.75, d), K.k_closed(0.75, d), 1e-8)


@_timed(3, "blow-up matching at the critical exponent", 30)
def criterion_3(res, budget):
    for d in (2, 3):
        m = blowup_matching(d, 1e-2, subcritical=(d == 2))
        res.check(f"(2s-1)K at s=0.51 d={d}", m["super_value"], m["super_target"], 2e-2)
        if d == 2:
            res.check("(1-s_eff) planar seminorm at s_eff=0.99", m["sub_value"], 1.0, 2e-2)


@_timed(4, "first-scaling pointwise limit", 300)
def criterion_4(res, budget):
    eps = 2.0**-10
    f = VerticalProfile("linear")
    for s in (0.3, 0.5, 0.7):
        est = seminorm_grid(f, ThinFilm.unit(2, eps), FractionalParams(2, s, 2.0), GRID)
        pred = K.c_closed(s, 2) / ((1 - s) * (3 - 2 * s))
        res.check(f"eps^(2s-1) E at s={s}", eps ** (2 * s - 1) * est.value, pred, 5e-2)


def _slope(f, s, p=2.0, k_to=10):
    return run_sweep(f, FractionalParams(2, s, p), dyadic_ladder(3, k_to), GRID)


@_timed(5, "scaling exponents", 600)
def criterion_5(res, budget):
    for f, s, target in (
        (PlanarLinear((1.0,)), 0.75, 1.5),
        (PlanarLinear((1.0,)), 0.25, 2.0),
        (VerticalProfile("linear"), 0.3, 0.4),
    ):
        rep = _slope(f, s)
        res.check(f"slope {f.tag} s={s}", rep.fitted_slope, target, 0.05, relative=False)
        res.notes[f"{f.tag} s={s}"] = {"richardson_limit": rep.richardson_limit, "predicted_limit": rep.predicted_limit}


@_timed(6, "super-critical limit", 300)
def criterion_6(res, budget):
    eps = 2.0**-10
    est = seminorm_grid(PlanarLinear((1.0,)), ThinFilm.unit(2, eps), FractionalParams(2, 0.75, 2.0), GRID)
    res.check("E/eps^1.5 vs K/(1-s)", est.value / eps**1.5, K.k_closed(0.75, 2) / 0.25, 0.10)


@_timed(7, "sub-critical limit", 300)
def criterion_7(res, budget):
    eps = 2.0**-10
    f = PlanarSine((1,))
    base = BaseDomain.for_dimension(2)
    est = seminorm_grid(f, ThinFilm.unit(2, eps), FractionalParams(2, 0.2, 2.0), GRID)
    ref = planar_seminorm(f, base, 0.7)
    res.check("E/eps^2 vs planar seminorm s_eff=0.7", est.value / eps**2, ref.value, 0.10)
    mc = planar_seminorm_mc(f, base, 0.7, 2.0, QuadratureSpec(engine=Engine.MC, samples=MC_SAMPLES[budget], seed=11))
    combined = mc.error + ref.error
    res.bound("|planar quad - MC| / combined sigma", abs(mc.value - ref.value) / combined, 3.0)


@_timed(8, "critical regime constant", 600)
def criterion_8(res, budget):
    rep = critical_sweep(PlanarLinear((1.0,)), 2, 2.0, dyadic_ladder(4, 12), GRID)
    ex = rep.extras
    res.notes.update({"candidates": ex["candidates"], "log_coefficient": ex["log_coefficient"]})
    res.notes["closest_candidate"] = ex["closest_candidate"]
    res.check("E/eps^2 vs |log eps| slope", ex["log_coefficient"], ex["candidates"]["theorem"], 0.10)


@_timed(9, "s -> 1 thin-film limit", 300)
def criterion_9(res, budget):
    rep = bbm_sweep(PlanarLinear((1.0,)), 2, dyadic_ladder(3, 10), parse_schedule("bbm-log2"), GRID)
    res.check("(1-s)E/eps^(3-2s) at eps=2^-10", rep.extrapolated_limit, math.pi / 2, 0.10)


@_timed(10, "general p", 600)
def criterion_10(res, budget):
    for s in (0.6, 0.8):
        for d in (2, 3):
            res.check(f"k_p(s={s},d={d},2) vs k_closed", K.k_p(s, d, 2.0), K.k_closed(s, d), 1e-6)
    label = classify_regime(FractionalParams(2, 0.25, 4.0)).label
    res.checks.append(Check("(0.25, 4) is Critical", float(label is RegimeLabel.CRITICAL), 1.0, 0.0, label is RegimeLabel.CRITICAL))
    rep = _slope(PlanarLinear((1.0,)), 0.5, 4.0)
    res.check("slope PlanarLinear s=0.5 p=4", rep.fitted_slope, 3.0, 0.1, relative=False)


ORACLE_CONFIGS = (
    (PlanarLinear((1.0,)), 0.75, 0.05),
    (PlanarSine((1,)), 0.25, 0.05),
    (VerticalProfile("linear"), 0.3, 0.1),
    (VerticalProfile("sine"), 0.5, 0.1),
    (Sum(PlanarLinear((1.0,)), VerticalProfile("linear")), 0.5, 0.1),
    (PlanarSine((1,)), 0.5, 0.2),
)


@_timed(11, "engine oracle agreement", 600)
def criterion_11(res, budget):
    n = MC_SAMPLES[budget]
    for i, (f, s, eps) in enumerate(ORACLE_CONFIGS):
        film, params = ThinFilm.unit(2, eps), FractionalParams(2, s, 2.0)
        g = seminorm_grid(f, film, params, GRID)
        m = seminorm_mc(f, film, params, QuadratureSpec(engine=Engine.MC, samples=n, seed=100 + i, threads=4))
        res.bound(f"{f.tag} s={s} eps={eps}: |MC-grid|/combined", abs(m.value - g.value) / (m.error + g.error), 3.0)
    f, s, eps = ORACLE_CONFIGS[0]
    runs = [
        seminorm_mc(f, ThinFilm.unit(2, eps), FractionalParams(2, s, 2.0), QuadratureSpec(engine=Engine.MC, samples=300_000, seed=5, threads=t)).value
        for t in (1, 4)
    ]
    same = runs[0] == runs[1]
    res.checks.append(Check("MC bit-identical for threads 1 and 4", float(same), 1.0, 0.0, same))


PROPERTY_FAMILIES = (
    PlanarLinear((1.0,)),
    PlanarSine((1,)),
    VerticalProfile("linear"),
    VerticalProfile("sine"),
    Sum(PlanarSine((1,)), VerticalProfile("sine", 0.5)),
)


@_timed(12, "property suite", 300)
def criterion_12(res, budget):
    mc_spec = QuadratureSpec(engine=Engine.MC, samples=20_000, seed=9)
    zero = 0.0
    for eps in (1e-1, 1e-3):
        for s in (0.25, 0.75):
            film, params = ThinFilm.unit(2, eps), FractionalParams(2, s, 2.0)
            zero = max(zero, seminorm_grid(Constant(1.5), film, params, GRID).value)
            zero = max(zero, seminorm_mc(Constant(1.5), film, params, mc_spec).value)
    res.bound("energy of constants", zero, 0.0)

    worst_h = worst_t = worst_mc = 0.0
    slicing = 0.0
    for f in PROPERTY_FAMILIES:
        for s in (0.25, 0.5, 0.75):
            params = FractionalParams(2, s, 2.0)
            for eps in (1e-1, 1e-2, 1e-3):
                film = ThinFilm.unit(2, eps)
                e = seminorm_grid(f, film, params, GRID)
                scaled = seminorm_grid(Affine(f, -2.5), film, params, GRID)
                shifted = seminorm_grid(Affine(f, 1.0, 3.0), film, params, GRID)
                tol = 3 * (e.error * 2.5**2 + scaled.error) + 1e-12 * e.value
                worst_h = max(worst_h, abs(scaled.value - 2.5**2 * e.value) / max(tol, 1e-300))
                worst_t = max(worst_t, abs(shifted.value - e.value) / max(3 * (e.error + shifted.error) + 1e-12 * e.value, 1e-300))
                v = vertical_seminorm(f, film, params)
                slicing = max(slicing, K.c_closed(s, 2) * v.value / e.value)
            m1 = seminorm_mc(f, ThinFilm.unit(2, 0.1), params, mc_spec)
            m2 = seminorm_mc(Affine(f, -2.5, 1.0), ThinFilm.unit(2, 0.1), params, mc_spec)
            worst_mc = max(worst_mc, abs(m2.value - 2.5**2 * m1.value) / m1.value)
    res.bound("homogeneity |c|^p (grid, in units of 3x error)", worst_h, 1.0)
    res.bound("translation invariance (grid, in units of 3x error)", worst_t, 1.0)
    res.bound("homogeneity + translation (MC, same stream), relative", worst_mc, 1e-9)
    res.bound("slicing: max C_(s,2) V_eps / E", slicing, 1.1)


CRITERIA = {
    n: fn
    for n, fn in enumerate(
        [
            criterion_1,
            criterion_2,
            criterion_3,
            criterion_4,
            criterion_5,
            criterion_6,
            criterion_7,
            criterion_8,
            criterion_9,
            criterion_10,
            criterion_11,
            criterion_12,
        ],
        start=1,
    )
}

SUITES = {
    "constants": [1, 2, 3],
    "scaling": [5, 10],
    "limits": [4, 6, 7],
    "critical": [8],
    "bbm": [9],
    "oracles": [11],
    "properties": [12],
    "all": list(range(1, 13)),
}


def run_suite(name: str, budget: str = "quick", log=None) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(name)
    if budget not in MC_SAMPLES:
        raise KeyError(budget)
    results = []
    for n in SUITES[name]:
        r = CRITERIA[n](budget)
        if log:
            log(r.line())
        results.append(r)
    return results
