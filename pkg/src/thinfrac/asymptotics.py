"""Epsilon-ladder experiments: regimes, scalings, slope fits and limit checks."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import constants as K
from .errors import DomainError, SweepFailure, ThinFracError, UsageError
from .geometry import BaseDomain, FractionalParams, ThinFilm
from .kernelquad import QuadratureSpec, planar_seminorm, seminorm
from .testfns import (
    Constant,
    PlanarLinear,
    Sum,
    TestFunction,
    dirichlet_planar,
    planar_component,
    reference_seminorm_1d,
    vertical_component,
)

EQ_TOL = 1e-12


class RegimeLabel(str, Enum):
    VERTICAL = "Vertical"
    SUBCRITICAL = "SubCritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "SuperCritical"
    BBM = "BBMLimit"


@dataclass(frozen=True)
class Regime:
    label: RegimeLabel
    scaling_exponent: float
    log_correction: bool
    predicted_limit_descriptor: str

    def scale(self, eps: float, s: float, p: float) -> float:
        """``lambda(eps)``, evaluated with the current (possibly scheduled) s."""
        lab = self.label
        if lab is RegimeLabel.VERTICAL:
            return eps ** (1 - s * p)
        if lab is RegimeLabel.SUBCRITICAL:
            return eps**2
        if lab is RegimeLabel.CRITICAL:
            return eps**2 * abs(math.log(eps))
        if lab is RegimeLabel.SUPERCRITICAL:
            return eps ** (1 + p - s * p)
        return eps ** (3 - 2 * s) / (1 - s)

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "scaling_exponent": self.scaling_exponent,
            "log_correction": self.log_correction,
            "predicted_limit": self.predicted_limit_descriptor,
        }


def classify_regime(params: FractionalParams) -> Regime:
    """Dimension-reduction regime from the position of s against 1/p."""
    s, p = params.s, params.p
    if abs(s - 1 / p) <= EQ_TOL:
        return Regime(RegimeLabel.CRITICAL, 2.0, True, "sphere moment x Dirichlet energy")
    if s < 1 / p:
        return Regime(RegimeLabel.SUBCRITICAL, 2.0, False, "planar seminorm of order s + 1/p")
    return Regime(RegimeLabel.SUPERCRITICAL, 1 + p - s * p, False, "K_(s,d;p)/(1-s) x Dirichlet energy")


def vertical_regime(params: FractionalParams) -> Regime:
    return Regime(RegimeLabel.VERTICAL, 1 - params.s * params.p, False, "C_(s,d;p) |omega| x 1-D profile seminorm")


def bbm_regime(params: FractionalParams) -> Regime:
    return Regime(RegimeLabel.BBM, 3 - 2 * params.s, False, "sigma_d/(2d) x Dirichlet energy")


def critical_candidates(d: int, p: float, dirichlet: float) -> dict[str, float]:
    """Both critical constants in circulation; they differ by a factor of 2."""
    full = K.sphere_moment(d - 1, p) * dirichlet
    return {"theorem": full, "half": 0.5 * full}


def predicted_limit(
    f: TestFunction, params: FractionalParams, regime: Regime, base: BaseDomain | None = None
) -> float:
    """Limit of ``E(eps) / lambda(eps)`` along the trivial recovery sequence."""
    base = base or BaseDomain.for_dimension(params.d)
    d, s, p = params.d, params.s, params.p
    lab = regime.label
    if lab is RegimeLabel.VERTICAL:
        part = vertical_component(f)
        if part is None:
            if isinstance(f, Constant) or f.is_constant:
                return 0.0
            raise UsageError(f"{f.tag} has no vertical profile; the vertical limit is 0 only trivially")
        return K.c_p(s, d, p) * base.measure * reference_seminorm_1d(part, s, p).value

    vert = vertical_component(f)
    if vert is not None and not vert.is_constant:
        raise UsageError(f"{f.tag} varies vertically; the {lab.value} limit needs a planar function")
    if f.is_constant:
        return 0.0
    if lab is RegimeLabel.SUBCRITICAL:
        s_eff = s + 1 / p
        return planar_seminorm(f, base, s_eff, p).value
    dirichlet = dirichlet_planar(f, base, p)
    if lab is RegimeLabel.CRITICAL:
        return critical_candidates(d, p, dirichlet)["theorem"]
    if lab is RegimeLabel.SUPERCRITICAL:
        k = K.k_closed(s, d) if p == 2 else K.k_p(s, d, p)
        return k / (1 - s) * dirichlet
    if p != 2:
        raise UsageError("the s -> 1 limit is implemented for p = 2")
    return K.surface_measure(d) / (2 * d) * dirichlet


def correction_order(regime: Regime, s: float, p: float) -> float | None:
    """Power of eps in the leading relative correction, for Richardson."""
    lab = regime.label
    if lab is RegimeLabel.VERTICAL:
        return 1.0
    if lab in (RegimeLabel.SUBCRITICAL, RegimeLabel.SUPERCRITICAL):
        gap = abs(p - 1 - s * p)
        return gap if gap > 1e-9 else None
    return None


# ------------------------------------------------------------------ schedules


@dataclass(frozen=True)
class Schedule:
    name: str
    fn: Callable[[float], float]

    def __call__(self, eps: float) -> float:
        s = float(self.fn(eps))
        if not 0 < s < 1:
            raise DomainError(f"schedule {self.name} gives s={s} at eps={eps}")
        return s


def parse_schedule(text: str) -> Schedule:
    """``const:x``, ``bbm-log2`` (1 - 1/log^2(1/eps)) or ``bbm-log`` (1 - 1/|log eps|)."""
    if text.startswith("const:"):
        try:
            value = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad constant schedule {text!r}") from exc
        return Schedule(text, lambda eps: value)
    if text == "bbm-log2":
        return Schedule(text, lambda eps: 1 - 1 / math.log(1 / eps) ** 2)
    if text == "bbm-log":
        return Schedule(text, lambda eps: 1 - 1 / abs(math.log(eps)))
    raise UsageError(f"unknown schedule {text!r}")


def dyadic_ladder(k_from: int, k_to: int) -> list[float]:
    return [2.0**-k for k in range(k_from, k_to + 1)]


# ------------------------------------------------------------------ reports


@dataclass
class ConvergenceReport:
    regime: Regime
    function: str
    params: FractionalParams
    engine: str
    eps_ladder: list[float] = field(default_factory=list)
    s_values: list[float] = field(default_factory=list)
    raw_energies: list[float] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)
    scaled_energies: list[float] = field(default_factory=list)
    fitted_slope: float | None = None
    predicted_slope: float | None = None
    predicted_limit: float | None = None
    extrapolated_limit: float | None = None
    richardson_limit: float | None = None
    relative_error: float | None = None
    degenerate: bool = False
    complete: bool = True
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("regime", "params")}
        out["regime"] = self.regime.to_dict()
        out["params"] = {"d": self.params.d, "s": self.params.s, "p": self.params.p}
        return out

    def rows(self) -> list[dict]:
        return [
            {"eps": e, "raw": r, "scaled": sc, "predicted": self.predicted_limit}
            for e, r, sc in zip(self.eps_ladder, self.raw_energies, self.scaled_energies)
        ]


def loglog_slope(eps: Sequence[float], values: Sequence[float]) -> float:
    """Ordinary least squares slope of log(values) against log(eps)."""
    return float(np.polyfit(np.log(eps), np.log(values), 1)[0])


def _richardson(eps, scaled, order):
    if order is None or len(scaled) < 2:
        return None
    e1, e2 = eps[-2] ** order, eps[-1] ** order
    return (scaled[-1] * e1 - scaled[-2] * e2) / (e1 - e2)


def _check_ladder(eps_ladder):
    eps = [float(e) for e in eps_ladder]
    if len(eps) < 4:
        raise UsageError("an eps ladder needs at least 4 rungs")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise UsageError("eps ladder must be strictly decreasing")
    return eps


def run_sweep(
    f: TestFunction,
    params: FractionalParams,
    eps_ladder: Sequence[float],
    spec: QuadratureSpec,
    s_schedule: Callable[[float], float] | None = None,
    regime: Regime | None = None,
    base: BaseDomain | None = None,
    tau: float = 0.0,
) -> ConvergenceReport:
    """Energies along the ladder, scaled by the regime's lambda(eps).

    The regime defaults to Vertical for functions with a vertical profile and
    to :func:`classify_regime` otherwise.  A failing rung raises
    :class:`SweepFailure` with the partial report attached.
    """
    eps = _check_ladder(eps_ladder)
    base = base or BaseDomain.for_dimension(params.d)
    if regime is None:
        vert = vertical_component(f)
        regime = vertical_regime(params) if vert is not None and not vert.is_constant else classify_regime(params)
    report = ConvergenceReport(regime, f.tag, params, spec.engine.value, predicted_slope=regime.scaling_exponent)
    if s_schedule is not None:
        report.extras["schedule"] = getattr(s_schedule, "name", "custom")
    for e in eps:
        s_e = s_schedule(e) if s_schedule is not None else params.s
        try:
            est = seminorm(f, ThinFilm(base, e, tau), params.with_s(s_e), spec)
        except ThinFracError as exc:
            report.complete = False
            raise SweepFailure(f"rung eps={e} failed: {exc}", partial=report) from exc
        report.eps_ladder.append(e)
        report.s_values.append(s_e)
        report.raw_energies.append(est.value)
        report.errors.append(est.error)
        report.scaled_energies.append(est.value / regime.scale(e, s_e, params.p))

    raw = report.raw_energies
    if all(v > 0 for v in raw):
        report.fitted_slope = loglog_slope(eps, raw)
    else:
        report.degenerate = True
    try:
        report.predicted_limit = predicted_limit(f, params, regime, base)
    except (UsageError, DomainError) as exc:
        report.extras["predicted_limit_unavailable"] = str(exc)
    report.extrapolated_limit = report.scaled_energies[-1]
    report.richardson_limit = _richardson(eps, report.scaled_energies, correction_order(regime, params.s, params.p))
    if report.predicted_limit:
        report.relative_error = abs(report.extrapolated_limit - report.predicted_limit) / abs(report.predicted_limit)
    return report


def critical_sweep(
    f: TestFunction, d: int, p: float, eps_ladder: Sequence[float], spec: QuadratureSpec
) -> ConvergenceReport:
    """Sweep at s = 1/p plus a linear fit of ``E/eps^2`` against ``|log eps|``.

    The fitted coefficient is the critical constant; ``extras`` lists both
    candidate values and which one the fit is closer to.
    """
    params = FractionalParams(d, 1 / p, p)
    report = run_sweep(f, params, eps_ladder, spec, regime=classify_regime(params))
    eps = np.array(report.eps_ladder)
    by_eps2 = np.array(report.raw_energies) / eps**2
    logs = np.abs(np.log(eps))
    coef, intercept = (float(v) for v in np.polyfit(logs, by_eps2, 1))
    base = BaseDomain.for_dimension(d)
    cands = critical_candidates(d, p, dirichlet_planar(f, base, p)) if not f.is_constant else {"theorem": 0.0, "half": 0.0}
    closest = min(cands, key=lambda k: abs(cands[k] - coef))
    report.extras.update(
        {
            "log_coefficient": coef,
            "intercept": intercept,
            "candidates": cands,
            "closest_candidate": closest,
        }
    )
    return report


def bbm_sweep(
    f: TestFunction,
    d: int,
    eps_ladder: Sequence[float],
    s_schedule: Callable[[float], float],
    spec: QuadratureSpec,
) -> ConvergenceReport:
    """``(1 - s_eps) E / eps^(3 - 2 s_eps)`` along a schedule with s_eps -> 1."""
    eps = _check_ladder(eps_ladder)
    s_vals = [s_schedule(e) for e in eps]
    if any(b < a for a, b in zip(s_vals, s_vals[1:])):
        raise UsageError("the s schedule must increase as eps decreases")
    params = FractionalParams(d, s_vals[0], 2.0)
    regime = bbm_regime(params)
    report = run_sweep(f, params, eps, spec, s_schedule=s_schedule, regime=regime)
    report.predicted_slope = None
    report.params = FractionalParams(d, s_vals[-1], 2.0)
    kappa = [e ** (1 - s) for e, s in zip(eps, s_vals)]
    report.extras["kappa"] = kappa
    # separation-of-scales normalisation (1-s) E / eps -> kappa^2 x limit
    report.extras["kappa_scaled"] = [(1 - s) * r / e for e, s, r in zip(eps, s_vals, report.raw_energies)]
    if report.predicted_limit is not None:
        report.extras["kappa_predicted"] = kappa[-1] ** 2 * report.predicted_limit
    return report


# ------------------------------------------------------------------ expansions


@dataclass
class ExpansionReport:
    function: str
    params: FractionalParams
    first_scale_term: float
    second_scale_term: float | None
    eps_ladder: list[float] = field(default_factory=list)
    raw_energies: list[float] = field(default_factory=list)
    first_terms: list[float] = field(default_factory=list)
    residual_trace: list[float] = field(default_factory=list)
    residual_scaled: list[float] = field(default_factory=list)
    note: str = (
        "cross terms between the planar and vertical summands are not removed; "
        "the residual is reported, not asserted"
    )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["params"] = {"d": self.params.d, "s": self.params.s, "p": self.params.p}
        return out


def expansion_report(
    f: TestFunction, params: FractionalParams, eps_ladder: Sequence[float], spec: QuadratureSpec
) -> ExpansionReport:
    """Two-scale decomposition of the energy of a planar + vertical sum."""
    if not isinstance(f, Sum):
        raise UsageError("expansion_report needs a planar + vertical sum")
    eps = _check_ladder(eps_ladder)
    base = BaseDomain.for_dimension(params.d)
    vreg, preg = vertical_regime(params), classify_regime(params)
    first = predicted_limit(f.vertical_part, params, vreg, base)
    planar = planar_component(f)
    second = None if planar.is_constant else predicted_limit(planar, params, preg, base)
    rep = ExpansionReport(f.tag, params, first, second)
    for e in eps:
        raw = seminorm(f, ThinFilm(base, e), params, spec).value
        term = first * vreg.scale(e, params.s, params.p)
        rep.eps_ladder.append(e)
        rep.raw_energies.append(raw)
        rep.first_terms.append(term)
        rep.residual_trace.append(raw - term)
        rep.residual_scaled.append((raw - term) / preg.scale(e, params.s, params.p))
    return rep


# ------------------------------------------------------------------ blow-up


def blowup_matching(d: int, distance: float = 1e-2, subcritical: bool = True) -> dict:
    """Both sides of the blow-up at the critical exponent, constants only.

    Super-critical side: ``(2s-1) K_(s,d)`` at ``s = 1/2 + distance`` against
    ``sigma_(d-1) / (2(d-1))``.  Sub-critical side (interval base): the 1-D
    limit ``(1 - s_eff) [x]_(s_eff)`` at ``s_eff = 1 - distance`` against the
    Dirichlet energy 1.
    """
    s = 0.5 + distance
    target = K.surface_measure(d - 1) / (2 * (d - 1))
    sup = (2 * s - 1) * K.k_closed(s, d)
    out = {"s": s, "super_value": sup, "super_target": target, "super_gap": abs(sup - target) / target}
    if subcritical:
        s_eff = 1 - distance
        base = BaseDomain.for_dimension(2)
        val = (1 - s_eff) * planar_seminorm(PlanarLinear((1.0,)), base, s_eff).value
        out.update({"s_eff": s_eff, "sub_value": val, "sub_target": 1.0, "sub_gap": abs(val - 1.0)})
    return out
