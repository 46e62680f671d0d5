"""Hypergeometric constants of the thin-film limits, each computed two ways.

Every constant has a closed form in terms of the Gamma function and a
defining improper integral.  The closed forms use the local
:func:`gamma_function`; the integrals are evaluated numerically after the
compactifying substitution ``z = w / (1 - w)``.  The two routes never share
code beyond the surface measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

from .errors import DomainError, NumericalFailure

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

QUAD_RTOL = 1e-10


def gamma_function(x: float) -> float:
    """Euler's Gamma function for real ``x > 0``.

    Uses the reflection formula below 1/2 so the series is only ever summed
    for arguments >= 1/2, where it is accurate to a few ulps.
    """
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"gamma_function needs a finite x > 0, got {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_function(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    # t**(z+0.5) split in two halves to delay overflow
    half = t ** ((z + 0.5) / 2)
    return math.sqrt(2 * math.pi) * half * (half * math.exp(-t)) * acc


def surface_measure(k: int) -> float:
    """``sigma_k``: the (k-1)-dimensional measure of the unit sphere in R^k."""
    if k not in (1, 2, 3, 4):
        raise DomainError(f"surface_measure supports k in 1..4, got {k}")
    return 2 * math.pi ** (k / 2) / gamma_function(k / 2)


def sphere_moment(k: int, p: float) -> float:
    """Closed form of the integral of ``|nu_1|^p`` over the unit sphere of R^k."""
    if k < 1:
        raise DomainError("sphere dimension must be >= 1")
    return 2 * math.pi ** ((k - 1) / 2) * gamma_function((p + 1) / 2) / gamma_function((k + p) / 2)


# --------------------------------------------------------------- quadrature


def radial_moment(a: float, b: float, rtol: float = QUAD_RTOL) -> tuple[float, float]:
    """``int_0^inf z^a (1+z^2)^(-b) dz`` by adaptive quadrature on (0, 1).

    After ``z = w/(1-w)`` the integrand is ``w^a (1-w)^(2b-a-2) / ((1-w)^2+w^2)^b``.
    Both algebraic end-point factors are handed to QUADPACK as exact weights,
    so only the smooth middle factor is sampled.  Returns ``(value, abserr)``.
    """
    alpha, beta = a, 2 * b - a - 2
    if alpha <= -1 or beta <= -1:
        raise DomainError(f"radial moment diverges for a={a}, b={b}")

    def smooth(w):
        return ((1 - w) ** 2 + w * w) ** (-b)

    value, abserr = integrate.quad(
        smooth, 0.0, 1.0, weight="alg", wvar=(alpha, beta), epsabs=0.0, epsrel=rtol, limit=200
    )
    if not (value > 0 and abserr <= 10 * rtol * value):
        raise NumericalFailure(f"radial moment a={a}, b={b} did not converge", abserr)
    return value, abserr


def j_quadrature(s: float, d: int) -> float:
    """``J_d^s = int_0^inf z^(d-2) (1+z^2)^(-d/2-s) dz``."""
    return radial_moment(d - 2, d / 2 + s)[0]


def i_quadrature(s: float, d: int) -> float:
    """``I_d^s = int_0^inf z^d (1+z^2)^(-d/2-s) dz`` (finite iff s > 1/2)."""
    return radial_moment(d, d / 2 + s)[0]


@lru_cache(maxsize=64)
def angular_moment_quadrature(p: float) -> float:
    """``int_0^(2 pi) |cos t|^p dt``, the circle case of :func:`sphere_moment`."""
    value, _ = integrate.quad(lambda t: math.cos(t) ** p, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-13)
    return 4 * value


def _check_s(s, lo=0.0, hi=1.0, closed_hi=False):
    ok = lo < s <= hi if closed_hi else lo < s < hi
    if not ok:
        bracket = "]" if closed_hi else ")"
        raise DomainError(f"s={s} outside ({lo}, {hi}{bracket}")


# ------------------------------------------------------------------- C_{s,d}


def c_closed(s: float, d: int) -> float:
    _check_s(s, closed_hi=True)
    return math.pi ** ((d - 1) / 2) * gamma_function(0.5 + s) / gamma_function(d / 2 + s)


def c_quadrature(s: float, d: int) -> float:
    _check_s(s)
    return surface_measure(d - 1) * j_quadrature(s, d)


def j_recursion_residual(s: float, d: int) -> float:
    """Relative defect of ``J_d = (d-3)/(d-2+2s) J_(d-2)`` with both sides by quadrature."""
    _check_s(s)
    if d < 4:
        raise DomainError("the J recursion needs d >= 4")
    jd = j_quadrature(s, d)
    return abs(jd - (d - 3) / (d - 2 + 2 * s) * j_quadrature(s, d - 2)) / jd


def j_closed(s: float, d: int) -> float:
    return 0.5 * gamma_function((d - 1) / 2) * gamma_function(0.5 + s) / gamma_function(d / 2 + s)


def i1_identity_gap(d: int) -> float:
    """Relative gap between ``I_d^1`` by quadrature and ``(d-1)/(2d) sigma_d / sigma_(d-1)``."""
    quad = i_quadrature(1.0, d)
    closed = (d - 1) / (2 * d) * surface_measure(d) / surface_measure(d - 1)
    return abs(quad - closed) / closed


# ------------------------------------------------------------------- K_{s,d}


def k_closed(s: float, d: int) -> float:
    """``C_{s,d} / ((2s-1)(3-2s))``, the super-critical coefficient."""
    if not 0.5 < s < 1:
        raise DomainError(f"K_(s,d) is finite only for 1/2 < s < 1, got s={s}")
    return c_closed(s, d) / ((2 * s - 1) * (3 - 2 * s))


def k_gamma_form(s: float, d: int) -> float:
    """The Gamma-function representation written in terms of ``sigma_(d-1)``."""
    if not 0.5 < s < 1:
        raise DomainError(f"K_(s,d) is finite only for 1/2 < s < 1, got s={s}")
    return (
        surface_measure(d - 1)
        / (2 * (2 * s - 1) * (3 - 2 * s))
        * gamma_function((d - 1) / 2)
        * gamma_function(s + 0.5)
        / gamma_function(s + d / 2)
    )


def k_quadrature(s: float, d: int) -> float:
    if not 0.5 < s < 1:
        raise DomainError(f"K_(s,d) is finite only for 1/2 < s < 1, got s={s}")
    return surface_measure(d - 1) * i_quadrature(s, d) / ((3 - 2 * s) * (d - 1))


# ------------------------------------------------------------- general p


def c_p(s: float, d: int, p: float, method: str = "closed") -> float:
    """``C_{s,d;p}``, the first-scaling constant for the W^{s,p} seminorm."""
    _check_s(s, closed_hi=True)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if method == "closed":
        sp = s * p
        return math.pi ** ((d - 1) / 2) * gamma_function((1 + sp) / 2) / gamma_function((d + sp) / 2)
    if method == "quad":
        return surface_measure(d - 1) * radial_moment(d - 2, (d + s * p) / 2)[0]
    raise ValueError(f"unknown method {method!r}")


def c1_p_closed(d: int, p: float) -> float:
    """The s = 1 value written through ``sigma_d``."""
    return (
        surface_measure(d)
        / (2 * math.sqrt(math.pi))
        * gamma_function(d / 2)
        * gamma_function((p + 1) / 2)
        / gamma_function((p + d) / 2)
    )


def k_p(s: float, d: int, p: float) -> float:
    """``K_{s,d;p}`` by quadrature of its defining integral over R^(d-1).

    The integrand ``|xi_1|^p (1+|xi|^2)^(-(d+sp)/2)`` decays like
    ``|xi|^(p-d-sp)``; the integral over R^(d-1) is finite iff ``p(1-s) < 1``.
    For p = 2 that is the familiar s > 1/2, but for p > 2 it is stricter than
    s > 1/p, so both conditions are enforced.
    """
    _check_s(s)
    if s <= 1 / p:
        raise DomainError(f"K_(s,d;p) needs s > 1/p, got s={s}, p={p}")
    if p * (1 - s) >= 1:
        raise DomainError(f"K_(s,d;p) integral diverges for p(1-s) >= 1 (s={s}, p={p})")
    radial = radial_moment(p + d - 2, (d + s * p) / 2)[0]
    if d == 2:
        angular = 2.0
    elif d == 3:
        angular = angular_moment_quadrature(p)
    else:
        raise DomainError("k_p supports d in {2, 3}")
    return 2 / (p * (1 + p - s * p)) * angular * radial


def k_p_closed(s: float, d: int, p: float) -> float:
    """Closed form of :func:`k_p` via :func:`sphere_moment` and a Beta function."""
    if p * (1 - s) >= 1 or s <= 1 / p:
        raise DomainError(f"K_(s,d;p) undefined for s={s}, p={p}")
    a, b = p + d - 2, (d + s * p) / 2
    radial = 0.5 * gamma_function((a + 1) / 2) * gamma_function(b - (a + 1) / 2) / gamma_function(b)
    return 2 / (p * (1 + p - s * p)) * sphere_moment(d - 1, p) * radial


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class ConstantReport:
    name: str
    s: float
    d: int
    p: float
    closed_form: float
    quadrature: float | None

    @property
    def relative_gap(self) -> float | None:
        if self.quadrature is None:
            return None
        return abs(self.closed_form - self.quadrature) / max(abs(self.closed_form), 1e-30)

    def row(self) -> dict:
        return {
            "name": self.name,
            "s": self.s,
            "d": self.d,
            "p": self.p,
            "closed": self.closed_form,
            "quad": self.quadrature,
            "rel_gap": self.relative_gap,
        }


def constant_table(s_grid, d_set, p_set=(2.0,)) -> list[ConstantReport]:
    """Closed-vs-quadrature rows for C (every p) and K (p = 2, s > 1/2).

    ``s = 1`` is admitted for closed forms only; its quadrature column is None.
    """
    rows = []
    for p in p_set:
        for d in d_set:
            for s in s_grid:
                quad_ok = s < 1
                if p == 2:
                    rows.append(
                        ConstantReport("C", s, d, p, c_closed(s, d), c_quadrature(s, d) if quad_ok else None)
                    )
                    if 0.5 < s < 1:
                        rows.append(ConstantReport("K", s, d, p, k_closed(s, d), k_quadrature(s, d)))
                else:
                    rows.append(
                        ConstantReport(
                            "C_p", s, d, p, c_p(s, d, p), c_p(s, d, p, "quad") if quad_ok else None
                        )
                    )
                    if 1 / p < s < 1 and p * (1 - s) < 1 and d in (2, 3):
                        rows.append(ConstantReport("K_p", s, d, p, k_p_closed(s, d, p), k_p(s, d, p)))
    return rows
