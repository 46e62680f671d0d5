"""Analytic test functions on thin films.

Every family is vectorised: ``evaluate(x, eps)`` takes an array whose last
axis holds the ``d`` coordinates.  Families are named on the command line by
tags such as ``planar-linear:a=1,0`` or ``vertical-sine:c=2``; a ``+`` joins a
planar and a vertical tag into a :class:`Sum`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import UnsupportedFamilyError, UsageError
from .geometry import BaseDomain
from .oned import interval_seminorm_with_error


class ReferenceKind(str, Enum):
    DIRICHLET_PLANAR = "DirichletPlanar"
    SEMINORM_1D = "Seminorm1D"
    SEMINORM_PLANAR = "SeminormPlanar"


class Provenance(str, Enum):
    CLOSED_FORM = "ClosedForm"
    ORACLE = "Oracle"


@dataclass(frozen=True)
class ReferenceValue:
    kind: ReferenceKind
    value: float
    provenance: Provenance
    error: float = 0.0


class TestFunction:
    """Common interface; concrete families are frozen dataclasses below."""

    __test__ = False  # keep pytest from collecting this class

    planar = False
    vertical = False

    def evaluate(self, x, eps: float) -> np.ndarray:
        raise NotImplementedError

    def planar_gradient(self, xp) -> np.ndarray:
        raise UnsupportedFamilyError(f"{self.tag} has no planar part")

    def lipschitz(self, eps: float) -> float:
        raise NotImplementedError

    def planar_dim(self) -> int | None:
        """Base dimension fixed by the coefficients, or None if any."""
        return None

    @property
    def is_constant(self) -> bool:
        return False

    @property
    def tag(self) -> str:
        raise NotImplementedError

    def __call__(self, x, eps: float) -> np.ndarray:
        return self.evaluate(x, eps)


@dataclass(frozen=True)
class Constant(TestFunction):
    c: float = 0.0

    def evaluate(self, x, eps):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], float(self.c))

    def planar_gradient(self, xp):
        xp = np.atleast_1d(np.asarray(xp, dtype=float))
        return np.zeros_like(xp)

    def lipschitz(self, eps):
        return 0.0

    @property
    def is_constant(self):
        return True

    @property
    def tag(self):
        return f"constant:c={self.c:g}"


@dataclass(frozen=True)
class PlanarLinear(TestFunction):
    """``u(x) = a . x'``."""

    a: tuple[float, ...] = (1.0,)
    planar = True

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in np.atleast_1d(self.a)))
        if len(self.a) not in (1, 2):
            raise UsageError("planar-linear needs 1 or 2 coefficients")

    def evaluate(self, x, eps):
        x = np.asarray(x, dtype=float)
        return x[..., : len(self.a)] @ np.array(self.a)

    def planar_gradient(self, xp):
        xp = np.asarray(xp, dtype=float)
        batch = xp.shape[:-1] if xp.ndim > 1 else ()
        return np.broadcast_to(np.array(self.a), batch + (len(self.a),)).copy()

    def lipschitz(self, eps):
        return math.hypot(*self.a)

    def planar_dim(self):
        return len(self.a)

    @property
    def is_constant(self):
        return not any(self.a)

    @property
    def tag(self):
        return "planar-linear:a=" + ",".join(f"{v:g}" for v in self.a)


@dataclass(frozen=True)
class PlanarSine(TestFunction):
    """``u(x) = prod_i sin(k_i pi x_i)`` over the planar coordinates."""

    k: tuple[int, ...] = (1,)
    planar = True

    def __post_init__(self):
        k = tuple(int(v) for v in np.atleast_1d(self.k))
        if len(k) not in (1, 2) or any(v != w for v, w in zip(k, np.atleast_1d(self.k))):
            raise UsageError("planar-sine needs 1 or 2 integer wave numbers")
        object.__setattr__(self, "k", k)

    def evaluate(self, x, eps):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for i, k in enumerate(self.k):
            out = out * np.sin(k * math.pi * x[..., i])
        return out

    def planar_gradient(self, xp):
        xp = np.asarray(xp, dtype=float)
        if xp.ndim == 0:
            xp = xp[None]
        sines = [np.sin(k * math.pi * xp[..., i]) for i, k in enumerate(self.k)]
        grads = []
        for i, k in enumerate(self.k):
            g = k * math.pi * np.cos(k * math.pi * xp[..., i])
            for j, sj in enumerate(sines):
                if j != i:
                    g = g * sj
            grads.append(g)
        return np.stack(grads, axis=-1)

    def lipschitz(self, eps):
        return math.pi * math.hypot(*self.k)

    def planar_dim(self):
        return len(self.k)

    @property
    def is_constant(self):
        return any(k == 0 for k in self.k)

    @property
    def tag(self):
        return "planar-sine:k=" + ",".join(str(v) for v in self.k)


PROFILE_KINDS = ("linear", "sine")


@dataclass(frozen=True)
class VerticalProfile(TestFunction):
    """``u(x) = c g(x_d / eps)`` with ``g(t) = t`` or ``sin(pi t)``."""

    kind: str = "linear"
    c: float = 1.0
    vertical = True

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise UsageError(f"vertical profile must be one of {PROFILE_KINDS}")

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return t if self.kind == "linear" else np.sin(math.pi * t)

    def evaluate(self, x, eps):
        x = np.asarray(x, dtype=float)
        return self.c * self.g(x[..., -1] / eps)

    def lipschitz(self, eps):
        slope = 1.0 if self.kind == "linear" else math.pi
        return abs(self.c) * slope / eps

    @property
    def is_constant(self):
        return self.c == 0

    @property
    def tag(self):
        base = f"vertical-{self.kind}"
        return base if self.c == 1 else f"{base}:c={self.c:g}"


@dataclass(frozen=True)
class Sum(TestFunction):
    """One planar member plus one vertical member."""

    planar_part: TestFunction = PlanarLinear()
    vertical_part: VerticalProfile = VerticalProfile()
    planar = True
    vertical = True

    def __post_init__(self):
        if not self.planar_part.planar or self.planar_part.vertical:
            raise UsageError("first summand must be a planar family")
        if not isinstance(self.vertical_part, VerticalProfile):
            raise UsageError("second summand must be a vertical profile")

    def evaluate(self, x, eps):
        return self.planar_part.evaluate(x, eps) + self.vertical_part.evaluate(x, eps)

    def planar_gradient(self, xp):
        return self.planar_part.planar_gradient(xp)

    def lipschitz(self, eps):
        return self.planar_part.lipschitz(eps) + self.vertical_part.lipschitz(eps)

    def planar_dim(self):
        return self.planar_part.planar_dim()

    @property
    def is_constant(self):
        return self.planar_part.is_constant and self.vertical_part.is_constant

    @property
    def tag(self):
        return f"{self.planar_part.tag}+{self.vertical_part.tag}"


@dataclass(frozen=True)
class Affine(TestFunction):
    """``scale * f + shift``; used by the homogeneity and translation checks."""

    inner: TestFunction = Constant()
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "planar", self.inner.planar)
        object.__setattr__(self, "vertical", self.inner.vertical)

    def evaluate(self, x, eps):
        return self.scale * self.inner.evaluate(x, eps) + self.shift

    def planar_gradient(self, xp):
        return self.scale * self.inner.planar_gradient(xp)

    def lipschitz(self, eps):
        return abs(self.scale) * self.inner.lipschitz(eps)

    def planar_dim(self):
        return self.inner.planar_dim()

    @property
    def is_constant(self):
        return self.scale == 0 or self.inner.is_constant

    @property
    def tag(self):
        return f"affine({self.inner.tag};scale={self.scale:g};shift={self.shift:g})"


# ------------------------------------------------------------------ queries


def evaluate(f: TestFunction, x, eps: float) -> np.ndarray:
    return f.evaluate(x, eps)


def planar_gradient(f: TestFunction, xp) -> np.ndarray:
    return f.planar_gradient(xp)


def planar_component(f: TestFunction) -> TestFunction | None:
    """The x'-dependent summand, or None for purely vertical functions."""
    if isinstance(f, Sum):
        return f.planar_part
    if isinstance(f, Affine):
        inner = planar_component(f.inner)
        return None if inner is None else Affine(inner, f.scale, 0.0)
    if f.planar or isinstance(f, Constant):
        return f
    return None


def vertical_component(f: TestFunction) -> VerticalProfile | None:
    if isinstance(f, Sum):
        return f.vertical_part
    if isinstance(f, Affine):
        inner = vertical_component(f.inner)
        return None if inner is None else VerticalProfile(inner.kind, inner.c * f.scale)
    if isinstance(f, VerticalProfile):
        return f
    return None


def _cos_power_integral(k: int, lo: float, hi: float, p: float) -> float:
    """``int_lo^hi |cos(k pi x)|^p dx``."""
    if p == 2:
        w = 2 * k * math.pi
        return (hi - lo) / 2 + (math.sin(w * hi) - math.sin(w * lo)) / (2 * w)
    zeros = [(j + 0.5) / k for j in range(int(math.floor(k * lo - 0.5)), int(math.ceil(k * hi)) + 1)]
    points = [z for z in zeros if lo < z < hi]
    val, _ = integrate.quad(
        lambda x: abs(math.cos(k * math.pi * x)) ** p, lo, hi, points=points or None, epsabs=0, epsrel=1e-12, limit=200
    )
    return val


def _sin_power_integral(k: int, lo: float, hi: float, p: float) -> float:
    return _cos_power_integral(k, lo - 0.5 / k, hi - 0.5 / k, p)


def dirichlet_planar(f: TestFunction, base: BaseDomain, p: float = 2.0) -> float:
    """``int_omega |grad' f|^p dx'`` (the vertical summand contributes nothing)."""
    part = planar_component(f)
    if part is None:
        raise UnsupportedFamilyError(f"{f.tag} is purely vertical")
    if isinstance(part, Constant) or part.is_constant:
        return 0.0
    scale = 1.0
    if isinstance(part, Affine):
        scale, part = abs(part.scale), part.inner
    _check_dim(part, base)
    if isinstance(part, PlanarLinear):
        return scale**p * math.hypot(*part.a) ** p * base.measure
    if isinstance(part, PlanarSine):
        lo, hi = base.lower, base.upper
        if base.dim == 1:
            k = part.k[0]
            return scale**p * (k * math.pi) ** p * _cos_power_integral(k, lo[0], hi[0], p)
        if p == 2:
            # |grad|^2 is a sum of separable terms
            total = 0.0
            for i in range(2):
                j = 1 - i
                ki, kj = part.k[i], part.k[j]
                total += (ki * math.pi) ** 2 * _cos_power_integral(ki, lo[i], hi[i], 2) * _sin_power_integral(
                    kj, lo[j], hi[j], 2
                )
            return scale**2 * total
        val, _ = integrate.dblquad(
            lambda y, x: float(np.linalg.norm(part.planar_gradient(np.array([x, y])))) ** p,
            lo[0],
            hi[0],
            lo[1],
            hi[1],
            epsabs=0,
            epsrel=1e-10,
        )
        return scale**p * val
    raise UnsupportedFamilyError(f"no Dirichlet energy for {part.tag}")


def _check_dim(part: TestFunction, base: BaseDomain):
    n = part.planar_dim()
    if n is not None and n != base.dim:
        raise UsageError(f"{part.tag} has {n} planar coefficients but the base has dimension {base.dim}")


def reference_seminorm_1d(g: VerticalProfile | str, s: float, p: float = 2.0) -> ReferenceValue:
    """``[g]^p_s((0,1))``, the 1-D seminorm of the profile ``c g``.

    Linear profile, closed form: ``2 |c|^p / ((p - sp)(p - sp + 1))``, which is
    ``1/((1-s)(3-2s))`` at p = 2.  The sine profile is evaluated by graded
    quadrature in ``r = t - tau`` (relative accuracy about 1e-10).
    """
    if isinstance(g, str):
        g = VerticalProfile(g)
    if not 0 < s < 1:
        raise UsageError(f"s must lie in (0, 1), got {s}")
    scale = abs(g.c) ** p
    if g.kind == "linear":
        q = p - s * p
        return ReferenceValue(ReferenceKind.SEMINORM_1D, scale * 2 / (q * (q + 1)), Provenance.CLOSED_FORM)
    value, err = interval_seminorm_with_error(g.g, 0.0, 1.0, s, p)
    return ReferenceValue(ReferenceKind.SEMINORM_1D, scale * value, Provenance.ORACLE, scale * err)


# -------------------------------------------------------------------- tags


def _parse_params(text: str) -> dict[str, str]:
    out = {}
    for chunk in filter(None, text.split(";")):
        if "=" not in chunk:
            raise UsageError(f"malformed parameter {chunk!r}")
        key, value = chunk.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}") from exc


def _parse_single(tag: str, d: int | None) -> TestFunction:
    name, _, rest = tag.strip().partition(":")
    kw = _parse_params(rest)
    n = None if d is None else d - 1
    if name == "planar-linear":
        a = _floats(kw.pop("a", "1"))
        if n is not None and len(a) == 1 and n == 2:
            a = (a[0], 0.0)
        f = PlanarLinear(a)
    elif name == "planar-sine":
        k = _floats(kw.pop("k", "1"))
        if any(v != int(v) for v in k):
            raise UsageError("wave numbers must be integers")
        if n is not None and len(k) == 1 and n == 2:
            k = (k[0], k[0])
        f = PlanarSine(tuple(int(v) for v in k))
    elif name in ("vertical-linear", "vertical-sine"):
        f = VerticalProfile(name.split("-")[1], float(kw.pop("c", "1")))
    elif name == "constant":
        f = Constant(float(kw.pop("c", "0")))
    else:
        raise UsageError(f"unknown function family {name!r}")
    if kw:
        raise UsageError(f"unused parameters {sorted(kw)} for {name}")
    if n is not None and f.planar_dim() not in (None, n):
        raise UsageError(f"{f.tag} does not fit a base of dimension {n}")
    return f


def parse_tag(tag: str, d: int | None = None) -> TestFunction:
    """Build a test function from its command-line tag.

    Parameters are separated by ``;`` and list values by ``,``, e.g.
    ``planar-linear:a=1,0`` or ``planar-sine:k=1+vertical-linear:c=0.5``.
    With ``d = 3`` a single planar coefficient is padded to the square base.
    """
    parts = tag.split("+")
    if len(parts) == 1:
        return _parse_single(parts[0], d)
    if len(parts) != 2:
        raise UsageError("a sum joins exactly one planar and one vertical tag")
    return Sum(_parse_single(parts[0], d), _parse_single(parts[1], d))
