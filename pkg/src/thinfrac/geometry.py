"""Thin-film domains, fractional parameters and uniform sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError


class Shape(str, Enum):
    UNIT_INTERVAL = "interval"
    UNIT_SQUARE = "square"


@dataclass(frozen=True)
class BaseDomain:
    """Axis-aligned base ``omega`` in R^(d-1): an interval or a rectangle.

    ``origin`` is the lower corner; the domain is ``origin + [0, extents]``.
    """

    shape: Shape = Shape.UNIT_INTERVAL
    extents: tuple[float, ...] = ()
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        shape = Shape(self.shape)
        object.__setattr__(self, "shape", shape)
        n = 1 if shape is Shape.UNIT_INTERVAL else 2
        extents = tuple(float(e) for e in self.extents) or (1.0,) * n
        origin = tuple(float(o) for o in self.origin) or (0.0,) * n
        if len(extents) != n or len(origin) != n:
            raise DomainError(f"{shape.value} base needs {n} extents and origin coordinates")
        if not all(math.isfinite(e) and e > 0 for e in extents):
            raise DomainError(f"extents must be positive and finite, got {extents}")
        if not all(math.isfinite(o) for o in origin):
            raise DomainError("origin must be finite")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def for_dimension(cls, d: int, extents=(), origin=()) -> BaseDomain:
        if d == 2:
            return cls(Shape.UNIT_INTERVAL, extents, origin)
        if d == 3:
            return cls(Shape.UNIT_SQUARE, extents, origin)
        raise DomainError(f"d must be 2 or 3, got {d}")

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def d(self) -> int:
        return self.dim + 1

    @property
    def measure(self) -> float:
        return math.prod(self.extents)

    @property
    def diameter(self) -> float:
        return math.hypot(*self.extents)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.origin)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.origin) + np.array(self.extents)

    def shrink(self, tau: float) -> BaseDomain:
        """The interior set ``omega_tau`` of points at distance > tau from the boundary."""
        extents = tuple(e - 2 * tau for e in self.extents)
        if min(extents) <= 0:
            raise DomainError(f"margin {tau} empties the base domain")
        return BaseDomain(self.shape, extents, tuple(o + tau for o in self.origin))

    def contains(self, xp) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        return np.all((xp >= self.lower) & (xp <= self.upper), axis=-1)


@dataclass(frozen=True)
class ThinFilm:
    """The cylinder ``omega x (0, eps)`` with an interior margin ``tau``."""

    base: BaseDomain = field(default_factory=BaseDomain)
    eps: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.eps) and 0 < self.eps <= 1):
            raise DomainError(f"thickness must lie in (0, 1], got {self.eps}")
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise DomainError(f"margin must be nonnegative, got {self.tau}")
        if self.tau >= min(self.base.extents) / 2:
            raise DomainError(f"margin {self.tau} leaves an empty interior base")

    @classmethod
    def unit(cls, d: int, eps: float, tau: float = 0.0) -> ThinFilm:
        return cls(BaseDomain.for_dimension(d), eps, tau)

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def measure(self) -> float:
        return self.base.measure * self.eps

    @property
    def diameter(self) -> float:
        return math.hypot(*self.base.extents, self.eps)

    @property
    def lower(self) -> np.ndarray:
        return np.append(self.base.lower, 0.0)

    @property
    def upper(self) -> np.ndarray:
        return np.append(self.base.upper, self.eps)

    def interior(self) -> ThinFilm:
        """``omega_tau x (0, eps)``; the returned film has zero margin."""
        if self.tau == 0:
            return self
        return ThinFilm(self.base.shrink(self.tau), self.eps)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)

    def summary(self) -> dict:
        return {
            "base": self.base.shape.value,
            "extents": list(self.base.extents),
            "origin": list(self.base.origin),
            "eps": self.eps,
            "tau": self.tau,
        }


@dataclass(frozen=True)
class FractionalParams:
    d: int = 2
    s: float = 0.5
    p: float = 2.0

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError(f"d must be 2 or 3, got {self.d}")
        if not (0 < self.s < 1):
            raise DomainError(f"s must lie in (0, 1), got {self.s}")
        if not (math.isfinite(self.p) and self.p >= 1):
            raise DomainError(f"p must be a finite real >= 1, got {self.p}")

    @property
    def kernel_exponent(self) -> float:
        return self.d + self.s * self.p

    def with_s(self, s: float) -> FractionalParams:
        return FractionalParams(self.d, s, self.p)


def sample_points(film: ThinFilm, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` points drawn uniformly from the film, shape ``(n, d)``."""
    u = rng.random((n, film.d))
    return film.lower + u * (film.upper - film.lower)


def sample_point(film: ThinFilm, rng: np.random.Generator) -> np.ndarray:
    return sample_points(film, rng, 1)[0]


def rescale_vertical(x, film: ThinFilm) -> np.ndarray:
    """Map ``(x', x_d)`` in the film to ``(x', x_d / eps)`` in ``omega x (0, 1)``."""
    x = np.asarray(x, dtype=float)
    if not np.all(film.contains(x)):
        raise DomainError("point lies outside the thin film")
    out = x.copy()
    out[..., -1] = x[..., -1] / film.eps
    return out


def unscale_vertical(z, film: ThinFilm) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = z.copy()
    out[..., -1] = z[..., -1] * film.eps
    return out
