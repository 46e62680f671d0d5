"""Fractional Gagliardo energies on thin films.

Two independent engines evaluate

    E = int_Om int_Om |u(x) - u(y)|^p / |x - y|^(d + s p) dx dy

on ``Om = omega_tau x (0, eps)``:

* ``mc``: importance-sampled Monte Carlo.  The radius of ``y - x`` is drawn
  from a power law matched to the kernel; points leaving the domain count as
  zero.  Works in any dimension.
* ``grid``: deterministic quadrature in ``xi = y - x`` for d = 2, with Duffy
  triangles and graded radial panels at the diagonal singularity.

Both return an :class:`EnergyEstimate` in the unscaled geometry.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .constants import surface_measure
from .errors import DomainError, NumericalFailure, UnsupportedFamilyError, UsageError
from .geometry import BaseDomain, FractionalParams, ThinFilm
from .oned import geometric_edges, graded_edges, jacobi_left, legendre, panel_rule, uniform_rule
from .oned import interval_seminorm_with_error
from .testfns import TestFunction, planar_component, reference_seminorm_1d, vertical_component

MIN_SAMPLES = 1000
MIN_PANELS = 8


class Engine(str, Enum):
    MC = "mc"
    GRID = "grid"


@dataclass(frozen=True)
class QuadratureSpec:
    engine: Engine = Engine.GRID
    samples: int = 200_000
    panels: int = 16
    seed: int = 0
    radial_exponent_shift: float = 0.0
    grading_strength: float = 2.0
    order: int = 6
    threads: int = 1
    chunk_size: int = 1 << 16

    def __post_init__(self):
        object.__setattr__(self, "engine", Engine(self.engine))
        if self.samples < MIN_SAMPLES:
            raise UsageError(f"samples must be >= {MIN_SAMPLES}")
        if self.panels < MIN_PANELS:
            raise UsageError(f"panels must be >= {MIN_PANELS}")
        if not self.grading_strength > 1:
            raise UsageError("grading_strength must exceed 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.order < 2 or self.threads < 1 or self.chunk_size < 1:
            raise UsageError("order >= 2, threads >= 1 and chunk_size >= 1 required")

    def with_(self, **kw) -> QuadratureSpec:
        return replace(self, **kw)


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    error: float
    engine: str
    params: FractionalParams
    film: dict = field(default_factory=dict)
    low_confidence: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "engine": self.engine,
            "low_confidence": self.low_confidence,
            "params": {"d": self.params.d, "s": self.params.s, "p": self.params.p},
            "film": self.film,
        }


def _check_fit(f: TestFunction, n_planar: int):
    dim = f.planar_dim()
    if dim is not None and dim != n_planar:
        raise UsageError(f"{f.tag} expects a base of dimension {dim}, film base has {n_planar}")


# ------------------------------------------------------------------ Monte Carlo


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(chunk,))))


def mc_box(u, lower, upper, s: float, p: float, spec: QuadratureSpec) -> tuple[float, float]:
    """MC estimate of the W^{s,p} energy of ``u`` on a box in R^n.

    ``u`` maps arrays ``(..., n)`` to values.  Returns ``(mean, std_error)``.
    Each chunk of ``spec.chunk_size`` samples uses its own counter-based
    stream keyed by ``(seed, chunk index)``, and partial sums are reduced in
    chunk order, so the result does not depend on ``spec.threads``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = lower.size
    width = upper - lower
    vol = float(np.prod(width))
    diam = float(np.linalg.norm(width))
    alpha = p - 1 - s * p + spec.radial_exponent_shift
    if alpha <= -1:
        raise UsageError("radial_exponent_shift makes the radius law non-normalisable")
    scale = vol * surface_measure(n) * diam ** (alpha + 1) / (alpha + 1)
    total = spec.samples
    nchunks = -(-total // spec.chunk_size)

    def run(k: int) -> tuple[float, float]:
        m = min(spec.chunk_size, total - k * spec.chunk_size)
        rng = _chunk_rng(spec.seed, k)
        x = lower + rng.random((m, n)) * width
        if n == 1:
            direction = np.where(rng.random((m, 1)) < 0.5, -1.0, 1.0)
        else:
            direction = rng.standard_normal((m, n))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = diam * (1.0 - rng.random(m)) ** (1 / (alpha + 1))
        ux = u(x)
        acc = np.zeros(m)
        for sign in (1.0, -1.0):
            y = x + sign * r[:, None] * direction
            inside = np.all((y >= lower) & (y <= upper), axis=1)
            diff = np.zeros(m)
            if inside.any():
                diff[inside] = np.abs(u(y[inside]) - ux[inside]) ** p
            acc += diff
        w = 0.5 * scale * r ** (-1 - s * p - alpha) * acc
        if not np.all(np.isfinite(w)):
            raise NumericalFailure("non-finite Monte Carlo weight")
        return float(w.sum()), float(w @ w)

    if spec.threads > 1 and nchunks > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            parts = list(pool.map(run, range(nchunks)))
    else:
        parts = [run(k) for k in range(nchunks)]
    s1 = s2 = 0.0
    for a, b in parts:
        s1 += a
        s2 += b
    mean = s1 / total
    var = max(s2 / total - mean * mean, 0.0)
    return mean, math.sqrt(var / (total - 1))


def seminorm_mc(f: TestFunction, film: ThinFilm, params: FractionalParams, spec: QuadratureSpec) -> EnergyEstimate:
    if film.d != params.d:
        raise UsageError("film and parameters disagree on d")
    _check_fit(f, film.d - 1)
    region = film.interior()
    if f.is_constant:
        return EnergyEstimate(0.0, 0.0, Engine.MC.value, params, film.summary())
    eps = region.eps
    value, err = mc_box(lambda x: f.evaluate(x, eps), region.lower, region.upper, params.s, params.p, spec)
    return EnergyEstimate(value, err, Engine.MC.value, params, film.summary(), low_confidence=err > value)


# ------------------------------------------------------------------ graded grid


class _Overlap:
    """Tensor rule for ``G(xi) = int |u(x+xi) - u(x)|^p`` over the overlap."""

    def __init__(self, u, lower, extents, p, order=12, panels_x=2):
        self.u = u
        self.lower = np.asarray(lower, dtype=float)
        self.extents = np.asarray(extents, dtype=float)
        self.p = p
        self.tx, self.wx = uniform_rule(0.0, 1.0, panels_x, order)
        self.ty, self.wy = legendre(order)

    def __call__(self, xi1, xi2, block=1024):
        out = np.empty(xi1.size)
        a, b = self.extents
        for start in range(0, xi1.size, block):
            s1 = xi1[start : start + block, None, None]
            s2 = xi2[start : start + block, None, None]
            len1, len2 = a - np.abs(s1), b - np.abs(s2)
            x1 = self.lower[0] + np.maximum(0.0, -s1) + len1 * self.tx[None, :, None]
            x2 = self.lower[1] + np.maximum(0.0, -s2) + len2 * self.ty[None, None, :]
            x1, x2 = np.broadcast_arrays(x1, x2)
            x = np.stack([x1, x2], axis=-1)
            shift = np.stack(np.broadcast_arrays(s1, s2), axis=-1)
            diff = np.abs(self.u(x + shift) - self.u(x)) ** self.p
            integral = np.einsum("nij,i,j->n", diff, self.wx, self.wy)
            out[start : start + block] = integral * (len1 * len2).ravel()
        return out


def grid_rectangle(u, lower, extents, s: float, p: float, n: int, q: float, m: int) -> float:
    """Deterministic energy of ``u`` on a rectangle in R^2.

    With ``xi = y - x`` and ``G(-xi) = G(xi)`` the energy is twice the integral
    of ``K(xi) G(xi)`` over the upper half plane.  Each of the two quadrants
    ``(+-eta, zeta)`` splits into the square ``[0, h]^2`` around the singular
    corner (two Duffy triangles, radial panels ``h (i/n)^q`` with Gauss-Jacobi
    on the first) and the remaining strip (geometric panels away from the
    corner).
    """
    A, B = (float(e) for e in extents)
    h = min(A, B)
    gamma = 2 + s * p
    beta = p - 1 - s * p
    G = _Overlap(u, lower, extents, p)

    # --- square: t radial, w angular parameter of the Duffy map
    edges = graded_edges(h, n, q)
    xj, wj = jacobi_left(m, beta)
    t0 = edges[1] * xj
    wt0 = wj * edges[1] ** (beta + 1) * t0 ** (-p)  # t^beta absorbed, G/t^p left
    t1, wt1 = panel_rule(edges[1:], m)
    wt1 = wt1 * t1 ** (-1 - s * p)
    t = np.concatenate([t0, t1])
    wt = np.concatenate([wt0, wt1])
    w, ww = uniform_rule(0.0, 1.0, max(2, n // 4), m)
    T, W = np.meshgrid(t, w, indexing="ij")
    weight = np.outer(wt, ww) * (1 + W**2) ** (-gamma / 2)
    total = 0.0
    for sign in (1.0, -1.0):
        # triangle zeta <= eta, then eta < zeta
        total += float(np.sum(weight * G(sign * T.ravel(), (T * W).ravel()).reshape(T.shape)))
        total += float(np.sum(weight * G(sign * (T * W).ravel(), T.ravel()).reshape(T.shape)))

    # --- strip beyond the square along the longer axis
    long_len = max(A, B)
    if long_len > h * (1 + 1e-12):
        a_nodes, a_w = panel_rule(geometric_edges(h, long_len, 2.0 ** (4.0 / n)), m)
        b_nodes, b_w = uniform_rule(0.0, h, max(2, n // 4), m)
        L, S = np.meshgrid(a_nodes, b_nodes, indexing="ij")
        wgt = np.outer(a_w, b_w) * (L**2 + S**2) ** (-gamma / 2)
        for sign in (1.0, -1.0):
            if A >= B:
                vals = G(sign * L.ravel(), S.ravel())
            else:
                vals = G(sign * S.ravel(), L.ravel())
            total += float(np.sum(wgt * vals.reshape(L.shape)))
    return 2.0 * total


def seminorm_grid(f: TestFunction, film: ThinFilm, params: FractionalParams, spec: QuadratureSpec) -> EnergyEstimate:
    if params.d != 2 or film.d != 2:
        raise UnsupportedFamilyError("the grid engine handles d = 2 only; use the mc engine")
    _check_fit(f, 1)
    region = film.interior()
    if f.is_constant:
        return EnergyEstimate(0.0, 0.0, Engine.GRID.value, params, film.summary())
    eps = region.eps
    extents = (region.base.extents[0], eps)

    def u(x):
        return f.evaluate(x, eps)

    def run(n):
        return grid_rectangle(u, region.lower, extents, params.s, params.p, n, spec.grading_strength, spec.order)

    fine = run(spec.panels)
    coarse = run(spec.panels // 2)
    if not (math.isfinite(fine) and math.isfinite(coarse)):
        raise NumericalFailure("grid quadrature produced a non-finite value")
    return EnergyEstimate(fine, abs(fine - coarse), Engine.GRID.value, params, film.summary())


def seminorm(f: TestFunction, film: ThinFilm, params: FractionalParams, spec: QuadratureSpec) -> EnergyEstimate:
    """Dispatch on ``spec.engine``.  The domain is ``film.interior()``."""
    if spec.engine is Engine.MC:
        return seminorm_mc(f, film, params, spec)
    return seminorm_grid(f, film, params, spec)


# ------------------------------------------------------------ companion functionals


def vertical_seminorm(
    f: TestFunction, film: ThinFilm, params: FractionalParams, spec: QuadratureSpec | None = None
) -> EnergyEstimate:
    """``V_eps(f)``: the energy of vertical differences only, over ``omega_tau``.

    Planar summands cancel in vertical differences, so
    ``V_eps = |omega_tau| eps^(1-sp) [c g]_s^p((0,1))`` exactly.
    """
    part = vertical_component(f)
    summary = film.summary()
    if part is None or part.is_constant:
        _check_fit(f, film.d - 1)
        return EnergyEstimate(0.0, 0.0, "exact", params, summary)
    ref = reference_seminorm_1d(part, params.s, params.p)
    factor = film.base.shrink(film.tau).measure * film.eps ** (1 - params.s * params.p)
    return EnergyEstimate(factor * ref.value, factor * ref.error, "exact", params, summary)


def planar_seminorm(
    f: TestFunction, base: BaseDomain, s_eff: float, p: float = 2.0, spec: QuadratureSpec | None = None
) -> EnergyEstimate:
    """``[f]^p_{s_eff}(omega)`` over the (d-1)-dimensional base.

    Interval bases use graded 2-D quadrature; square bases use the MC engine
    with ``spec`` (default budget if omitted).
    """
    if not 0 < s_eff < 1:
        raise DomainError(f"s_eff must lie in (0, 1), got {s_eff}")
    part = planar_component(f)
    if part is None:
        raise UnsupportedFamilyError(f"{f.tag} has no planar part")
    _check_fit(part, base.dim)
    params = FractionalParams(base.d, s_eff, p)
    summary = {"base": base.shape.value, "extents": list(base.extents), "origin": list(base.origin)}
    if part.is_constant:
        return EnergyEstimate(0.0, 0.0, "planar", params, summary)

    def u(xp):
        xp = np.asarray(xp, dtype=float)
        pad = np.zeros(xp.shape[:-1] + (1,))
        return part.evaluate(np.concatenate([xp, pad], axis=-1), 1.0)

    if base.dim == 1:
        lo, hi = base.lower[0], base.upper[0]
        value, err = interval_seminorm_with_error(lambda x: u(x[..., None]), lo, hi, s_eff, p)
        return EnergyEstimate(value, err, "graded-1d", params, summary)
    spec = spec or QuadratureSpec(engine=Engine.MC)
    value, err = mc_box(u, base.lower, base.upper, s_eff, p, spec)
    return EnergyEstimate(value, err, Engine.MC.value, params, summary, low_confidence=err > value)


def planar_seminorm_mc(f: TestFunction, base: BaseDomain, s_eff: float, p: float, spec: QuadratureSpec) -> EnergyEstimate:
    """MC oracle for :func:`planar_seminorm`, for any base dimension."""
    part = planar_component(f)
    if part is None:
        raise UnsupportedFamilyError(f"{f.tag} has no planar part")
    params = FractionalParams(base.d, s_eff, p)

    def u(xp):
        pad = np.zeros(xp.shape[:-1] + (1,))
        return part.evaluate(np.concatenate([xp, pad], axis=-1), 1.0)

    value, err = mc_box(u, base.lower, base.upper, s_eff, p, spec)
    return EnergyEstimate(value, err, Engine.MC.value, params, {"base": base.shape.value}, low_confidence=err > value)
