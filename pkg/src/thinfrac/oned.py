"""Gauss rules, graded panels and the one-dimensional seminorm on an interval."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=256)
def legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = roots_legendre(m)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=256)
def jacobi_left(m: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0, 1] for the weight ``t**beta``."""
    # scipy's weight is (1-x)^a (1+x)^b on [-1, 1]
    x, w = roots_jacobi(m, 0.0, beta)
    return (x + 1) / 2, w / 2 ** (beta + 1)


def panel_rule(edges, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = legendre(m)
    a, h = edges[:-1, None], np.diff(edges)[:, None]
    return (a + h * x).ravel(), (h * w).ravel()


def uniform_rule(a: float, b: float, panels: int, m: int):
    return panel_rule(np.linspace(a, b, panels + 1), m)


def graded_edges(h: float, n: int, q: float) -> np.ndarray:
    """Breakpoints ``h (i/n)^q``, i = 0..n, clustered at 0."""
    return h * (np.arange(n + 1) / n) ** q


def geometric_edges(a: float, b: float, ratio: float) -> np.ndarray:
    """Breakpoints from ``a`` to ``b`` with successive ratio at most ``ratio``."""
    k = max(1, int(np.ceil(np.log(b / a) / np.log(ratio))))
    return a * (b / a) ** (np.arange(k + 1) / k)


def singular_radial_rule(h: float, beta: float, levels: int, m: int):
    """Rule for ``int_0^h r^beta phi(r) dr`` with smooth ``phi``.

    Returns nodes and *reduced* weights: the caller multiplies by
    ``phi(r)`` only, the ``r^beta`` factor is already folded in.
    Dyadic panels toward 0, Gauss-Jacobi on the innermost one.
    """
    edges = h * 2.0 ** -np.arange(levels, -1, -1.0)
    r, w = panel_rule(edges, m)
    w = w * r**beta
    xj, wj = jacobi_left(m, beta)
    r0 = edges[0]
    return np.concatenate([r0 * xj, r]), np.concatenate([wj * r0 ** (beta + 1), w])


def interval_seminorm(g, a: float, b: float, s: float, p: float, levels: int = 12, m: int = 20, inner_panels: int = 16):
    """``int_a^b int_a^b |g(x)-g(y)|^p / |x-y|^(1+sp)`` for Lipschitz ``g``.

    With ``r = y - x`` the integral is ``2 int_0^L r^(p-1-sp) H(r) dr`` where
    ``H(r) = int_a^(b-r) |(g(x+r)-g(x))/r|^p dx`` is bounded.  ``g`` must be
    vectorised.  The innermost panel stops at ``L 2^-levels``: deeper panels
    only add cancellation error in the difference quotient.
    """
    length = b - a
    beta = p - 1 - s * p
    r, wr = singular_radial_rule(length, beta, levels, m)
    xs, wx = uniform_rule(0.0, 1.0, inner_panels, m)
    span = length - r  # overlap length for each r
    x = a + span[:, None] * xs[None, :]
    diff = np.abs((g(x + r[:, None]) - g(x)) / r[:, None]) ** p
    h_of_r = span * (diff @ wx)
    return 2.0 * float(wr @ h_of_r)


def interval_seminorm_with_error(g, a, b, s, p):
    """Value and the gap between two resolutions."""
    fine = interval_seminorm(g, a, b, s, p, levels=14, m=24, inner_panels=24)
    coarse = interval_seminorm(g, a, b, s, p, levels=11, m=16, inner_panels=16)
    return fine, abs(fine - coarse)
