"""Kruzhkov entropy-pair algebra, regularized signs, kinetic profiles.

Conventions: sgn(0) := 0 throughout.  The diffusion matrix has a single
nonzero entry acting along the second axis, so all "matrix" quantities
below are that scalar entry, and quadratic forms only see the second
component of a direction vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Grid
from .model import ProblemSpec


def kruzhkov_flux(u, v, spec: ProblemSpec):
    """Entropy flux pair F(u,v) = sgn(u-v) (f(u) - f(v)), both components."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.sign(u - v)
    return s * (spec.f1(u) - spec.f1(v)), s * (spec.f2(u) - spec.f2(v))


def kruzhkov_diffusion(u, v, spec: ProblemSpec):
    """sgn(u-v) (b22(u) - b22(v)); nonnegative since b22 is nondecreasing."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sign(u - v) * (spec.b22(u) - spec.b22(v))


def _deriv_along(f: np.ndarray, h: float) -> np.ndarray:
    """Derivative along the last axis: centered inside, one-sided second
    order at the edges (first order if only two samples exist)."""
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
    if f.shape[-1] >= 3:
        out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h)
        out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h)
    else:
        out[..., 0] = (f[..., 1] - f[..., 0]) / h
        out[..., -1] = out[..., 0]
    return out


def d_dx2(field: np.ndarray, grid: Grid) -> np.ndarray:
    """x2-derivative of a (n1, n2) field."""
    return _deriv_along(np.asarray(field, dtype=float), grid.dx2)


def d_dx1(field: np.ndarray, grid: Grid) -> np.ndarray:
    """x1-derivative of a (n1, n2) field, same stencils as d_dx2."""
    f = np.asarray(field, dtype=float)
    return np.swapaxes(_deriv_along(np.swapaxes(f, 0, 1), grid.dx1), 0, 1)


def k_field(u_field: np.ndarray, v, grid: Grid, spec: ProblemSpec):
    """Boundary-comparison flux K(u,v) on the mesh, components (K1, K2).

    K = (x2-divergence of the entropy diffusion pair) - F(u,v).  The
    first component carries no diffusion, so K1 = -F1(u,v); the second is
    d/dx2 of sgn(u-v)(b22(u)-b22(v)) minus F2(u,v).  ``v`` may be a
    scalar level or a field (for comparisons against boundary data).
    """
    F1, F2 = kruzhkov_flux(u_field, v, spec)
    B = kruzhkov_diffusion(u_field, v, spec)
    return -F1, d_dx2(B, grid) - F2


def h_field(u_field: np.ndarray, k, a0_field: np.ndarray, grid: Grid, spec: ProblemSpec):
    """Three-way combination H(u,k,a0) = K(u,k) + K(u,a0) - K(a0,k)."""
    K1a, K2a = k_field(u_field, k, grid, spec)
    K1b, K2b = k_field(u_field, a0_field, grid, spec)
    K1c, K2c = k_field(a0_field, k, grid, spec)
    return K1a + K1b - K1c, K2a + K2b - K2c


def entropy_triple(u, v, w):
    """A(u,v,w) = |u-v| + |u-w| - |w-v|.

    Evaluated as twice the distance from u to the interval spanned by v
    and w, which is the same real number but stays nonnegative in
    floating point even when u sits between v and w.
    """
    u = np.asarray(u, dtype=float)
    lo = np.minimum(v, w)
    hi = np.maximum(v, w)
    return 2.0 * (np.maximum(u - hi, 0.0) + np.maximum(lo - u, 0.0))


def quadratic_form_gap(u, v, w, xi, spec: ProblemSpec):
    """xi^T [B(u,v) + B(u,w) - B(w,v)] xi for the diffusion pair B.

    Only the second block of the direction enters (the first block of
    the diffusion matrix is zero).  Nonnegative because b22 is monotone:
    the bracket is |g(u)-g(v)| + |g(u)-g(w)| - |g(w)-g(v)| with
    g = b22.
    """
    xi = np.asarray(xi, dtype=float)
    xi2 = xi[..., 1]
    bracket = (
        kruzhkov_diffusion(u, v, spec)
        + kruzhkov_diffusion(u, w, spec)
        - kruzhkov_diffusion(w, v, spec)
    )
    return xi2 * xi2 * bracket


def sgn_reg(v, delta: float):
    """Odd smooth sign: sin(pi v / (2 delta)) inside |v| <= delta, +-1 outside."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = np.asarray(v, dtype=float)
    inner = np.sin(0.5 * np.pi * np.clip(v / delta, -1.0, 1.0))
    return np.where(v > delta, 1.0, np.where(v < -delta, -1.0, inner))


def sgn_reg_deriv(v, delta: float):
    """Derivative of sgn_reg: (pi/2delta) cos(pi v/2delta) on the band."""
    v = np.asarray(v, dtype=float)
    band = np.abs(v) <= delta
    c = 0.5 * np.pi / delta
    return np.where(band, c * np.cos(0.5 * np.pi * v / delta), 0.0)


def eta_reg(v, delta: float):
    """Antiderivative of sgn_reg with eta(0) = 0: a convex |.| smoothing.

    Inside the band: (2 delta / pi)(1 - cos(pi v / 2 delta)); outside:
    |v| - delta + 2 delta / pi.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = np.asarray(v, dtype=float)
    c = 2.0 * delta / np.pi
    inner = c * (1.0 - np.cos(0.5 * np.pi * np.clip(v / delta, -1.0, 1.0)))
    outer = np.abs(v) - delta + c
    return np.where(np.abs(v) <= delta, inner, outer)


def chi(xi, u):
    """Kinetic profile: 1 on 0 < xi <= u, -1 on u <= xi < 0, else 0."""
    xi = np.asarray(xi, dtype=float)
    u = np.asarray(u, dtype=float)
    pos = (xi > 0.0) & (xi <= u)
    neg = (xi < 0.0) & (u <= xi)
    return pos.astype(float) - neg.astype(float)


@dataclass(frozen=True)
class KineticSlab:
    """chi profiles of a field on a uniform velocity-like grid.

    ``xi`` holds the midpoints of a uniform partition of [-span, span]
    into n_xi cells; ``values[..., m] = chi(xi[m]; u[...])``.  Moments
    are midpoint sums, so any eta' integrates to eta(u) - eta(0) up to
    one cell width.
    """

    span: float
    xi: np.ndarray
    values: np.ndarray

    @property
    def dxi(self) -> float:
        return 2.0 * self.span / self.xi.size

    def moment(self, eta_prime) -> np.ndarray:
        """Midpoint quadrature of eta'(xi) chi(xi; u) over the slab."""
        w = np.asarray(eta_prime(self.xi), dtype=float)
        return np.tensordot(self.values, w, axes=([-1], [0])) * self.dxi


def kinetic_slab(u_field, span: float, n_xi: int) -> KineticSlab:
    """Build the chi-profile slab of a field over [-span, span]."""
    if span <= 0 or n_xi < 2:
        raise ValueError("need span > 0 and at least 2 velocity cells")
    u = np.asarray(u_field, dtype=float)
    if np.any(np.abs(u) > span):
        raise ValueError("field values exceed the slab span")
    dxi = 2.0 * span / n_xi
    xi = -span + (np.arange(n_xi) + 0.5) * dxi
    values = chi(xi[(None,) * u.ndim + (slice(None),)], u[..., None])
    return KineticSlab(span=float(span), xi=xi, values=values)
