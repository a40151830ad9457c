"""Numerical ranges of truncated operators and their disk-scaled unions.

The field of values W(T) = {<Tu, u> : ||u|| = 1} is compact and convex.  For
each direction theta the Hermitian part H(theta) = (e^{i theta} T + (e^{i theta} T)^*)/2
has a top eigenvector u(theta), and <T u(theta), u(theta)> is a boundary
point of W(T) whose projection onto the direction e^{-i theta} is extremal.
Sweeping theta over a uniform grid samples the boundary.

Because the closed unit disk times a complex number z is the closed disk of
radius |z|, the set D * union_n W(T^n) is a disk (open or closed) of radius
sup_n max|W(T^n)| around 0.  Coverage of a grid point w therefore reduces to
comparing |w| with the largest sampled modulus.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NumericError
from .operators import (OVERFLOW_THRESHOLD, TruncatedOperator, as_vector,
                        complex_to_json, inner)
from .orbits import orbit

__all__ = [
    "NumericalRangeSample", "CoverageGrid", "hermitian_max_eigen",
    "numerical_range_boundary", "orbit_numerical_quadratic", "disk_range_coverage",
    "convex_hull", "convex_hull_distance", "square_grid",
]

RESIDUAL_TOL = 1e-8


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, TruncatedOperator):
        return op.matrix
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {m.shape}")
    return m


def _fix_phase(u: np.ndarray) -> np.ndarray:
    # make the first largest-modulus coordinate real and positive
    k = int(np.argmax(np.abs(u)))
    return u * (abs(u[k]) / u[k])


def hermitian_max_eigen(h):
    """Largest eigenvalue of a Hermitian matrix and a unit eigenvector for it.

    Raises :class:`ContractError` when ``h`` is not Hermitian to 1e-10
    entrywise, and :class:`NumericError` when the eigen-residual exceeds 1e-8.
    """
    m = _as_matrix(h)
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10:
        raise ContractError("matrix is not Hermitian")
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    lam = float(w[-1])
    u = _fix_phase(v[:, -1])
    if np.linalg.norm(m @ u - lam * u) > RESIDUAL_TOL * max(1.0, abs(lam)):
        raise NumericError("eigen-residual above tolerance")
    return lam, u


@dataclass(eq=False)
class NumericalRangeSample:
    theta_grid: np.ndarray
    boundary_points: np.ndarray
    max_modulus: float

    def to_dict(self) -> dict:
        return {
            "theta_grid": self.theta_grid.tolist(),
            "boundary_points": [complex_to_json(z) for z in self.boundary_points],
            "max_modulus": self.max_modulus,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "re", "im"])
        for t, z in zip(self.theta_grid, self.boundary_points):
            w.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


def theta_grid(theta_count: int) -> np.ndarray:
    # j * (2 pi / N): doubling N reproduces every previous angle bit for bit
    return np.arange(theta_count) * (2 * np.pi / theta_count)


def numerical_range_boundary(op, theta_count: int = 256) -> NumericalRangeSample:
    """Sample boundary points of W(T) at ``theta_count`` uniform angles."""
    if theta_count < 8:
        raise ValueError("theta_count must be >= 8")
    t = _as_matrix(op)
    # W(cT) = c W(T): sweep T / max|t_ij| so huge powers stay inside LAPACK's range
    scale = float(np.abs(t).max(initial=0.0))
    if scale == 0.0 or not np.isfinite(scale):
        scale = 1.0
    t = t / scale
    thetas = theta_grid(theta_count)
    rot = np.exp(1j * thetas)[:, None, None] * t[None, :, :]
    hs = (rot + np.conj(np.swapaxes(rot, 1, 2))) / 2
    w, v = np.linalg.eigh(hs)
    lam = w[:, -1]
    us = v[:, :, -1]
    res = np.linalg.norm(np.einsum("kij,kj->ki", hs, us) - lam[:, None] * us, axis=1)
    bad = np.flatnonzero(res > RESIDUAL_TOL * np.maximum(1.0, np.abs(lam)))
    if bad.size:
        raise NumericError(f"eigensolver did not converge at theta index {int(bad[0])}")
    tu = us @ t.T
    points = np.einsum("ki,ki->k", us.conj(), tu) * scale
    mod = np.abs(points)
    return NumericalRangeSample(thetas, points, float(mod.max()))


def orbit_numerical_quadratic(op: TruncatedOperator, x, horizon: int) -> list:
    """<T^n x, x> for n = 0..horizon; ``x`` must be a unit vector."""
    x = as_vector(x, op.dim)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise ContractError("x must have unit norm; normalize it first")
    return [inner(r.vec, x) for r in orbit(op, x, horizon)]


@dataclass(eq=False)
class CoverageGrid:
    points: np.ndarray
    per_point_distance: np.ndarray
    horizon: int
    radii: np.ndarray
    overflowed: bool = False

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "overflowed": self.overflowed,
            "radii": self.radii.tolist(),
            "points": [complex_to_json(z) for z in self.points],
            "per_point_distance": self.per_point_distance.tolist(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "distance"])
        for z, d in zip(self.points, self.per_point_distance):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(d))])
        return buf.getvalue()


def disk_range_coverage(op: TruncatedOperator, horizon: int, grid, theta_count: int = 256) -> CoverageGrid:
    """Distance from each grid point to D * union_{n<=horizon} W(T^n).

    ``radii[n]`` is the sampled max modulus of W(T^n).  When a power crosses
    the overflow threshold the horizon is cut there and ``overflowed`` is set.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    t = _as_matrix(op)
    power = np.eye(t.shape[0], dtype=complex)
    radii = []
    overflowed = False
    for n in range(horizon + 1):
        radii.append(numerical_range_boundary(power, theta_count).max_modulus)
        if n == horizon:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            nxt = power @ t
        if not np.all(np.isfinite(nxt)) or np.abs(nxt).max(initial=0.0) > OVERFLOW_THRESHOLD:
            overflowed = True
            break
        power = nxt
    radius = max(radii)
    pts = np.asarray(list(grid), dtype=complex)
    dist = np.maximum(0.0, np.abs(pts) - radius)
    return CoverageGrid(pts, dist, len(radii) - 1, np.asarray(radii), overflowed)


def square_grid(half_width: float, step: float) -> np.ndarray:
    """{a + bi : |a|, |b| <= half_width} on a lattice with the given step."""
    k = int(round(half_width / step))
    ax = np.arange(-k, k + 1) * step
    return (ax[:, None] + 1j * ax[None, :]).ravel()


def _cross(o, a, b) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def convex_hull(points) -> list:
    """Counter-clockwise hull vertices (monotone chain); degenerate inputs give 1 or 2 points."""
    pts = sorted({(float(np.real(z)), float(np.imag(z))) for z in points})
    pts = [complex(a, b) for a, b in pts]
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull


def _segment_distance(z, a, b) -> float:
    d = b - a
    if d == 0:
        return abs(z - a)
    # Re((z - a) / d) is the projection parameter; |d|^2 would underflow for tiny edges
    s = ((z - a) / d).real
    s = min(1.0, max(0.0, s))
    return abs(z - (a + s * d))


def convex_hull_distance(hull: list, z) -> float:
    """Euclidean distance from ``z`` to the polygon ``hull`` (0 inside)."""
    z = complex(z)
    if len(hull) == 1:
        return abs(z - hull[0])
    if len(hull) == 2:
        return _segment_distance(z, hull[0], hull[1])
    a = np.asarray(hull, dtype=complex)
    d = np.roll(a, -1) - a
    za = z - a
    cross = d.real * za.imag - d.imag * za.real
    if np.all(cross >= 0):
        return 0.0
    with np.errstate(over="ignore"):
        s = np.clip((za / d).real, 0.0, 1.0)
    return float(np.abs(za - s * d).min())
