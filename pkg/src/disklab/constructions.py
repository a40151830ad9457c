"""Direct sums with a scalar block, the subspace counterexample, polynomial
vectors and analytic adjoint point spectra.

For S = T (+) alpha I on H (+) C, S^n (z (+) c) = T^n z (+) alpha^n c.  If z is
hypercyclic for T/alpha, the scalars lambda alpha^{-n_k} (or alpha^{-n_k}/k
when lambda = 0) carry S^{n_k}(z (+) 1) onto w (+) lambda, and for large
n_k those scalars lie in the unit disk.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, HypothesisViolation, OrbitOverflowError, UnsupportedFamilyError
from .operators import (OVERFLOW_THRESHOLD, OperatorSpec, TruncatedOperator, apply, as_vector,
                        complex_to_json, direct_sum_scalar, make_operator, scalar_multiple,
                        support_end)
from .orbits import orbit, orbit_distance

__all__ = [
    "ExplorationWarning", "TransferSchedule", "PolynomialSpec", "SpectrumReport",
    "direct_sum_with_scalar", "transfer_vector", "counterexample_vector", "polynomial_vector",
    "polynomial_vector_factored", "adjoint_point_spectrum", "normalized_diskcyclic",
    "iterate_vector", "certified_transfer",
]


class ExplorationWarning(UserWarning):
    """Inputs for which the direct-sum transfer is not guaranteed (alpha not real or |alpha| <= 1)."""


def direct_sum_with_scalar(T: OperatorSpec, alpha) -> OperatorSpec:
    """T (+) alpha I_C.  Non-real or |alpha| <= 1 is allowed but warned about."""
    alpha = complex(alpha)
    if alpha.imag != 0 or alpha.real <= 1:
        warnings.warn(f"alpha = {alpha} is not a real number > 1", ExplorationWarning, stacklevel=2)
    return direct_sum_scalar(T, alpha)


def _real_alpha(alpha) -> float:
    a = complex(alpha)
    if a.imag != 0 or not a.real > 1:
        raise HypothesisViolation(f"alpha must be a real number > 1, got {alpha!r}")
    return a.real


@dataclass(eq=False)
class TransferSchedule:
    alpha: float
    n_ks: list
    scalars: list
    threshold_index: int | None
    lam: complex = 0j
    distances: np.ndarray | None = None
    overflowed: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda": complex_to_json(self.lam),
            "n_ks": list(map(int, self.n_ks)),
            "scalars": [complex_to_json(z) for z in self.scalars],
            "threshold_index": self.threshold_index,
            "distances": None if self.distances is None else self.distances.tolist(),
            "overflowed": self.overflowed,
        }


def transfer_vector(z, alpha, target, n_ks, S: TruncatedOperator | None = None,
                    k_start: int = 1) -> TransferSchedule:
    """Scalar schedule carrying S^{n_k}(z (+) 1) toward ``target = (w, lam)``.

    For lam != 0 the k-th scalar is lam * alpha^{-n_k}; for lam = 0 it is
    alpha^{-n_k} / k with k counted from ``k_start``.  The lam = 0 scalars
    leave a last coordinate of exactly 1/k, so a truncation with few
    admissible n_k needs a late ``k_start`` to get close.  ``threshold_index`` is the first
    0-based position from which every scalar has modulus <= 1.  Indices with
    alpha^{n_k} >= 1e300 are dropped and ``overflowed`` is set.  When the
    truncated direct sum ``S`` is given, ``distances[k]`` is
    ||scalar_k S^{n_k}(z (+) 1) - w (+) lam||.
    """
    a = _real_alpha(alpha)
    w, lam = target
    lam = complex(lam)
    n_ks = [int(n) for n in n_ks]
    if any(b <= a_ for a_, b in zip(n_ks, n_ks[1:])):
        raise ValueError("n_ks must be strictly increasing")
    overflowed = False
    kept = []
    for n in n_ks:
        if a ** n >= OVERFLOW_THRESHOLD:
            overflowed = True
            break
        kept.append(n)
    if lam != 0:
        scalars = [lam * a ** -n for n in kept]
    else:
        if k_start < 1:
            raise ValueError("k_start must be >= 1")
        scalars = [a ** -n / k for k, n in enumerate(kept, start=k_start)]
    threshold = None
    for k in range(len(scalars)):
        if all(abs(s) <= 1 for s in scalars[k:]):
            threshold = k
            break
    distances = None
    if S is not None and kept:
        z = as_vector(z)
        w = as_vector(w, z.shape[0])
        if S.dim != z.shape[0] + 1:
            raise ValueError("S must act on H (+) C")
        start = np.append(z, 1.0)
        goal = np.append(w, lam)
        orb = orbit(S, start, kept[-1])
        if orb.overflowed:
            overflowed = True
        distances = np.array([
            np.linalg.norm(sc * orb[n].vec - goal) if n < len(orb) else np.inf
            for sc, n in zip(scalars, kept)
        ])
    return TransferSchedule(a, kept, scalars, threshold, lam, distances, overflowed)


def certified_transfer(T: OperatorSpec, alpha, targets, budget: float = 2e-4, k_start: int = 1):
    """Hypercyclic-diagnostic z for T/alpha and one schedule per target.

    ``targets`` is a list of (w, lam).  z is the series vector built for
    T/alpha aimed at w/lam (lam != 0) or k w (lam = 0), so target number p
    (0-based) is certified at n = m_{p+1}, the last entry of its schedule.
    T must be a weighted backward shift family with a declared right inverse.

    Returns ``(z, certificate, schedules)``.
    """
    from .criterion import build_diskcyclic_vector, right_inverse_map

    a = _real_alpha(alpha)
    scaled = make_operator(scalar_multiple(T, 1.0 / a))
    inv = make_operator(right_inverse_map(scaled.spec))
    n = scaled.dim
    goals = []
    for p, (w, lam) in enumerate(targets):
        w = _pad(w, n)
        lam = complex(lam)
        goals.append(w / lam if lam != 0 else (k_start + p) * w)
    z, cert = build_diskcyclic_vector(scaled, inv, goals, budget=budget)
    S = make_operator(direct_sum_with_scalar(T, a))
    # position p of a schedule carries k = k_start + p, matching the goal above
    schedules = [transfer_vector(z, a, (_pad(w, n), lam), cert.gaps[: p + 1], S=S, k_start=k_start)
                 for p, (w, lam) in enumerate(targets)]
    return z, cert, schedules


def _pad(w, n: int) -> np.ndarray:
    w = as_vector(w)
    out = np.zeros(n, dtype=complex)
    if support_end(w) > n:
        raise ValueError("target does not fit in the truncation")
    out[: min(n, w.shape[0])] = w[:n]
    return out


def _as_op(op) -> TruncatedOperator:
    return op if isinstance(op, TruncatedOperator) else make_operator(op)


def counterexample_vector(S, x, horizon: int = 200):
    """v = (x (+) alpha) - S(x (+) 1) = (x - Tx) (+) 0 and its distance certificate.

    The certificate is min over n <= horizon and |a| <= 1 of
    ||a S^n v - (0 (+) 1)||.  Every a S^n v has last coordinate 0, so the
    certificate is never below 1: v is not a diskcyclic vector even though it
    is a difference of two of them.
    """
    S = _as_op(S)
    if S.spec.kind != "direct_sum_scalar":
        raise ContractError("S must be a direct sum T (+) alpha I")
    alpha = S.spec.scalar
    x = as_vector(x, S.dim - 1)
    v = np.append(x, alpha) - apply(S, np.append(x, 1.0))
    goal = np.zeros(S.dim, dtype=complex)
    goal[-1] = 1.0
    hit = orbit_distance(orbit(S, v, horizon), goal, "disk")
    return v, hit.distance


def _horner(m: np.ndarray, x: np.ndarray, coeffs) -> np.ndarray:
    acc = coeffs[-1] * x
    for c in reversed(coeffs[:-1]):
        acc = m @ acc + c * x
    return acc


@dataclass(frozen=True)
class PolynomialSpec:
    """p(z) = sum coeffs[k] z^k, optionally also given as leading * prod (z - roots[i])."""

    coeffs: tuple
    leading: complex | None = None
    roots: tuple | None = field(default=None)

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        if self.roots is not None and self.leading is not None:
            probe = 1.3 * np.exp(2j * np.pi * np.arange(7) / 7)
            a = np.array([self.evaluate(z) for z in probe])
            b = np.array([self.evaluate_factored(z) for z in probe])
            if np.max(np.abs(a - b)) > 1e-9 * max(1.0, np.max(np.abs(a))):
                raise ValueError("coefficient and factored forms disagree")

    @classmethod
    def from_roots(cls, leading, roots) -> PolynomialSpec:
        roots = tuple(complex(r) for r in roots)
        c = complex(leading) * np.poly(roots) if roots else np.array([complex(leading)])
        return cls(tuple(complex(v) for v in c[::-1]), complex(leading), roots)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, z) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def evaluate_factored(self, z) -> complex:
        out = complex(self.leading)
        for r in self.roots:
            out *= z - r
        return out

    def times_z(self) -> PolynomialSpec:
        """q(z) = z p(z)."""
        roots = None if self.roots is None else self.roots + (0j,)
        return PolynomialSpec((0j,) + tuple(self.coeffs), self.leading, roots)


def _check_headroom(T: TruncatedOperator, x, degree: int):
    if T.spec.kind == "weighted_forward_shift" and support_end(x) + degree > T.dim:
        raise ContractError(f"degree {degree} pushes the support of x past dimension {T.dim}")


def polynomial_vector(T: TruncatedOperator, x, p: PolynomialSpec) -> np.ndarray:
    """p(T) x by Horner's rule on the coefficients."""
    x = as_vector(x, T.dim)
    _check_headroom(T, x, p.degree)
    return _horner(T.matrix, x, list(p.coeffs))


def polynomial_vector_factored(T: TruncatedOperator, x, p: PolynomialSpec) -> np.ndarray:
    """p(T) x as leading * (T - mu_1) ... (T - mu_k) x."""
    if p.roots is None or p.leading is None:
        raise ValueError("polynomial has no factored form")
    x = as_vector(x, T.dim)
    _check_headroom(T, x, p.degree)
    v = x
    for r in p.roots:
        v = T.matrix @ v - r * v
    return p.leading * v


@dataclass(eq=False)
class SpectrumReport:
    family: str
    eigenvalues: list
    method: str = "analytic"

    def to_dict(self) -> dict:
        return {"family": self.family, "method": self.method,
                "eigenvalues": [complex_to_json(z) for z in self.eigenvalues]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _dedupe(values) -> list:
    out = []
    for v in values:
        if all(v != u for u in out):
            out.append(complex(v))
    return out


def _adjoint_eigs(spec: OperatorSpec) -> list:
    if spec.kind == "weighted_backward_shift":
        # adjoint is an injective weighted forward shift: no eigenvalues
        return []
    if spec.kind == "diagonal":
        return _dedupe(np.conj(spec.weight_values()))
    if spec.kind == "scalar_multiple":
        c = complex(spec.scalar)
        if c == 0:
            return [0j]
        return _dedupe(np.conj(c) * z for z in _adjoint_eigs(spec.inner))
    if spec.kind == "direct_sum_scalar":
        return _dedupe(_adjoint_eigs(spec.inner) + [np.conj(complex(spec.scalar))])
    raise UnsupportedFamilyError(
        f"no analytic point spectrum for the adjoint of {spec.kind!r}; "
        "truncated eigenvalues are not valid proxies")


def _family(spec: OperatorSpec) -> str:
    if spec.kind == "scalar_multiple":
        return f"scalar_multiple({_family(spec.inner)})"
    if spec.kind == "direct_sum_scalar":
        return f"direct_sum_scalar({_family(spec.inner)})"
    return spec.kind


def adjoint_point_spectrum(spec: OperatorSpec) -> SpectrumReport:
    """Closed-form point spectrum of T* for the untruncated operator.

    Supported: unilateral weighted backward shifts (empty), diagonals
    (conjugated entries), scalar multiples and direct sums with a scalar
    block.  Dense matrices and forward shifts raise
    :class:`UnsupportedFamilyError`.
    """
    if isinstance(spec, TruncatedOperator):
        spec = spec.spec
    return SpectrumReport(_family(spec), _adjoint_eigs(spec))


def normalized_diskcyclic(x) -> np.ndarray:
    x = as_vector(x)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ContractError("cannot normalize the zero vector")
    return x / nx


def iterate_vector(T: TruncatedOperator, x, n: int) -> np.ndarray:
    """T^n x; raises :class:`OrbitOverflowError` if an iterate passes 1e300."""
    if n < 0:
        raise ValueError("n must be >= 0")
    orb = orbit(T, x, n)
    if orb.overflowed:
        raise OrbitOverflowError(f"T^{len(orb)} x exceeds the overflow threshold")
    return orb[n].vec
