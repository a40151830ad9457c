"""Operator descriptions and their finite truncations.

An :class:`OperatorSpec` declares an operator on l2(N) (a weighted shift, a
diagonal, an explicit matrix, or a combination built from those).  Calling
:func:`make_operator` realizes it as an N x N complex matrix on the span of
the first N canonical basis vectors.  Shift truncations drop whatever would
leave that span, so a backward shift kills e_1 and a forward shift kills e_N.

Vectors are plain one-dimensional ``complex128`` numpy arrays and scalars
are Python ``complex``.  Basis indices are 1-based in the public API to
match the usual l2 notation (``canonical_basis_vector(4, 1)`` is e_1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, InvalidSpecError, OrbitOverflowError

__all__ = [
    "OVERFLOW_THRESHOLD", "KINDS", "Weights", "OperatorSpec", "TruncatedOperator",
    "make_operator", "apply", "adjoint", "adjoint_spec", "operator_norm_estimate",
    "canonical_basis_vector", "as_vector", "inner", "matrix_power",
    "backward_shift", "forward_shift", "diagonal", "dense_matrix",
    "scalar_multiple", "direct_sum_scalar", "complex_from_json", "complex_to_json",
    "vector_to_json", "vector_from_json", "support_end",
]

OVERFLOW_THRESHOLD = 1e300

KINDS = (
    "weighted_backward_shift",
    "weighted_forward_shift",
    "diagonal",
    "dense_matrix",
    "scalar_multiple",
    "direct_sum_scalar",
)
_SHIFTS = ("weighted_backward_shift", "weighted_forward_shift")


def complex_from_json(value) -> complex:
    """Accept ``3``, ``1.5``, ``{"re": 1, "im": 2}`` or ``[1, 2]``."""
    if isinstance(value, dict):
        try:
            z = complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise InvalidSpecError(f"bad complex value {value!r}") from exc
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        z = complex(float(value[0]), float(value[1]))
    elif isinstance(value, (int, float, complex, np.number)) and not isinstance(value, bool):
        z = complex(value)
    else:
        raise InvalidSpecError(f"bad complex value {value!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidSpecError(f"non-finite complex value {value!r}")
    return z


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def vector_to_json(x) -> dict:
    x = np.asarray(x, dtype=complex)
    return {"re": x.real.tolist(), "im": x.imag.tolist()}


def vector_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict):
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise InvalidSpecError("vector 're' and 'im' lengths differ")
        return as_vector(re + 1j * im)
    return as_vector([complex_from_json(v) for v in obj])


# Closed-form weight rules, indexed by k = 1, 2, 3, ...
_RULES = {
    "affine": (lambda k, a=0.0, b=1.0: a + b * k),
    "geometric": (lambda k, a=1.0, r=1.0: a * r ** k),
    "power": (lambda k, a=1.0, p=1.0: a * k ** p),
}


@dataclass(frozen=True)
class Weights:
    """Generator for a weight or diagonal sequence w_1, w_2, ...

    ``mode`` is ``"constant"`` (every w_k equals ``value``), ``"list"``
    (explicit finite ``values``) or ``"rule"`` (one of the named closed-form
    rules ``affine``: a + b k, ``geometric``: a r^k, ``power``: a k^p).
    """

    mode: str
    value: complex = 1.0
    values: tuple = ()
    rule: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("constant", "list", "rule"):
            raise InvalidSpecError(f"unknown weights mode {self.mode!r}")
        if self.mode == "rule":
            if self.rule not in _RULES:
                raise InvalidSpecError(f"unknown weight rule {self.rule!r}; known: {sorted(_RULES)}")
            bad = set(self.params) - set(_RULES[self.rule].__code__.co_varnames[1:])
            if bad:
                raise InvalidSpecError(f"unknown parameters {sorted(bad)} for rule {self.rule!r}")

    @classmethod
    def constant(cls, value) -> Weights:
        return cls("constant", value=complex(value))

    @classmethod
    def from_list(cls, values) -> Weights:
        return cls("list", values=tuple(complex(v) for v in values))

    @classmethod
    def from_rule(cls, rule: str, **params) -> Weights:
        return cls("rule", rule=rule, params=dict(params))

    def take(self, count: int) -> np.ndarray:
        """Return w_1, ..., w_count as a complex array."""
        if self.mode == "constant":
            return np.full(count, self.value, dtype=complex)
        if self.mode == "list":
            if len(self.values) < count:
                raise InvalidSpecError(
                    f"weight list has {len(self.values)} entries, {count} required"
                )
            return np.asarray(self.values[:count], dtype=complex)
        fn = _RULES[self.rule]
        return np.array([complex(fn(k, **self.params)) for k in range(1, count + 1)])

    def conjugate(self, count: int) -> Weights:
        if self.mode == "constant":
            return Weights.constant(np.conj(self.value))
        return Weights.from_list(np.conj(self.take(count)))

    def reciprocal(self, count: int) -> Weights:
        if self.mode == "constant":
            return Weights.constant(1.0 / self.value)
        return Weights.from_list(1.0 / self.take(count))

    def to_json(self) -> dict:
        if self.mode == "constant":
            return {"mode": "constant", "value": complex_to_json(self.value)}
        if self.mode == "list":
            return {"mode": "list", "values": [complex_to_json(v) for v in self.values]}
        return {"mode": "rule", "rule": self.rule, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj) -> Weights:
        if not isinstance(obj, dict) or "mode" not in obj:
            raise InvalidSpecError("weights must be an object with a 'mode' field")
        mode = obj["mode"]
        if mode == "constant":
            if "value" not in obj:
                raise InvalidSpecError("constant weights need 'value'")
            return cls.constant(complex_from_json(obj["value"]))
        if mode == "list":
            if "values" not in obj:
                raise InvalidSpecError("list weights need 'values'")
            return cls.from_list(complex_from_json(v) for v in obj["values"])
        if mode == "rule":
            params = {k: float(v) for k, v in obj.get("params", {}).items()}
            return cls.from_rule(obj.get("rule"), **params)
        raise InvalidSpecError(f"unknown weights mode {mode!r}")


@dataclass(frozen=True)
class OperatorSpec:
    """Declarative description of one operator family member.

    Leaf kinds (shifts, diagonal, dense_matrix) carry ``dim``; the composite
    kinds ``scalar_multiple`` (``scalar`` = c) and ``direct_sum_scalar``
    (``scalar`` = alpha) wrap an ``inner`` spec.  A direct sum with a scalar
    block has one more dimension than its inner operator.
    """

    kind: str
    dim: int | None = None
    weights: Weights | None = None
    entries: tuple | None = None
    inner: OperatorSpec | None = None
    scalar: complex | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"unknown operator kind {self.kind!r}")
        if self.kind in ("scalar_multiple", "direct_sum_scalar"):
            if self.inner is None or self.scalar is None:
                raise InvalidSpecError(f"{self.kind} needs 'inner' and a scalar")
            z = complex(self.scalar)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise InvalidSpecError("non-finite scalar")
            if self.dim is not None and self.dim != self.truncation_dim:
                raise InvalidSpecError(
                    f"declared dim {self.dim} disagrees with derived dim {self.truncation_dim}"
                )
            return
        if self.dim is None or int(self.dim) != self.dim or self.dim < 2:
            raise InvalidSpecError(f"truncation dim must be an integer >= 2, got {self.dim!r}")
        if self.kind == "dense_matrix":
            if self.entries is None:
                raise InvalidSpecError("dense_matrix needs 'entries'")
            m = np.asarray(self.entries, dtype=complex)
            if m.shape != (self.dim, self.dim):
                raise InvalidSpecError(f"entries have shape {m.shape}, expected {(self.dim, self.dim)}")
            if not np.all(np.isfinite(m)):
                raise InvalidSpecError("dense_matrix entries must be finite")
            return
        if self.weights is None:
            raise InvalidSpecError(f"{self.kind} needs 'weights'")
        w = self.weights.take(self._weight_count())
        if not np.all(np.isfinite(w)):
            raise InvalidSpecError("weights must be finite")
        if self.kind in _SHIFTS and np.any(w == 0):
            raise InvalidSpecError("shift weights must be nonzero")

    def _weight_count(self) -> int:
        return self.dim - 1 if self.kind in _SHIFTS else self.dim

    @property
    def truncation_dim(self) -> int:
        if self.kind == "scalar_multiple":
            return self.inner.truncation_dim
        if self.kind == "direct_sum_scalar":
            return self.inner.truncation_dim + 1
        return int(self.dim)

    def weight_values(self) -> np.ndarray:
        """Materialized weights (N-1 for shifts, N for diagonals)."""
        if self.weights is None:
            raise InvalidSpecError(f"{self.kind} has no weights")
        return self.weights.take(self._weight_count())

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "dim": self.truncation_dim}
        if self.weights is not None:
            out["weights"] = self.weights.to_json()
        if self.entries is not None:
            out["entries"] = [[complex_to_json(v) for v in row] for row in self.entries]
        if self.kind == "scalar_multiple":
            out["inner"] = self.inner.to_json()
            out["c"] = complex_to_json(self.scalar)
        elif self.kind == "direct_sum_scalar":
            out["inner"] = self.inner.to_json()
            out["alpha"] = complex_to_json(self.scalar)
        return out

    @classmethod
    def from_json(cls, obj) -> OperatorSpec:
        if not isinstance(obj, dict):
            raise InvalidSpecError("operator spec must be a JSON object")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise InvalidSpecError(f"unknown operator kind {kind!r}")
        dim = obj.get("dim")
        if kind in ("scalar_multiple", "direct_sum_scalar"):
            key = "c" if kind == "scalar_multiple" else "alpha"
            if "inner" not in obj or key not in obj:
                raise InvalidSpecError(f"{kind} needs 'inner' and '{key}'")
            return cls(kind, dim=dim, inner=cls.from_json(obj["inner"]),
                       scalar=complex_from_json(obj[key]))
        if kind == "dense_matrix":
            if "entries" not in obj:
                raise InvalidSpecError("dense_matrix needs 'entries'")
            rows = tuple(tuple(complex_from_json(v) for v in row) for row in obj["entries"])
            return cls(kind, dim=dim if dim is not None else len(rows), entries=rows)
        if "weights" not in obj:
            raise InvalidSpecError(f"{kind} needs 'weights'")
        weights = Weights.from_json(obj["weights"])
        if dim is None and kind == "diagonal" and weights.mode == "list":
            dim = len(weights.values)
        return cls(kind, dim=dim, weights=weights)


def _as_weights(w) -> Weights:
    if isinstance(w, Weights):
        return w
    if np.isscalar(w):
        return Weights.constant(w)
    return Weights.from_list(w)


def backward_shift(dim: int, weights=1.0) -> OperatorSpec:
    """Weighted backward shift e_{k+1} -> w_k e_k, e_1 -> 0."""
    return OperatorSpec("weighted_backward_shift", dim=dim, weights=_as_weights(weights))


def forward_shift(dim: int, weights=1.0) -> OperatorSpec:
    """Weighted forward shift e_k -> w_k e_{k+1} (e_N -> 0 after truncation)."""
    return OperatorSpec("weighted_forward_shift", dim=dim, weights=_as_weights(weights))


def diagonal(values, dim: int | None = None) -> OperatorSpec:
    w = _as_weights(values)
    if dim is None:
        if w.mode != "list":
            raise InvalidSpecError("diagonal with a generator needs an explicit dim")
        dim = len(w.values)
    return OperatorSpec("diagonal", dim=dim, weights=w)


def dense_matrix(matrix) -> OperatorSpec:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2:
        raise InvalidSpecError("dense matrix must be two-dimensional")
    return OperatorSpec("dense_matrix", dim=m.shape[0],
                        entries=tuple(tuple(complex(v) for v in row) for row in m))


def scalar_multiple(inner: OperatorSpec, c) -> OperatorSpec:
    return OperatorSpec("scalar_multiple", inner=inner, scalar=complex(c))


def direct_sum_scalar(inner: OperatorSpec, alpha) -> OperatorSpec:
    return OperatorSpec("direct_sum_scalar", inner=inner, scalar=complex(alpha))


def _realize(spec: OperatorSpec) -> np.ndarray:
    if spec.kind == "scalar_multiple":
        return spec.scalar * _realize(spec.inner)
    if spec.kind == "direct_sum_scalar":
        a = _realize(spec.inner)
        n = a.shape[0]
        m = np.zeros((n + 1, n + 1), dtype=complex)
        m[:n, :n] = a
        m[n, n] = spec.scalar
        return m
    n = spec.truncation_dim
    if spec.kind == "dense_matrix":
        return np.array(spec.entries, dtype=complex)
    w = spec.weight_values()
    if spec.kind == "diagonal":
        return np.diag(w).astype(complex)
    m = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    if spec.kind == "weighted_backward_shift":
        m[idx, idx + 1] = w
    else:
        m[idx + 1, idx] = w
    return m


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """An N x N matrix realization of an :class:`OperatorSpec`.

    ``norm_estimate`` is a lower bound for the spectral norm of the matrix,
    attained by an explicit test vector (see :func:`operator_norm_estimate`).
    """

    matrix: np.ndarray
    spec: OperatorSpec
    norm_estimate: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"TruncatedOperator(kind={self.spec.kind!r}, dim={self.dim}, norm~{self.norm_estimate:.6g})"


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def make_operator(spec: OperatorSpec, norm_iterations: int = 100) -> TruncatedOperator:
    """Realize ``spec`` as its N x N truncation."""
    if not isinstance(spec, OperatorSpec):
        raise InvalidSpecError("make_operator expects an OperatorSpec")
    m = _freeze(_realize(spec))
    return TruncatedOperator(m, spec, _power_norm(m, norm_iterations))


def as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"vector has dim {v.shape[0]}, operator has dim {dim}")
    if not np.all(np.isfinite(v)):
        raise DimensionError("vector has non-finite coordinates")
    return v


def inner(x, y) -> complex:
    """<x, y> = sum x_i conj(y_i), linear in the first slot."""
    return complex(np.vdot(y, x))


def apply(op: TruncatedOperator, x) -> np.ndarray:
    x = as_vector(x)
    if x.shape[0] != op.dim:
        raise DimensionError(f"vector has dim {x.shape[0]}, operator has dim {op.dim}")
    return op.matrix @ x


def adjoint_spec(spec: OperatorSpec) -> OperatorSpec:
    """Spec of the conjugate-transpose truncation."""
    if spec.kind == "weighted_backward_shift":
        return forward_shift(spec.dim, spec.weights.conjugate(spec.dim - 1))
    if spec.kind == "weighted_forward_shift":
        return backward_shift(spec.dim, spec.weights.conjugate(spec.dim - 1))
    if spec.kind == "diagonal":
        return OperatorSpec("diagonal", dim=spec.dim, weights=spec.weights.conjugate(spec.dim))
    if spec.kind == "dense_matrix":
        return dense_matrix(np.asarray(spec.entries, dtype=complex).conj().T)
    if spec.kind == "scalar_multiple":
        return scalar_multiple(adjoint_spec(spec.inner), np.conj(spec.scalar))
    return direct_sum_scalar(adjoint_spec(spec.inner), np.conj(spec.scalar))


def adjoint(op: TruncatedOperator) -> TruncatedOperator:
    # the spectral norm is adjoint-invariant
    return TruncatedOperator(_freeze(op.matrix.conj().T), adjoint_spec(op.spec), op.norm_estimate)


def vector_norm(x, axis=None):
    """Euclidean norm that stays finite up to the float range.

    ``np.linalg.norm`` squares the entries, so vectors past ~1e154 report inf.
    """
    x = np.asarray(x)
    scale = np.abs(x).max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(scale > 0, scale, 1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        # real and imaginary parts separately: complex division misbehaves on subnormals
        scaled = np.hypot(x.real / safe, x.imag / safe) if np.iscomplexobj(x) else x / safe
        out = np.squeeze(safe * np.linalg.norm(scaled, axis=axis, keepdims=True), axis=axis)
    return float(out) if np.ndim(out) == 0 else out


def _power_norm(m: np.ndarray, iterations: int) -> float:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    n = m.shape[0]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    best = 0.0
    mh = m.conj().T
    for _ in range(iterations):
        nv = vector_norm(v)
        if nv == 0.0 or not np.isfinite(nv):
            break
        v = v / nv
        w = m @ v
        # ||T v|| / ||v|| for the vector actually used; a certified lower bound
        est = vector_norm(w) / vector_norm(v)
        if est > best:
            best = est
        if est == 0.0 or not np.isfinite(est):
            break
        # rescale before applying T* so huge weights do not overflow
        v = mh @ (w / est)
    return best


def operator_norm_estimate(op: TruncatedOperator, iterations: int = 100) -> float:
    """Power-iteration lower bound for the largest singular value.

    Runs power iteration on T*T from a fixed seeded start vector and returns
    the largest ratio ||Tv||/||v|| seen.  The result never decreases when
    ``iterations`` grows.
    """
    return _power_norm(op.matrix, iterations)


def canonical_basis_vector(dim: int, index: int) -> np.ndarray:
    """e_index in C^dim (1-based)."""
    if not 1 <= index <= dim:
        raise IndexError(f"basis index {index} outside 1..{dim}")
    e = np.zeros(dim, dtype=complex)
    e[index - 1] = 1.0
    return e


def matrix_power(op: TruncatedOperator, n: int) -> np.ndarray:
    """T^n as a matrix; raises :class:`OrbitOverflowError` past the threshold."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    with np.errstate(over="ignore", invalid="ignore"):
        p = np.linalg.matrix_power(op.matrix, n)
    if not np.all(np.isfinite(p)) or np.abs(p).max(initial=0.0) > OVERFLOW_THRESHOLD:
        raise OrbitOverflowError(f"T^{n} exceeds the overflow threshold")
    return p


def support_end(x, tol: float = 0.0) -> int:
    """1-based index of the last coordinate with modulus > tol (0 for the zero vector)."""
    nz = np.flatnonzero(np.abs(np.asarray(x)) > tol)
    return int(nz[-1]) + 1 if nz.size else 0
