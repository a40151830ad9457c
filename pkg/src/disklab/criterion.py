"""Numerical checks of the Diskcyclic Criterion and a constructive diskcyclic vector.

Two forms of the criterion are checked along a sequence n_1 < n_2 < ...:

plain form, over samples x in X and y in Y,
    (1) ||T^{n_k} x|| ||S^{n_k} y|| -> 0,  (2) ||S^{n_k} y|| -> 0,  (3) T^{n_k} S^{n_k} y -> y;

lambda form, for scalars 0 < |lambda_k| <= 1,
    (1) ||lambda_k T^{n_k} x|| -> 0,  (2) ||S^{n_k} y|| / |lambda_k| -> 0,  (3) as above.

Condition (1) of the plain form is the product of the two lambda-form
quantities, whatever lambda is, which is how :func:`reduce_to_plain` turns
a lambda report back into a plain one.

:func:`build_diskcyclic_vector` sums the series x = sum_j S^{m_j} y_j for a
weighted backward shift T and its forward-shift right inverse S.  With
gaps large enough that T^{m_j} kills every earlier term,
T^{m_j} x - y_j = sum_{i>j} S^{m_i - m_j} y_i, and the certificate records
that tail bound next to the residual measured directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .dense_sets import DenseSetEnumerator
from .errors import (CapacityError, ContractError, HypothesisViolation, NumericError,
                     UnsupportedFamilyError)
from .operators import (OVERFLOW_THRESHOLD, OperatorSpec, TruncatedOperator, as_vector,
                        complex_from_json, complex_to_json,
                        scalar_multiple, support_end, vector_from_json, vector_norm,
                        vector_to_json)

__all__ = [
    "CriterionReport", "ConstructionCertificate", "right_inverse_map", "criterion_residuals",
    "lambda_criterion_residuals", "reduce_to_plain", "trend_verdict", "equivalence_transform",
    "equivalence_sequence", "rescale_sequence", "rescale_by_ratios", "build_diskcyclic_vector",
]

DEFAULT_TOLERANCE = 1e-9


@dataclass(eq=False)
class CriterionReport:
    n_ks: list
    lambda_ks: list | None
    cond1_residuals: np.ndarray
    cond2_residuals: np.ndarray
    cond3_residuals: np.ndarray
    verdict: str
    tolerance: float = DEFAULT_TOLERANCE
    overflowed: bool = False

    def to_dict(self) -> dict:
        def enc(a):
            return [None if not np.isfinite(v) else float(v) for v in a]
        return {
            "n_ks": list(map(int, self.n_ks)),
            "lambda_ks": None if self.lambda_ks is None else [complex_to_json(z) for z in self.lambda_ks],
            "cond1_residuals": enc(self.cond1_residuals),
            "cond2_residuals": enc(self.cond2_residuals),
            "cond3_residuals": enc(self.cond3_residuals),
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "overflowed": self.overflowed,
        }

    @classmethod
    def from_dict(cls, d) -> CriterionReport:
        def dec(a):
            return np.array([np.inf if v is None else v for v in a], dtype=float)
        lam = d.get("lambda_ks")
        return cls(list(d["n_ks"]), None if lam is None else [complex_from_json(z) for z in lam],
                   dec(d["cond1_residuals"]), dec(d["cond2_residuals"]), dec(d["cond3_residuals"]),
                   d["verdict"], float(d.get("tolerance", DEFAULT_TOLERANCE)),
                   bool(d.get("overflowed", False)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _nonincreasing(r: np.ndarray) -> bool:
    return bool(np.all(r[1:] <= r[:-1] * (1 + 1e-12) + 1e-15))


def trend_verdict(residuals, tolerance: float = DEFAULT_TOLERANCE) -> str:
    """``pass_trend`` iff every sequence ends below ``tolerance`` and is
    nonincreasing (up to rounding) over its last quarter of indices."""
    for r in residuals:
        r = np.asarray(r, dtype=float)
        if r.size == 0 or not np.isfinite(r[-1]) or r[-1] > tolerance:
            return "fail"
        tail = r[(3 * r.size) // 4:]
        if not _nonincreasing(tail):
            return "fail"
    return "pass_trend"


def right_inverse_map(spec: OperatorSpec) -> OperatorSpec:
    """Forward shift with reciprocal weights, so that T S = I away from the boundary.

    Scalar multiples c B are inverted as (1/c) S_B.
    """
    if spec.kind == "weighted_backward_shift":
        return OperatorSpec("weighted_forward_shift", dim=spec.dim,
                            weights=spec.weights.reciprocal(spec.dim - 1))
    if spec.kind == "scalar_multiple" and spec.scalar != 0:
        return scalar_multiple(right_inverse_map(spec.inner), 1.0 / spec.scalar)
    raise UnsupportedFamilyError(f"no right inverse declared for {spec.kind!r}")


def _sample_matrix(source, count: int, dim: int) -> np.ndarray:
    """Columns are ``count`` samples, zero-padded to ``dim``."""
    if isinstance(source, DenseSetEnumerator):
        vecs = source.take(1, count)
    else:
        vecs = list(source)[:count]
    if not vecs:
        raise ValueError("need at least one sample")
    out = np.zeros((dim, len(vecs)), dtype=complex)
    for i, v in enumerate(vecs):
        v = as_vector(v)
        if v.shape[0] > dim:
            if support_end(v) > dim:
                raise ValueError("sample does not fit in the truncation")
            v = v[:dim]
        out[: v.shape[0], i] = v
    return out


def _raw_residuals(t: TruncatedOperator, s: TruncatedOperator, xs, ys, n_ks, sample_count):
    if t.dim != s.dim:
        raise ValueError("T and S have different dimensions")
    n_ks = [int(n) for n in n_ks]
    if not n_ks or any(b <= a for a, b in zip(n_ks, n_ks[1:])) or n_ks[0] < 0:
        raise ValueError("n_ks must be a nonempty strictly increasing sequence of nonnegative integers")
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    n = t.dim
    x_mat = _sample_matrix(xs, sample_count, n)
    y_mat = _sample_matrix(ys, sample_count, n)
    tm, sm = t.matrix, s.matrix
    t_pow = np.eye(n, dtype=complex)
    sy = y_mat.copy()
    cur = 0
    tx_norms, sy_norms, cond3 = [], [], []
    overflowed = False
    for nk in n_ks:
        if not overflowed:
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(nk - cur):
                    t_pow = tm @ t_pow
                    sy = sm @ sy
            cur = nk
            if not np.all(np.isfinite(t_pow)) or np.abs(t_pow).max() > OVERFLOW_THRESHOLD:
                overflowed = True
        syn = float(vector_norm(sy, axis=0).max())
        if overflowed:
            tx_norms.append(np.inf)
            cond3.append(np.inf)
        else:
            tx_norms.append(float(vector_norm(t_pow @ x_mat, axis=0).max()))
            cond3.append(float(vector_norm(t_pow @ sy - y_mat, axis=0).max()))
        sy_norms.append(syn)
    return n_ks, np.array(tx_norms), np.array(sy_norms), np.array(cond3), overflowed


def _product(a, b):
    # an overflow sentinel stays infinite even against a zero factor
    out = a * b
    return np.where(np.isinf(a) | np.isinf(b), np.inf, out)


def criterion_residuals(T: TruncatedOperator, S: TruncatedOperator, X, Y, n_ks,
                        sample_count: int, tolerance: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """Residuals of the plain criterion, maximized over ``sample_count`` samples.

    ``X`` and ``Y`` are :class:`DenseSetEnumerator` instances (sampled from
    index 1 on) or explicit vector lists.  Overflowing powers of T are
    recorded as +inf and flagged.
    """
    n_ks, txn, syn, c3, over = _raw_residuals(T, S, X, Y, n_ks, sample_count)
    c1 = _product(txn, syn)
    return CriterionReport(n_ks, None, c1, syn, c3, trend_verdict((c1, syn, c3), tolerance),
                           tolerance, over)


def _check_lambdas(lambda_ks, count: int) -> list:
    lam = [complex(z) for z in lambda_ks]
    if len(lam) != count:
        raise ValueError(f"{len(lam)} scalars for {count} indices")
    for k, z in enumerate(lam):
        if z == 0:
            raise HypothesisViolation(f"lambda_{k} = 0; the scalars must be nonzero")
        if abs(z) > 1:
            raise HypothesisViolation(f"|lambda_{k}| = {abs(z)} > 1")
    return lam


def lambda_criterion_residuals(T: TruncatedOperator, S: TruncatedOperator, lambda_ks, X, Y, n_ks,
                               sample_count: int, tolerance: float = DEFAULT_TOLERANCE) -> CriterionReport:
    """Residuals of the criterion taken along the scalar sequence ``lambda_ks``."""
    lam = _check_lambdas(lambda_ks, len(list(n_ks)))
    n_ks, txn, syn, c3, over = _raw_residuals(T, S, X, Y, n_ks, sample_count)
    mod = np.abs(np.asarray(lam))
    c1 = _product(mod, txn)
    c2 = syn / mod
    return CriterionReport(n_ks, lam, c1, c2, c3, trend_verdict((c1, c2, c3), tolerance),
                           tolerance, over)


def reduce_to_plain(report: CriterionReport) -> CriterionReport:
    """Plain-form report implied by a lambda-form one.

    Uses ||lambda T^n x|| * ||S^n y / lambda|| = ||T^n x|| ||S^n y|| and
    ||S^n y|| = |lambda| * ||S^n y / lambda||.  For lambda identically 1
    this reproduces :func:`criterion_residuals` bit for bit.
    """
    if report.lambda_ks is None:
        return report
    mod = np.abs(np.asarray(report.lambda_ks))
    c1 = _product(report.cond1_residuals, report.cond2_residuals)
    c2 = report.cond2_residuals * mod
    c3 = report.cond3_residuals
    return CriterionReport(list(report.n_ks), None, c1, c2, c3,
                           trend_verdict((c1, c2, c3), report.tolerance), report.tolerance,
                           report.overflowed)


def _power_apply(op: TruncatedOperator, v, n: int) -> np.ndarray:
    v = as_vector(v, op.dim)
    for _ in range(n):
        v = op.matrix @ v
    return v


def equivalence_transform(T: TruncatedOperator, S: TruncatedOperator, y, n_k: int, eps: float,
                          x=None) -> complex:
    """Scalar lambda = ||S^{n_k} y|| / eps turning the plain criterion into the lambda form.

    Requires ||S^{n_k} y|| < eps and, when a sample ``x`` is given,
    ||T^{n_k} x|| ||S^{n_k} y|| < eps**2.  The result is a positive real with
    modulus <= 1.
    """
    if eps <= 0:
        raise ContractError("eps must be positive")
    s = float(np.linalg.norm(_power_apply(S, y, n_k)))
    if not s < eps:
        raise HypothesisViolation(f"||S^{n_k} y|| < eps fails ({s} >= {eps})")
    if x is not None:
        tx = float(np.linalg.norm(_power_apply(T, x, n_k)))
        if not tx * s < eps ** 2:
            raise HypothesisViolation(
                f"||T^{n_k} x|| ||S^{n_k} y|| < eps^2 fails ({tx * s} >= {eps ** 2})")
    lam = s / eps
    if lam == 0:
        raise HypothesisViolation("lambda = 0; the scalars must be nonzero (S^n y vanished)")
    return complex(lam)


def equivalence_sequence(T: TruncatedOperator, S: TruncatedOperator, y, n_ks, x=None,
                         eps=None) -> list:
    """:func:`equivalence_transform` along ``n_ks``.

    With ``eps=None`` each index uses eps_k = sqrt(||S^{n_k} y||), which makes
    lambda_k = sqrt(||S^{n_k} y||) and keeps ||S^{n_k} y|| / lambda_k -> 0.
    A fixed ``eps`` reproduces the single-epsilon recipe, under which
    condition (2) of the lambda form stays at the constant level eps.
    """
    out = []
    for nk in n_ks:
        e = eps
        if e is None:
            e = math.sqrt(float(np.linalg.norm(_power_apply(S, y, nk))))
        out.append(equivalence_transform(T, S, y, nk, e, x=x))
    return out


def rescale_sequence(lambda_ks, eps: float) -> list:
    """alpha_k = sqrt(eps) * lambda_k for 0 < eps < 1."""
    if not 0 < eps < 1:
        raise ContractError("eps must lie in (0, 1)")
    lam = [complex(z) for z in lambda_ks]
    if any(abs(z) > 1 for z in lam):
        raise HypothesisViolation("every |lambda_k| must be <= 1")
    r = math.sqrt(eps)
    return [r * z for z in lam]


def rescale_by_ratios(lambda_ks, ratios) -> list:
    """alpha_k = r_k * lambda_k for a user-supplied ratio sequence r_k.

    Ratios must be nonzero with |r_k| <= 1; the caller chooses them to tend to 0.
    """
    lam = [complex(z) for z in lambda_ks]
    rs = [complex(r) for r in ratios]
    if len(rs) != len(lam):
        raise ValueError("ratios and lambdas differ in length")
    if any(r == 0 or abs(r) > 1 for r in rs):
        raise HypothesisViolation("ratios must satisfy 0 < |r_k| <= 1")
    return [r * z for r, z in zip(rs, lam)]


@dataclass(eq=False)
class ConstructionCertificate:
    gaps: list
    targets: list
    residual_bounds: np.ndarray
    achieved_residuals: np.ndarray
    dim: int

    @property
    def sound(self) -> bool:
        return bool(np.all(self.achieved_residuals <= self.residual_bounds + 1e-12))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "gaps": list(map(int, self.gaps)),
            "targets": [vector_to_json(y) for y in self.targets],
            "residual_bounds": self.residual_bounds.tolist(),
            "achieved_residuals": self.achieved_residuals.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> ConstructionCertificate:
        return cls(list(d["gaps"]), [vector_from_json(y) for y in d["targets"]],
                   np.asarray(d["residual_bounds"], dtype=float),
                   np.asarray(d["achieved_residuals"], dtype=float), int(d["dim"]))


def _resized(spec: OperatorSpec, dim: int):
    """Same operator family at another truncation, or None if it cannot be resized."""
    if spec.kind == "scalar_multiple":
        inner = _resized(spec.inner, dim)
        return None if inner is None else replace(spec, inner=inner)
    if spec.kind in ("weighted_backward_shift", "weighted_forward_shift") \
            and spec.weights.mode in ("constant", "rule"):
        return replace(spec, dim=dim)
    return None


class _Stepper:
    """v -> M v using only the nonzero entries of M (shift matrices have N - 1)."""

    def __init__(self, m: np.ndarray):
        self.n = m.shape[0]
        self.rows, self.cols = np.nonzero(m)
        self.vals = m[self.rows, self.cols]

    @classmethod
    def for_shift_spec(cls, spec: OperatorSpec, dim: int):
        # resized shift families without materializing a dim x dim matrix
        c = 1.0 + 0j
        while spec.kind == "scalar_multiple":
            c *= spec.scalar
            spec = spec.inner
        w = c * spec.weights.take(dim - 1)
        st = cls.__new__(cls)
        st.n = dim
        idx = np.arange(dim - 1)
        if spec.kind == "weighted_forward_shift":
            st.rows, st.cols = idx + 1, idx
        else:
            st.rows, st.cols = idx, idx + 1
        st.vals = w
        return st

    def __call__(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n, dtype=complex)
        np.add.at(out, self.rows, self.vals * v[self.cols])
        return out


def _plan(s, ys: list, supports: list, gap_rule, budget) -> list:
    """Greedy schedule: each m_i is the first admissible value after m_{i-1}."""
    n = s.n
    gaps = []
    for i, y in enumerate(ys):
        if i == 0:
            m = max(1, int(gap_rule(0)) if gap_rule else 1)
            if m + supports[0] > n:
                return None
            gaps.append(m)
            continue
        g = max(1, max(supports[:i]), int(gap_rule(i)) if gap_rule else 1)
        powers = [y]  # powers[d] = S^d y
        while True:
            m = gaps[-1] + g
            if m + supports[i] > n:
                return None
            while len(powers) <= m - gaps[0]:
                powers.append(s(powers[-1]))
            ok = all(np.linalg.norm(powers[m - mj]) <= budget(j + 1) * 2.0 ** -(i - j)
                     for j, mj in enumerate(gaps))
            if ok:
                gaps.append(m)
                break
            g += 1
    return gaps


def build_diskcyclic_vector(T: TruncatedOperator, S: TruncatedOperator, targets, gap_rule=None,
                            schedule=None, budget=None):
    """Series vector x = sum_j S^{m_j} y_j hitting each target with a certified error.

    Parameters
    ----------
    T, S : TruncatedOperator
        A weighted backward shift and its right inverse (T S = I on e_1..e_{N-1}).
    targets : sequence of vectors
        The y_j, zero-padded to the truncation dimension.
    gap_rule : callable, optional
        ``gap_rule(j)`` is a lower bound on m_{j+1} - m_j (``gap_rule(0)`` bounds m_1).
    schedule : sequence of int, optional
        Explicit m_1 < m_2 < ...; skips the greedy planner.
    budget : float or callable, optional
        Target residual for index j (1-based).  The planner requires
        ||S^{m_i - m_j} y_i|| <= budget(j) 2^{-(i-j)} for all j < i, so every
        certified bound is at most budget(j).  Defaults to 2^{-j}.

    Returns
    -------
    x : ndarray
    cert : ConstructionCertificate
    """
    n = T.dim
    if S.dim != n:
        raise ValueError("T and S have different dimensions")
    ts = T.matrix @ S.matrix
    if np.max(np.abs(ts[:, : n - 1] - np.eye(n, dtype=complex)[:, : n - 1])) > 1e-12:
        raise HypothesisViolation("S is not a right inverse of T on e_1..e_{N-1}")
    ys = []
    for y in targets:
        y = as_vector(y)
        pad = np.zeros(n, dtype=complex)
        if support_end(y) > n:
            raise CapacityError("target longer than the truncation", support_end(y))
        pad[: min(n, y.shape[0])] = y[:n]
        ys.append(pad)
    if not ys:
        raise ValueError("need at least one target")
    supports = [support_end(y) for y in ys]
    s_step, t_step = _Stepper(S.matrix), _Stepper(T.matrix)
    if budget is None:
        budget_fn = lambda j: 2.0 ** -j  # noqa: E731
    elif callable(budget):
        budget_fn = budget
    else:
        budget_fn = lambda j: float(budget)  # noqa: E731

    if schedule is not None:
        gaps = [int(m) for m in schedule]
        if len(gaps) != len(ys) or any(b <= a for a, b in zip(gaps, gaps[1:])) or gaps[0] < 0:
            raise ValueError("schedule must be strictly increasing with one entry per target")
        for j in range(1, len(gaps)):
            for i in range(j):
                if gaps[j] - gaps[i] < supports[i]:
                    raise HypothesisViolation(
                        f"m_{j + 1} - m_{i + 1} < support of y_{i + 1}; earlier term would not vanish")
        need = max(m + sp for m, sp in zip(gaps, supports))
        if need > n:
            raise CapacityError(f"schedule needs dimension {need}, have {n}", need)
    else:
        gaps = _plan(s_step, ys, supports, gap_rule, budget_fn)
        if gaps is None:
            raise CapacityError(f"dimension {n} too small for {len(ys)} targets",
                                _required_dim(S, ys, supports, gap_rule, budget_fn))

    terms = []
    x = np.zeros(n, dtype=complex)
    for m, y in zip(gaps, ys):
        v = y
        for _ in range(m):
            v = s_step(v)
        # entries below the normal range have lost precision (or vanished)
        live = np.abs(v[v != 0])
        if np.any(y) and (live.size < np.count_nonzero(y) or live.min() < np.finfo(float).tiny):
            raise NumericError(
                f"S^{m} y underflows double precision; use fewer targets or a constant budget")
        terms.append(v)
        x = x + v
    # tail bounds: ||S^{m_i - m_j} y_i|| for i > j
    bounds = np.zeros(len(ys))
    for j, mj in enumerate(gaps):
        total = 0.0
        for i in range(j + 1, len(ys)):
            v = ys[i]
            for _ in range(gaps[i] - mj):
                v = s_step(v)
            total += float(np.linalg.norm(v))
        bounds[j] = total
    achieved = np.zeros(len(ys))
    v = x
    cur = 0
    for j, mj in enumerate(gaps):
        for _ in range(mj - cur):
            v = t_step(v)
        cur = mj
        achieved[j] = float(np.linalg.norm(v - ys[j]))
    return x, ConstructionCertificate(gaps, ys, bounds, achieved, n)


def _required_dim(S: TruncatedOperator, ys, supports, gap_rule, budget_fn):
    spec = S.spec
    dim = S.dim
    while dim < 1 << 16:
        dim *= 2
        bigger = _resized(spec, dim)
        if bigger is None:
            return None
        step = _Stepper.for_shift_spec(bigger, dim)
        padded = []
        for y in ys:
            p = np.zeros(dim, dtype=complex)
            p[: y.shape[0]] = y
            padded.append(p)
        gaps = _plan(step, padded, supports, gap_rule, budget_fn)
        if gaps is not None:
            return max(m + sp for m, sp in zip(gaps, supports))
    return None
