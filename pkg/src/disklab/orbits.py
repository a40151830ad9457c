"""Orbits, disk orbits and scaled orbits, and how densely they cover targets.

For an orbit T^0 x, T^1 x, ..., T^H x and a target y three distances are
computed, one per feasible set of scalars:

* ``plain``:  min_n ||T^n x - y||                      (hypercyclic view)
* ``disk``:   min_n min_{|a|<=1} ||a T^n x - y||       (diskcyclic view)
* ``scaled``: min_n min_{a in C} ||a T^n x - y||       (supercyclic view)

The inner minimization over ``a`` is a one-dimensional least-squares problem
with closed-form solution a0 = <y, v>/||v||^2.  On the disk the objective
|a|^2 ||v||^2 - 2 Re(a <v, y>) + ||y||^2 is a convex function of ``a`` whose
level sets are circles around a0, so the constrained minimizer is a0 itself
when |a0| <= 1 and the radial projection a0/|a0| otherwise.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .dense_sets import DenseSetEnumerator, random_unit_vectors
from .errors import ConfigurationError
from .operators import (OVERFLOW_THRESHOLD, TruncatedOperator, as_vector,
                        complex_from_json, complex_to_json, vector_from_json,
                        vector_norm, vector_to_json)

__all__ = [
    "MODES", "OrbitRecord", "Orbit", "DensityHit", "DensityReport", "orbit",
    "best_disk_coefficient", "best_scaled_coefficient", "disk_orbit_distance",
    "scaled_orbit_distance", "plain_orbit_distance", "orbit_distance",
    "density_report", "hierarchy_check", "default_targets",
]

MODES = ("plain", "disk", "scaled")
DISK_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    n: int
    vec: np.ndarray
    norm: float


@dataclass(eq=False)
class Orbit:
    """Orbit records for n = 0..len-1; ``overflowed`` marks an early stop."""

    records: list
    overflowed: bool = False

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __iter__(self):
        return iter(self.records)

    @property
    def horizon(self) -> int:
        return len(self.records) - 1

    def vectors(self, start: int = 0) -> np.ndarray:
        """Rows T^n x for n >= start."""
        return np.array([r.vec for r in self.records[start:]])


def orbit(op: TruncatedOperator, x, horizon: int) -> Orbit:
    """x, Tx, ..., T^horizon x by repeated application.

    Stops before the first iterate whose norm exceeds 1e300 (or is not
    finite) and sets ``overflowed``.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    v = as_vector(x, op.dim)
    records = [OrbitRecord(0, v, vector_norm(v))]
    m = op.matrix
    for n in range(1, horizon + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            v = m @ v
            nv = vector_norm(v)
        if not np.isfinite(nv) or nv > OVERFLOW_THRESHOLD:
            return Orbit(records, overflowed=True)
        records.append(OrbitRecord(n, v, nv))
    return Orbit(records)


def _coefficients(vs: np.ndarray, y: np.ndarray, mode: str, clip: bool = True):
    """Optimal scalar and residual for each row v of ``vs`` against ``y``."""
    if mode == "plain":
        alpha = np.ones(vs.shape[0], dtype=complex)
    else:
        # a0 = <y, v>/||v||^2 evaluated on v/s, s = max |v_i|, so huge iterates do not overflow
        s = np.abs(vs).max(axis=1, initial=0.0)
        live = s > 0
        d = np.where(live, s, 1.0)[:, None]
        u = vs.real / d + 1j * (vs.imag / d)
        un2 = np.einsum("ij,ij->i", u.real, u.real) + np.einsum("ij,ij->i", u.imag, u.imag)
        proj = u.conj() @ y
        den = np.where(live, un2 * s, 1.0)
        with np.errstate(over="ignore", invalid="ignore"):
            alpha = np.where(live, proj.real / den + 1j * (proj.imag / den), 0.0)
        if mode == "disk" and clip:
            # |a0| > 1 iff |<y, u>| > ||u||^2 s; the projection a0/|a0| = proj/|proj| avoids overflow
            pm = np.abs(proj)
            out = live & (pm > den)
            pm = np.where(out, pm, 1.0)
            alpha = np.where(out, proj.real / pm + 1j * (proj.imag / pm), alpha)
    dist = vector_norm(alpha[:, None] * vs - y[None, :], axis=1)
    return alpha, dist


def best_disk_coefficient(v, y):
    """argmin over |a| <= 1 of ||a v - y||, returned with the attained distance.

    A zero ``v`` gives a = 0 and distance ||y||.
    """
    v = as_vector(v)
    y = as_vector(y, v.shape[0])
    a, d = _coefficients(v[None, :], y, "disk")
    return complex(a[0]), float(d[0])


def best_scaled_coefficient(v, y):
    """Unconstrained least-squares scalar a0 = <y, v>/||v||^2 and its distance."""
    v = as_vector(v)
    y = as_vector(y, v.shape[0])
    a, d = _coefficients(v[None, :], y, "scaled")
    return complex(a[0]), float(d[0])


@dataclass(eq=False)
class DensityHit:
    target: np.ndarray
    best_n: int
    best_alpha: complex
    distance: float
    mode: str
    target_index: int = 0

    def to_dict(self) -> dict:
        return {
            "target_index": self.target_index,
            "target": vector_to_json(self.target),
            "best_n": self.best_n,
            "best_alpha": complex_to_json(self.best_alpha),
            "distance": self.distance,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d) -> DensityHit:
        return cls(vector_from_json(d["target"]), int(d["best_n"]),
                   complex_from_json(d["best_alpha"]), float(d["distance"]), d["mode"],
                   int(d.get("target_index", 0)))


def orbit_distance(orb: Orbit, y, mode: str = "disk", start: int = 0, clip: bool = True,
                   target_index: int = 0) -> DensityHit:
    """Best hit of ``y`` by the (plain, disk or scaled) orbit, over records n >= start.

    Ties go to the smallest n.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if len(orb) <= start:
        raise ValueError("empty orbit")
    vs = orb.vectors(start)
    y = as_vector(y, vs.shape[1])
    alpha, dist = _coefficients(vs, y, mode, clip=clip)
    i = int(np.argmin(dist))  # first minimum = smallest n
    return DensityHit(y, orb[start + i].n, complex(alpha[i]), float(dist[i]), mode, target_index)


def disk_orbit_distance(orb: Orbit, y, clip: bool = True) -> DensityHit:
    return orbit_distance(orb, y, "disk", clip=clip)


def scaled_orbit_distance(orb: Orbit, y) -> DensityHit:
    return orbit_distance(orb, y, "scaled")


def plain_orbit_distance(orb: Orbit, y) -> DensityHit:
    return orbit_distance(orb, y, "plain")


@dataclass(eq=False)
class DensityReport:
    hits: list
    horizon: int
    epsilon: float
    covered_fraction: float
    mode: str = "disk"
    overflowed: bool = False

    def distances(self) -> np.ndarray:
        return np.array([h.distance for h in self.hits])

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "horizon": self.horizon,
            "epsilon": self.epsilon,
            "covered_fraction": self.covered_fraction,
            "overflowed": self.overflowed,
            "hits": [h.to_dict() for h in self.hits],
        }

    @classmethod
    def from_dict(cls, d) -> DensityReport:
        return cls([DensityHit.from_dict(h) for h in d["hits"]], int(d["horizon"]),
                   float(d["epsilon"]), float(d["covered_fraction"]), d.get("mode", "disk"),
                   bool(d.get("overflowed", False)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target_index", "best_n", "alpha_re", "alpha_im", "distance"])
        for h in self.hits:
            w.writerow([h.target_index, h.best_n, repr(h.best_alpha.real),
                        repr(h.best_alpha.imag), repr(h.distance)])
        return buf.getvalue()


def density_report(op: TruncatedOperator, x, targets, horizon: int, epsilon: float,
                   mode: str = "disk", clip: bool = True) -> DensityReport:
    """One best hit per target; ``covered_fraction`` counts hits closer than ``epsilon``."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    targets = list(targets)
    if not targets:
        raise ValueError("need at least one target")
    orb = orbit(op, x, horizon)
    hits = [orbit_distance(orb, y, mode, clip=clip, target_index=i) for i, y in enumerate(targets)]
    covered = sum(h.distance < epsilon for h in hits) / len(hits)
    return DensityReport(hits, horizon, epsilon, covered, mode, orb.overflowed)


def hierarchy_check(plain: DensityReport, disk: DensityReport, scaled: DensityReport,
                    slack: float = 1e-12) -> bool:
    """True iff scaled <= disk <= plain target by target and every hit is feasible.

    Feasibility means plain hits use a = 1 and disk hits satisfy |a| <= 1 + 1e-12;
    a disk report built without clipping therefore fails the check.
    """
    reports = (plain, disk, scaled)
    if tuple(r.mode for r in reports) != MODES:
        raise ConfigurationError("reports must be given in plain, disk, scaled order")
    if len({len(r.hits) for r in reports}) != 1 or len({r.horizon for r in reports}) != 1:
        raise ConfigurationError("reports cover different targets or horizons")
    for hp, hd, hs in zip(plain.hits, disk.hits, scaled.hits):
        if not (np.array_equal(hp.target, hd.target) and np.array_equal(hd.target, hs.target)):
            raise ConfigurationError("reports cover different targets")
        if hp.best_alpha != 1 or abs(hd.best_alpha) > 1 + DISK_SLACK:
            return False
        if hs.distance > hd.distance + slack or hd.distance > hp.distance + slack:
            return False
    return True


def default_targets(dim: int, enumerated: int = 20, random: int = 10, seed: int = 0,
                    support: int = 4) -> list:
    """Enumerated rational vectors (indices 1..enumerated) plus seeded random unit vectors.

    Both groups live on the first ``support`` coordinates.
    """
    enum = DenseSetEnumerator(support)
    out = []
    for v in enum.take(1, enumerated):
        y = np.zeros(dim, dtype=complex)
        y[:support] = v
        out.append(y)
    return out + random_unit_vectors(dim, random, seed, support=support)
