"""Exact sampling of Brownian motion and bridges on finite grids.

Paths are realised at sorted time grids in [0,1]; increments are exact
Gaussians, so there is no discretisation error at the grid times themselves.
Also houses the grid modulus of continuity M_delta and the modulus event
check used by the regularity event R.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .integrals import phi


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("grid must be a nonempty 1-d array")
        if t[0] < 0.0 or t[-1] > 1.0:
            raise ValueError("grid times must lie in [0,1]")
        if t.size > 1 and np.any(np.diff(t) <= 0.0):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    @staticmethod
    def uniform(points_per_unit_time: int, a: float = 0.0, b: float = 1.0) -> "TimeGrid":
        n = max(2, int(round(points_per_unit_time * (b - a))))
        return TimeGrid(np.linspace(a, b, n))


@dataclass(frozen=True)
class PathSample:
    grid: TimeGrid
    points: np.ndarray  # (len(grid), dim)
    dim: int

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.shape != (len(self.grid), self.dim):
            raise ValueError("points must have shape (len(grid), dim)")
        if not np.all(np.isfinite(p)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", p)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x_{i+1}" for i in range(self.dim)])
        for t, x in zip(self.grid.times, self.points):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in x])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim,
                           "times": self.grid.times.tolist(),
                           "points": self.points.tolist()})

    def restrict(self, a: float, b: float) -> "PathSample":
        m = (self.grid.times >= a) & (self.grid.times <= b)
        return PathSample(TimeGrid(self.grid.times[m]), self.points[m], self.dim)


@dataclass(frozen=True)
class BridgeSpec:
    a: np.ndarray
    b: np.ndarray
    s1: float
    s2: float

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("endpoints must be finite")
        if a.shape != b.shape:
            raise ValueError("endpoint dimensions differ")
        if not self.s1 < self.s2:
            raise ValueError("need s1 < s2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def sample_brownian(dim: int, grid: TimeGrid, rng: np.random.Generator) -> PathSample:
    """Standard Brownian motion pinned at B(0)=0, realised at the grid times."""
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    t = grid.times
    dts = np.diff(np.concatenate([[0.0], t]))  # first increment from time 0
    z = rng.standard_normal((t.size, dim))
    pts = np.cumsum(np.sqrt(dts)[:, None] * z, axis=0)
    if t[0] == 0.0:
        pts[0] = 0.0  # sqrt(0)*z already, keep exact zero
    return PathSample(grid, pts, dim)


def sample_bridge(spec: BridgeSpec, dim: int, grid: TimeGrid,
                  rng: np.random.Generator) -> PathSample:
    """Brownian bridge from (s1, a) to (s2, b) by sequential conditioning.

    Each interior point is Gaussian given the previous point and the pinned
    right endpoint; the endpoints are exact to machine precision.
    """
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    t = grid.times
    if t[0] != spec.s1 or t[-1] != spec.s2:
        raise ValueError("grid must start at s1 and end at s2")
    if spec.a.size != dim:
        raise ValueError("endpoint dimension mismatch")
    n = t.size
    pts = np.empty((n, dim))
    pts[0] = spec.a
    pts[-1] = spec.b
    z = rng.standard_normal((max(n - 2, 0), dim))
    for k in range(1, n - 1):
        left, right = t[k - 1], spec.s2
        frac = (t[k] - left) / (right - left)
        mean = pts[k - 1] + frac * (spec.b - pts[k - 1])
        var = (t[k] - left) * (right - t[k]) / (right - left)
        pts[k] = mean + np.sqrt(var) * z[k - 1]
    return PathSample(grid, pts, dim)


def modulus(path: PathSample, delta: float) -> float:
    """Grid modulus of continuity: sup over grid pairs with gap <= delta of |dB|."""
    if delta <= 0.0:
        raise ValueError("delta must be > 0")
    t = path.grid.times
    p = path.points
    n = t.size
    best = 0.0
    for lag in range(1, n):
        gaps = t[lag:] - t[:-lag]
        if gaps.min() > delta:
            break  # min gap per lag is nondecreasing in lag
        m = gaps <= delta
        if not m.any():
            continue
        d = p[lag:][m] - p[:-lag][m]
        best = max(best, float(np.sqrt((d * d).sum(axis=1)).max()))
    return best


def check_Y(path: PathSample, alpha: float, interval=(0.0, 1.0), n_dim: int = 2) -> bool:
    """Modulus event on [a,b]: for every realised grid gap d,
    |B(t2)-B(t1)| <= sqrt(d)*phi(alpha) + alpha^{-2n-1}."""
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1 (phi undefined below)")
    a, b = interval
    sub = path.restrict(a, b)
    t, p = sub.grid.times, sub.points
    slack = alpha ** (-2 * n_dim - 1)
    ph = phi(alpha)
    for lag in range(1, t.size):
        gaps = t[lag:] - t[:-lag]
        d = p[lag:] - p[:-lag]
        disp = np.sqrt((d * d).sum(axis=1))
        if np.any(disp > np.sqrt(gaps) * ph + slack):
            return False
    return True
