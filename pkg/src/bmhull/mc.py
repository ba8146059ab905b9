"""Monte Carlo estimation engine.

Wedge-stay probabilities for Brownian motion and bridges, the conditional
interval bounds, the regularity-event failure rate, the two-sided facet-count
identity check and the discordant-pair probability.

Half-plane constraints use the exact per-step Brownian-bridge boundary
crossing correction 1 - exp(-2 d_i d_{i+1} / dt), so half-plane estimators are
unbiased up to floating point.  Convex wedges apply the correction per edge
independently (documented over-correction near the tip); non-convex (reflex)
wedges fall back to plain grid indicators, where the correction is invalid.
"""

from __future__ import annotations

import math

import numpy as np

from .estimate import CHUNK, Estimate, EstimatorConfig, chunk_sizes, from_weights, scaled, stream
from .hulls import SimplexTimes, build_hull, oriented_normal
from .integrals import enlargement, phi, rhs_bound
from .wedges import Wedge2D, angle as normal_angle, pair_geometry, ridge_distance
from . import rain as rain_mod
from scipy.spatial import QhullError

_TAG_STAY = 1
_TAG_BRIDGE = 2
_TAG_CONDH = 3
_TAG_RCOMP = 4
_TAG_CAMPBELL_LHS = 5
_TAG_CAMPBELL_RHS = 6
_TAG_DISCORDANT = 7
_TAG_FIT_BASE = 800

_BLOCK_ELEMS = 20_000_000  # soft cap on one path-array allocation


def _halfplane_weights(dists: np.ndarray, dt: float) -> np.ndarray:
    """Survival weights for one linear constraint given signed distances at the
    grid (replicas, steps+1); weight 0 once a grid value is nonpositive."""
    alive = np.all(dists > 0.0, axis=1)
    w = np.zeros(dists.shape[0])
    if alive.any():
        d = dists[alive]
        cross = np.exp(-2.0 * d[:, :-1] * d[:, 1:] / dt)
        w[alive] = np.prod(1.0 - cross, axis=1)
    return w


def _wedge_weights(paths: np.ndarray, wedge: Wedge2D, dt: float,
                   extra_offset: float = 0.0) -> np.ndarray:
    """Stay weights for a batch of planar paths (replicas, steps+1, 2).

    extra_offset pushes both edges outward (the enlarged wedge W')."""
    if wedge.convex:
        normals = wedge.edge_normals()
        if abs(float(normals[0] @ normals[1]) - 1.0) < 1e-12:
            normals = normals[:1]  # half-plane: single constraint
        w = np.ones(paths.shape[0])
        rel = paths - wedge.tip
        for n_e in normals:
            dists = rel @ n_e + extra_offset
            w *= _halfplane_weights(dists, dt)
        return w
    flat = paths.reshape(-1, 2)
    ok = wedge.membership(flat, tol=extra_offset).reshape(paths.shape[0], -1)
    return np.all(ok, axis=1).astype(float)


def _bm_paths(rng: np.random.Generator, n_rep: int, n_steps: int, dt: float,
              start: np.ndarray) -> np.ndarray:
    """Brownian paths from a fixed start; generated in row blocks so the draw
    sequence (and hence the result) does not depend on the block size."""
    out = np.empty((n_rep, n_steps + 1, 2))
    out[:, 0] = start
    block = max(1, _BLOCK_ELEMS // max(n_steps * 2, 1))
    lo = 0
    while lo < n_rep:
        hi = min(lo + block, n_rep)
        inc = rng.standard_normal((hi - lo, n_steps, 2)) * math.sqrt(dt)
        out[lo:hi, 1:] = start + np.cumsum(inc, axis=1)
        lo = hi
    return out


def _bridge_paths(rng: np.random.Generator, n_rep: int, times: np.ndarray,
                  a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact planar Brownian bridges between pinned endpoints, vectorised over
    replicas by sequential conditioning."""
    n = times.size
    out = np.empty((n_rep, n, 2))
    out[:, 0] = a
    out[:, -1] = b
    s2 = times[-1]
    for k in range(1, n - 1):
        left = times[k - 1]
        frac = (times[k] - left) / (s2 - left)
        var = (times[k] - left) * (s2 - times[k]) / (s2 - left)
        mean = out[:, k - 1] + frac * (b - out[:, k - 1])
        out[:, k] = mean + math.sqrt(var) * rng.standard_normal((n_rep, 2))
    return out


def _y_ok(paths: np.ndarray, times: np.ndarray, alpha: float, n_dim: int) -> np.ndarray:
    """Batch modulus-event check; paths (replicas, m, dim)."""
    slack = alpha ** (-2 * n_dim - 1)
    ph = phi(alpha)
    m = times.size
    ok = np.ones(paths.shape[0], dtype=bool)
    for lag in range(1, m):
        gaps = times[lag:] - times[:-lag]
        d = paths[:, lag:] - paths[:, :-lag]
        disp2 = (d * d).sum(axis=2)
        lim = (np.sqrt(gaps) * ph + slack) ** 2
        ok &= np.all(disp2 <= lim, axis=1)
        if not ok.any():
            break
    return ok


# ---------------------------------------------------------------- estimators

def stay_prob_wedge(wedge: Wedge2D, start, horizon: float,
                    config: EstimatorConfig) -> Estimate:
    """P(planar Brownian motion started at `start` stays in the wedge on
    [0, horizon]), crossing-corrected on the grid for convex wedges."""
    start = np.asarray(start, dtype=float).reshape(2)
    if not bool(wedge.membership(start[None, :], tol=1e-12)[0]):
        raise ValueError("start must lie in the wedge")
    n_steps = max(2, int(round(config.grid_points_per_unit_time * horizon)))
    dt = horizon / n_steps
    weights = []
    for ci, sz in enumerate(chunk_sizes(config.replicas)):
        rng = stream(config.master_seed, _TAG_STAY, ci)
        paths = _bm_paths(rng, sz, n_steps, dt, start)
        weights.append(_wedge_weights(paths, wedge, dt))
    r0 = float(np.linalg.norm(start - wedge.tip))
    return from_weights(np.concatenate(weights), config,
                        extra={"horizon": horizon, "r": r0,
                               "half_angle": wedge.half_angle,
                               "grid_steps": n_steps})


def fit_exit_exponent(beta: float, config: EstimatorConfig,
                      ratios=None) -> float:
    """Fitted power-law exponent of the wedge stay probability in r/sqrt(t).

    Theory (Spitzer) gives pi/(2 beta) for half-angle beta; the fit uses
    r/sqrt(t) over a decade small enough that the local slope of the exact
    half-plane law is within a few percent of the asymptotic exponent.
    """
    if not 0.0 < beta <= math.pi / 2.0:
        raise ValueError("beta must be in (0, pi/2]")
    xs = np.geomspace(0.03, 0.3, 8) if ratios is None else np.asarray(ratios, dtype=float)
    if xs.size < 4:
        raise ValueError("need at least 4 support points for the fit")
    means = []
    for k, x in enumerate(xs):
        wedge = Wedge2D(tip=np.zeros(2), axis_angle=0.0, half_angle=beta)
        start = np.array([x, 0.0])  # along the bisector, horizon 1
        n_steps = max(2, config.grid_points_per_unit_time)
        dt = 1.0 / n_steps
        ws = []
        for ci, sz in enumerate(chunk_sizes(config.replicas)):
            rng = stream(config.master_seed, _TAG_FIT_BASE + k, ci)
            paths = _bm_paths(rng, sz, n_steps, dt, start)
            ws.append(_wedge_weights(paths, wedge, dt))
        means.append(float(np.concatenate(ws).mean()))
    means = np.asarray(means)
    if np.sum(means > 0.0) < 4:
        raise ValueError("fewer than 4 support points with positive estimates")
    m = means > 0.0
    slope = np.polyfit(np.log(xs[m]), np.log(means[m]), 1)[0]
    return float(slope)


def lemma6_bound(alpha: float, eps: float, theta: float, r: float) -> float:
    """Bridge wedge-stay upper bound alpha^eps * max(alpha^-1, r)^(1+theta/20)."""
    return alpha ** eps * max(1.0 / alpha, r) ** (1.0 + theta / 20.0)


def bridge_stay_prob(wedge: Wedge2D, a, b, config: EstimatorConfig,
                     bound_params=None) -> Estimate:
    """P(planar Brownian bridge from a to b over [0,1] stays in the wedge).

    bound_params=(alpha, eps, theta) additionally reports the corresponding
    analytic upper bound at r = |a - tip|.
    """
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    n_steps = max(2, config.grid_points_per_unit_time)
    times = np.linspace(0.0, 1.0, n_steps + 1)
    dt = times[1] - times[0]
    weights = []
    for ci, sz in enumerate(chunk_sizes(config.replicas)):
        rng = stream(config.master_seed, _TAG_BRIDGE, ci)
        paths = _bridge_paths(rng, sz, times, a, b)
        weights.append(_wedge_weights(paths, wedge, dt))
    r0 = float(np.linalg.norm(a - wedge.tip))
    extra = {"r": r0, "half_angle": wedge.half_angle}
    if bound_params is not None:
        al, eps, th = bound_params
        extra["lemma6_bound"] = lemma6_bound(al, eps, th, r0)
    return from_weights(np.concatenate(weights), config, extra=extra)


_CASES = ("interior", "edge", "interior-special", "edge-special")


def prop6_rhs(case: str, gap: float, alpha: float, eps: float,
              theta: float, n_dim: int) -> float:
    """Right-hand side of the conditional interval bound for the given case."""
    if case not in _CASES:
        raise ValueError(f"case must be one of {_CASES}")
    base = alpha ** eps / (gap * alpha) if case.startswith("interior") \
        else alpha ** eps / math.sqrt(gap * alpha)
    if case.endswith("special"):
        base *= alpha ** (-theta / (800.0 * n_dim))
    return base


def conditional_H_prob(case: str, wedge: Wedge2D, s1: float, s2: float,
                       d1, d2, alpha: float, config: EstimatorConfig,
                       eps: float = 0.5, n_dim: int = 2,
                       include_R: str = "auto") -> Estimate:
    """P(bridge pinned at (s1,d1),(s2,d2) stays in the enlarged wedge, jointly
    with the interval regularity event), by bridge simulation.

    Preconditions per case: the stated endpoints lie on an edge of the base
    wedge (distance to the enlarged half-space boundary exactly
    phi(alpha)^2/sqrt(alpha)); special cases additionally need the long-gap
    condition.  Violations raise with the failed inequality.

    include_R: "auto" simulates the rain/modulus conjunct only when
    alpha*(s2-s1) <= 1e5 (above that the rain is unsimulably dense and its
    failure probability is far below any reported digit; the estimate is then
    the conservative upper value P(H_i | S)).  "always"/"never" force it.
    """
    if case not in _CASES:
        raise ValueError(f"case must be one of {_CASES}")
    if include_R not in ("auto", "always", "never"):
        raise ValueError("include_R must be auto, always or never")
    if not wedge.convex:
        raise ValueError("the projected wedge must be convex (theta > 0)")
    d1 = np.asarray(d1, dtype=float).reshape(2)
    d2 = np.asarray(d2, dtype=float).reshape(2)
    gap = s2 - s1
    if gap <= 0.0:
        raise ValueError("need s1 < s2")
    normals = wedge.edge_normals()
    tol = 1e-9
    on_edge = [bool(np.min(np.abs((d - wedge.tip) @ normals.T)) <= tol) for d in (d1, d2)]
    if case.startswith("interior") and not all(on_edge):
        raise ValueError("interior case needs both endpoints on a wedge edge "
                         f"(edge distances {on_edge})")
    if case.startswith("edge") and not any(on_edge):
        raise ValueError("edge case needs at least one endpoint on a wedge edge")
    theta = math.pi - 2.0 * wedge.half_angle
    if case.endswith("special"):
        dmin = min(np.linalg.norm(d1 - wedge.tip), np.linalg.norm(d2 - wedge.tip))
        need = alpha ** (1.0 / (10.0 * n_dim)) * max(dmin ** 2, 1.0 / alpha)
        if gap < need:
            raise ValueError(f"special case needs s2-s1 >= {need:.4g}, got {gap:.4g}")
    n_steps = max(2, int(round(config.grid_points_per_unit_time * gap)))
    times = np.linspace(s1, s2, n_steps + 1)
    dt = times[1] - times[0]
    simulate_r = include_R == "always" or (include_R == "auto" and alpha * gap <= 1e5)
    w_off = enlargement(alpha)
    weights = []
    for ci, sz in enumerate(chunk_sizes(config.replicas)):
        rng = stream(config.master_seed, _TAG_CONDH, ci)
        paths = _bridge_paths(rng, sz, times, d1, d2)
        w = _wedge_weights(paths, wedge, dt, extra_offset=w_off)
        if simulate_r:
            ok = _y_ok(paths, times, alpha, n_dim)
            radius = phi(alpha) / alpha
            for i in range(sz):
                if not ok[i]:
                    continue
                lv = _interval_level(rng, alpha, s1, s2, radius)
                ok[i] = _covered(lv, s1, s2, radius)
            w *= ok
        weights.append(w)
    rhs = prop6_rhs(case, gap, alpha, eps, theta, n_dim)
    est = from_weights(np.concatenate(weights), config,
                       extra={"case": case, "alpha": alpha, "eps": eps,
                              "theta": theta, "gap": gap, "prop6_rhs": rhs,
                              "r_conjunct": "simulated" if simulate_r else "assumed"})
    return est


def _interval_level(rng, alpha, s1, s2, radius):
    lo, hi = max(0.0, s1 - radius), min(1.0, s2 + radius)
    m = rng.poisson(alpha * (hi - lo))
    pts = lo + (hi - lo) * rng.random(m)
    ends = [x for x in (0.0, 1.0) if lo <= x <= hi]
    return np.sort(np.concatenate([pts, ends]))


def _covered(level_times, a, b, radius):
    t = level_times
    t = t[(t >= a - radius) & (t <= b + radius)]
    if t.size == 0 or t[0] - a > radius or b - t[-1] > radius:
        return False
    if t.size == 1:
        return True
    lo, hi = t[:-1] + radius, t[1:] - radius
    bad = (hi - lo > 0.0) & (np.maximum(lo, a) < np.minimum(hi, b))
    return not bool(bad.any())


def prob_R_complement(alpha: float, n_dim: int, config: EstimatorConfig) -> Estimate:
    """Failure frequency of the joint regularity event R on [0,1]: Poisson
    level set dense enough AND grid modulus event, per replica."""
    if alpha <= 1.0:
        raise ValueError("alpha must be > 1")
    n_steps = config.grid_points_per_unit_time
    times = np.linspace(0.0, 1.0, n_steps + 1)
    dt = times[1] - times[0]
    radius = phi(alpha) / alpha
    fails = []
    for ci, sz in enumerate(chunk_sizes(config.replicas)):
        rng = stream(config.master_seed, _TAG_RCOMP, ci)
        paths = np.empty((sz, n_steps + 1, n_dim))
        paths[:, 0] = 0.0
        inc = rng.standard_normal((sz, n_steps, n_dim)) * math.sqrt(dt)
        paths[:, 1:] = np.cumsum(inc, axis=1)
        y_ok = _y_ok(paths, times, alpha, n_dim)
        n_ok = np.empty(sz, dtype=bool)
        for i in range(sz):
            m = rng.poisson(alpha)
            lv = np.sort(np.concatenate([[0.0, 1.0], rng.random(m)]))
            n_ok[i] = _covered(lv, 0.0, 1.0, radius)
        fails.append(~(y_ok & n_ok))
    w = np.concatenate(fails).astype(float)
    return from_weights(w, config, extra={"alpha": alpha, "n_dim": n_dim,
                                          "lemma_bound": alpha ** (-2 * n_dim - 1)})


def _path_at(rng, times, dim):
    dts = np.diff(np.concatenate([[0.0], times]))
    return np.cumsum(np.sqrt(dts)[:, None] * rng.standard_normal((times.size, dim)), axis=0)


def campbell_check(alpha: float, n_dim: int, config: EstimatorConfig):
    """Two estimators of the mean facet count of the approximating polytope:

    lhs: direct mean facet count over (path, rain) replicas;
    rhs: alpha^n * vol(simplex) * P(facet event at a uniform simplex point).

    Returns (lhs, rhs) Estimates; the identity makes their CIs overlap.
    """
    if n_dim != 2:
        raise ValueError("n_dim = 2 only (cost)")
    if not 1.0 < alpha <= 50.0:
        raise ValueError("alpha must be in (1, 50]")
    lhs_counts = []
    for ci, sz in enumerate(chunk_sizes(config.replicas)):
        rng = stream(config.master_seed, _TAG_CAMPBELL_LHS, ci)
        for _ in range(sz):
            m = rng.poisson(alpha)
            times = np.sort(np.concatenate([[0.0, 1.0], rng.random(m)]))
            pts = _path_at(rng, times, n_dim)
            try:
                poly = build_hull(pts)
            except (QhullError, ValueError):
                lhs_counts.append(0.0)  # degenerate (too few rain points)
                continue
            # only tuples of rain times count: the pinned endpoint times 0 and
            # 1 are not process points, so facets touching them lie outside
            # the open simplex
            cnt = sum(1 for f in poly.facets
                      if all(0.0 < times[i] < 1.0 for i in f.vertex_indices))
            lhs_counts.append(float(cnt))
    lhs = from_weights(np.array(lhs_counts), config, clamp01=False,
                       extra={"alpha": alpha, "estimand": "mean_facet_count"})

    rhs_hits = []
    rhs_reps = config.replicas * 4  # the indicator side is cheaper and noisier
    for ci, sz in enumerate(chunk_sizes(rhs_reps)):
        rng = stream(config.master_seed, _TAG_CAMPBELL_RHS, ci)
        for _ in range(sz):
            r = np.sort(rng.random(n_dim))
            m = rng.poisson(alpha)
            lam = np.sort(np.concatenate([[0.0, 1.0], rng.random(m)]))
            all_t = np.concatenate([r, lam])
            order = np.argsort(all_t, kind="stable")
            pts = np.empty((all_t.size, n_dim))
            pts[order] = _path_at(rng, all_t[order], n_dim)
            r_pts, lam_pts = pts[:n_dim], pts[n_dim:]
            try:
                n_vec = oriented_normal(r_pts, r_pts[0])
            except ValueError:
                rhs_hits.append(0.0)
                continue
            side = lam_pts @ n_vec - float(n_vec @ r_pts[0])
            eps = 1e-12 * max(1.0, float(np.abs(pts).max()))
            hit = bool(np.all(side <= eps) or np.all(side >= -eps))
            rhs_hits.append(float(hit))
    vol_simplex = 1.0 / math.factorial(n_dim)
    raw = from_weights(np.array(rhs_hits), config,
                       extra={"alpha": alpha, "estimand": "facet_event_rate"})
    rhs = scaled(raw, alpha ** n_dim * vol_simplex)
    return lhs, rhs


def discordant_prob(r: SimplexTimes, s: SimplexTimes, alpha: float, kappa: float,
                    config: EstimatorConfig) -> Estimate:
    """P(expanded facet events for both tuples AND the discordance geometry),
    by joint path simulation at the merged grid; reports the analytic RHS."""
    if r.n != s.n:
        raise ValueError("r and s must have the same length")
    n = r.n
    from .integrals import gamma_ak
    base = np.linspace(0.0, 1.0, config.grid_points_per_unit_time + 1)
    times = np.unique(np.concatenate([base, r.r, s.r]))
    idx_r = np.searchsorted(times, r.r)
    idx_s = np.searchsorted(times, s.r)
    slack = enlargement(alpha)
    gamma = gamma_ak(alpha, kappa)
    hits = []
    for ci, sz in enumerate(chunk_sizes(config.replicas)):
        rng = stream(config.master_seed, _TAG_DISCORDANT, ci)
        for _ in range(sz):
            pts = _path_at(rng, times, n)
            pr, ps = pts[idx_r], pts[idx_s]
            try:
                n_r = oriented_normal(pr, pr[0])
                n_s = oriented_normal(ps, ps[0])
            except ValueError:
                hits.append(0.0)
                continue
            ok = (np.all(pts @ n_r <= float(n_r @ pr[0]) + slack)
                  and np.all(pts @ n_s <= float(n_s @ ps[0]) + slack))
            if ok:
                th = normal_angle(n_r, n_s)
                ok = th >= kappa / 16.0
                if ok and th < math.pi - 1e-9 and th > 1e-9:
                    pair = pair_geometry(n_r, float(n_r @ pr[0]),
                                         n_s, float(n_s @ ps[0]), alpha)
                    ok = ridge_distance(pr, ps, pair) <= gamma
            hits.append(float(ok))
    t_merged = np.sort(np.concatenate([r.r, s.r]))
    extra = {"alpha": alpha, "kappa": kappa}
    if t_merged[0] > 0.0 and t_merged[-1] < 1.0 and np.all(np.diff(t_merged) > 0):
        extra["prop5_rhs"] = rhs_bound(t_merged, alpha, kappa, n)
    return from_weights(np.array(hits), config, extra=extra)
