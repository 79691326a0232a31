"""Monte-Carlo estimators and property samplers over subspace sections.

Covers the sign-weighted quadratic supremum over W intersected with the
unit ball (spectral norm of the sign-compressed basis Gram matrix), Gaussian
projection norms, the fourth-moment quasimetric with its factor-4 triangle
inequality and ball-convexity checks, and greedy packing counts.

Estimator aggregation uses compensated summation in fixed trial order, so
results are independent of any parallel evaluation schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSignVector,
    BadWeights,
    LengthMismatch,
    NotOrthonormal,
    SamplingFailed,
)
from .linalg import DEFAULT_ORTHO_TOL, OrthoRowMatrix, as_matrix, sym_eig_extremes
from .parallel import run_indexed
from .rng import child_seed, make_rng, rademacher


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """M x n matrix with orthonormal columns spanning the subspace W."""

    u: np.ndarray
    ortho_tol: float = DEFAULT_ORTHO_TOL

    def __post_init__(self):
        mat = as_matrix(self.u)
        m, n = mat.shape
        if n > m:
            raise NotOrthonormal(f"need M >= n, got {m}x{n}")
        err = float(np.max(np.abs(mat.T @ mat - np.eye(n))))
        if err > self.ortho_tol:
            raise NotOrthonormal(
                f"columns not orthonormal: max |U^T U - I| = {err:.3e}"
            )
        object.__setattr__(self, "u", mat)

    @classmethod
    def from_ortho_rows(cls, a: OrthoRowMatrix) -> "SubspaceBasis":
        """Basis of the row space of ``a`` (columns of A^T)."""
        return cls(a.mat.T.copy(), a.ortho_tol)

    @classmethod
    def coordinate_span(cls, m: int, dims: int = 1) -> "SubspaceBasis":
        """Span of the first ``dims`` standard basis vectors of R^M."""
        u = np.zeros((m, dims))
        u[np.arange(dims), np.arange(dims)] = 1.0
        return cls(u)

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def n(self) -> int:
        return self.u.shape[1]


@dataclass(frozen=True)
class ProcessEstimate:
    mean: float
    std_error: float
    trials: int
    q: float
    bound_ratio: float  # mean / (q * sqrt(ln M))
    seed: int


@dataclass(frozen=True)
class QuasimetricSample:
    """One evaluated quasimetric inequality instance: lhs vs rhs."""

    lhs: float
    rhs: float
    ratio: float

    @classmethod
    def of(cls, lhs: float, rhs: float) -> "QuasimetricSample":
        if rhs > 0.0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs == 0.0 else math.inf
        return cls(lhs, rhs, ratio)


def compensated_sum(values) -> float:
    """Neumaier-compensated sum; order-fixed, schedule-independent."""
    total = 0.0
    comp = 0.0
    for x in values:
        x = float(x)
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def proj_l1_l2_norm(w: SubspaceBasis) -> float:
    """l1 -> l2 operator norm of the orthogonal projection onto W.

    Equals the largest row norm of U, because the projection of a standard
    basis vector has norm ||U^T e_j|| = ||row j of U||.
    """
    return float(np.max(np.linalg.norm(w.u, axis=1)))


def sup_process_sample(w: SubspaceBasis, signs) -> float:
    """Supremum over unit w in W of |sum_i signs_i * w(i)^2|.

    Writing w = U y reduces the supremum to the spectral norm of
    S = U^T diag(signs) U, computed exactly via the Jacobi eigensolver.
    """
    s = np.asarray(signs, dtype=np.float64)
    if s.shape != (w.m,):
        raise BadSignVector(f"need {w.m} signs, got shape {s.shape}")
    if not np.all(np.abs(s) == 1.0):
        raise BadSignVector("signs must be exactly +-1")
    core = (w.u * s[:, None]).T @ w.u
    ext = sym_eig_extremes(0.5 * (core + core.T))
    return max(abs(ext.lambda_min), abs(ext.lambda_max))


def estimate_process(w: SubspaceBasis, trials: int, seed: int) -> ProcessEstimate:
    """Monte-Carlo mean of the sign-weighted supremum over independent draws.

    Trial k draws its signs from the generator seeded by
    child_seed(seed, k); the mean is compared against Q * sqrt(ln M) via
    ``bound_ratio``.
    """
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")

    def one_trial(trial: int) -> float:
        rng = make_rng(child_seed(seed, trial))
        return sup_process_sample(w, rademacher(rng, w.m))

    values = np.asarray(run_indexed(one_trial, trials))
    mean = compensated_sum(values) / trials
    var = compensated_sum((values - mean) ** 2) / (trials - 1)
    std_error = math.sqrt(var / trials)
    q = proj_l1_l2_norm(w)
    denom = q * math.sqrt(math.log(w.m))
    ratio = mean / denom if denom > 0.0 else math.inf
    return ProcessEstimate(mean, std_error, trials, q, ratio, seed)


def gaussian_sup_estimates(
    w: SubspaceBasis, weights, trials: int, seed: int
) -> tuple[float, float | None]:
    """Monte-Carlo means of ||P_W g||_inf and, when ``weights`` is given,
    of the weighted norm (sum_i (P_W g)_i^2 * weights_i^2)^(1/2).

    g is standard Gaussian in R^M; trial k is seeded by child_seed(seed, k).
    Returns (mean_inf, mean_weighted) with mean_weighted None when weights
    are absent.
    """
    if trials < 1:
        raise ValueError(f"need at least 1 trial, got {trials}")
    wt = None
    if weights is not None:
        wt = np.asarray(weights, dtype=np.float64)
        if wt.shape != (w.m,):
            raise BadWeights(f"need {w.m} weights, got shape {wt.shape}")
        if not np.all(np.isfinite(wt)):
            raise BadWeights("weights must be finite")
    inf_vals = np.empty(trials)
    wvals = np.empty(trials) if wt is not None else None
    for trial in range(trials):
        rng = make_rng(child_seed(seed, trial))
        g = rng.standard_normal(w.m)
        proj = w.u @ (w.u.T @ g)
        inf_vals[trial] = np.max(np.abs(proj))
        if wvals is not None:
            wvals[trial] = math.sqrt(float(np.sum(proj * proj * wt * wt)))
    mean_inf = compensated_sum(inf_vals) / trials
    mean_weighted = (
        compensated_sum(wvals) / trials if wvals is not None else None
    )
    return mean_inf, mean_weighted


def _pair_arrays(w1, w2) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(w1, dtype=np.float64)
    b = np.asarray(w2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    return a, b


def quasimetric_d(w1, w2) -> float:
    """Fourth-moment quasimetric
    d(w, v) = (sum_i (w_i - v_i)^2 (w_i^2 + v_i^2))^(1/2)."""
    a, b = _pair_arrays(w1, w2)
    return float(np.sqrt(np.sum((a - b) ** 2 * (a * a + b * b))))


def quasimetric_dtilde(w1, w2) -> float:
    """Companion metric dtilde(w, v) = (sum_i (w_i^2 - v_i^2)^2)^(1/2);
    satisfies dtilde <= sqrt(2) d everywhere."""
    a, b = _pair_arrays(w1, w2)
    return float(np.sqrt(np.sum((a * a - b * b) ** 2)))


def _d_batch(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((x - y) ** 2 * (x * x + y * y), axis=-1))


def check_quasi_triangle(samples: int, dim: int, seed: int) -> float:
    """Worst observed d(w, v) / (d(w, u) + d(u, v)) over sampled triples.

    Samples Gaussian triples plus a 1% batch of adversarial near-collinear
    triples (w, w + delta, w + 2 delta) with large coordinates and tiny
    increments. The generalized triangle inequality bounds the ratio by 4.
    """
    return worst_triangle_sample(samples, dim, seed).ratio


def worst_triangle_sample(samples: int, dim: int, seed: int) -> QuasimetricSample:
    """Like check_quasi_triangle, but returns the worst (lhs, rhs) pair."""
    if samples < 1 or dim < 1:
        raise ValueError("need samples >= 1 and dim >= 1")
    rng = make_rng(seed)
    worst = QuasimetricSample.of(0.0, 0.0)
    for w, u, v in _triangle_batches(rng, samples, dim):
        num = _d_batch(w, v)
        den = _d_batch(w, u) + _d_batch(u, v)
        live = den > 0.0
        if live.any():
            at = int(np.argmax(num[live] / den[live]))
            cand = QuasimetricSample.of(
                float(num[live][at]), float(den[live][at])
            )
            if cand.ratio > worst.ratio:
                worst = cand
    return worst


def _triangle_batches(rng, samples, dim):
    yield rng.standard_normal((3, samples, dim))
    n_adv = max(1, samples // 100)
    base = 10.0 * rng.standard_normal((n_adv, dim))
    delta = 1e-6 * rng.standard_normal((n_adv, dim))
    yield base, base + delta, base + 2.0 * delta


def _ball_point(rng, center: np.ndarray, rho: float, max_shrink: int = 80):
    """One point u with d(u, center) <= rho, by shrinking a Gaussian offset.

    The proposal aims at a random fraction of the radius and shrinks
    multiplicatively until it lands inside; d(center + a*delta, center) -> 0
    as a -> 0, so termination only needs enough shrink steps.
    """
    delta = rng.standard_normal(center.shape)
    frac = rng.uniform(0.05, 1.0)
    alpha = 1.0
    for _ in range(max_shrink):
        candidate = center + alpha * delta
        dist = quasimetric_d(candidate, center)
        if dist <= rho:
            return candidate
        alpha *= min(0.7, 0.9 * frac * rho / dist)
    return None


def check_ball_convexity(samples: int, dim: int, rho: float, seed: int) -> float:
    """Worst observed d(v, w) / rho over random convex combinations v of
    points sampled inside the quasimetric ball of radius rho around w.

    Convex hulls of quasimetric balls inflate the radius by at most 4.
    Raises SamplingFailed if the ball sampler cannot place hull points.
    """
    if samples < 1 or dim < 1:
        raise ValueError("need samples >= 1 and dim >= 1")
    if rho <= 0.0:
        raise ValueError(f"rho must be > 0, got {rho}")
    rng = make_rng(seed)
    combos_per_hull = 8
    hull_size = 6
    worst = 0.0
    done = 0
    while done < samples:
        center = rng.standard_normal(dim)
        points = []
        for _ in range(hull_size):
            point = _ball_point(rng, center, rho)
            if point is None:
                raise SamplingFailed(
                    f"could not sample inside a radius-{rho} ball around "
                    f"a point with max coordinate {np.max(np.abs(center)):.3g}"
                )
            points.append(point)
        hull = np.asarray(points)
        take = min(combos_per_hull, samples - done)
        for _ in range(take):
            lam = rng.dirichlet(np.ones(hull_size))
            v = lam @ hull
            worst = max(worst, quasimetric_d(v, center) / rho)
        done += take
    return worst


def packing_count(points, metric: str, radius: float, weights=None) -> int:
    """Size of a greedy packing: scan points in order, keep one iff its
    distance to every kept point exceeds ``radius``.

    Metrics: "d" (quasimetric), "linf", "weighted" (l2 with per-coordinate
    weights). Sandwiches the covering number at nearby radii.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a nonempty list of equal-length vectors")
    if radius <= 0.0:
        raise ValueError(f"radius must be > 0, got {radius}")
    if metric == "weighted":
        if weights is None:
            raise BadWeights("metric 'weighted' requires weights")
        wt = np.asarray(weights, dtype=np.float64)
        if wt.shape != (pts.shape[1],) or not np.all(np.isfinite(wt)):
            raise BadWeights(f"need {pts.shape[1]} finite weights")
    elif metric not in ("d", "linf"):
        raise ValueError(f"unknown metric {metric!r}")

    def dist_to_kept(p, kept):
        diff = kept - p
        if metric == "d":
            return np.sqrt(np.sum(diff**2 * (kept**2 + p**2), axis=1))
        if metric == "linf":
            return np.max(np.abs(diff), axis=1)
        return np.sqrt(np.sum(diff**2 * wt**2, axis=1))

    kept: list[np.ndarray] = []
    for p in pts:
        if not kept or bool(np.all(dist_to_kept(p, np.asarray(kept)) > radius)):
            kept.append(p)
    return len(kept)
