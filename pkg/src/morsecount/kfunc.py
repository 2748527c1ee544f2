"""Analytic curvature candidates K = scale * (1 + eps * f) on S^n.

f is a sum of smooth sphere bumps w * exp(-(1 - <x, c>)/s^2), chosen because all
ambient derivatives are closed-form.  Intrinsic derivatives come from projecting:
with P = I - x x^T the tangential gradient is P (grad f), the covariant Hessian of
the restriction is P (Hess f) P - (x . grad f) P, and the sphere Laplacian is its
trace.  The module locates critical points (vectorized Newton from a deterministic
quasi-uniform seed set), classifies them, extracts the admissible concentration
set {grad K = 0, Lap K < 0} as a parity configuration, and evaluates the
admissibility threshold for the declared oscillation bound.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .indexcount import H3Warning, ParityConfig
from .sphere import (
    check_unit,
    geodesic_distance,
    quasi_uniform_points,
    tangent_basis,
    unit,
)


class H1ViolationError(ValueError):
    """The candidate is degenerate: every point critical, or a critical point
    fails the nondegeneracy / nonzero-Laplacian requirements."""


#: Hessian nondegeneracy tolerance: min |eigenvalue| must exceed this fraction of
#: the largest magnitude.  Separates genuine degeneracy from roundoff.
NONDEGENERACY_RATIO = 1e-6

#: Absolute tangential-gradient norm required of a reported critical point.
GRAD_NORM_TOL = 1e-10


@dataclass(frozen=True)
class BumpTerm:
    """One bump: weight * exp(-(1 - <x, center>)/width^2)."""

    center: tuple[float, ...]
    weight: float
    width: float

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float)
        if abs(float(np.linalg.norm(c)) - 1.0) > 1e-9:
            raise ValueError("bump center must be a unit vector")
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        if not (self.width > 0):
            raise ValueError("bump width must be positive")

    def to_dict(self) -> dict:
        return {"center": list(self.center), "weight": self.weight, "width": self.width}


@dataclass(frozen=True)
class KFunction:
    """Curvature candidate on S^n.  `epsilon` is the declared oscillation bound
    (membership requires K_max/K_min - 1 < epsilon); `scale` is the recorded
    normalization factor (1.0 unless `normalize` produced this instance)."""

    n: int
    epsilon: float
    terms: tuple[BumpTerm, ...]
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError("dimension n must be an integer >= 2")
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if not (self.scale > 0):
            raise ValueError("scale must be positive")
        terms = tuple(
            t if isinstance(t, BumpTerm) else BumpTerm(**t) for t in self.terms
        )
        object.__setattr__(self, "terms", terms)
        for t in terms:
            if len(t.center) != self.n + 1:
                raise ValueError(
                    f"bump center has {len(t.center)} components, expected {self.n + 1}"
                )

    @property
    def dim(self) -> int:
        return self.n + 1

    def centers(self) -> np.ndarray:
        return np.array([t.center for t in self.terms], dtype=float).reshape(
            -1, self.dim
        )

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "epsilon": self.epsilon,
            "terms": [t.to_dict() for t in self.terms],
        }
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KFunction":
        try:
            return cls(
                n=int(d["n"]),
                epsilon=float(d["epsilon"]),
                terms=tuple(BumpTerm(**t) for t in d["terms"]),
                scale=float(d.get("scale", 1.0)),
            )
        except KeyError as exc:
            raise ValueError(f"curvature candidate is missing field {exc}") from exc


@dataclass(frozen=True)
class CriticalPoint:
    """A nondegenerate critical point of K with its classification."""

    location: tuple[float, ...]
    value: float
    morse_index_K: int
    co_index: int
    laplacian: float
    laplacian_sign: int
    grad_norm: float
    hess_eigenvalues: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "location": list(self.location),
            "value": self.value,
            "morse_index_K": self.morse_index_K,
            "co_index": self.co_index,
            "laplacian": self.laplacian,
            "laplacian_sign": self.laplacian_sign,
            "grad_norm": self.grad_norm,
            "hess_eigenvalues": list(self.hess_eigenvalues),
        }


# -- evaluation --------------------------------------------------------------


def _bump_data(K: KFunction, x: np.ndarray):
    """Per-term exponentials and inner products; x may be (d,) or (batch, d)."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    C = K.centers()  # (T, d)
    t = X @ C.T  # (B, T)
    w = np.array([term.weight for term in K.terms])
    s2 = np.array([term.width**2 for term in K.terms])
    g = np.exp((t - 1.0) / s2)  # bump values
    return X, C, t, w, s2, g


def eval_K(K: KFunction, x: np.ndarray) -> float | np.ndarray:
    """K(x); accepts a single point (d,) or a batch (B, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if not K.terms:
        out = np.full(x.shape[:-1] or (1,), K.scale)
        return float(out[0]) if single else out
    X, C, t, w, s2, g = _bump_data(K, x)
    f = g @ w
    out = K.scale * (1.0 + K.epsilon * f)
    return float(out[0]) if single else out


def grad_K(K: KFunction, x: np.ndarray) -> np.ndarray:
    """Tangential gradient of K at unit x (single point)."""
    x = np.asarray(x, dtype=float)
    check_unit(x)
    if not K.terms:
        return np.zeros_like(x)
    X, C, t, w, s2, g = _bump_data(K, x)
    amb = ((w * g / s2)[0] @ C) * (K.scale * K.epsilon)  # ambient gradient
    return amb - np.dot(amb, x) * x


def hess_K(K: KFunction, x: np.ndarray) -> np.ndarray:
    """Covariant Hessian of K|_{S^n} at unit x, as a (d, d) matrix acting on the
    tangent space (rows/columns in ambient coordinates)."""
    x = np.asarray(x, dtype=float)
    check_unit(x)
    d = K.dim
    if not K.terms:
        return np.zeros((d, d))
    X, C, t, w, s2, g = _bump_data(K, x)
    coef = (w * g / s2**2)[0]  # second radial derivative weights
    amb_hess = (C.T * coef) @ C * (K.scale * K.epsilon)
    amb_grad = ((w * g / s2)[0] @ C) * (K.scale * K.epsilon)
    P = np.eye(d) - np.outer(x, x)
    return P @ amb_hess @ P - float(np.dot(x, amb_grad)) * P


def laplace_K(K: KFunction, x: np.ndarray) -> float:
    """Sphere Laplacian of K at unit x: trace of the covariant Hessian,
    computed directly as Lap f - Hess f(x, x) - n (x . grad f)."""
    x = np.asarray(x, dtype=float)
    check_unit(x)
    if not K.terms:
        return 0.0
    X, C, t, w, s2, g = _bump_data(K, x)
    t0, g0 = t[0], g[0]
    lap_amb = float(np.sum(w * g0 / s2**2))
    hess_xx = float(np.sum(w * g0 / s2**2 * t0**2))
    x_grad = float(np.sum(w * g0 / s2 * t0))
    return K.scale * K.epsilon * (lap_amb - hess_xx - K.n * x_grad)


# -- critical point search ----------------------------------------------------


def _newton_batch(K: KFunction, seeds: np.ndarray, iters: int = 80):
    """Vectorized damped Newton on the tangential gradient.  Returns the subset
    of seeds that converged, as points on the sphere."""
    d = K.dim
    X = seeds.copy()
    alive = np.ones(len(X), dtype=bool)
    # characteristic gradient magnitude, for the convergence threshold
    gscale = K.scale * K.epsilon * sum(abs(t.weight) / t.width**2 for t in K.terms)
    tol = max(GRAD_NORM_TOL * 0.1, 1e-15 * gscale)

    for _ in range(iters):
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        pts = X[idx]
        grads = np.empty((len(idx), d))
        steps = np.empty((len(idx), d))
        done = np.zeros(len(idx), dtype=bool)
        for j, x in enumerate(pts):
            g = grad_K(K, x)
            gn = float(np.linalg.norm(g))
            grads[j] = g
            if gn < tol:
                done[j] = True
                steps[j] = 0.0
                continue
            B = tangent_basis(x)
            H = B.T @ hess_K(K, x) @ B
            gt = B.T @ g
            try:
                delta = np.linalg.solve(H, -gt)
            except np.linalg.LinAlgError:
                delta = -gt  # gradient fallback near singular Hessians
            nrm = float(np.linalg.norm(delta))
            if nrm > 0.5:  # trust region: cap the geodesic step
                delta *= 0.5 / nrm
            steps[j] = B @ delta
        moved = pts + steps
        X[idx] = unit(moved)
        alive[idx[done]] = False

    # final filter: keep points whose gradient truly vanished
    keep = []
    for x in X:
        if float(np.linalg.norm(grad_K(K, x))) < GRAD_NORM_TOL:
            keep.append(x)
    return keep


def find_critical_points(K: KFunction, seeds: int = 512) -> list[CriticalPoint]:
    """Locate and classify critical points of K.

    Newton iteration on the tangential gradient runs from a quasi-uniform seed
    set augmented with the bump centers, their antipodes, and normalized
    center pair sums/differences (cheap insurance for ridges and cols).
    Results are deduplicated by geodesic distance and classified through the
    tangent-frame Hessian.  Completeness is best effort; see
    ``euler_characteristic_diagnostic`` for the sanity check.

    Degenerate candidates (f identically zero) raise H1ViolationError; points
    whose Hessian fails the nondegeneracy ratio or whose Laplacian is
    numerically zero are dropped with a warning, since they violate the
    standing nondegeneracy hypotheses.
    """
    if not K.terms or all(t.weight == 0.0 for t in K.terms) or K.epsilon == 0.0:
        raise H1ViolationError(
            "H1 violated: f vanishes identically, every point of the sphere "
            "is a degenerate critical point"
        )
    d = K.dim
    seed_pts = [quasi_uniform_points(K.n, seeds)]
    C = K.centers()
    seed_pts.append(C)
    seed_pts.append(-C)
    for i in range(len(C)):
        for j in range(i + 1, len(C)):
            for combo in (C[i] + C[j], C[i] - C[j]):
                nrm = np.linalg.norm(combo)
                if nrm > 1e-8:
                    seed_pts.append((combo / nrm).reshape(1, d))
    all_seeds = np.vstack(seed_pts)

    converged = _newton_batch(K, all_seeds)

    # dedup by geodesic distance
    distinct: list[np.ndarray] = []
    for x in converged:
        if all(geodesic_distance(x, y) > 1e-6 for y in distinct):
            distinct.append(x)

    points: list[CriticalPoint] = []
    dropped = 0
    for x in distinct:
        B = tangent_basis(x)
        H = B.T @ hess_K(K, x) @ B
        eigs = np.linalg.eigvalsh(H)
        emax = float(np.max(np.abs(eigs)))
        if emax == 0.0 or float(np.min(np.abs(eigs))) <= NONDEGENERACY_RATIO * emax:
            dropped += 1
            continue
        lap = laplace_K(K, x)
        if abs(lap) <= NONDEGENERACY_RATIO * emax:
            dropped += 1
            continue
        mi = int(np.sum(eigs < 0))
        points.append(
            CriticalPoint(
                location=tuple(float(v) for v in x),
                value=float(eval_K(K, x)),
                morse_index_K=mi,
                co_index=K.n - mi,
                laplacian=float(lap),
                laplacian_sign=1 if lap > 0 else -1,
                grad_norm=float(np.linalg.norm(grad_K(K, x))),
                hess_eigenvalues=tuple(float(v) for v in eigs),
            )
        )
    if dropped:
        warnings.warn(
            f"dropped {dropped} degenerate critical point(s); the candidate "
            "violates the nondegeneracy hypotheses there",
            stacklevel=2,
        )
    # deterministic order: by value descending, then lexicographic location
    points.sort(key=lambda p: (-p.value, tuple(round(v, 9) for v in p.location)))
    return points


def euler_characteristic_diagnostic(
    points: list[CriticalPoint], n: int
) -> tuple[int, int, bool]:
    """(alternating sum, expected Euler characteristic, match?).

    Sum of (-1)^{morse index} over a complete critical inventory must equal
    1 + (-1)^n.  A mismatch flags missed points, not an error.
    """
    total = sum((-1) ** p.morse_index_K for p in points)
    expected = 1 + (-1) ** n
    return total, expected, total == expected


def k_infinity_points(points: list[CriticalPoint]) -> list[CriticalPoint]:
    """Filter to the admissible concentration set (negative Laplacian), ordered
    with the global maximum first, then by descending value."""
    admissible = [p for p in points if p.laplacian_sign < 0]
    if not admissible:
        raise H1ViolationError(
            "no critical point with negative Laplacian found; a smooth "
            "nonconstant candidate must have one at its global maximum"
        )
    admissible.sort(key=lambda p: (-p.value, tuple(round(v, 9) for v in p.location)))
    return admissible


def extract_K_infinity(points: list[CriticalPoint], N: int = 1) -> ParityConfig:
    """Parity configuration of the admissible concentration set.

    The level cap N is carried into the configuration (defaults to 1; callers
    computing tables generally override it).  Warns when m < 2.
    """
    admissible = k_infinity_points(points)
    n = len(admissible[0].location) - 1
    parities = tuple(p.co_index % 2 for p in admissible)
    if parities and parities[0] != 0:
        warnings.warn(
            "highest-value admissible point is not a local maximum; the "
            "critical inventory is likely incomplete",
            stacklevel=2,
        )
    if len(parities) < 2:
        warnings.warn("m < 2: multiplicity hypotheses fail", H3Warning, stacklevel=2)
    return ParityConfig(n=n, parities=parities, N=N)


# -- admissibility window and normalization -----------------------------------


def admissible_epsilon(N: int, eta: float, n: int) -> float:
    """Oscillation threshold ((N+1)/N)^{2/(n-2)} ((1-eta)/(1+eta))^{2/(n-2)} - 1.

    A declared epsilon is admissible iff it is strictly below the returned
    value (the accompanying small-epsilon constant is non-constructive and not
    evaluated here).  Preconditions: N >= 1, n >= 3, 0 < eta < 1/(2N+1).
    """
    if not isinstance(N, int) or N < 1:
        raise ValueError("N must be an integer >= 1")
    if not isinstance(n, int) or n < 3:
        raise ValueError("n must be an integer >= 3")
    if not (0.0 < eta < 1.0 / (2 * N + 1)):
        raise ValueError(
            f"eta must satisfy 0 < eta < 1/(2N+1) = {1.0 / (2 * N + 1):.6g}, "
            f"got {eta!r}"
        )
    expo = 2.0 / (n - 2)
    return math.expm1(
        expo * (math.log((N + 1) / N) + math.log1p(-eta) - math.log1p(eta))
    )


def k_range(K: KFunction, samples: int = 1 << 16, polish: bool = True) -> tuple[float, float]:
    """(K_min, K_max) over a dense deterministic sample, optionally polished by
    Newton on the tangential gradient from the best grid points."""
    grid = quasi_uniform_points(K.n, samples)
    vals = eval_K(K, grid)
    kmin, kmax = float(np.min(vals)), float(np.max(vals))
    if polish and K.terms:
        for which, idx in (("min", int(np.argmin(vals))), ("max", int(np.argmax(vals)))):
            refined = _newton_batch(K, grid[idx : idx + 1])
            for x in refined:
                v = float(eval_K(K, x))
                kmin = min(kmin, v)
                kmax = max(kmax, v)
    return kmin, kmax


def check_positive(K: KFunction, samples: int = 1 << 16) -> None:
    """Raise if K is not positive on a dense sample."""
    kmin, _ = k_range(K, samples)
    if kmin <= 0:
        raise ValueError(f"K must be positive; sampled minimum is {kmin:.6g}")


def epsilon_membership(K: KFunction, samples: int = 1 << 16) -> tuple[float, bool]:
    """(K_max/K_min - 1, within declared epsilon?)."""
    kmin, kmax = k_range(K, samples)
    if kmin <= 0:
        raise ValueError(f"K must be positive; sampled minimum is {kmin:.6g}")
    ratio = kmax / kmin - 1.0
    return ratio, ratio < K.epsilon


def normalize(K: KFunction, samples: int = 1 << 16) -> KFunction:
    """Rescale so the minimum of K is 1; the applied factor is recorded in the
    returned instance's `scale` field (scale_new = scale_old / K_min)."""
    kmin, _ = k_range(K, samples)
    if kmin <= 0:
        raise ValueError(f"K must be positive to normalize; minimum is {kmin:.6g}")
    return KFunction(
        n=K.n, epsilon=K.epsilon, terms=K.terms, scale=K.scale / kmin
    )
