"""Maximizing face-volume functionals on a slice of the squared-length cone.

Among all simplices with a fixed total of squared edge lengths, the
regular point (every squared length equal) maximizes both the product
of k-face volumes and the sum of k-th roots of k-face volumes, for
every k.  This module exposes the log-volume gradient in closed form
and a projected gradient ascent on the hyperplane
``{sum of squared lengths = total}`` that lets the claim be checked
numerically from random starting points.

The gradient is cheap because the Gram matrix is linear in the squared
lengths: for the anchored Gram matrix G of a face,

    d(log vol)/ds(0,k) = (1/2) * (row sum k of G^-1)
    d(log vol)/ds(i,j) = -(1/2) * (G^-1)[i][j]        (i, j >= 1)

with vertex labels local to the face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .linalg import DEFAULT_PD_TOL, _cholesky_factor, eigendecompose
from .simplex import (
    NotRealizable,
    SquaredEdgeLengths,
    Verdict,
    _classify,
    edge_count,
    edge_index,
    gram_from_squared_lengths,
    regular_simplex,
    validate,
)

__all__ = [
    "MaxIterations",
    "Objective",
    "ObjectiveKind",
    "OptimizationTrace",
    "StepIntoInvalidRegion",
    "gradient_log_volume",
    "maximize",
    "objective_gradient",
    "objective_value",
]

_EPS = float(np.finfo(float).eps)


class MaxIterations(RuntimeError):
    """Iteration budget exhausted before the gradient tolerance was met."""

    def __init__(self, message: str, trace: "OptimizationTrace"):
        super().__init__(message)
        self.trace = trace


class StepIntoInvalidRegion(RuntimeError):
    """Line search exhausted: no acceptable step stayed inside the Valid cone."""

    def __init__(self, message: str, trace: "OptimizationTrace"):
        super().__init__(message)
        self.trace = trace


class ObjectiveKind(str, Enum):
    LOG_PRODUCT_FACES = "logprod"
    SUM_ROOT_FACES = "sumroot"


@dataclass(frozen=True)
class Objective:
    """Which functional of the k-dimensional faces to maximize."""

    kind: ObjectiveKind
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("face dimension k must be at least 1")


@dataclass(frozen=True)
class OptimizationTrace:
    """Accepted iterates as (point, objective, projected gradient norm).

    ``regularity_deviation`` is ``max_e |s_e - mean| / mean`` at the
    final point: zero exactly at the regular simplex.
    """

    iterates: list[tuple[np.ndarray, float, float]]
    final: SquaredEdgeLengths
    regularity_deviation: float
    converged: bool


class _FaceWorkspace:
    """Precomputed index maps for batched face-Gram assembly and scatter."""

    def __init__(self, n: int, k: int):
        faces = list(combinations(range(n + 1), k + 1))
        m = len(faces)
        apex = np.empty((m, k), dtype=int)
        pair = np.zeros((m, k, k), dtype=int)
        for fi, verts in enumerate(faces):
            u0 = verts[0]
            rest = verts[1:]
            for a in range(k):
                apex[fi, a] = edge_index(n, u0, rest[a])
            for a in range(k):
                for b in range(a + 1, k):
                    e = edge_index(n, rest[a], rest[b])
                    pair[fi, a, b] = e
                    pair[fi, b, a] = e
        self.n = n
        self.k = k
        self.faces = faces
        self.apex = apex
        self.pair = pair
        self.triu = np.triu_indices(k, 1)
        self.log_kfact = math.log(math.factorial(k))
        self.kfact_root = math.factorial(k) ** (1.0 / k)

    def grams(self, s: np.ndarray) -> np.ndarray:
        ap = s[self.apex]
        g = 0.5 * (ap[:, :, None] + ap[:, None, :] - s[self.pair])
        idx = np.arange(self.k)
        g[:, idx, idx] = ap
        return g


_WORKSPACES: dict[tuple[int, int], _FaceWorkspace] = {}


def _workspace(n: int, k: int) -> _FaceWorkspace:
    key = (n, k)
    ws = _WORKSPACES.get(key)
    if ws is None:
        ws = _FaceWorkspace(n, k)
        _WORKSPACES[key] = ws
    return ws


def _raw_value(ws: _FaceWorkspace, kind: ObjectiveKind, s: np.ndarray) -> float | None:
    """Objective value from the raw vector, or None if any face collapses."""
    dets = np.linalg.det(ws.grams(s))
    if not np.isfinite(dets).all() or (dets <= 0.0).any():
        return None
    if kind is ObjectiveKind.LOG_PRODUCT_FACES:
        return float(0.5 * np.log(dets).sum() - len(ws.faces) * ws.log_kfact)
    roots = dets ** (0.5 / ws.k) / ws.kfact_root
    return float(roots.sum())


def _raw_gradient(ws: _FaceWorkspace, kind: ObjectiveKind, s: np.ndarray) -> np.ndarray:
    grams = ws.grams(s)
    inv = np.linalg.inv(grams)
    if kind is ObjectiveKind.LOG_PRODUCT_FACES:
        weights = np.ones(len(ws.faces))
    else:
        dets = np.linalg.det(grams)
        weights = (dets ** (0.5 / ws.k) / ws.kfact_root) / ws.k
    grad = np.zeros(edge_count(ws.n))
    apex_contrib = 0.5 * inv.sum(axis=2) * weights[:, None]
    np.add.at(grad, ws.apex.ravel(), apex_contrib.ravel())
    iu, ju = ws.triu
    if iu.size:
        pair_contrib = -0.5 * inv[:, iu, ju] * weights[:, None]
        np.add.at(grad, ws.pair[:, iu, ju].ravel(), pair_contrib.ravel())
    return grad


def _require_valid(ell: SquaredEdgeLengths, pd_tol: float) -> None:
    report = validate(ell, pd_tol=pd_tol)
    if report.verdict is not Verdict.VALID:
        raise NotRealizable(f"operation needs a Valid instance, got {report.verdict.value}")


def objective_value(
    ell: SquaredEdgeLengths, objective: Objective, *, pd_tol: float = DEFAULT_PD_TOL
) -> float:
    """Sum of log k-face volumes, or sum of k-th roots of k-face volumes."""
    if not (1 <= objective.k <= ell.n):
        raise ValueError(f"k must lie in 1..{ell.n}")
    _require_valid(ell, pd_tol)
    value = _raw_value(_workspace(ell.n, objective.k), objective.kind, ell.s)
    if value is None:
        raise NotRealizable("a face volume vanished")
    return value


def objective_gradient(
    ell: SquaredEdgeLengths, objective: Objective, *, pd_tol: float = DEFAULT_PD_TOL
) -> np.ndarray:
    """Gradient of :func:`objective_value` with respect to every squared length."""
    if not (1 <= objective.k <= ell.n):
        raise ValueError(f"k must lie in 1..{ell.n}")
    _require_valid(ell, pd_tol)
    return _raw_gradient(_workspace(ell.n, objective.k), objective.kind, ell.s)


def gradient_log_volume(
    ell: SquaredEdgeLengths, *, pd_tol: float = DEFAULT_PD_TOL
) -> np.ndarray:
    """Gradient of log n-volume; satisfies the scaling identity
    ``sum_e s_e * grad_e = n / 2``."""
    _require_valid(ell, pd_tol)
    return _raw_gradient(
        _workspace(ell.n, ell.n), ObjectiveKind.LOG_PRODUCT_FACES, ell.s
    )


def _fast_valid(n: int, s: np.ndarray) -> bool:
    """Cheap screen: positive entries and a positive-pivot Gram factorization."""
    if (s <= 0.0).any():
        return False
    ell_gram = _gram_of_raw(n, s)
    _, ok, _ = _cholesky_factor(ell_gram)
    return ok


def _gram_of_raw(n: int, s: np.ndarray) -> np.ndarray:
    return gram_from_squared_lengths(SquaredEdgeLengths(n, s))


def _smallest_eigenvalue_gradient(n: int, q: np.ndarray) -> np.ndarray:
    """Gradient of the smallest Gram eigenvalue with respect to the
    squared lengths, given its unit eigenvector ``q``.

    The Gram matrix is linear in the squared lengths, so the derivative
    along edge e is ``q' * (dG/ds_e) * q``, which collapses to
    ``q[k-1] * sum(q)`` for an apex edge (0,k) and ``-q[i-1]*q[j-1]``
    for a pair edge (i,j).
    """
    t = float(q.sum())
    iu, ju = np.triu_indices(n, 1)
    return np.concatenate((q * t, -q[iu] * q[ju]))


def maximize(
    n: int,
    total: float,
    objective: Objective,
    *,
    start: SquaredEdgeLengths | np.ndarray | None = None,
    gtol_factor: float = 1e-10,
    max_iter: int = 10000,
    initial_step: float | None = None,
    armijo: float = 1e-4,
    pd_tol: float = DEFAULT_PD_TOL,
) -> OptimizationTrace:
    """Projected gradient ascent on the hyperplane {sum of entries = total}.

    Backtracking (halving) line search with Armijo constant ``armijo``;
    candidates that leave the Valid cone are rejected outright.
    Converged when the projected gradient norm drops below
    ``gtol_factor * (1 + |objective|)``.  Raises :class:`MaxIterations`
    or :class:`StepIntoInvalidRegion` (each carrying the partial trace)
    instead of returning an unconverged result.

    Two refinements keep the rejection scheme honest without clamping.
    The Gram matrix is linear in the squared lengths, so the feasible
    slice is convex and its smallest eigenvalue is concave along it;
    the segment from any Valid start to the regular point therefore
    never dips below the smaller of the two endpoint eigenvalues.  The
    search exploits that: candidates whose smallest Gram eigenvalue
    falls under half that bound are rejected, and when the iterate is
    pinched near the bound with the gradient pushing outward, the
    direction is replaced by its component tangent to the eigenvalue
    level set (plus a small inward nudge), which is still an ascent
    direction because both objectives are concave with an interior
    maximizer.  Separately, once the predicted Armijo gain falls below
    float resolution of the objective, acceptance switches from the
    value test to a strict decrease of the projected gradient norm,
    which keeps contraction going where values are constant in floats.

    The Armijo test carries a rounding allowance of a few machine
    epsilons (plus the rounding of the hyperplane re-projection), so
    recorded objective values are nondecreasing only up to that
    allowance.
    """
    if not (1 <= objective.k <= n):
        raise ValueError(f"k must lie in 1..{n}")
    if not (total > 0.0) or not math.isfinite(total):
        raise ValueError("total must be a positive finite number")
    edges = edge_count(n)
    if start is None:
        x = regular_simplex(n, total).s.copy()
    elif isinstance(start, SquaredEdgeLengths):
        if start.n != n:
            raise ValueError("start has the wrong dimension")
        x = start.s.copy()
    else:
        x = np.array(start, dtype=float)
        if x.shape != (edges,):
            raise ValueError(f"start must have {edges} entries")
    x += (total - x.sum()) / edges  # affine projection onto the hyperplane
    if (x <= 0.0).any():
        raise ValueError("start projects outside the positive orthant")
    start_ell = SquaredEdgeLengths(n, x)
    if validate(start_ell, pd_tol=pd_tol).verdict is not Verdict.VALID:
        raise ValueError("start must be a Valid instance")

    ws = _workspace(n, objective.k)
    step = 0.1 * total / edges if initial_step is None else float(initial_step)
    if not (step > 0.0):
        raise ValueError("initial_step must be positive")

    eig = eigendecompose(_gram_of_raw(n, x))
    # the segment to the regular point keeps the smallest eigenvalue
    # above min(start, regular) by concavity, so half of that is a safe
    # hard floor for the whole search
    lam_regular = total / (n * (n + 1))
    lam_floor = 0.5 * min(float(eig.eigenvalues[0]), lam_regular)

    iterates: list[tuple[np.ndarray, float, float]] = []
    converged = False
    for _ in range(max_iter):
        f = _raw_value(ws, objective.kind, x)
        if f is None:
            raise NotRealizable("iterate left the realizable cone")  # unreachable
        grad = _raw_gradient(ws, objective.kind, x)
        pg = grad - grad.mean()
        pg_norm = float(np.linalg.norm(pg))
        frozen = x.copy()
        frozen.setflags(write=False)
        iterates.append((frozen, f, pg_norm))
        gtol = gtol_factor * (1.0 + abs(f))
        if pg_norm < gtol:
            converged = True
            break

        lam0 = float(eig.eigenvalues[0])
        threshold = pd_tol * max(1.0, abs(eig.eigenvalues[-1]))
        direction = pg
        if lam0 < max(2.0 * lam_floor, 64.0 * threshold):
            # pinched against the cone boundary: if the gradient pushes
            # outward, slide along the eigenvalue level set, nudged
            # inward when the eigenvalue has dipped below the band
            normal = _smallest_eigenvalue_gradient(n, eig.basis[:, 0])
            normal -= normal.mean()
            outward = float(pg @ normal)
            normal_sq = float(normal @ normal)
            if outward < 0.0 and normal_sq > 0.0:
                tangent = pg - (outward / normal_sq) * normal
                tangent_sq = float(tangent @ tangent)
                if math.sqrt(tangent_sq) <= 1e-10 * pg_norm:
                    trace = _build_trace(n, x, iterates, converged=False)
                    raise StepIntoInvalidRegion(
                        "stalled on the realizability boundary with no "
                        "tangential ascent direction",
                        trace,
                    )
                gap = max(0.0, 1.5 * lam_floor - lam0)
                # cap the nudge so the slope keeps at least half the
                # tangential value (outward < 0 would otherwise flip it)
                nudge = min(gap / normal_sq, 0.5 * tangent_sq / -outward)
                direction = tangent + nudge * normal
        slope = float(pg @ direction)
        allowance = 4.0 * _EPS * (1.0 + abs(f)) + 8.0 * _EPS * (total / edges) * float(
            np.abs(grad).sum()
        )
        # the movement floor lets a step that collapsed in an earlier
        # pinch recover; halvings may still go far below it
        floor = 1e-8 * (1.0 + float(np.abs(x).max())) / float(np.linalg.norm(direction))
        alpha = max(step, floor)
        accepted = False
        first_try = True
        blocked_by_validity = False
        for _halving in range(60):
            cand = x + alpha * direction
            cand += (total - cand.sum()) / edges
            if (cand <= 0.0).any() or not _fast_valid(n, cand):
                blocked_by_validity = True
                alpha *= 0.5
                first_try = False
                continue
            f_cand = _raw_value(ws, objective.kind, cand)
            if f_cand is None:
                blocked_by_validity = True
                alpha *= 0.5
                first_try = False
                continue
            predicted = armijo * alpha * slope
            if predicted > 2.0 * allowance:
                if f_cand < f + predicted - allowance:
                    alpha *= 0.5
                    first_try = False
                    continue
            else:
                # predicted gain below float resolution: require strict
                # contraction of the projected gradient norm instead
                if f_cand < f - allowance:
                    alpha *= 0.5
                    first_try = False
                    continue
                grad_cand = _raw_gradient(ws, objective.kind, cand)
                pg_cand = grad_cand - grad_cand.mean()
                if float(np.linalg.norm(pg_cand)) >= pg_norm:
                    alpha *= 0.5
                    first_try = False
                    continue
            eig_cand = eigendecompose(_gram_of_raw(n, cand))
            verdict, _ = _classify(eig_cand.eigenvalues, pd_tol)
            if verdict is not Verdict.VALID or eig_cand.eigenvalues[0] < lam_floor:
                blocked_by_validity = True
                alpha *= 0.5
                first_try = False
                continue
            x = cand
            eig = eig_cand
            accepted = True
            break
        if not accepted:
            trace = _build_trace(n, x, iterates, converged=False)
            reason = (
                "every candidate step left the Valid cone"
                if blocked_by_validity
                else "no ascent step of any size was acceptable"
            )
            raise StepIntoInvalidRegion(f"line search exhausted: {reason}", trace)
        step = alpha * 2.0 if first_try else alpha
    if not converged:
        trace = _build_trace(n, x, iterates, converged=False)
        raise MaxIterations(f"no convergence within {max_iter} iterations", trace)
    return _build_trace(n, x, iterates, converged=True)


def _build_trace(
    n: int, x: np.ndarray, iterates: list, *, converged: bool
) -> OptimizationTrace:
    mean = float(x.mean())
    deviation = float(np.abs(x - mean).max()) / mean
    return OptimizationTrace(
        iterates=iterates,
        final=SquaredEdgeLengths(n, x),
        regularity_deviation=deviation,
        converged=converged,
    )
