"""Simplices parametrized by their squared edge lengths.

An n-simplex on vertices ``0..n`` is recorded as the vector of its
``n*(n+1)/2`` squared edge lengths in lexicographic edge order::

    (0,1), (0,2), ..., (0,n), (1,2), ..., (n-1,n)

Anchoring the simplex at vertex 0 and polarizing turns that vector into
an n-by-n Gram matrix *linearly*:

    G[i][i] = s(0,i)
    G[i][j] = (s(0,i) + s(0,j) - s(i,j)) / 2      (i != j, vertices 1..n)

The vector is realizable by a non-degenerate Euclidean simplex exactly
when G is positive definite, the volume is sqrt(det G) / n!, and every
face is governed by the same rule after re-anchoring at the face's
smallest vertex.  Because the map s -> G is linear, nonnegative
combinations of realizable vectors stay realizable: the realizable set
is an open convex cone, which is what the rest of the package exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .linalg import DEFAULT_PD_TOL, cholesky, eigendecompose

__all__ = [
    "NotRealizable",
    "SimplexEmbedding",
    "SquaredEdgeLengths",
    "ValidityReport",
    "Verdict",
    "edge_count",
    "edge_index",
    "edge_pairs",
    "embed",
    "face_squared_lengths",
    "face_volume",
    "gram_from_squared_lengths",
    "random_simplex",
    "regular_simplex",
    "relabel",
    "squared_lengths_from_gram",
    "triangle_inequalities_hold",
    "validate",
    "volume",
]


class NotRealizable(ValueError):
    """No non-degenerate Euclidean simplex has these squared edge lengths."""


class Verdict(str, Enum):
    VALID = "valid"
    DEGENERATE = "degenerate"
    INVALID = "invalid"


def edge_count(n: int) -> int:
    return n * (n + 1) // 2


def edge_pairs(n: int) -> list[tuple[int, int]]:
    """All vertex pairs (i, j), i < j, in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n + 1)]


def edge_index(n: int, i: int, j: int) -> int:
    """Position of edge (i, j) in the lexicographic ordering for dimension n."""
    if not (0 <= i < j <= n):
        raise ValueError(f"edge ({i}, {j}) out of range for dimension {n}")
    return i * n - i * (i - 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class SquaredEdgeLengths:
    """Squared edge lengths of an n-simplex, in lexicographic edge order."""

    n: int
    s: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        arr = np.array(self.s, dtype=float)
        if arr.ndim != 1 or arr.size != edge_count(self.n):
            raise ValueError(
                f"dimension {self.n} needs {edge_count(self.n)} squared lengths, "
                f"got {arr.size}"
            )
        if not np.isfinite(arr).all() or (arr <= 0.0).any():
            bad = int(np.flatnonzero(~(np.isfinite(arr) & (arr > 0.0)))[0])
            raise ValueError(
                f"squared length at position {bad} (edge {edge_pairs(self.n)[bad]}) "
                "must be a positive finite number"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "s", arr)

    def entry(self, i: int, j: int) -> float:
        """Squared length of edge (i, j) (order of i, j irrelevant)."""
        if i == j:
            raise ValueError("no edge joins a vertex to itself")
        if i > j:
            i, j = j, i
        return float(self.s[edge_index(self.n, i, j)])

    def total(self) -> float:
        return float(self.s.sum())


@dataclass(frozen=True)
class ValidityReport:
    verdict: Verdict
    smallest_gram_eigenvalue: float
    tolerance: float
    triangle_inequalities_hold: bool


@dataclass(frozen=True)
class SimplexEmbedding:
    """Concrete vertex coordinates: vertex 0 at the origin, vertex k in
    column k-1 of ``vertices`` (upper triangular, positive diagonal)."""

    n: int
    vertices: np.ndarray

    def vertex(self, i: int) -> np.ndarray:
        if not (0 <= i <= self.n):
            raise ValueError(f"vertex {i} out of range")
        if i == 0:
            return np.zeros(self.n)
        return self.vertices[:, i - 1].copy()

    def all_vertices(self) -> np.ndarray:
        """n-by-(n+1) array whose columns are vertices 0..n."""
        return np.column_stack([np.zeros(self.n), self.vertices])


# cached per-dimension index templates for vectorized Gram assembly
_GRAM_TEMPLATES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gram_templates(n: int) -> tuple[np.ndarray, np.ndarray]:
    cached = _GRAM_TEMPLATES.get(n)
    if cached is not None:
        return cached
    apex = np.array([edge_index(n, 0, k) for k in range(1, n + 1)])
    pair = np.zeros((n, n), dtype=int)
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            pair[i - 1, j - 1] = pair[j - 1, i - 1] = edge_index(n, i, j)
    _GRAM_TEMPLATES[n] = (apex, pair)
    return apex, pair


def gram_from_squared_lengths(ell: SquaredEdgeLengths) -> np.ndarray:
    """Gram matrix of the vertex-0-anchored difference vectors.

    Exactly symmetric by construction and linear in the input vector.
    """
    n = ell.n
    apex_idx, pair_idx = _gram_templates(n)
    apex = ell.s[apex_idx]
    g = 0.5 * (apex[:, None] + apex[None, :] - ell.s[pair_idx])
    np.fill_diagonal(g, apex)
    return g


def squared_lengths_from_gram(g) -> SquaredEdgeLengths:
    """Inverse of :func:`gram_from_squared_lengths` (polarization undone)."""
    a = np.asarray(g, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    s = np.empty(edge_count(n))
    for pos, (i, j) in enumerate(edge_pairs(n)):
        if i == 0:
            s[pos] = a[j - 1, j - 1]
        else:
            s[pos] = a[i - 1, i - 1] + a[j - 1, j - 1] - 2.0 * a[i - 1, j - 1]
    return SquaredEdgeLengths(n, s)


def triangle_inequalities_hold(ell: SquaredEdgeLengths) -> bool:
    """Strict triangle inequality on every vertex triple (plain lengths)."""
    lengths = {}
    for pos, (i, j) in enumerate(edge_pairs(ell.n)):
        lengths[(i, j)] = math.sqrt(ell.s[pos])
    for a, b, c in combinations(range(ell.n + 1), 3):
        ab = lengths[(a, b)]
        ac = lengths[(a, c)]
        bc = lengths[(b, c)]
        if not (ab < ac + bc and ac < ab + bc and bc < ab + ac):
            return False
    return True


def _classify(w: np.ndarray, pd_tol: float) -> tuple[Verdict, float]:
    scale = max(1.0, float(np.abs(w).max()))
    threshold = pd_tol * scale
    lam0 = float(w[0])
    if lam0 > threshold:
        return Verdict.VALID, threshold
    if lam0 >= -threshold:
        return Verdict.DEGENERATE, threshold
    return Verdict.INVALID, threshold


def validate(ell: SquaredEdgeLengths, *, pd_tol: float = DEFAULT_PD_TOL) -> ValidityReport:
    """Realizability verdict from the smallest Gram eigenvalue.

    Valid iff the smallest eigenvalue clears ``pd_tol * max(1, |largest|)``;
    Degenerate inside the band around zero; Invalid below it.  The
    triangle-inequality flag is informational: it is necessary but not
    sufficient for validity.
    """
    w = eigendecompose(gram_from_squared_lengths(ell)).eigenvalues
    verdict, threshold = _classify(w, pd_tol)
    return ValidityReport(
        verdict=verdict,
        smallest_gram_eigenvalue=float(w[0]),
        tolerance=threshold,
        triangle_inequalities_hold=triangle_inequalities_hold(ell),
    )


def embed(ell: SquaredEdgeLengths, *, pd_tol: float = DEFAULT_PD_TOL) -> SimplexEmbedding:
    """Canonical coordinates via the Cholesky factor of the Gram matrix.

    Raises :class:`NotRealizable` unless the verdict is Valid.
    """
    g = gram_from_squared_lengths(ell)
    w = eigendecompose(g).eigenvalues
    verdict, _ = _classify(w, pd_tol)
    if verdict is not Verdict.VALID:
        raise NotRealizable(f"cannot embed: verdict is {verdict.value}")
    low = cholesky(g, pd_tol=pd_tol)
    return SimplexEmbedding(n=ell.n, vertices=low.T.copy())


def volume(ell: SquaredEdgeLengths, *, pd_tol: float = DEFAULT_PD_TOL) -> float:
    """n-volume: sqrt(det G) / n! when Valid, exactly 0.0 when Degenerate.

    Invalid input raises :class:`NotRealizable` -- a noise-level
    determinant never leaks through as a tiny positive volume.
    """
    w = eigendecompose(gram_from_squared_lengths(ell)).eigenvalues
    verdict, _ = _classify(w, pd_tol)
    if verdict is Verdict.INVALID:
        raise NotRealizable("no Euclidean simplex has these squared edge lengths")
    if verdict is Verdict.DEGENERATE:
        return 0.0
    return math.sqrt(float(np.prod(w))) / math.factorial(ell.n)


def _normalize_face(face: Iterable[int], n: int, *, minimum: int = 2) -> tuple[int, ...]:
    verts = tuple(int(v) for v in face)
    if len(set(verts)) != len(verts):
        raise ValueError(f"face {verts} repeats a vertex")
    verts = tuple(sorted(verts))
    if len(verts) < minimum:
        raise ValueError(f"a face needs at least {minimum} vertices, got {verts}")
    if verts[0] < 0 or verts[-1] > n:
        raise ValueError(f"face {verts} out of range for dimension {n}")
    return verts


def face_squared_lengths(ell: SquaredEdgeLengths, face: Iterable[int]) -> SquaredEdgeLengths:
    """Restriction to a face, vertices relabeled 0..k in increasing order."""
    verts = _normalize_face(face, ell.n)
    k = len(verts) - 1
    s = np.empty(edge_count(k))
    for pos, (a, b) in enumerate(edge_pairs(k)):
        s[pos] = ell.entry(verts[a], verts[b])
    return SquaredEdgeLengths(k, s)


def face_volume(
    ell: SquaredEdgeLengths, face: Iterable[int], *, pd_tol: float = DEFAULT_PD_TOL
) -> float:
    """k-volume of the face spanned by the given k+1 vertices."""
    return volume(face_squared_lengths(ell, face), pd_tol=pd_tol)


def regular_simplex(n: int, total: float) -> SquaredEdgeLengths:
    """The regular point of the hyperplane {sum of squared lengths = total}."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if not (total > 0.0) or not math.isfinite(total):
        raise ValueError("total must be a positive finite number")
    value = 2.0 * total / (n * (n + 1))
    return SquaredEdgeLengths(n, np.full(edge_count(n), value))


def relabel(ell: SquaredEdgeLengths, perm: Sequence[int]) -> SquaredEdgeLengths:
    """Apply a permutation of the vertex labels 0..n."""
    n = ell.n
    p = tuple(int(x) for x in perm)
    if sorted(p) != list(range(n + 1)):
        raise ValueError(f"perm must be a permutation of 0..{n}")
    s = np.empty_like(ell.s)
    for pos, (i, j) in enumerate(edge_pairs(n)):
        s[pos] = ell.entry(p[i], p[j])
    return SquaredEdgeLengths(n, s)


def random_simplex(
    n: int,
    rng: np.random.Generator,
    *,
    total: float | None = None,
    pd_tol: float = DEFAULT_PD_TOL,
    max_tries: int = 200,
) -> SquaredEdgeLengths:
    """A random Valid instance, from random vertex coordinates.

    Vertices are drawn as standard normal columns (resampled while the
    configuration is badly conditioned), so the result is realizable by
    construction; an optional rescale puts it on the hyperplane
    {sum of entries = total}, which preserves validity.
    """
    for _ in range(max_tries):
        coords = rng.standard_normal((n, n))
        sing = np.linalg.svd(coords, compute_uv=False)
        if sing[-1] < 1e-3 * sing[0]:
            continue
        pts = np.column_stack([np.zeros(n), coords])
        s = np.empty(edge_count(n))
        for pos, (i, j) in enumerate(edge_pairs(n)):
            d = pts[:, i] - pts[:, j]
            s[pos] = float(d @ d)
        if total is not None:
            s *= total / s.sum()
        ell = SquaredEdgeLengths(n, s)
        if validate(ell, pd_tol=pd_tol).verdict is Verdict.VALID:
            return ell
    raise RuntimeError("failed to sample a Valid instance")
