"""Dual Gram data: unit outward facet normals and facet areas.

For a Valid n-simplex the (n+1)-by-(n+1) matrix of inner products of
unit outward facet normals is positive semidefinite with nullity
exactly one, and its kernel is spanned by the vector of facet
(n-1)-volumes -- the divergence theorem statement that the
area-weighted normals sum to zero.  Consequently the adjugate of that
matrix is a positive rank-one matrix whose diagonal recovers squared
facet-area ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_NULL_TOL,
    DEFAULT_PD_TOL,
    NullityNotOne,
    adjugate,
    check_symmetric,
    eigendecompose,
)
from .simplex import SimplexEmbedding, SquaredEdgeLengths, embed

__all__ = [
    "DualGramReport",
    "area_ratio_from_adjugate",
    "dual_gram",
    "null_direction",
    "outward_normals",
]


@dataclass(frozen=True)
class DualGramReport:
    """gstar[i][j] = <f_i, f_j> for unit outward normals, plus facet areas
    and the residuals of the two identities they must satisfy."""

    gstar: np.ndarray
    areas: np.ndarray
    null_residual: float
    divergence_residual: float


def outward_normals(emb: SimplexEmbedding) -> np.ndarray:
    """Unit outward normals, one row per facet (row i faces vertex i).

    The normal of facet i spans the orthogonal complement of the facet's
    direction space and is oriented away from vertex i: the sign test is
    ``<f_i, v_i - c_i> < 0`` against the facet centroid ``c_i``.
    """
    n = emb.n
    if n < 2:
        raise ValueError("facet normals need dimension >= 2")
    pts = emb.all_vertices()
    normals = np.empty((n + 1, n))
    for i in range(n + 1):
        others = [j for j in range(n + 1) if j != i]
        base = pts[:, others[0]]
        span = pts[:, others[1:]] - base[:, None]
        u, sing, _ = np.linalg.svd(span, full_matrices=True)
        if sing[-1] <= 1e-12 * max(1.0, sing[0]):
            raise ValueError(f"facet {i} is numerically degenerate")
        f = u[:, -1]
        centroid = pts[:, others].mean(axis=1)
        if float(f @ (pts[:, i] - centroid)) > 0.0:
            f = -f
        normals[i] = f / np.linalg.norm(f)
    return normals


def _facet_areas(emb: SimplexEmbedding, normals: np.ndarray) -> np.ndarray:
    """Facet (n-1)-volumes via the pyramid rule area_i = n V / h_i.

    The full volume is the product of the triangular embedding's diagonal
    over n!, and h_i is the distance from vertex i to the plane of the
    opposite facet, read off the unit normal.  This avoids factoring a
    separate Gram matrix per facet.
    """
    n = emb.n
    pts = emb.all_vertices()
    vol = float(np.prod(np.diag(emb.vertices))) / math.factorial(n)
    areas = np.empty(n + 1)
    for i in range(n + 1):
        on_facet = pts[:, (i + 1) % (n + 1)]
        h = abs(float(normals[i] @ (pts[:, i] - on_facet)))
        areas[i] = n * vol / h
    return areas


def dual_gram(ell: SquaredEdgeLengths, *, pd_tol: float = DEFAULT_PD_TOL) -> DualGramReport:
    """Dual Gram matrix, facet areas, and identity residuals for a Valid input."""
    emb = embed(ell, pd_tol=pd_tol)
    normals = outward_normals(emb)
    raw = normals @ normals.T
    gstar = (raw + raw.T) / 2.0
    areas = _facet_areas(emb, normals)
    area_norm = float(np.linalg.norm(areas))
    null_residual = float(np.linalg.norm(gstar @ areas)) / area_norm
    divergence_residual = float(np.linalg.norm(normals.T @ areas)) / area_norm
    return DualGramReport(
        gstar=gstar,
        areas=areas,
        null_residual=null_residual,
        divergence_residual=divergence_residual,
    )


def null_direction(gstar, *, null_tol: float = DEFAULT_NULL_TOL) -> np.ndarray:
    """Unit kernel vector of a dual Gram matrix, oriented positive.

    Requires nullity exactly one (within ``null_tol``); the returned
    vector is proportional to the facet-area vector.
    """
    a = check_symmetric(gstar)
    dec = eigendecompose(a)
    w = dec.eigenvalues
    scale = max(1.0, float(np.abs(w).max()))
    zero = np.flatnonzero(np.abs(w) <= null_tol * scale)
    if zero.size != 1:
        raise NullityNotOne(f"expected nullity 1, found {zero.size} zero eigenvalues")
    v = dec.basis[:, int(zero[0])].copy()
    if v[int(np.argmax(np.abs(v)))] < 0.0:
        v = -v
    return v / np.linalg.norm(v)


def area_ratio_from_adjugate(
    ell: SquaredEdgeLengths, i: int, j: int, *, pd_tol: float = DEFAULT_PD_TOL
) -> float:
    """(area_i / area_j)^2 read off the adjugate diagonal of the dual Gram.

    No volumes are computed: the rank-one structure of the adjugate of a
    nullity-1 matrix makes the diagonal proportional to the squared
    kernel vector, i.e. to squared facet areas.
    """
    if i == j:
        raise ValueError("facet indices must differ")
    if not (0 <= i <= ell.n and 0 <= j <= ell.n):
        raise ValueError(f"facet index out of range for dimension {ell.n}")
    # only the dual matrix is needed here; skip areas and residuals
    normals = outward_normals(embed(ell, pd_tol=pd_tol))
    raw = normals @ normals.T
    adj = adjugate((raw + raw.T) / 2.0)
    denom = float(adj[j, j])
    top = float(adj[i, i])
    # relative guard: the overall adjugate magnitude carries no meaning, only
    # the diagonal's internal proportions do
    scale = float(np.abs(np.diag(adj)).max())
    if scale == 0.0 or abs(denom) <= 1e-12 * scale:
        raise ValueError(f"cofactor {j} is numerically zero; ratio undefined")
    return top / denom
