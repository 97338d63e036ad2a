"""Tests for squared-edge-length instances: Gram data, verdicts, embedding, volumes."""

import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from simplexcone import (
    NotRealizable,
    SquaredEdgeLengths,
    Verdict,
    edge_count,
    edge_index,
    edge_pairs,
    embed,
    face_squared_lengths,
    face_volume,
    gram_from_squared_lengths,
    random_simplex,
    regular_simplex,
    relabel,
    squared_lengths_from_gram,
    triangle_inequalities_hold,
    validate,
    volume,
)

UNIT_TRIANGLE = SquaredEdgeLengths(2, np.ones(3))
UNIT_TETRA = SquaredEdgeLengths(3, np.ones(6))


def right_corner(n):
    """Vertex 0 at the origin plus the n standard basis vectors."""
    s = np.empty(edge_count(n))
    for pos, (i, j) in enumerate(edge_pairs(n)):
        s[pos] = 1.0 if i == 0 else 2.0
    return SquaredEdgeLengths(n, s)


# ---------------------------------------------------------------------------
# edge indexing


def test_edge_count_values():
    assert [edge_count(n) for n in (1, 2, 3, 4, 8)] == [1, 3, 6, 10, 36]


def test_edge_pairs_lexicographic():
    assert edge_pairs(2) == [(0, 1), (0, 2), (1, 2)]
    assert edge_pairs(3) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_edge_index_round_trip():
    for n in range(1, 9):
        for pos, (i, j) in enumerate(edge_pairs(n)):
            assert edge_index(n, i, j) == pos


def test_edge_index_requires_ordered_pair():
    with pytest.raises(ValueError, match="out of range"):
        edge_index(3, 2, 1)
    with pytest.raises(ValueError, match="out of range"):
        edge_index(3, 1, 1)
    with pytest.raises(ValueError, match="out of range"):
        edge_index(3, 0, 4)


# ---------------------------------------------------------------------------
# instance validation


def test_instance_rejects_wrong_length():
    with pytest.raises(ValueError, match="needs 3 squared lengths"):
        SquaredEdgeLengths(2, np.array([1.0, 1.0]))


def test_instance_rejects_nonpositive_entries():
    with pytest.raises(ValueError, match="positive finite"):
        SquaredEdgeLengths(2, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError, match="positive finite"):
        SquaredEdgeLengths(2, np.array([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError, match="positive finite"):
        SquaredEdgeLengths(2, np.array([1.0, np.inf, 1.0]))


def test_instance_rejects_bad_dimension():
    with pytest.raises(ValueError, match="at least 1"):
        SquaredEdgeLengths(0, np.array([1.0]))


# ---------------------------------------------------------------------------
# Gram matrix


def test_gram_unit_triangle():
    assert_allclose(
        gram_from_squared_lengths(UNIT_TRIANGLE),
        np.array([[1.0, 0.5], [0.5, 1.0]]),
        atol=0.0,
    )


def test_gram_right_corner_is_identity():
    for n in range(2, 7):
        assert_allclose(gram_from_squared_lengths(right_corner(n)), np.eye(n), atol=0.0)


def test_gram_unit_tetra():
    g = gram_from_squared_lengths(UNIT_TETRA)
    assert_allclose(g, 0.5 * (np.eye(3) + np.ones((3, 3))), atol=0.0)


def test_gram_round_trip():
    rng = np.random.default_rng(2)
    for n in range(1, 8):
        ell = random_simplex(n, rng)
        back = squared_lengths_from_gram(gram_from_squared_lengths(ell))
        assert back.n == n
        assert_allclose(back.s, ell.s, rtol=1e-14, atol=1e-14)


def test_gram_is_linear_in_squared_lengths():
    rng = np.random.default_rng(4)
    for n in range(2, 6):
        s1 = rng.uniform(0.5, 2.0, edge_count(n))
        s2 = rng.uniform(0.5, 2.0, edge_count(n))
        a, b = 0.7, 2.3
        lhs = gram_from_squared_lengths(SquaredEdgeLengths(n, a * s1 + b * s2))
        rhs = a * gram_from_squared_lengths(
            SquaredEdgeLengths(n, s1)
        ) + b * gram_from_squared_lengths(SquaredEdgeLengths(n, s2))
        assert_allclose(lhs, rhs, atol=1e-13)


# ---------------------------------------------------------------------------
# realizability verdicts


def test_validate_unit_tetra():
    rep = validate(UNIT_TETRA)
    assert rep.verdict is Verdict.VALID
    assert rep.smallest_gram_eigenvalue == pytest.approx(0.5, abs=1e-12)
    assert rep.triangle_inequalities_hold


def test_validate_flags_triangle_pass_but_invalid():
    # equilateral base 1, apex edges (1/2 + 0.01)^2: satisfies every triangle
    # inequality yet fails the Gram test
    s = np.array([0.51**2] * 3 + [1.0] * 3)
    rep = validate(SquaredEdgeLengths(3, s))
    assert rep.verdict is Verdict.INVALID
    assert rep.triangle_inequalities_hold
    assert rep.smallest_gram_eigenvalue == pytest.approx(-0.2197, abs=1e-12)


def test_validate_collinear_triangle_is_degenerate():
    rep = validate(SquaredEdgeLengths(2, np.array([1.0, 9.0, 4.0])))
    assert rep.verdict is Verdict.DEGENERATE


def test_validate_scale_invariant_verdicts():
    cases = [
        (UNIT_TETRA, Verdict.VALID),
        (SquaredEdgeLengths(2, np.array([1.0, 9.0, 4.0])), Verdict.DEGENERATE),
        (SquaredEdgeLengths(2, np.array([1.0, 1.0, 9.0])), Verdict.INVALID),
    ]
    for ell, expected in cases:
        for t in (1e-6, 1.0, 1e6):
            rep = validate(SquaredEdgeLengths(ell.n, t * ell.s))
            assert rep.verdict is expected, (expected, t)


def test_validate_tolerance_scales_with_spectrum():
    rep = validate(UNIT_TETRA, pd_tol=1e-10)
    # largest Gram eigenvalue is 2, so the band is pd_tol * 2
    assert rep.tolerance == pytest.approx(2e-10, rel=1e-12)


def test_triangle_inequalities_examples():
    assert triangle_inequalities_hold(UNIT_TETRA)
    assert not triangle_inequalities_hold(SquaredEdgeLengths(2, np.array([1.0, 1.0, 9.0])))
    assert triangle_inequalities_hold(
        SquaredEdgeLengths(3, np.array([0.51**2] * 3 + [1.0] * 3))
    )
    # inequalities are strict, so the collinear triple 1 + 2 = 3 fails
    assert not triangle_inequalities_hold(
        SquaredEdgeLengths(2, np.array([1.0, 9.0, 4.0]))
    )


# ---------------------------------------------------------------------------
# embedding


def test_embed_right_corner_gives_standard_basis():
    emb = embed(right_corner(3))
    assert_allclose(emb.vertices, np.eye(3), atol=1e-14)


def test_embed_unit_triangle():
    emb = embed(UNIT_TRIANGLE)
    assert_allclose(emb.vertices[:, 0], [1.0, 0.0], atol=1e-14)
    assert_allclose(emb.vertices[:, 1], [0.5, math.sqrt(3.0) / 2.0], atol=1e-14)


def test_embed_shape_and_triangular_form():
    rng = np.random.default_rng(8)
    for n in range(1, 8):
        emb = embed(random_simplex(n, rng))
        assert emb.vertices.shape == (n, n)
        assert_allclose(np.tril(emb.vertices, -1), 0.0, atol=0.0)
        assert np.all(np.diag(emb.vertices) > 0.0)


def test_embed_round_trips_squared_distances():
    rng = np.random.default_rng(16)
    for n in range(1, 8):
        ell = random_simplex(n, rng)
        verts = np.hstack([np.zeros((n, 1)), embed(ell).vertices])
        for pos, (i, j) in enumerate(edge_pairs(n)):
            d2 = float(np.sum((verts[:, i] - verts[:, j]) ** 2))
            assert d2 == pytest.approx(ell.s[pos], rel=1e-9, abs=1e-9)


def test_embed_rejects_unrealizable():
    with pytest.raises(NotRealizable, match="degenerate"):
        embed(SquaredEdgeLengths(2, np.array([1.0, 9.0, 4.0])))
    with pytest.raises(NotRealizable):
        embed(SquaredEdgeLengths(2, np.array([1.0, 1.0, 9.0])))


# ---------------------------------------------------------------------------
# volumes


def test_volume_unit_triangle():
    assert volume(UNIT_TRIANGLE) == pytest.approx(math.sqrt(3.0) / 4.0, abs=1e-15)


def test_volume_unit_tetra():
    assert volume(UNIT_TETRA) == pytest.approx(math.sqrt(2.0) / 12.0, abs=1e-15)


def test_volume_right_corner_factorial():
    for n in range(2, 9):
        assert volume(right_corner(n)) == pytest.approx(
            1.0 / math.factorial(n), rel=1e-12
        )


def test_volume_degenerate_is_exact_zero():
    assert volume(SquaredEdgeLengths(2, np.array([1.0, 9.0, 4.0]))) == 0.0


def test_volume_invalid_raises():
    with pytest.raises(NotRealizable):
        volume(SquaredEdgeLengths(2, np.array([1.0, 1.0, 9.0])))


def test_volume_scaling_power():
    # scaling every squared length by t scales volume by t^(n/2)
    rng = np.random.default_rng(32)
    for n in range(2, 6):
        ell = random_simplex(n, rng)
        base = volume(ell)
        for t in (0.25, 4.0):
            scaled = volume(SquaredEdgeLengths(n, t * ell.s))
            assert scaled == pytest.approx(t ** (n / 2.0) * base, rel=1e-11)


# ---------------------------------------------------------------------------
# faces


def test_face_squared_lengths_restriction():
    t = SquaredEdgeLengths(3, np.arange(1.0, 7.0))
    f = face_squared_lengths(t, [0, 1, 2])
    assert f.n == 2
    assert_allclose(f.s, [1.0, 2.0, 4.0], atol=0.0)
    edge = face_squared_lengths(t, [1, 3])
    assert edge.n == 1
    assert_allclose(edge.s, [5.0], atol=0.0)


def test_face_squared_lengths_errors():
    t = SquaredEdgeLengths(3, np.ones(6))
    with pytest.raises(ValueError, match="repeats"):
        face_squared_lengths(t, [0, 0, 1])
    with pytest.raises(ValueError, match="out of range"):
        face_squared_lengths(t, [0, 5])
    with pytest.raises(ValueError, match="at least 2"):
        face_squared_lengths(t, [2])


def test_face_volume_edges_are_lengths():
    t = SquaredEdgeLengths(3, np.arange(1.0, 7.0))
    for pos, (i, j) in enumerate(edge_pairs(3)):
        assert face_volume(t, (i, j)) == pytest.approx(math.sqrt(t.s[pos]), rel=1e-14)


def test_face_volume_tetra_facets():
    for face in itertools.combinations(range(4), 3):
        assert face_volume(UNIT_TETRA, face) == pytest.approx(
            math.sqrt(3.0) / 4.0, abs=1e-14
        )


def test_face_volume_full_face_equals_volume():
    rng = np.random.default_rng(64)
    for n in range(2, 6):
        ell = random_simplex(n, rng)
        assert face_volume(ell, range(n + 1)) == pytest.approx(volume(ell), rel=1e-12)


# ---------------------------------------------------------------------------
# constructors and relabeling


def test_regular_simplex_entries_and_total():
    ell = regular_simplex(3, 6.0)
    assert_allclose(ell.s, np.ones(6), atol=0.0)
    for n in range(1, 8):
        ell = regular_simplex(n, 7.5)
        assert ell.s.sum() == pytest.approx(7.5, rel=1e-14)
        assert np.ptp(ell.s) == 0.0
        assert validate(ell).verdict is Verdict.VALID


def test_random_simplex_is_valid_and_deterministic():
    a = random_simplex(4, np.random.default_rng(99))
    b = random_simplex(4, np.random.default_rng(99))
    assert_allclose(a.s, b.s, atol=0.0)
    assert validate(a).verdict is Verdict.VALID


def test_random_simplex_honors_total():
    ell = random_simplex(3, np.random.default_rng(1), total=6.0)
    assert ell.s.sum() == pytest.approx(6.0, rel=1e-12)
    assert validate(ell).verdict is Verdict.VALID


def test_relabel_permutes_edges():
    t = SquaredEdgeLengths(3, np.arange(1.0, 7.0))
    r = relabel(t, [1, 0, 2, 3])
    # new edge (i, j) carries the old edge (perm[i], perm[j])
    assert_allclose(r.s, [1.0, 4.0, 5.0, 2.0, 3.0, 6.0], atol=0.0)


def test_relabel_round_trip_and_invariance():
    rng = np.random.default_rng(21)
    for n in range(2, 6):
        ell = random_simplex(n, rng)
        perm = rng.permutation(n + 1)
        inv = np.argsort(perm)
        back = relabel(relabel(ell, perm), inv)
        assert_allclose(back.s, ell.s, atol=0.0)
        assert volume(relabel(ell, perm)) == pytest.approx(volume(ell), rel=1e-11)
        assert validate(relabel(ell, perm)).verdict is Verdict.VALID


def test_relabel_rejects_non_permutation():
    t = SquaredEdgeLengths(3, np.ones(6))
    with pytest.raises(ValueError, match="permutation"):
        relabel(t, [0, 1, 2])
    with pytest.raises(ValueError, match="permutation"):
        relabel(t, [0, 1, 2, 2])
