"""Tests for face-volume objectives, their gradients and the constrained ascent."""

import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from simplexcone import (
    MaxIterations,
    NotRealizable,
    Objective,
    ObjectiveKind,
    SquaredEdgeLengths,
    edge_count,
    gradient_log_volume,
    maximize,
    objective_gradient,
    objective_value,
    random_simplex,
    regular_simplex,
    relabel,
    volume,
)

LOGPROD = ObjectiveKind.LOG_PRODUCT_FACES
SUMROOT = ObjectiveKind.SUM_ROOT_FACES

UNIT_TRIANGLE = SquaredEdgeLengths(2, np.ones(3))
UNIT_TETRA = SquaredEdgeLengths(3, np.ones(6))


# ---------------------------------------------------------------------------
# objective values


def test_objective_kind_values():
    assert ObjectiveKind("logprod") is LOGPROD
    assert ObjectiveKind("sumroot") is SUMROOT


def test_sumroot_edges_of_unit_triangle():
    # k=1 faces are edges; each contributes its length
    assert objective_value(UNIT_TRIANGLE, Objective(SUMROOT, 1)) == pytest.approx(3.0)


def test_logprod_top_face_is_log_volume():
    val = objective_value(UNIT_TRIANGLE, Objective(LOGPROD, 2))
    assert val == pytest.approx(math.log(math.sqrt(3.0) / 4.0), rel=1e-14)


def test_sumroot_facets_of_unit_tetra():
    # four facets of area sqrt(3)/4, each entering as a square root
    val = objective_value(UNIT_TETRA, Objective(SUMROOT, 2))
    assert val == pytest.approx(4.0 * (math.sqrt(3.0) / 4.0) ** 0.5, rel=1e-14)
    assert val == pytest.approx(2.6321480259049848, abs=1e-13)


def test_logprod_facets_of_unit_tetra():
    val = objective_value(UNIT_TETRA, Objective(LOGPROD, 2))
    assert val == pytest.approx(4.0 * math.log(math.sqrt(3.0) / 4.0), rel=1e-14)


def test_objectives_sum_over_all_faces():
    # direct cross-check against per-face volumes
    from simplexcone import face_volume

    ell = random_simplex(3, np.random.default_rng(3))
    for k in (1, 2, 3):
        faces = list(itertools.combinations(range(4), k + 1))
        expected_log = sum(math.log(face_volume(ell, f)) for f in faces)
        expected_root = sum(face_volume(ell, f) ** (1.0 / k) for f in faces)
        assert objective_value(ell, Objective(LOGPROD, k)) == pytest.approx(
            expected_log, rel=1e-12
        )
        assert objective_value(ell, Objective(SUMROOT, k)) == pytest.approx(
            expected_root, rel=1e-12
        )


def test_objective_value_rejects_bad_k():
    with pytest.raises(ValueError, match="at least 1"):
        objective_value(UNIT_TRIANGLE, Objective(SUMROOT, 0))
    with pytest.raises(ValueError, match="1..2"):
        objective_value(UNIT_TRIANGLE, Objective(SUMROOT, 3))


def test_objective_value_requires_valid_instance():
    bad = SquaredEdgeLengths(2, np.array([1.0, 1.0, 9.0]))
    with pytest.raises(NotRealizable):
        objective_value(bad, Objective(LOGPROD, 2))


def test_objective_value_invariant_under_relabeling():
    rng = np.random.default_rng(9)
    for n in (2, 3, 4):
        ell = random_simplex(n, rng)
        perm = rng.permutation(n + 1)
        for k in range(1, n + 1):
            for kind in (LOGPROD, SUMROOT):
                assert objective_value(
                    relabel(ell, perm), Objective(kind, k)
                ) == pytest.approx(objective_value(ell, Objective(kind, k)), rel=1e-11)


# ---------------------------------------------------------------------------
# gradients


def test_gradient_log_volume_regular_is_uniform():
    g = gradient_log_volume(regular_simplex(3, 6.0))
    assert np.ptp(g) < 1e-13


def test_gradient_log_volume_euler_identity():
    # volume is homogeneous of degree n/2 in the squared lengths
    rng = np.random.default_rng(13)
    for n in range(2, 6):
        ell = random_simplex(n, rng)
        g = gradient_log_volume(ell)
        assert float(ell.s @ g) == pytest.approx(n / 2.0, rel=1e-10)


def _moderate_instance(n, rng, bound=20.0):
    # thin simplices have huge log-volume curvature, which swamps finite
    # differences; keep the comparison on well-shaped draws
    while True:
        ell = random_simplex(n, rng, total=float(edge_count(n)))
        if np.abs(gradient_log_volume(ell)).max() < bound:
            return ell


def _central_diff4(f, h):
    return (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)


def test_gradient_log_volume_matches_finite_differences():
    rng = np.random.default_rng(17)
    h = 1e-4
    for n in (2, 3, 4):
        ell = _moderate_instance(n, rng)
        g = gradient_log_volume(ell)
        for e in range(edge_count(n)):
            bump = np.zeros(edge_count(n))
            bump[e] = 1.0

            def along(t):
                return math.log(volume(SquaredEdgeLengths(n, ell.s + t * bump)))

            assert g[e] == pytest.approx(_central_diff4(along, h), rel=1e-6, abs=1e-8)


def test_objective_gradient_top_logprod_equals_log_volume_gradient():
    rng = np.random.default_rng(19)
    for n in (2, 3, 4):
        ell = random_simplex(n, rng)
        assert_allclose(
            objective_gradient(ell, Objective(LOGPROD, n)),
            gradient_log_volume(ell),
            rtol=1e-12,
        )


def test_objective_gradient_euler_identities():
    # logprod k over C(n+1, k+1) faces is (k/2) * #faces + const under scaling;
    # sumroot is homogeneous of degree 1/2
    rng = np.random.default_rng(23)
    for n in range(2, 6):
        ell = random_simplex(n, rng)
        for k in range(1, n + 1):
            count = math.comb(n + 1, k + 1)
            g_log = objective_gradient(ell, Objective(LOGPROD, k))
            assert float(ell.s @ g_log) == pytest.approx(
                0.5 * k * count, rel=1e-9
            )
            g_root = objective_gradient(ell, Objective(SUMROOT, k))
            val = objective_value(ell, Objective(SUMROOT, k))
            assert float(ell.s @ g_root) == pytest.approx(0.5 * val, rel=1e-9)


def test_objective_gradient_matches_finite_differences():
    rng = np.random.default_rng(29)
    h = 1e-4
    trials = 0
    for n in range(2, 6):
        for k in range(1, n + 1):
            for kind in (LOGPROD, SUMROOT):
                ell = _moderate_instance(n, rng)
                obj = Objective(kind, k)
                g = objective_gradient(ell, obj)
                edges = edge_count(n)
                for e in rng.choice(edges, size=min(3, edges), replace=False):
                    bump = np.zeros(edges)
                    bump[e] = 1.0

                    def along(t):
                        return objective_value(
                            SquaredEdgeLengths(n, ell.s + t * bump), obj
                        )

                    fd = _central_diff4(along, h)
                    assert g[e] == pytest.approx(fd, rel=1e-6, abs=1e-8)
                    trials += 1
    assert trials >= 50


# ---------------------------------------------------------------------------
# constrained ascent


def test_maximize_regular_start_converges_immediately():
    trace = maximize(3, 6.0, Objective(LOGPROD, 2), start=regular_simplex(3, 6.0))
    assert trace.converged
    assert len(trace.iterates) == 1
    assert trace.regularity_deviation == 0.0


def test_maximize_contract_example_triangle():
    trace = maximize(
        2, 3.0, Objective(LOGPROD, 2), start=np.array([1.5, 0.9, 0.6])
    )
    assert trace.converged
    assert_allclose(trace.final.s, np.ones(3), atol=1e-6)
    assert trace.regularity_deviation < 1e-6


def test_maximize_contract_example_tetra_sumroot():
    rng = np.random.default_rng(41)
    start = random_simplex(3, rng, total=6.0)
    trace = maximize(3, 6.0, Objective(SUMROOT, 2), start=start)
    assert trace.converged
    assert np.max(np.abs(trace.final.s - 1.0)) < 1e-6


def test_maximize_objective_is_monotone():
    trace = maximize(
        3, 6.0, Objective(SUMROOT, 2), start=np.array([1.5, 0.9, 0.6, 1.0, 1.0, 1.0])
    )
    values = [value for _, value, _ in trace.iterates]
    diffs = np.diff(values)
    scale = max(1.0, max(abs(v) for v in values))
    assert diffs.min() >= -1e-12 * scale


def test_maximize_keeps_constraint():
    trace = maximize(
        4, 10.0, Objective(LOGPROD, 1), start=random_simplex(4, np.random.default_rng(5), total=10.0)
    )
    for point, _, _ in trace.iterates:
        assert float(point.sum()) == pytest.approx(10.0, abs=1e-12 * 10.0)
    assert trace.converged


def test_maximize_rejects_bad_starts():
    with pytest.raises(ValueError, match="positive orthant"):
        maximize(2, 3.0, Objective(LOGPROD, 2), start=np.array([1.0, 1.0, 9.0]))
    with pytest.raises(ValueError, match="Valid instance"):
        maximize(2, 11.0, Objective(LOGPROD, 2), start=np.array([1.0, 1.0, 9.0]))
    with pytest.raises(ValueError, match="positive finite"):
        maximize(2, -1.0, Objective(LOGPROD, 2))
    with pytest.raises(ValueError, match="1..2"):
        maximize(2, 3.0, Objective(LOGPROD, 5))


def test_maximize_iteration_cap_carries_trace():
    with pytest.raises(MaxIterations) as info:
        maximize(
            3,
            6.0,
            Objective(SUMROOT, 2),
            start=np.array([1.5, 0.9, 0.6, 1.0, 1.0, 1.0]),
            max_iter=1,
        )
    trace = info.value.trace
    assert not trace.converged
    assert len(trace.iterates) >= 1


def test_maximize_random_starts_reach_regular_point():
    rng = np.random.default_rng(77)
    for n in (2, 3):
        total = 2.0 * edge_count(n)
        for k in range(1, n + 1):
            for kind in (LOGPROD, SUMROOT):
                start = random_simplex(n, rng, total=total)
                trace = maximize(n, total, Objective(kind, k), start=start)
                assert trace.converged, (n, k, kind)
                assert trace.regularity_deviation < 1e-6, (n, k, kind)


def test_regular_point_dominates_random_feasible_points():
    rng = np.random.default_rng(83)
    n, total = 3, 6.0
    obj = Objective(SUMROOT, 2)
    best = objective_value(regular_simplex(n, total), obj)
    for _ in range(200):
        ell = random_simplex(n, rng, total=total)
        assert objective_value(ell, obj) <= best + 1e-12
