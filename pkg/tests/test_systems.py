"""System model: norms, cones, effects, symmetries, serialization."""

import itertools
import json

import numpy as np
import pytest

from gptsteer import systems
from gptsteer.errors import (
    GuardExceeded,
    InvalidInput,
    NotInterior,
    SystemMismatch,
)
from gptsteer.geometry import facets_of_cone, lex_sorted, vertices_of_polytope

RT2 = np.sqrt(2.0)


def square():
    return systems.hypercube(2)


# ---------------------------------------------------------------------------
# construction and validation


def test_simplex_vertices_are_standard_basis():
    s = systems.simplex(3)
    assert np.array_equal(s.vertices, np.eye(3))
    assert np.array_equal(s.unit, np.ones(3))


def test_square_unit_inferred():
    s = systems.polytopic(np.array(
        [[1.0, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]]))
    assert np.allclose(s.unit, [1, 0, 0], atol=1e-9)


def test_rejects_non_extreme_vertex():
    pts = np.array([[1.0, 1], [1, -1], [1, 0]])
    with pytest.raises(InvalidInput, match="extreme"):
        systems.polytopic(pts)


def test_rejects_rank_deficient_span():
    pts = np.array([[1.0, 1, 0], [1, -1, 0]])
    with pytest.raises(InvalidInput, match="span"):
        systems.polytopic(pts)


def test_rejects_unit_not_one_on_vertices():
    pts = np.array([[1.0, 1], [2, -1]])
    with pytest.raises(InvalidInput, match="unit"):
        systems.polytopic(pts, unit=np.array([1.0, 0]))


def test_hull_factory_prunes_interior_and_duplicates():
    pts = np.array([
        [1.0, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1],
        [1, 0, 0], [1, 1, 1],
    ])
    s = systems.polytopic_hull(pts)
    assert s.n_vertices == 4
    assert s == square()


def test_dimension_guard(monkeypatch):
    monkeypatch.setenv("GPTSTEER_GUARDS", "dim=3")
    with pytest.raises(GuardExceeded):
        systems.simplex(5)


def test_ball_requires_canonical_unit():
    with pytest.raises(InvalidInput):
        systems.GptSystem(
            kind=systems.CENTRALLY_SYMMETRIC, dim=3,
            unit=np.array([1.0, 1.0, 0.0]), ball_norm="l2")


def test_system_equality_is_content_based():
    assert systems.hypercube(2) == systems.hypercube(2)
    assert systems.hypercube(2) != systems.simplex(3)
    assert systems.ball(2, "l2") != systems.ball(2, "linf")


# ---------------------------------------------------------------------------
# cone facets of the square, frozen from the enumeration kernel

def test_square_cone_facets_frozen():
    got = square().cone_facets
    want = lex_sorted(np.array([
        [1, -1, 0], [1, 1, 0], [1, 0, -1], [1, 0, 1]]) / RT2)
    assert np.allclose(got, want, atol=1e-9)


def test_facets_and_vertices_are_mutual_descriptions():
    rng = np.random.default_rng(5)
    for _ in range(20):
        pts = np.concatenate(
            [np.ones((6, 1)), rng.uniform(-1, 1, size=(6, 2))], axis=1)
        try:
            s = systems.polytopic_hull(pts)
        except InvalidInput:
            continue
        # every vertex saturates >= d facets and violates none
        prods = s.cone_facets @ s.vertices.T
        assert prods.min() >= -1e-9
        tight = (np.abs(prods) <= 1e-7).sum(axis=0)
        assert tight.min() >= s.dim - 1


# ---------------------------------------------------------------------------
# cone membership


def test_cone_member_accepts_center_with_certificate():
    s = square()
    res = systems.cone_member(s, s.vector([1.0, 0, 0]))
    assert res.member
    c = res.coefficients
    assert c.min() >= -1e-12
    assert np.allclose(s.vertices.T @ c, [1, 0, 0], atol=1e-9)


def test_cone_member_rejects_with_separator():
    s = square()
    v = s.vector([0.0, 1.0, 0.0])
    res = systems.cone_member(s, v)
    assert not res.member
    h = res.separator
    assert (s.vertices @ h).min() >= -1e-9
    assert h @ v.coords < -1e-9


def test_cone_member_zero_vector():
    s = square()
    assert systems.cone_member(s, s.vector([0.0, 0, 0])).member


def test_cone_member_ball_analytic():
    s = systems.ball(2, "l2")
    assert systems.cone_member(s, s.vector([1.0, 0.6, 0.8])).member
    res = systems.cone_member(s, s.vector([1.0, 0.7, 0.8]))
    assert not res.member
    # separator is an exposed face functional
    h = res.separator
    assert h @ np.array([1.0, 0.7, 0.8]) < -1e-9


def test_cone_certificates_on_random_points():
    rng = np.random.default_rng(17)
    s = square()
    seen = [0, 0]
    for _ in range(60):
        v = s.vector(rng.uniform(-1.5, 1.5, size=3))
        res = systems.cone_member(s, v)
        if res.member:
            seen[0] += 1
            assert np.allclose(
                s.vertices.T @ res.coefficients, v.coords, atol=1e-8)
            assert res.coefficients.min() >= -1e-10
        else:
            seen[1] += 1
            assert (s.vertices @ res.separator).min() >= -1e-8
            assert res.separator @ v.coords < 0
    assert min(seen) > 5


# ---------------------------------------------------------------------------
# base norm


def test_base_norm_simplex_frozen():
    s = systems.simplex(3)
    assert systems.base_norm(s, s.vector([0.7, -0.3, 0.0])) == pytest.approx(
        1.0, abs=1e-9)


def test_base_norm_is_one_on_states():
    rng = np.random.default_rng(3)
    for s in (square(), systems.simplex(3), systems.cross_polytope(3)):
        for _ in range(10):
            w = rng.dirichlet(np.ones(s.n_vertices))
            v = s.vector(s.vertices.T @ w)
            assert systems.base_norm(s, v) == pytest.approx(1.0, abs=1e-8)


def test_base_norm_centrally_symmetric_formula():
    s = systems.ball(2, "linf")
    assert systems.base_norm(
        s, s.vector([0.4, 0.9, 0.1])) == pytest.approx(0.9, abs=1e-12)
    assert systems.base_norm(
        s, s.vector([1.4, 0.9, 0.1])) == pytest.approx(1.4, abs=1e-12)


def test_base_norm_duality_with_extreme_effects():
    # norm of v equals the best signed pairing over 2E - unit, the extreme
    # points of the symmetric functional interval
    rng = np.random.default_rng(31)
    for s in (square(), systems.simplex(2), systems.cross_polytope(3)):
        eff = np.array([f.coords for f in systems.extreme_effects(s)])
        signed = 2.0 * eff - s.unit[None, :]
        for _ in range(25):
            v = rng.normal(size=s.dim)
            direct = systems.base_norm(s, s.vector(v))
            via_dual = np.abs(signed @ v).max()
            assert direct == pytest.approx(via_dual, abs=1e-7)


def test_ball_matches_polytopic_twin_base_norm():
    rng = np.random.default_rng(8)
    pairs = [
        (systems.ball(2, "linf"), systems.hypercube(2)),
        (systems.ball(3, "l1"), systems.cross_polytope(3)),
    ]
    for cs, poly in pairs:
        for _ in range(25):
            v = rng.normal(size=cs.dim)
            a = systems.base_norm(cs, cs.vector(v))
            b = systems.base_norm(poly, poly.vector(v))
            assert a == pytest.approx(b, abs=1e-9)


# ---------------------------------------------------------------------------
# order unit norm


def test_order_unit_norm_of_unit_is_one():
    for s in (square(), systems.simplex(4), systems.ball(3, "l2")):
        assert systems.order_unit_norm(
            s, s.functional(s.unit)) == pytest.approx(1.0, abs=1e-12)


def test_order_unit_norm_square_frozen():
    s = square()
    f = s.functional([0.0, 1.0, -1.0])
    assert systems.order_unit_norm(s, f) == pytest.approx(2.0, abs=1e-12)


def test_order_unit_norm_ball_formula():
    s = systems.ball(2, "l2")
    f = s.functional([0.25, 0.3, -0.4])
    assert systems.order_unit_norm(s, f) == pytest.approx(0.75, abs=1e-12)


def test_order_unit_norm_vector_side_needs_interior_unit():
    s = square()
    with pytest.raises(NotInterior):
        systems.order_unit_norm(
            s, s.vector([0.0, 1.0, 0.0]), unit=s.vector([1.0, 1.0, 0.0]))


def test_order_unit_norm_vector_side_square():
    s = square()
    y = s.vector([0.2, 0.5, -0.8])
    # with the central unit this is the sigma norm at the center
    assert systems.order_unit_norm(
        s, y, unit=s.vector([1.0, 0.0, 0.0])) == pytest.approx(1.0, abs=1e-12)


def test_ball_matches_polytopic_twin_order_unit():
    rng = np.random.default_rng(21)
    cs, poly = systems.ball(2, "linf"), systems.hypercube(2)
    for _ in range(25):
        f = rng.normal(size=3)
        a = systems.order_unit_norm(cs, cs.functional(f))
        b = systems.order_unit_norm(poly, poly.functional(f))
        assert a == pytest.approx(b, abs=1e-9)


# ---------------------------------------------------------------------------
# sigma norms


def test_sigma_order_unit_square_center_frozen():
    s = square()
    sig = s.vector([1.0, 0.0, 0.0])
    y = s.vector([0.0, 0.5, -0.8])
    val = systems.order_unit_norm(s, y, unit=sig)
    assert val == pytest.approx(0.8, abs=1e-12)
    val = systems.order_unit_norm(s, s.vector([0.2, 0.5, -0.8]), unit=sig)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_sigma_base_norm_square_frozen():
    s = square()
    sig = s.vector([1.0, 0.0, 0.0])
    val, ystar = systems.sigma_base_norm(s, s.functional([0.0, 0.5, 0.5]), sig)
    assert val == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(np.abs(ystar.coords), [0, 1, 1], atol=1e-8)
    # |t| + l1(phi) <= 1 on the sigma interval, so max(|t|, l1(phi)) is the
    # dual value: (1/2, 1/2, 0) scores 1/2, not 1
    val, _ = systems.sigma_base_norm(s, s.functional([0.5, 0.5, 0.0]), sig)
    assert val == pytest.approx(0.5, abs=1e-9)


def test_sigma_base_norm_maximizer_is_feasible():
    rng = np.random.default_rng(13)
    s = square()
    for _ in range(30):
        sig_x = rng.uniform(-0.8, 0.8, size=2)
        sig = s.vector([1.0, *sig_x])
        h = s.functional(rng.normal(size=3))
        val, ystar = systems.sigma_base_norm(s, h, sig)
        y = ystar.coords
        assert (s.cone_facets @ (sig.coords + y)).min() >= -1e-8
        assert (s.cone_facets @ (sig.coords - y)).min() >= -1e-8
        assert h.coords @ y == pytest.approx(val, abs=1e-8)
        assert val >= abs(h.coords @ sig.coords) - 1e-9


def test_sigma_norms_are_dual_on_square():
    # <h, y> <= ||h||^sigma * ||y||_sigma with equality at the maximizer
    rng = np.random.default_rng(29)
    s = square()
    sig = s.vector([1.0, 0.2, -0.3])
    for _ in range(20):
        h = s.functional(rng.normal(size=3))
        val, ystar = systems.sigma_base_norm(s, h, sig)
        yn = systems.order_unit_norm(s, ystar, unit=sig)
        assert yn <= 1.0 + 1e-8
        assert val == pytest.approx(h.coords @ ystar.coords, abs=1e-8)


def test_ball_matches_polytopic_twin_sigma_norms():
    rng = np.random.default_rng(41)
    cs, poly = systems.ball(2, "linf"), systems.hypercube(2)
    center_cs = cs.vector([1.0, 0.0, 0.0])
    center_poly = poly.vector([1.0, 0.0, 0.0])
    for _ in range(25):
        y = rng.normal(size=3)
        a = systems.order_unit_norm(cs, cs.vector(y), unit=center_cs)
        b = systems.order_unit_norm(poly, poly.vector(y), unit=center_poly)
        assert a == pytest.approx(b, abs=1e-9)
        h = rng.normal(size=3)
        va, _ = systems.sigma_base_norm(cs, cs.functional(h), center_cs)
        vb, _ = systems.sigma_base_norm(poly, poly.functional(h), center_poly)
        assert va == pytest.approx(vb, abs=1e-9)


def test_sigma_norm_requires_interior_sigma():
    s = square()
    with pytest.raises(NotInterior):
        systems.sigma_base_norm(
            s, s.functional([1.0, 0, 0]), s.vector([1.0, 1.0, 0.0]))


def test_ball_sigma_norms_only_at_center():
    s = systems.ball(2, "l2")
    with pytest.raises(InvalidInput):
        systems.sigma_base_norm(
            s, s.functional([1.0, 0, 0]), s.vector([1.0, 0.5, 0.0]))


# ---------------------------------------------------------------------------
# effects


def _brute_force_effects(system):
    # independent enumeration: intersect tight constraint subsets of
    # 0 <= <f, v_i> <= 1
    V = system.vertices
    n, d = V.shape
    rows = np.concatenate([V, -V], axis=0)
    rhs = np.concatenate([np.ones(n), np.zeros(n)])
    found = []
    for idx in itertools.combinations(range(2 * n), d):
        A = rows[list(idx)]
        if np.linalg.matrix_rank(A, tol=1e-9) < d:
            continue
        f, *_ = np.linalg.lstsq(A, rhs[list(idx)], rcond=None)
        if not np.allclose(A @ f, rhs[list(idx)], atol=1e-9):
            continue
        p = V @ f
        if p.min() >= -1e-9 and p.max() <= 1 + 1e-9:
            if not any(np.allclose(f, g, atol=1e-8) for g in found):
                found.append(f)
    return lex_sorted(np.array(found))


def _effect_rows(system):
    return np.array([f.coords for f in systems.extreme_effects(system)])


def test_extreme_effects_simplex_frozen():
    got = _effect_rows(systems.simplex(2))
    want = lex_sorted(np.array([[0.0, 0], [1, 0], [0, 1], [1, 1]]))
    assert np.allclose(got, want, atol=1e-9)


def test_extreme_effects_square_frozen():
    got = _effect_rows(square())
    want = lex_sorted(np.array([
        [0.0, 0, 0], [1, 0, 0],
        [0.5, 0.5, 0], [0.5, -0.5, 0], [0.5, 0, 0.5], [0.5, 0, -0.5]]))
    assert got.shape == (6, 3)
    assert np.allclose(got, want, atol=1e-9)


def test_extreme_effects_against_brute_force():
    for s in (systems.simplex(3), square(), systems.cross_polytope(2)):
        got = _effect_rows(s)
        want = _brute_force_effects(s)
        assert got.shape == want.shape
        assert np.allclose(got, want, atol=1e-7)


def test_is_effect():
    s = square()
    assert systems.is_effect(s, s.functional([0.5, 0.5, 0.0]))
    assert not systems.is_effect(s, s.functional([0.5, 0.6, 0.0]))
    b = systems.ball(3, "l2")
    assert systems.is_effect(b, b.functional([0.5, 0.3, 0.0, 0.4]))
    assert not systems.is_effect(b, b.functional([0.5, 0.4, 0.0, 0.4]))


def test_measurement_validation():
    s = square()
    f = s.functional([0.5, 0.5, 0.0])
    m = systems.dichotomic_measurement(s, f)
    assert len(m.effects) == 2
    with pytest.raises(InvalidInput, match="sum"):
        systems.Measurement(effects=(f, f))
    with pytest.raises(InvalidInput, match="effect"):
        systems.Measurement(
            effects=(s.functional([1.5, 0, 0]), s.functional([-0.5, 0, 0])))


def test_dichotomic_measurement_rejects_non_effect():
    s = square()
    with pytest.raises(InvalidInput):
        systems.dichotomic_measurement(s, s.functional([2.0, 0, 0]))


# ---------------------------------------------------------------------------
# interior checks


def test_assert_interior():
    s = square()
    systems.assert_interior(s, s.vector([1.0, 0.3, -0.2]))
    with pytest.raises(NotInterior):
        systems.assert_interior(s, s.vector([1.0, 1.0, 0.0]))
    b = systems.ball(2, "l2")
    systems.assert_interior(b, b.vector([1.0, 0.5, 0.5]))
    with pytest.raises(NotInterior):
        systems.assert_interior(b, b.vector([1.0, 0.6, 0.8]))


# ---------------------------------------------------------------------------
# symmetries


def test_square_symmetry_group_order():
    mats = systems.symmetries(square())
    assert len(mats) == 8


def test_simplex_symmetry_group_order():
    assert len(systems.symmetries(systems.simplex(2))) == 2
    assert len(systems.symmetries(systems.simplex(3))) == 6


def test_symmetries_fixing_a_point():
    s = square()
    v = s.vector([1.0, 1.0, 1.0])
    mats = systems.symmetries(s, fix=v)
    assert len(mats) == 2
    for m in mats:
        assert np.allclose(m @ v.coords, v.coords, atol=1e-9)


def test_symmetry_group_closure():
    mats = systems.symmetries(square())
    s = square()
    for a in mats:
        for b in mats:
            c = a @ b
            assert systems.is_symmetry(s, c)
            assert any(np.allclose(c, m, atol=1e-8) for m in mats)


def test_is_symmetry_rejects_shear():
    s = square()
    m = np.eye(3)
    m[1, 2] = 0.5
    assert not systems.is_symmetry(s, m)


def test_symmetry_guard(monkeypatch):
    monkeypatch.setenv("GPTSTEER_GUARDS", "symmetry_vertices=3")
    with pytest.raises(GuardExceeded):
        systems.symmetries(square())


# ---------------------------------------------------------------------------
# ball approximations


def test_polygon_approximation_inradius():
    inner, r_in = systems.ball_approximation(2, 16, which="inner")
    outer, r_out = systems.ball_approximation(2, 16, which="outer")
    assert r_in == pytest.approx(np.cos(np.pi / 16), rel=1e-9)
    assert r_out == pytest.approx(r_in, abs=1e-12)
    assert inner.n_vertices == 16
    assert outer.n_vertices == 16
    # outer hull contains the circle: its vertices lie at radius 1/r
    rad = np.linalg.norm(outer.vertices[:, 1:], axis=1)
    assert np.allclose(rad, 1.0 / r_out, atol=1e-9)


def test_sphere_approximation_shape():
    inner, r = systems.ball_approximation(3, 3, which="inner")
    assert inner.n_vertices == 14
    assert r == pytest.approx(0.75, abs=1e-9)
    assert 0 < r <= 1


def test_line_segment_approximation_exact():
    inner, r = systems.ball_approximation(1, 7, which="inner")
    assert r == pytest.approx(1.0, abs=1e-12)
    assert inner.n_vertices == 2


def test_ball_approximation_rejects_high_dim():
    with pytest.raises(InvalidInput):
        systems.ball_approximation(4, 3)


# ---------------------------------------------------------------------------
# vectors, functionals, serialization


def test_vector_arithmetic_and_mismatch():
    s, t = square(), systems.simplex(3)
    v = s.vector([1.0, 0.5, 0.0])
    w = s.vector([0.0, 0.5, 0.5])
    assert np.allclose((v + w).coords, [1, 1, 0.5])
    assert np.allclose((v - w).coords, [1, 0, -0.5])
    assert np.allclose((2.0 * v).coords, [2, 1, 0])
    with pytest.raises(SystemMismatch):
        v + t.vector([0.3, 0.3, 0.4])
    with pytest.raises(SystemMismatch):
        systems.pair(t.functional([1.0, 1, 1]), v)


def test_pairing():
    s = square()
    f = s.functional([0.5, 0.5, 0.0])
    v = s.vector([1.0, 1.0, -1.0])
    assert systems.pair(f, v) == pytest.approx(1.0, abs=1e-12)
    assert f.pair(v) == pytest.approx(1.0, abs=1e-12)


def test_vector_values_are_frozen():
    v = square().vector([1.0, 0, 0])
    with pytest.raises(ValueError):
        v.coords[0] = 2.0


def test_json_round_trip():
    for s in (square(), systems.simplex(3), systems.ball(3, "l2")):
        payload = systems.system_to_payload(s)
        json.dumps(payload)  # must be serializable
        back = systems.system_from_payload(payload)
        assert back == s


def test_payload_reports_first_violated_invariant():
    with pytest.raises(InvalidInput, match="kind"):
        systems.system_from_payload({"dim": 3})
    with pytest.raises(InvalidInput, match="ball_norm"):
        systems.system_from_payload(
            {"kind": "centrally_symmetric", "dim": 3, "unit": [1, 0, 0],
             "ball_norm": "l7"})
    with pytest.raises(InvalidInput, match="vertices"):
        systems.system_from_payload(
            {"kind": "polytopic", "dim": 2, "unit": [1, 0]})


def test_vertices_of_polytope_wrapper():
    # unit box via inequalities only
    A = np.concatenate([np.eye(2), -np.eye(2)], axis=0)
    b = np.ones(4)
    got = vertices_of_polytope(A, b)
    want = lex_sorted(np.array([[-1.0, -1], [-1, 1], [1, -1], [1, 1]]))
    assert np.allclose(got, want, atol=1e-9)


def test_facets_of_cone_wrapper():
    V = np.array([[1.0, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]])
    got = facets_of_cone(V)
    assert got.shape == (4, 3)
    assert (got @ V.T).min() >= -1e-9
