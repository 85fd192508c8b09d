"""Simple measures, the Choquet order, and the variational constant."""

import numpy as np
import pytest

from gptsteer import choquet, sampling, steering, systems, tensors
from gptsteer.errors import (
    GuardExceeded,
    InvalidInput,
    NotASymmetry,
    NotDichotomic,
    NotInterior,
    SystemMismatch,
)


def square():
    return systems.hypercube(2)


def center(sq):
    return sq.vector([1.0, 0.0, 0.0])


def measure(sq, *atoms):
    return choquet.SimpleMeasure(
        tuple((w, sq.vector(p)) for w, p in atoms))


def flat_pair(sq):
    """Two-atom measure on the horizontal edge midpoints; below uniform."""
    return measure(sq, (0.5, (1, 1, 0)), (0.5, (1, -1, 0)))


def vertex_diagonal(sq):
    """Two-atom measure on opposite vertices; not below uniform."""
    return measure(sq, (0.5, (1, 1, 1)), (0.5, (1, -1, -1)))


def tuple_gap(nu, mu, gs):
    """Recompute the dual-order violation with plain numpy."""
    G = [g.coords for g in gs]
    lhs = sum(w * float(G[a] @ p.coords)
              for a, (w, p) in enumerate(nu.atoms))
    rhs = sum(w * max(float(g @ p.coords) for g in G)
              for w, p in mu.atoms)
    return lhs - rhs


def abs_gap(nu, mu, h):
    def side(m):
        return sum(w * abs(float(h.coords @ p.coords)) for w, p in m.atoms)
    return side(nu) - side(mu)


def two_atom_with_barycenter(rng, system, sigma):
    """Random 2-atom measure averaging to sigma: split along an interval
    direction, the same construction the norm maximizer uses."""
    Y = tensors.sigma_interval_vertices(system, sigma)
    lam = rng.dirichlet(np.ones(Y.shape[0]))
    y = system.vector(float(rng.uniform(0.2, 1.0)) * (Y.T @ lam))
    atoms = []
    for s in (1.0, -1.0):
        half = 0.5 * (sigma + s * y)
        w = systems.pair(system.unit_functional, half)
        if w > 1e-9:
            atoms.append((w, (1.0 / w) * half))
    return choquet.SimpleMeasure(tuple(atoms))


# ---------------------------------------------------------------------------
# measure types


def test_measure_barycenter_cached():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    assert np.allclose(u4.barycenter.coords, [1, 0, 0], atol=1e-12)
    assert np.allclose(u4.weights, 0.25)
    assert u4.points.shape == (4, 3)
    assert u4.system == sq


def test_measure_rejects_bad_weights():
    sq = square()
    with pytest.raises(InvalidInput):
        measure(sq, (0.7, (1, 0, 0)), (0.7, (1, 0.5, 0)))
    with pytest.raises(InvalidInput):
        measure(sq, (1.5, (1, 0, 0)), (-0.5, (1, 0.5, 0)))


def test_measure_rejects_bad_points():
    sq = square()
    with pytest.raises(InvalidInput):
        measure(sq, (1.0, (1, 2, 0)))          # outside the cone
    with pytest.raises(InvalidInput):
        measure(sq, (1.0, (2, 0, 0)))          # not normalized
    with pytest.raises(InvalidInput):
        choquet.SimpleMeasure(((1.0, np.array([1.0, 0, 0])),))
    with pytest.raises(SystemMismatch):
        choquet.SimpleMeasure(
            ((0.5, sq.vector([1, 0, 0])),
             (0.5, systems.simplex(3).vector([0.5, 0.5, 0]))))
    with pytest.raises(InvalidInput):
        choquet.SimpleMeasure(())
    with pytest.raises(InvalidInput):
        choquet.SimpleMeasure((1.0, sq.vector([1, 0, 0])))  # not pairs


def test_boundary_measure_requires_vertices():
    sq = square()
    ok = choquet.BoundaryMeasure(
        ((0.5, sq.vector([1, 1, 1])), (0.5, sq.vector([1, -1, -1]))))
    assert isinstance(ok, choquet.SimpleMeasure)
    with pytest.raises(InvalidInput):
        choquet.BoundaryMeasure(((1.0, center(sq)),))
    ball = systems.ball(2)
    with pytest.raises(InvalidInput):
        choquet.BoundaryMeasure(((1.0, ball.vector([1, 0, 0])),))


def test_point_mass_and_vertex_measure():
    sq = square()
    pm = choquet.point_mass(center(sq))
    assert len(pm.atoms) == 1 and pm.atoms[0][0] == 1.0
    w = [0.4, 0.3, 0.2, 0.1]
    vm = choquet.vertex_measure(sq, w)
    assert isinstance(vm, choquet.BoundaryMeasure)
    assert np.allclose(vm.weights, w)
    with pytest.raises(InvalidInput):
        choquet.vertex_measure(sq, [0.5, 0.5])


# ---------------------------------------------------------------------------
# choquet_below


def test_below_barycenter_point_mass():
    sq = square()
    v = choquet.choquet_below(choquet.point_mass(center(sq)),
                              choquet.vertex_measure(sq))
    assert v.below
    assert np.allclose(v.responses, 1.0, atol=1e-9)


def test_below_reflexive():
    rng = np.random.default_rng(3)
    for _ in range(3):
        system = sampling.random_polytopic_system(rng, dim=3, max_points=6)
        sigma = sampling.random_interior_state(rng, system)
        mu = sampling.random_measure_with_barycenter(rng, system, sigma)
        assert choquet.choquet_below(mu, mu).below


def test_below_square_frozen_responses():
    sq = square()
    v = choquet.choquet_below(flat_pair(sq), choquet.vertex_measure(sq))
    assert v.below
    # outcome 0 takes exactly the two x=+1 vertices, whatever their order
    for j, vert in enumerate(sq.vertices):
        want = 1.0 if vert[1] > 0 else 0.0
        assert v.responses[0, j] == pytest.approx(want, abs=1e-9)
        assert v.responses[1, j] == pytest.approx(1.0 - want, abs=1e-9)


def test_below_refuted_with_verified_tuple():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    v = choquet.choquet_below(vertex_diagonal(sq), u4)
    assert not v.below
    assert len(v.functionals) == 2
    assert v.violation == pytest.approx(
        tuple_gap(vertex_diagonal(sq), u4, v.functionals), abs=1e-12)
    assert v.violation > 1e-9


def test_below_mismatched_barycenters():
    sq = square()
    nu = choquet.point_mass(sq.vector([1, 0.2, 0]))
    mu = choquet.point_mass(center(sq))
    v = choquet.choquet_below(nu, mu)
    assert not v.below
    assert v.violation == pytest.approx(0.2, abs=1e-12)
    assert np.allclose(v.functionals[0].coords, [0, 1, 0], atol=1e-12)


def test_below_system_mismatch():
    sq = square()
    s3 = systems.simplex(3)
    with pytest.raises(SystemMismatch):
        choquet.choquet_below(
            choquet.point_mass(center(sq)),
            choquet.point_mass(s3.vector([1 / 3] * 3)))
    with pytest.raises(InvalidInput):
        choquet.choquet_below(choquet.point_mass(center(sq)), "nope")


def test_below_transitive_on_dilation_chains():
    rng = np.random.default_rng(7)
    for _ in range(6):
        system = sampling.random_polytopic_system(rng, dim=3, max_points=6)
        sigma = sampling.random_interior_state(rng, system)
        a = sampling.random_measure_with_barycenter(
            rng, system, sigma, n_satellites=2)
        b = sampling.random_dilation(rng, a)
        c = sampling.random_dilation(rng, b)
        ab = choquet.choquet_below(a, b)
        bc = choquet.choquet_below(b, c)
        ac = choquet.choquet_below(a, c)
        assert ab.below and bc.below and ac.below
        assert ac.responses.shape == (len(a.atoms), len(c.atoms))
        back = choquet.choquet_below(b, a)
        assert not back.below
        assert tuple_gap(b, a, back.functionals) == pytest.approx(
            back.violation, abs=1e-12)


def test_below_on_ball_system():
    ball = systems.ball(2)
    c = ball.vector([1, 0, 0])
    mu = choquet.SimpleMeasure(
        ((0.5, ball.vector([1, 0.8, 0])), (0.5, ball.vector([1, -0.8, 0]))))
    assert choquet.choquet_below(choquet.point_mass(c), mu).below
    assert not choquet.choquet_below(mu, choquet.point_mass(c)).below


# ---------------------------------------------------------------------------
# randomized dual check


def test_dual_check_sound_when_below():
    rng = np.random.default_rng(19)
    for _ in range(4):
        system = sampling.random_polytopic_system(rng, dim=3, max_points=6)
        sigma = sampling.random_interior_state(rng, system)
        a = sampling.random_measure_with_barycenter(
            rng, system, sigma, n_satellites=2)
        b = sampling.random_dilation(rng, a)
        assert choquet.choquet_below(a, b).below
        assert choquet.choquet_below_dual_check(a, b, trials=40).passed


def test_dual_check_refutes_spread_above_point():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    delta = choquet.point_mass(center(sq))
    # the absolute-value direction the refutation rests on, by hand
    h = np.array([0.0, 1.0, 0.0])
    assert sum(0.25 * abs(h @ v) for v in sq.vertices) == pytest.approx(1.0)
    assert abs(h @ delta.barycenter.coords) == 0.0
    many = choquet.choquet_below_dual_check(u4, delta, trials=64)
    assert not many.passed
    assert tuple_gap(u4, delta, many.functionals) == pytest.approx(
        many.violation, abs=1e-12)
    two = choquet.choquet_below_dual_check(flat_pair(sq), delta, trials=64)
    assert not two.passed
    assert two.violation > 1e-9


def test_dual_check_reflexive_passes():
    sq = square()
    for m in (choquet.vertex_measure(sq), flat_pair(sq)):
        assert choquet.choquet_below_dual_check(m, m, trials=30).passed


def test_dual_check_mismatched_barycenters():
    sq = square()
    v = choquet.choquet_below_dual_check(
        choquet.point_mass(sq.vector([1, 0.2, 0])),
        choquet.point_mass(center(sq)))
    assert not v.passed and v.violation > 0


def test_dual_check_deterministic():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    delta = choquet.point_mass(center(sq))
    a = choquet.choquet_below_dual_check(u4, delta, trials=64, seed=9)
    b = choquet.choquet_below_dual_check(u4, delta, trials=64, seed=9)
    assert a.passed == b.passed
    assert all(np.array_equal(x.coords, y.coords)
               for x, y in zip(a.functionals, b.functionals))
    with pytest.raises(InvalidInput):
        choquet.choquet_below_dual_check(u4, delta, trials=0)


# ---------------------------------------------------------------------------
# norm-maximizing measures


def test_co_norm_square_frozen():
    sq = square()
    value, m = choquet.co_norm_max(sq, center(sq),
                                   sq.functional([0, 0.5, 0.5]))
    assert value == pytest.approx(1.0, abs=1e-9)
    got = sorted((round(w, 9), tuple(p.coords)) for w, p in m.atoms)
    assert got == [(0.5, (1.0, -1.0, -1.0)), (0.5, (1.0, 1.0, 1.0))]


def test_co_norm_positive_functional():
    sq = square()
    value, m = choquet.co_norm_max(sq, center(sq), sq.unit_functional)
    assert value == pytest.approx(1.0, abs=1e-9)
    assert len(m.atoms) == 1
    assert np.allclose(m.atoms[0][1].coords, [1, 0, 0], atol=1e-9)


def test_co_norm_zero_functional():
    sq = square()
    value, m = choquet.co_norm_max(sq, center(sq), sq.functional([0, 0, 0]))
    assert value == pytest.approx(0.0, abs=1e-12)
    assert sum(w for w, _ in m.atoms) == pytest.approx(1.0, abs=1e-9)


def test_co_norm_average_attains_value():
    rng = np.random.default_rng(23)
    cases = []
    for _ in range(5):
        system = sampling.random_polytopic_system(rng, dim=3, max_points=6)
        sigma = sampling.random_interior_state(rng, system)
        cases.append((system, sigma))
    ball = systems.ball(2)
    cases.append((ball, ball.vector([1, 0, 0])))
    for system, sigma in cases:
        h = system.functional(rng.normal(size=system.dim))
        value, m = choquet.co_norm_max(system, sigma, h)
        avg = sum(w * abs(systems.pair(h, p)) for w, p in m.atoms)
        assert avg == pytest.approx(value, rel=1e-7, abs=1e-9)
        assert np.allclose(m.barycenter.coords, sigma.coords, atol=1e-7)
        double, _ = choquet.co_norm_max(system, sigma, 2.0 * h)
        assert double == pytest.approx(2.0 * value, rel=1e-9, abs=1e-9)


def test_co_norm_dominates_other_measures():
    rng = np.random.default_rng(29)
    sq = square()
    sigma = center(sq)
    for _ in range(5):
        h = sq.functional(rng.normal(size=3))
        value, _ = choquet.co_norm_max(sq, sigma, h)
        mu = sampling.random_measure_with_barycenter(rng, sq, sigma)
        avg = sum(w * abs(systems.pair(h, p)) for w, p in mu.atoms)
        assert avg <= value + 1e-9


def test_co_norm_sigma_validation():
    sq = square()
    h = sq.functional([0, 1, 0])
    with pytest.raises(NotInterior):
        choquet.co_norm_max(sq, sq.vector([1, 1, 0]), h)
    with pytest.raises(InvalidInput):
        choquet.co_norm_max(sq, sq.vector([2, 0, 0]), h)


# ---------------------------------------------------------------------------
# the variational constant


def test_constant_square_uniform():
    sq = square()
    value = choquet.c_mu(sq, center(sq), choquet.vertex_measure(sq))
    assert value == pytest.approx(0.5, abs=1e-7)


def test_constant_point_mass_degenerates():
    sq = square()
    value = choquet.c_mu(sq, center(sq), choquet.point_mass(center(sq)))
    assert value == pytest.approx(0.0, abs=1e-9)


def test_constant_classical_bit():
    s2 = systems.simplex(2)
    sigma = s2.vector([0.5, 0.5])
    value = choquet.c_mu(s2, sigma, choquet.vertex_measure(s2))
    assert value == pytest.approx(1.0, abs=1e-9)


def test_constant_mixture_frozen():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    mix = choquet.SimpleMeasure(
        tuple([(0.5 * w, p) for w, p in u4.atoms] + [(0.5, center(sq))]))
    assert choquet.c_mu(sq, center(sq), mix) == pytest.approx(0.25, abs=1e-7)


def test_constant_validation():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    with pytest.raises(InvalidInput):
        choquet.c_mu(sq, sq.vector([1, 0.5, 0]), u4)  # wrong barycenter
    with pytest.raises(NotInterior):
        choquet.c_mu(sq, sq.vector([1, 1, 0]),
                     choquet.point_mass(sq.vector([1, 1, 0])))
    ball = systems.ball(2)
    with pytest.raises(InvalidInput):
        choquet.c_mu(ball, ball.vector([1, 0, 0]),
                     choquet.point_mass(ball.vector([1, 0, 0])))
    with pytest.raises(SystemMismatch):
        choquet.c_mu(sq, center(sq),
                     choquet.point_mass(systems.ball(2).vector([1, 0, 0])))


def test_constant_dimension_guard(monkeypatch):
    monkeypatch.setenv("GPTSTEER_GUARDS", "cmu_dim=2")
    sq = square()
    with pytest.raises(GuardExceeded):
        choquet.c_mu(sq, center(sq), choquet.vertex_measure(sq))


def test_constant_below_degree_estimates():
    sq = square()
    est = steering.steering_degree_estimate(sq)
    value = choquet.c_mu(sq, center(sq), choquet.vertex_measure(sq))
    assert value <= est.inf_reading + 1e-6
    rng = np.random.default_rng(31)
    for _ in range(2):
        system = sampling.random_polytopic_system(rng, dim=3, max_points=6)
        sigma = sampling.random_interior_state(rng, system)
        mu = sampling.random_measure_with_barycenter(rng, system, sigma)
        est = steering.steering_degree_estimate(system, sigma=sigma, trials=12)
        assert choquet.c_mu(system, sigma, mu) <= est.inf_reading + 1e-6


def test_constant_square_achievability():
    # symmetrizing any vertex-supported measure lands on the uniform one,
    # whose constant matches the dichotomic degree exactly
    rng = np.random.default_rng(37)
    sq = square()
    group = systems.symmetries(sq)
    assert len(group) == 8
    best = 0.0
    for _ in range(3):
        mu = choquet.vertex_measure(sq, rng.dirichlet(np.ones(4)))
        sym = choquet.symmetrize(mu, group)
        assert np.allclose(sym.weights, 0.25, atol=1e-12)
        best = max(best, choquet.c_mu(sq, center(sq), sym))
    inf_reading = steering.steering_degree_estimate(sq).inf_reading
    assert best == pytest.approx(0.5, abs=1e-6)
    assert best == pytest.approx(inf_reading, abs=1e-6)


# ---------------------------------------------------------------------------
# Monte Carlo constant for the ball


def test_monte_carlo_three_ball():
    est = choquet.c_mu_monte_carlo(samples=200000, seed=0)
    assert est.reference == pytest.approx(0.5, abs=1e-12)
    assert est.value == pytest.approx(0.5, abs=0.005)
    assert 0.0 < est.stderr < 0.002
    assert est.samples == 200000 and est.seed == 0


def test_monte_carlo_disk_and_segment():
    disk = choquet.c_mu_monte_carlo(systems.ball(2), samples=200000, seed=0)
    assert disk.reference == pytest.approx(2.0 / np.pi, abs=1e-12)
    assert disk.value == pytest.approx(2.0 / np.pi, abs=0.005)
    seg = choquet.c_mu_monte_carlo(systems.ball(1), samples=200000, seed=0)
    assert seg.reference == pytest.approx(1.0, abs=1e-12)
    assert seg.value == pytest.approx(1.0, abs=0.005)


def test_monte_carlo_deterministic():
    a = choquet.c_mu_monte_carlo(samples=20000, seed=5)
    b = choquet.c_mu_monte_carlo(samples=20000, seed=5)
    assert a.value == b.value and a.stderr == b.stderr


def test_monte_carlo_validation():
    with pytest.raises(InvalidInput):
        choquet.c_mu_monte_carlo(systems.ball(2, norm="l1"))
    with pytest.raises(InvalidInput):
        choquet.c_mu_monte_carlo(square())
    ball = systems.ball(3)
    with pytest.raises(InvalidInput):
        choquet.c_mu_monte_carlo(ball, sigma=ball.vector([1, 0.3, 0, 0]))
    with pytest.raises(InvalidInput):
        choquet.c_mu_monte_carlo(samples=1)


# ---------------------------------------------------------------------------
# exact two-atom decision


def test_exact_square_frozen():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    assert choquet.dichotomic_below_exact(flat_pair(sq), u4).below
    v = choquet.dichotomic_below_exact(vertex_diagonal(sq), u4)
    assert not v.below
    assert v.margin == pytest.approx(0.5, abs=1e-7)
    assert abs_gap(vertex_diagonal(sq), u4, v.functional) == pytest.approx(
        v.margin, abs=1e-12)


def test_exact_agrees_with_response_lp():
    rng = np.random.default_rng(11)
    verdicts = {True: 0, False: 0}
    for i in range(200):
        system = sampling.random_polytopic_system(rng, dim=3, max_points=6)
        sigma = sampling.random_interior_state(rng, system)
        nu = two_atom_with_barycenter(rng, system, sigma)
        if i % 2 == 0:
            mu = sampling.random_dilation(rng, nu)
        else:
            mu = sampling.random_measure_with_barycenter(rng, system, sigma)
        got = choquet.choquet_below(nu, mu).below
        assert choquet.dichotomic_below_exact(nu, mu).below == got
        verdicts[got] += 1
    assert verdicts[True] >= 40 and verdicts[False] >= 40


def test_exact_validation():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    with pytest.raises(NotDichotomic):
        choquet.dichotomic_below_exact(u4, u4)
    with pytest.raises(InvalidInput):
        choquet.dichotomic_below_exact(
            choquet.point_mass(sq.vector([1, 0.5, 0])), u4)
    assert choquet.dichotomic_below_exact(
        choquet.point_mass(center(sq)), u4).below


# ---------------------------------------------------------------------------
# symmetrization


def test_symmetrize_vertex_orbit():
    sq = square()
    group = systems.symmetries(sq)
    delta = choquet.BoundaryMeasure(((1.0, sq.vector(sq.vertices[0])),))
    sym = choquet.symmetrize(delta, group)
    assert isinstance(sym, choquet.BoundaryMeasure)
    assert len(sym.atoms) == 4
    assert np.allclose(sym.weights, 0.25, atol=1e-12)
    assert np.allclose(sym.barycenter.coords, [1, 0, 0], atol=1e-12)


def test_symmetrize_identity_and_invariant():
    sq = square()
    u4 = choquet.vertex_measure(sq)
    same = choquet.symmetrize(u4, [np.eye(3)])
    assert sorted(map(tuple, same.points.tolist())) == \
        sorted(map(tuple, u4.points.tolist()))
    sym = choquet.symmetrize(u4, systems.symmetries(sq))
    assert np.allclose(sorted(sym.weights), sorted(u4.weights), atol=1e-12)


def test_symmetrize_idempotent():
    rng = np.random.default_rng(41)
    sq = square()
    group = systems.symmetries(sq)
    mu = choquet.vertex_measure(sq, rng.dirichlet(np.ones(4)))
    once = choquet.symmetrize(mu, group)
    twice = choquet.symmetrize(once, group)
    a = sorted((tuple(np.round(p, 9)), w)
               for (w, _), p in zip(once.atoms, once.points))
    b = sorted((tuple(np.round(p, 9)), w)
               for (w, _), p in zip(twice.atoms, twice.points))
    for (pa, wa), (pb, wb) in zip(a, b):
        assert pa == pb
        assert wa == pytest.approx(wb, abs=1e-12)


def test_symmetrize_rejects_non_symmetry():
    sq = square()
    mu = choquet.vertex_measure(sq)
    with pytest.raises(NotASymmetry):
        choquet.symmetrize(mu, [np.diag([1.0, 2.0, 1.0])])
    with pytest.raises(InvalidInput):
        choquet.symmetrize(mu, [])


def test_symmetrize_preserves_domination():
    rng = np.random.default_rng(43)
    sq = square()
    flip = [np.eye(3), np.diag([1.0, -1.0, -1.0])]
    nu = measure(sq, (0.5, (1, 0.4, 0.4)), (0.5, (1, -0.4, -0.4)))
    for _ in range(4):
        mu = sampling.random_dilation(rng, nu)
        assert choquet.choquet_below(nu, mu).below
        sym = choquet.symmetrize(mu, flip)
        assert choquet.choquet_below(nu, sym).below
        assert np.allclose(sym.barycenter.coords, [1, 0, 0], atol=1e-9)
