"""Simple measures on the state space and the Choquet order between them.

A simple measure is a finite convex combination of point masses on the
state space K.  One measure sits below another when every convex function
averages at least as high against the second; for simple measures this is
decided by an LP over response weights, and the Farkas dual of that LP is a
tuple of affine functionals violating the dual-order inequality, so both
answers come with a certificate.  A randomized dual tester and an exact
facet-based decision for two-atom measures cross-check the LP.

The same machinery yields the variational constant attached to a measure:
the minimum of the measure's average of |<h, .>| over the unit sphere of
the sigma base norm.  That constant lower-bounds the steering robustness of
every assemblage with barycenter sigma, and maximizing it over symmetrized
vertex-supported measures recovers the universal degree.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import guards, lp, systems, tensors
from .errors import (InvalidInput, NotASymmetry, NotDichotomic,
                     NumericalFailure, SystemMismatch)

_BARY_TOL = 1e-8
_MERGE_TOL = 1e-9
_CERT_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class SimpleMeasure:
    """Convex combination of point masses: atoms are (weight, state) pairs.

    Weights are nonnegative and sum to one; every state lies in V+ with
    unit pairing one.  The barycenter is computed once at construction.
    """

    atoms: tuple

    def __post_init__(self):
        try:
            atoms = tuple((float(w), p) for (w, p) in self.atoms)
        except (TypeError, ValueError) as exc:
            raise InvalidInput("atoms must be (weight, point) pairs") from exc
        if len(atoms) < 1:
            raise InvalidInput("measure needs at least one atom")
        system = None
        total = 0.0
        for j, (w, p) in enumerate(atoms):
            if not isinstance(p, systems.Vector):
                raise InvalidInput(f"atom {j} point is not a state vector")
            if system is None:
                system = p.system
            elif p.system != system:
                raise SystemMismatch("atoms live on different systems")
            if w < -1e-12:
                raise InvalidInput(f"atom {j} has negative weight")
            if abs(systems.pair(system.unit_functional, p) - 1.0) > 1e-9:
                raise InvalidInput(f"atom {j} point is not normalized")
            if not systems.cone_member(system, p).member:
                raise InvalidInput(f"atom {j} point is outside V+")
            total += w
        if abs(total - 1.0) > _BARY_TOL:
            raise InvalidInput("atom weights must sum to one")
        bary = np.zeros(system.dim)
        for w, p in atoms:
            bary = bary + w * p.coords
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "_barycenter", system.vector(bary))

    @property
    def system(self):
        return self.atoms[0][1].system

    @property
    def barycenter(self):
        return self._barycenter

    @property
    def weights(self):
        return np.array([w for w, _ in self.atoms])

    @property
    def points(self):
        """Atom states as rows, aligned with `weights`."""
        return np.array([p.coords for _, p in self.atoms])


class BoundaryMeasure(SimpleMeasure):
    """Simple measure supported on the vertex set of a polytopic system."""

    def __post_init__(self):
        super().__post_init__()
        system = self.system
        system._require_polytopic()
        for j, (_, p) in enumerate(self.atoms):
            gap = np.max(np.abs(system.vertices - p.coords), axis=1)
            if float(np.min(gap)) > _MERGE_TOL:
                raise InvalidInput(f"atom {j} point is not a vertex")


def point_mass(rho):
    """The measure concentrated at a single state."""
    return SimpleMeasure(((1.0, rho),))


def vertex_measure(system, weights=None):
    """Boundary measure on the full vertex set; uniform unless weighted."""
    system._require_polytopic()
    n = system.n_vertices
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n:
            raise InvalidInput("weights must list one entry per vertex")
    return BoundaryMeasure(
        tuple((float(wi), system.vector(v)) for wi, v in zip(w, system.vertices)))


def _same_system(nu, mu):
    for m in (nu, mu):
        if not isinstance(m, SimpleMeasure):
            raise InvalidInput("expected a SimpleMeasure")
    if nu.system != mu.system:
        raise SystemMismatch("measures live on different systems")


def _barycenter_gap(nu, mu):
    return float(np.max(np.abs(nu.barycenter.coords - mu.barycenter.coords)))


def _dual_gap(nu, mu, gs):
    """lhs - rhs of the dual-order inequality for a functional tuple.

    Positive gap refutes nu below mu: the tuple pairs higher against nu's
    atoms than its pointwise maximum averages against mu.
    """
    G = np.array([g.coords for g in gs])
    lhs = float(np.sum(nu.weights * np.einsum("ad,ad->a", G, nu.points)))
    rhs = float(mu.weights @ np.max(G @ mu.points.T, axis=0))
    return lhs - rhs


def _abs_gap(nu, mu, h):
    """lhs - rhs of the two-atom (absolute value) form for a single h."""
    lhs = float(nu.weights @ np.abs(nu.points @ h.coords))
    rhs = float(mu.weights @ np.abs(mu.points @ h.coords))
    return lhs - rhs


@dataclass(frozen=True)
class ChoquetVerdict:
    """Outcome of choquet_below.

    When nu sits below mu, `responses` holds the weights q[a, j] splitting
    mu's atoms among nu's.  Otherwise `functionals` is a tuple g_1..g_k
    violating
        sum_a nu_a <g_a, point_a>  <=  sum_j mu_j max_a <g_a, point_j>
    by `violation`.
    """

    below: bool
    responses: Optional[np.ndarray] = None
    functionals: Optional[tuple] = None
    violation: Optional[float] = None


def _refuted(nu, mu, gs):
    gap = _dual_gap(nu, mu, gs)
    if not gap > 0.0:
        raise NumericalFailure("refutation certificate lost its violation")
    return ChoquetVerdict(False, functionals=tuple(gs), violation=gap)


def _mismatch_verdict(nu, mu):
    # distinct barycenters: the difference direction, used for every slot,
    # already violates the dual inequality at the affine level
    diff = nu.barycenter.coords - mu.barycenter.coords
    h = nu.system.functional(diff / np.linalg.norm(diff))
    return _refuted(nu, mu, (h,) * len(nu.atoms))


def choquet_below(nu, mu):
    """Decide whether nu sits below mu in the Choquet order.

    Feasibility of response weights q(a|j) >= 0 with sum_a q(a|j) = 1 and
    sum_j mu_j q(a|j) point_j = nu_a point_a decides the order for simple
    measures; an infeasibility certificate reshapes into a violating
    functional tuple.  Measures with different barycenters are never
    ordered, so that case short-circuits to a refutation.
    """
    _same_system(nu, mu)
    if _barycenter_gap(nu, mu) > _BARY_TOL:
        return _mismatch_verdict(nu, mu)
    k, n, d = len(nu.atoms), len(mu.atoms), nu.system.dim
    weighted_mu = mu.weights[:, None] * mu.points
    target = nu.weights[:, None] * nu.points
    A = np.zeros((n + k * d, k * n))
    for j in range(n):
        A[j, j::n] = 1.0
    for a in range(k):
        A[n + a * d:n + (a + 1) * d, a * n:(a + 1) * n] = weighted_mu.T
    b = np.concatenate([np.ones(n), target.reshape(-1)])
    out = lp.feasibility(lp.LpProblem(np.zeros(k * n), eq_rows=A, eq_rhs=b))
    if out.status == "optimal":
        q = out.x.reshape(k, n)
        if float(q.min()) < -1e-9:
            raise NumericalFailure("response weights went negative")
        q = np.maximum(q, 0.0)
        if float(np.max(np.abs(q.sum(axis=0) - 1.0))) > _CERT_TOL:
            raise NumericalFailure("response weights do not sum to one")
        recon = np.einsum("aj,jd->ad", q, weighted_mu)
        if float(np.max(np.abs(recon - target))) > _CERT_TOL:
            raise NumericalFailure("responses fail to reconstruct the atoms")
        return ChoquetVerdict(True, responses=q)
    y = out.dual_eq
    H = y[n:].reshape(k, d)
    scale = max(1.0, float(np.max(np.abs(H))))
    gs = [nu.system.functional(H[a] / scale) for a in range(k)]
    return _refuted(nu, mu, gs)


@dataclass(frozen=True)
class DualCheckVerdict:
    """Outcome of the randomized dual-order test.  `passed` means no sampled
    tuple violated the inequality; a refutation carries the tuple and gap."""

    passed: bool
    functionals: Optional[tuple] = None
    violation: Optional[float] = None


def _sign_tuple(nu, h):
    """Violating tuple for the general inequality built from a single h
    that already violates the absolute-value form."""
    signs = np.where(nu.points @ h.coords >= 0.0, 1.0, -1.0)
    return tuple(s * h for s in signs)


def choquet_below_dual_check(nu, mu, trials=64, seed=0):
    """One-sided randomized test of the dual-order inequality.

    Samples Gaussian functional tuples normalized in the sigma base norm
    (sigma the common barycenter; euclidean normalization when sigma is not
    interior).  With at most two nu atoms a single functional per trial
    suffices, through the absolute-value form of the inequality.  Any
    violation refutes nu below mu; passing every trial proves nothing by
    itself.
    """
    _same_system(nu, mu)
    if trials < 1:
        raise InvalidInput("trials must be positive")
    if _barycenter_gap(nu, mu) > _BARY_TOL:
        v = _mismatch_verdict(nu, mu)
        return DualCheckVerdict(False, v.functionals, v.violation)
    system = nu.system
    sigma = nu.barycenter
    k = len(nu.atoms)
    rng = np.random.default_rng(seed)

    def draw():
        z = rng.standard_normal(system.dim)
        h = system.functional(z)
        try:
            norm, _ = systems.sigma_base_norm(system, h, sigma)
        except InvalidInput:
            norm = float(np.linalg.norm(z))
        if norm <= 1e-12:
            return None
        return (1.0 / norm) * h

    for _ in range(trials):
        if k <= 2:
            h = draw()
            if h is None:
                continue
            if _abs_gap(nu, mu, h) > 1e-9:
                gs = _sign_tuple(nu, h)
                gap = _dual_gap(nu, mu, gs)
                if not gap > 0.0:
                    raise NumericalFailure("dual check lost its violation")
                return DualCheckVerdict(False, gs, gap)
        else:
            gs = [draw() for _ in range(k)]
            if any(g is None for g in gs):
                continue
            gap = _dual_gap(nu, mu, gs)
            if gap > 1e-9:
                return DualCheckVerdict(False, tuple(gs), gap)
    return DualCheckVerdict(True)


def co_norm_max(system, sigma, h):
    """Sigma base norm of h with a maximizing two-atom measure.

    The norm LP's achiever y* splits sigma into halves (sigma +- y*)/2;
    normalizing them gives a measure whose |<h, .>| average equals the
    norm, and no measure with barycenter sigma averages higher.
    """
    if abs(systems.pair(system.unit_functional, sigma) - 1.0) > 1e-9:
        raise InvalidInput("sigma must be normalized")
    value, y = systems.sigma_base_norm(system, h, sigma)
    atoms = []
    for s in (1.0, -1.0):
        half = 0.5 * (sigma + s * y)
        w = systems.pair(system.unit_functional, half)
        if w > 1e-12:
            atoms.append((w, (1.0 / w) * half))
    if not atoms:
        raise NumericalFailure("norm decomposition produced no mass")
    measure = SimpleMeasure(tuple(atoms))
    avg = sum(w * abs(systems.pair(h, p)) for w, p in measure.atoms)
    if abs(avg - value) > _CERT_TOL * (1.0 + abs(value)):
        raise NumericalFailure("maximizing measure misses the norm value")
    return value, measure


def _interval_vertices(system, sigma):
    """One representative per mirror pair of order-interval vertices.

    The interval [-sigma, sigma] is centrally symmetric and the minimized
    objectives are even, so the facet scan may drop one of each +-y pair
    (the h -> -h reflection maps the mirrored facet problem onto the kept
    one).
    """
    systems.assert_interior(system, sigma)
    guards.check("cmu_dim", system.dim)
    Y = tensors.sigma_interval_vertices(system, sigma)
    keep = []
    for y in Y:
        lead = np.argmax(np.abs(y) > 1e-9)
        if y[lead] > 0.0:
            keep.append(y)
    return np.array(keep)


def _facet_minimum(Y, i, weights, P, lin):
    """Minimize  lin . h + sum_j weights_j |<h, P_j>|  over the facet of the
    sigma-dual ball that pairs with interval vertex Y[i] at one."""
    m, d = Y.shape
    n = P.shape[0]
    eq = np.zeros((1, d + n))
    eq[0, :d] = Y[i]
    ub = np.zeros((2 * n + 2 * m, d + n))
    ub[:n, :d] = P
    ub[:n, d:] = -np.eye(n)
    ub[n:2 * n, :d] = -P
    ub[n:2 * n, d:] = -np.eye(n)
    ub[2 * n:2 * n + m, :d] = Y
    ub[2 * n + m:, :d] = -Y
    rhs = np.concatenate([np.zeros(2 * n), np.ones(2 * m)])
    lower = np.concatenate([np.full(d, -np.inf), np.zeros(n)])
    out = lp.solve(lp.LpProblem(
        np.concatenate([lin, weights]),
        eq_rows=eq, eq_rhs=np.ones(1),
        ub_rows=ub, ub_rhs=rhs, lower=lower))
    if out.status != "optimal":
        raise NumericalFailure(f"facet subproblem ended {out.status}")
    return float(out.value), out.x[:d]


def c_mu(system, sigma, mu):
    """Minimum of the mu-average of |<h, .>| over the unit sphere of the
    sigma base norm.

    The sphere bounds the polar of the order interval [-sigma, sigma], so
    its facets pair with the interval's vertices at one; the minimum over
    each facet is an LP with epigraph variables for the absolute values,
    one facet per mirror pair.  The measure must have barycenter sigma,
    which caps the result at one.
    """
    if not isinstance(mu, SimpleMeasure):
        raise InvalidInput("expected a SimpleMeasure")
    if mu.system != system:
        raise SystemMismatch("measure lives on another system")
    system._require_polytopic()
    if float(np.max(np.abs(mu.barycenter.coords - sigma.coords))) > _BARY_TOL:
        raise InvalidInput("measure barycenter must equal sigma")
    Y = _interval_vertices(system, sigma)
    lin = np.zeros(system.dim)
    best = math.inf
    for i in range(Y.shape[0]):
        value, _ = _facet_minimum(Y, i, mu.weights, mu.points, lin)
        best = min(best, value)
    if best < -1e-9 or best > 1.0 + 1e-9:
        raise NumericalFailure(f"variational constant {best} escaped [0, 1]")
    return min(max(best, 0.0), 1.0)


@dataclass(frozen=True)
class DichotomicBelowVerdict:
    """Outcome of the exact two-atom order decision; a refutation carries a
    functional whose nu-average of |<h, .>| beats the mu-average by
    `margin`."""

    below: bool
    functional: Optional[systems.Functional] = None
    margin: Optional[float] = None


def dichotomic_below_exact(nu, mu):
    """Exact Choquet-order decision for nu with at most two atoms.

    For two-atom nu the order is equivalent to the mu-average of |<h, .>|
    dominating the nu-average for every h.  The difference is minimized
    over the sigma-base-norm sphere facet by facet; nu's side, a maximum
    over its sign patterns, turns each facet problem into at most four LPs.
    A negative minimum yields the violating h.
    """
    _same_system(nu, mu)
    if len(nu.atoms) > 2:
        raise NotDichotomic("exact order check needs at most two atoms")
    if _barycenter_gap(nu, mu) > _BARY_TOL:
        raise InvalidInput("the two-atom characterization needs a common "
                           "barycenter")
    system = nu.system
    system._require_polytopic()
    Y = _interval_vertices(system, nu.barycenter)
    target = nu.weights[:, None] * nu.points
    k = target.shape[0]
    best = math.inf
    best_h = None
    for i in range(Y.shape[0]):
        for eps in itertools.product((1.0, -1.0), repeat=k):
            lin = -(np.array(eps) @ target)
            value, hc = _facet_minimum(Y, i, mu.weights, mu.points, lin)
            if value < best:
                best, best_h = value, hc
    if best >= -1e-9:
        return DichotomicBelowVerdict(True)
    h = system.functional(best_h)
    margin = _abs_gap(nu, mu, h)
    if not margin > 0.0:
        raise NumericalFailure("exact order check lost its violation")
    return DichotomicBelowVerdict(False, functional=h, margin=margin)


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Estimate of the variational constant for the sphere-uniform measure
    on a ball system, with the analytic value of the sphere's first
    absolute moment for reference."""

    value: float
    stderr: float
    reference: float
    samples: int
    seed: int


def c_mu_monte_carlo(system=None, sigma=None, samples=100000, seed=0):
    """Monte Carlo variational constant of the l2 ball with sphere-uniform
    measure.

    Samples the sphere, scans a grid of unit functionals (the sigma base
    norm here is max(|t|, ||phi||_2)), and refines the best one by
    coordinate descent on the sample average of |<h, .>|.  The reference
    value E|x_1| = Gamma(n/2) / (sqrt(pi) Gamma((n+1)/2)) is the exact
    constant for every ball dimension n.
    """
    if system is None:
        system = systems.ball(3)
    if system.kind != systems.CENTRALLY_SYMMETRIC or system.ball_norm != "l2":
        raise InvalidInput("the Monte Carlo constant is specialized to the "
                           "l2 ball")
    if sigma is not None and not systems.is_center(system, sigma):
        raise InvalidInput("sigma must be the center of the ball")
    samples = int(samples)
    if samples < 2:
        raise InvalidInput("need at least two samples")
    n = system.dim - 1
    rng = np.random.default_rng(seed)
    if n == 1:
        U = np.where(rng.standard_normal((samples, 1)) >= 0.0, 1.0, -1.0)
    else:
        G = rng.standard_normal((samples, n))
        U = G / np.linalg.norm(G, axis=1, keepdims=True)

    def score(h):
        return float(np.mean(np.abs(h[0] + U @ h[1:])))

    def normalized(h):
        nrm = max(abs(h[0]), float(np.linalg.norm(h[1:])))
        return h / nrm if nrm > 1e-12 else None

    cands = []
    for t in np.linspace(0.0, 1.0, 6):
        edge = np.zeros(n + 1)
        edge[0], edge[1] = t, 1.0
        cands.append(edge.copy())
        edge[0], edge[1] = 1.0, t
        cands.append(edge)
    best = min(cands, key=score)
    best_val = score(best)
    step = 0.25
    while step > 1e-4:
        moved = False
        for j in range(n + 1):
            for s in (step, -step):
                trial = best.copy()
                trial[j] += s
                trial = normalized(trial)
                if trial is None:
                    continue
                val = score(trial)
                if val < best_val - 1e-12:
                    best, best_val, moved = trial, val, True
        if not moved:
            step *= 0.5
    vals = np.abs(best[0] + U @ best[1:])
    stderr = float(vals.std(ddof=1)) / math.sqrt(samples)
    reference = math.gamma(n / 2.0) / (math.sqrt(math.pi)
                                       * math.gamma((n + 1) / 2.0))
    return MonteCarloEstimate(best_val, stderr, reference, samples, seed)


def symmetrize(mu, group):
    """Uniform average of mu's pushforwards under a list of symmetries.

    Every map must permute the state-space vertices; coincident image atoms
    are merged.  Pass a full group (closure is not checked) to make the
    output invariant; vertex support survives, so a BoundaryMeasure stays
    one.
    """
    if not isinstance(mu, SimpleMeasure):
        raise InvalidInput("expected a SimpleMeasure")
    system = mu.system
    maps = [np.asarray(T, dtype=np.float64) for T in group]
    if len(maps) < 1:
        raise InvalidInput("group must contain at least one map")
    for T in maps:
        if not systems.is_symmetry(system, T):
            raise NotASymmetry("map does not permute the state-space vertices")
    share = 1.0 / len(maps)
    points, weights = [], []
    for T in maps:
        for w, p in mu.atoms:
            img = T @ p.coords
            for i, q in enumerate(points):
                if float(np.max(np.abs(q - img))) <= _MERGE_TOL:
                    weights[i] += share * w
                    break
            else:
                points.append(img)
                weights.append(share * w)
    cls = BoundaryMeasure if isinstance(mu, BoundaryMeasure) else SimpleMeasure
    return cls(tuple((w, system.vector(p)) for w, p in zip(weights, points)))
