"""Cross norms and tensor-cone membership on pairs of systems.

Two element types live here.  TensorElement is a coefficient matrix over a
pair of systems; it carries the injective/projective norm machinery and the
min/max cone tests (separability).  DichotomicTensor is the (sigma, y_1..y_g)
family behind dichotomic steering: a barycenter plus one signed component per
measurement setting, constrained so that sigma +- y_x stays in the cone.

The steering norm is the workhorse: a single LP over sign-vector-indexed cone
elements whose optimum is the norm, whose primal solution is a hidden-state
decomposition, and whose duals assemble into a steering witness.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import guards, lp, systems
from .errors import InvalidInput, NumericalFailure
from .geometry import vertices_of_polytope

_WITNESS_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class TensorElement:
    """Element of the tensor product of two systems, as a coefficient matrix.

    coeffs[i, j] multiplies (basis_A_i tensor basis_B_j); rows belong to
    system_a, columns to system_b.
    """

    system_a: systems.GptSystem
    system_b: systems.GptSystem
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.shape != (self.system_a.dim, self.system_b.dim):
            raise InvalidInput(
                f"coeffs must be {self.system_a.dim} x {self.system_b.dim}, "
                f"got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coeffs must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)


def tensor_product(rho_a, rho_b):
    """Simple tensor of two vectors as a TensorElement."""
    return TensorElement(
        system_a=rho_a.system, system_b=rho_b.system,
        coeffs=np.outer(rho_a.coords, rho_b.coords))


@dataclass(frozen=True, eq=False)
class DichotomicTensor:
    """Barycenter sigma plus signed components y_1..y_g on one system.

    Valid tensors satisfy sigma +- y_x in V+ for every x, which is exactly
    membership of the (sigma, y) family in the max cone against the hypercube
    system; <unit, sigma> must be 1.
    """

    sigma: systems.Vector
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise InvalidInput("need at least one component")
        system = self.sigma.system
        for x, y in enumerate(comps):
            if not isinstance(y, systems.Vector) or y.system != system:
                raise InvalidInput(
                    f"component {x} is not a vector on the sigma system")
        if abs(systems.pair(system.unit_functional, self.sigma) - 1.0) > 1e-9:
            raise InvalidInput("barycenter is not normalized")
        for x, y in enumerate(comps):
            for signed in (self.sigma + y, self.sigma - y):
                if not systems.cone_member(system, signed).member:
                    raise InvalidInput(
                        f"component {x} leaves the cone: sigma +- y_x "
                        "must stay in V+")
        object.__setattr__(self, "components", comps)

    @staticmethod
    def unchecked(sigma, components):
        """Skip validation; for internal construction of known-good tensors."""
        t = object.__new__(DichotomicTensor)
        object.__setattr__(t, "sigma", sigma)
        object.__setattr__(t, "components", tuple(components))
        return t

    @property
    def system(self):
        return self.sigma.system

    @property
    def g(self):
        return len(self.components)


def embed_dichotomic(t):
    """The (sigma, y) family as a TensorElement over hypercube(g) x system.

    Row 0 of the coefficient matrix is sigma, row x is y_x.
    """
    rows = [t.sigma.coords] + [y.coords for y in t.components]
    return TensorElement(
        system_a=systems.hypercube(t.g), system_b=t.system,
        coeffs=np.stack(rows))


def injective_norm_dichotomic(t):
    """Largest sigma order-unit norm among the components."""
    system = t.system
    systems.assert_interior(system, t.sigma)
    return max(
        systems.order_unit_norm(system, y, unit=t.sigma)
        for y in t.components)


def sign_vectors(g):
    """All of {+1, -1}^g in a fixed deterministic order."""
    return list(itertools.product((1, -1), repeat=g))


@dataclass(frozen=True)
class SteeringNormResult:
    """Value plus both certificates of the steering-norm LP.

    decomposition maps each sign vector to a cone element phi_eps with
    sum_eps eps_x phi_eps = y_x and sum_eps phi_eps <= value * sigma; when
    value <= 1 this is a hidden-state model.  The witness (w0, w) satisfies
    sum_x eps_x w_x <= w0 on the cone for every sign vector, <w0, sigma> = 1,
    and sum_x <w_x, y_x> = value.
    """

    value: float
    decomposition: dict
    witness_base: systems.Functional
    witness_components: tuple


def steering_norm(t):
    """Steering norm of a dichotomic tensor, with certificates.

    LP over phi_eps in V+ (one per sign vector eps, encoded by vertex
    weights): minimize lambda subject to sum_eps eps_x phi_eps = y_x and
    sum_eps phi_eps <= lambda sigma.
    """
    system = t.system
    system._require_polytopic()
    systems.assert_interior(system, t.sigma)
    guards.check("sign_vectors", t.g)

    V = system.vertices
    F = system.cone_facets
    n, d = V.shape
    g = t.g
    eps_list = sign_vectors(g)
    S = len(eps_list)
    ncols = S * n + 1

    A_eq = np.zeros((g * d, ncols))
    for s, eps in enumerate(eps_list):
        block = V.T  # d x n
        for x in range(g):
            A_eq[x * d:(x + 1) * d, s * n:(s + 1) * n] = eps[x] * block
    b_eq = np.concatenate([y.coords for y in t.components])

    FV = F @ V.T  # facet value at each vertex, >= 0
    A_ub = np.zeros((F.shape[0], ncols))
    A_ub[:, :-1] = np.tile(FV, (1, S))
    A_ub[:, -1] = -(F @ t.sigma.coords)
    b_ub = np.zeros(F.shape[0])

    obj = np.zeros(ncols)
    obj[-1] = 1.0
    out = lp.solve(lp.LpProblem(
        objective=obj, eq_rows=A_eq, eq_rhs=b_eq, ub_rows=A_ub, ub_rhs=b_ub))
    if out.status != "optimal":
        raise NumericalFailure(f"steering norm LP ended {out.status}")

    value = float(out.value)
    decomposition = {}
    for s, eps in enumerate(eps_list):
        c = out.x[s * n:(s + 1) * n]
        decomposition[eps] = system.vector(V.T @ c)

    w = tuple(
        system.functional(out.dual_eq[x * d:(x + 1) * d]) for x in range(g))
    w0_raw = -(F.T @ out.dual_ub)
    shift = 1.0 - float(w0_raw @ t.sigma.coords)
    if shift < -1e-7:
        raise NumericalFailure("steering witness normalization failed")
    w0 = system.functional(w0_raw + max(shift, 0.0) * system.unit)

    _check_witness_certificate(t, value, w0, w)
    return SteeringNormResult(
        value=value, decomposition=decomposition,
        witness_base=w0, witness_components=w)


def _check_witness_certificate(t, value, w0, w):
    # worst sign pattern at vertex i is sum_x |<w_x, v_i>|
    V = t.system.vertices
    Wv = np.array([f.coords for f in w]) @ V.T
    slack = (w0.coords @ V.T) - np.abs(Wv).sum(axis=0)
    if slack.min() < -_WITNESS_TOL:
        raise NumericalFailure("steering witness violates the sign condition")
    attained = sum(
        float(f.coords @ y.coords) for f, y in zip(w, t.components))
    if abs(attained - value) > _WITNESS_TOL * (1.0 + abs(value)):
        raise NumericalFailure("steering witness does not attain the norm")


def projective_norm(t):
    """Projective cross norm of the base norms on the two systems.

    LP: minimal total |c| over representations of t as a signed combination
    of vertex products v_i tensor w_j.  At most 1 exactly when the element is
    a difference bounded inside conv(K_A x K_B) both ways; for normalized max
    cone elements, <= 1 iff separable.
    """
    t.system_a._require_polytopic()
    t.system_b._require_polytopic()
    Va, Vb = t.system_a.vertices, t.system_b.vertices
    na, nb = Va.shape[0], Vb.shape[0]
    cols = np.einsum("ip,jq->ijpq", Va, Vb).reshape(na * nb, -1).T
    A_eq = np.concatenate([cols, -cols], axis=1)
    b_eq = t.coeffs.reshape(-1)
    obj = np.ones(2 * na * nb)
    out = lp.solve(lp.LpProblem(objective=obj, eq_rows=A_eq, eq_rhs=b_eq))
    if out.status != "optimal":
        raise NumericalFailure(f"projective norm LP ended {out.status}")
    return float(out.value)


def sigma_interval_vertices(system, sigma):
    """Vertices of the sigma interval {y: sigma +- y in V+} (the unit ball
    of the sigma order-unit norm)."""
    system._require_polytopic()
    F = system.cone_facets
    Fs = F @ sigma.coords
    return vertices_of_polytope(
        np.concatenate([F, -F], axis=0), np.concatenate([Fs, Fs]))


def projective_norm_dichotomic(t):
    """Projective cross norm of (y_1..y_g) in linf^g tensor (V, sigma norm).

    Columns are eps tensor b over sign vectors eps and vertices b of the
    sigma interval {y: sigma +- y in V+}; the value is the least total weight
    representing the components.  Always an upper bound for the steering
    norm: each weighted column c (eps tensor b) splits into cone elements
    c/2 (sigma + b) on eps and c/2 (sigma - b) on -eps, with total mass
    exactly c sigma.
    """
    system = t.system
    system._require_polytopic()
    systems.assert_interior(system, t.sigma)
    guards.check("sign_vectors", t.g)
    B = sigma_interval_vertices(system, t.sigma)
    g, d = t.g, system.dim
    eps_list = sign_vectors(g)
    cols = np.zeros((g * d, len(eps_list) * B.shape[0]))
    k = 0
    for eps in eps_list:
        for b in B:
            col = np.concatenate([e * b for e in eps])
            cols[:, k] = col
            k += 1
    A_eq = np.concatenate([cols, -cols], axis=1)
    b_eq = np.concatenate([y.coords for y in t.components])
    obj = np.ones(A_eq.shape[1])
    out = lp.solve(lp.LpProblem(objective=obj, eq_rows=A_eq, eq_rhs=b_eq))
    if out.status != "optimal":
        raise NumericalFailure(f"projective sigma norm LP ended {out.status}")
    return float(out.value)


def max_cone_member(t, tol=1e-9):
    """Whether t pairs nonnegatively with every product of effects."""
    EA = np.array(
        [f.coords for f in systems.extreme_effects(t.system_a)])
    EB = np.array(
        [f.coords for f in systems.extreme_effects(t.system_b)])
    return bool(np.min(EA @ t.coeffs @ EB.T) >= -tol)


@dataclass(frozen=True)
class MinConeResult:
    """Separability verdict with a certificate either way.

    member True comes with nonnegative coefficients over vertex products
    reconstructing the element; member False comes with a witness matrix W
    that is nonnegative on every vertex product and strictly negative on the
    element.
    """

    member: bool
    coefficients: Optional[np.ndarray]
    witness: Optional[np.ndarray]


def min_cone_member(t):
    """Membership of t in the separable cone, by LP feasibility."""
    t.system_a._require_polytopic()
    t.system_b._require_polytopic()
    Va, Vb = t.system_a.vertices, t.system_b.vertices
    na, nb = Va.shape[0], Vb.shape[0]
    cols = np.einsum("ip,jq->ijpq", Va, Vb).reshape(na * nb, -1).T
    b_eq = t.coeffs.reshape(-1)
    out = lp.feasibility(lp.LpProblem(
        objective=np.zeros(na * nb), eq_rows=cols, eq_rhs=b_eq))
    if out.status == "optimal":
        return MinConeResult(
            member=True, coefficients=out.x.reshape(na, nb), witness=None)
    if out.status != "infeasible":
        raise NumericalFailure(f"separability LP ended {out.status}")
    da, db = t.system_a.dim, t.system_b.dim
    W = -out.dual_eq.reshape(da, db)
    pairings = Va @ W @ Vb.T
    if pairings.min() < -1e-7 or float(np.sum(W * t.coeffs)) > -1e-12:
        raise NumericalFailure("separability witness failed verification")
    return MinConeResult(member=False, coefficients=None, witness=W)
