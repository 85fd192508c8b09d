"""Assemblages, hidden-state certification, robustness, and witnesses.

An assemblage is a finite family of subnormalized states rho_{a|x} sharing a
barycenter sigma.  The central question is whether it admits a hidden-state
model (an ensemble plus response functions); `lhs_check` decides it by LP
over deterministic strategies and returns either the model or a certificate
of steering.  Robustness measures how much trivial noise the assemblage
tolerates before turning classical; for two-outcome assemblages it is the
reciprocal of the steering norm.

The measurement side of the duality lives here too: a family of measurements
on a system becomes an assemblage on the dual system, and joint
measurability becomes the hidden-state question for that assemblage.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import guards, lp, sampling, systems, tensors
from .errors import (GuardExceeded, InvalidInput, NotDichotomic,
                     NumericalFailure)

_SUM_TOL = 1e-8
_DOMINANCE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class Assemblage:
    """Family of subnormalized states rho_{a|x} with common barycenter.

    entries[x][a] is the state steered to by outcome a of setting x; every
    entry lies in V+ and each setting's outcomes sum to the barycenter.
    """

    barycenter: systems.Vector
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if len(rows) < 1:
            raise InvalidInput("assemblage needs at least one setting")
        system = self.barycenter.system
        if abs(systems.pair(system.unit_functional, self.barycenter)
               - 1.0) > 1e-9:
            raise InvalidInput("barycenter is not normalized")
        for x, row in enumerate(rows):
            if len(row) < 1:
                raise InvalidInput(f"setting {x} has no outcomes")
            total = np.zeros(system.dim)
            for a, rho in enumerate(row):
                if not isinstance(rho, systems.Vector) \
                        or rho.system != system:
                    raise InvalidInput(
                        f"entry ({a}|{x}) is not a vector on the "
                        "barycenter system")
                if not systems.cone_member(system, rho).member:
                    raise InvalidInput(f"entry ({a}|{x}) is outside V+")
                total = total + rho.coords
            if np.max(np.abs(total - self.barycenter.coords)) > _SUM_TOL:
                raise InvalidInput(
                    f"setting {x} outcomes do not sum to the barycenter")
        object.__setattr__(self, "entries", rows)

    @property
    def system(self):
        return self.barycenter.system

    @property
    def shape(self):
        return tuple(len(row) for row in self.entries)

    @property
    def g(self):
        return len(self.entries)


def trivial_assemblage(sigma, shape):
    """The assemblage rho_{a|x} = sigma / k_x; classical for any sigma."""
    entries = tuple(
        tuple(sigma * (1.0 / k) for _ in range(k)) for k in shape)
    return Assemblage(barycenter=sigma, entries=entries)


def mixed_with_trivial(asm, s):
    """Mix s of the assemblage with 1 - s of the trivial one (same sigma)."""
    if not 0.0 <= s <= 1.0:
        raise InvalidInput("mixing weight must lie in [0, 1]")
    entries = tuple(
        tuple(rho * s + asm.barycenter * ((1.0 - s) / len(row))
              for rho in row)
        for row in asm.entries)
    return Assemblage(barycenter=asm.barycenter, entries=entries)


def to_dichotomic_tensor(asm):
    """The (sigma, y) family of a two-outcome assemblage, y_x = rho+ - rho-.

    Outcome index 0 plays the "+" role.  Validation is inherited: with both
    entries in V+ and summing to sigma, sigma +- y_x = 2 rho_{-/+|x} stays
    in the cone, so the unchecked constructor is sound here.
    """
    if any(k != 2 for k in asm.shape):
        raise NotDichotomic(
            "dichotomic reduction needs two outcomes per setting, "
            f"got shape {asm.shape}")
    comps = tuple(row[0] - row[1] for row in asm.entries)
    return tensors.DichotomicTensor.unchecked(asm.barycenter, comps)


def from_dichotomic_tensor(t):
    """Inverse of to_dichotomic_tensor: rho_{+-|x} = (sigma +- y_x) / 2."""
    entries = tuple(
        ((t.sigma + y) * 0.5, (t.sigma - y) * 0.5) for y in t.components)
    return Assemblage(barycenter=t.sigma, entries=entries)


@dataclass(frozen=True, eq=False)
class Witness:
    """Steering witness (w_1..w_g), optionally with a dominating base w_0.

    The defining condition is sum_x eps_x w_x <= w_0 for every sign vector
    eps, i.e. the base dominates every signed combination on the cone.  A
    sigma-normalized witness additionally has <w_0, sigma> = 1; classical
    two-outcome assemblages with that barycenter then satisfy
    sum_x |<w_x, y_x>| <= 1.
    """

    components: tuple
    base: Optional[systems.Functional] = None
    normalized: bool = False

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise InvalidInput("witness needs at least one component")
        system = comps[0].system
        for x, w in enumerate(comps):
            if not isinstance(w, systems.Functional) or w.system != system:
                raise InvalidInput(
                    f"witness component {x} is not a functional on one "
                    "common system")
        if self.base is not None:
            if not isinstance(self.base, systems.Functional) \
                    or self.base.system != system:
                raise InvalidInput("witness base lives on another system")
            self._check_dominance(system, comps)
        elif self.normalized:
            raise InvalidInput("a normalized witness must carry its base")
        object.__setattr__(self, "components", comps)

    def _check_dominance(self, system, comps):
        if system.kind == systems.POLYTOPIC:
            V = system.vertices
            need = np.sum(
                np.abs(np.stack([V @ w.coords for w in comps])), axis=0)
            have = V @ self.base.coords
            if np.min(have - need) < -_DOMINANCE_TOL:
                raise InvalidInput(
                    "base does not dominate the signed combinations")
            return
        guards.check("sign_vectors", len(comps))
        for eps in tensors.sign_vectors(len(comps)):
            combo = self.base.coords - sum(
                e * w.coords for e, w in zip(eps, comps))
            if not systems.in_dual_cone(
                    system, system.functional(combo), tol=_DOMINANCE_TOL):
                raise InvalidInput(
                    "base does not dominate the signed combinations")

    @property
    def system(self):
        return self.components[0].system

    @property
    def g(self):
        return len(self.components)

    def detection_value(self, target):
        """sum_x |<w_x, y_x>| against an assemblage or dichotomic tensor.

        For a sigma-normalized witness, any classical assemblage with that
        barycenter scores at most 1; a score above 1 certifies steering.
        """
        if isinstance(target, Assemblage):
            target = to_dichotomic_tensor(target)
        if target.g != self.g:
            raise InvalidInput("witness and target have different g")
        return float(sum(
            abs(systems.pair(w, y))
            for w, y in zip(self.components, target.components)))


@dataclass(frozen=True, eq=False)
class LhsModel:
    """Hidden-state model: ensemble (q(omega), rho_omega) plus responses.

    responses[omega][x][a] is the probability of reporting outcome a for
    setting x when the hidden state is omega; models built by lhs_check are
    deterministic.  Zero-weight strategies are dropped from the ensemble
    (their responses would be the uniform 1/k_x by convention).
    """

    weights: np.ndarray
    states: tuple
    responses: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        states = tuple(self.states)
        responses = tuple(tuple(np.asarray(r, dtype=np.float64)
                                for r in row) for row in self.responses)
        if not (w.size == len(states) == len(responses)) or w.size < 1:
            raise InvalidInput("ensemble, states and responses must align")
        if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise InvalidInput("ensemble weights must be positive")
        if abs(float(np.sum(w)) - 1.0) > _SUM_TOL:
            raise InvalidInput("ensemble weights must sum to 1")
        system = states[0].system
        unit = system.unit_functional
        for rho in states:
            if not isinstance(rho, systems.Vector) or rho.system != system:
                raise InvalidInput("hidden states must share one system")
            if abs(systems.pair(unit, rho) - 1.0) > 1e-6:
                raise InvalidInput("hidden states must be normalized")
        for row in responses:
            for r in row:
                if np.any(r < -1e-12) or np.any(r > 1.0 + 1e-12):
                    raise InvalidInput("responses must lie in [0, 1]")
                if abs(float(np.sum(r)) - 1.0) > 1e-9:
                    raise InvalidInput("responses must sum to 1 per setting")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "responses", responses)

    @property
    def system(self):
        return self.states[0].system

    def reconstruction_error(self, asm):
        """Largest coordinate deviation of the model from the assemblage."""
        if any(len(row) != k for row, k in
               zip(self.responses[0], asm.shape)) \
                or len(self.responses[0]) != asm.g:
            raise InvalidInput("model responses do not match the shape")
        worst = 0.0
        for x, row in enumerate(asm.entries):
            for a, rho in enumerate(row):
                acc = np.zeros(asm.system.dim)
                for q, state, resp in zip(
                        self.weights, self.states, self.responses):
                    acc = acc + q * resp[x][a] * state.coords
                worst = max(worst, float(np.max(np.abs(acc - rho.coords))))
        return worst

    def reconstructs(self, asm, tol=_SUM_TOL):
        return self.reconstruction_error(asm) <= tol


@dataclass(frozen=True)
class LhsVerdict:
    """Outcome of lhs_check: a model when classical, certificates when not.

    For steerable two-outcome assemblages `witness` is a sigma-normalized
    Witness with detection value above 1; for general shapes `functionals`
    holds the family h_{a|x} that is nonpositive on every deterministic
    strategy yet pairs positively with the assemblage (`violation`).
    """

    classical: bool
    model: Optional[LhsModel] = None
    witness: Optional[Witness] = None
    functionals: Optional[tuple] = None
    violation: Optional[float] = None


def _strategies(shape):
    return list(itertools.product(*(range(k) for k in shape)))


def lhs_check(asm):
    """Decide whether the assemblage has a hidden-state model.

    The LP searches cone elements phi_omega, one per deterministic strategy
    omega (a joint choice of outcome for every setting), reproducing each
    rho_{a|x} as the sum of phi_omega over strategies answering a at x.
    Feasible: the normalized phi_omega are the hidden states.  Infeasible:
    the Farkas dual supplies the steering certificate.
    """
    system = asm.system
    system._require_polytopic()
    shape = asm.shape
    n_atoms = 1
    for k in shape:
        n_atoms *= k
    guards.check("lhs_atoms", n_atoms)
    omegas = _strategies(shape)
    V = system.vertices
    n, d = V.shape
    offsets = np.concatenate([[0], np.cumsum(shape)])
    A = np.zeros((d * int(offsets[-1]), n_atoms * n))
    b = np.zeros(A.shape[0])
    for x, row in enumerate(asm.entries):
        for a, rho in enumerate(row):
            off = d * (int(offsets[x]) + a)
            b[off:off + d] = rho.coords
    for j, omega in enumerate(omegas):
        for x in range(len(shape)):
            off = d * (int(offsets[x]) + omega[x])
            A[off:off + d, j * n:(j + 1) * n] = V.T
    out = lp.feasibility(lp.LpProblem(
        objective=np.zeros(n_atoms * n), eq_rows=A, eq_rhs=b))
    if out.status == "optimal":
        return LhsVerdict(classical=True, model=_build_model(
            asm, omegas, out.x.reshape(n_atoms, n) @ V))
    if out.status != "infeasible":
        raise NumericalFailure(f"strategy LP ended {out.status}")
    return _steerable_verdict(asm, omegas, offsets, out.dual_eq)


def _build_model(asm, omegas, phi):
    system = asm.system
    unit = system.unit_functional.coords
    weights, states, responses = [], [], []
    for j, omega in enumerate(omegas):
        q = float(unit @ phi[j])
        if q <= 1e-15:
            continue
        weights.append(q)
        states.append(system.vector(phi[j] / q))
        resp = []
        for x, k in enumerate(asm.shape):
            row = np.zeros(k)
            row[omega[x]] = 1.0
            resp.append(row)
        responses.append(tuple(resp))
    total = float(np.sum(weights))
    model = LhsModel(
        weights=np.asarray(weights) / total,
        states=tuple(states), responses=tuple(responses))
    err = model.reconstruction_error(asm)
    if err > _SUM_TOL:
        raise NumericalFailure(
            f"hidden-state model misses the assemblage by {err:.2e}")
    return model


def _steerable_verdict(asm, omegas, offsets, dual):
    system = asm.system
    d = system.dim
    h = [[system.functional(dual[d * (int(offsets[x]) + a):
                                 d * (int(offsets[x]) + a) + d])
          for a in range(k)] for x, k in enumerate(asm.shape)]
    P = [np.stack([system.vertices @ f.coords for f in row]) for row in h]
    worst = max(
        float(np.max(sum(P[x][omega[x]] for x in range(len(omegas[0])))))
        for omega in omegas)
    if worst > _DOMINANCE_TOL:
        raise NumericalFailure(
            "steering certificate is positive on a deterministic strategy")
    violation = float(sum(
        systems.pair(h[x][a], rho)
        for x, row in enumerate(asm.entries) for a, rho in enumerate(row)))
    if violation <= 1e-12:
        raise NumericalFailure("steering certificate does not separate")
    witness = None
    if all(k == 2 for k in asm.shape):
        witness = _witness_from_farkas(asm, h)
    return LhsVerdict(classical=False, witness=witness,
                      functionals=tuple(tuple(row) for row in h),
                      violation=violation)


def _witness_from_farkas(asm, h):
    """Normalize the Farkas family of a two-outcome assemblage to a witness.

    Writing h_{a|x} = m_x + eps_a u_x, strategy-nonpositivity reads
    sum_x |<u_x, v>| <= <-sum_x m_x, v> on vertices, so -sum m_x is a base
    for the components u_x; scaling by its value on sigma normalizes, and
    the Farkas separation turns into a detection value above 1.
    """
    system = asm.system
    m = sum(0.5 * (row[0].coords + row[1].coords) for row in h)
    u = [0.5 * (row[0].coords - row[1].coords) for row in h]
    tau = float(-m @ asm.barycenter.coords)
    if tau <= 1e-12:
        raise NumericalFailure("steering certificate cannot be normalized")
    base = -m / tau
    comps = [c / tau for c in u]
    V = system.vertices
    deficit = float(np.max(
        np.sum(np.abs(np.stack([V @ c for c in comps])), axis=0)
        - V @ base))
    if deficit > 1e-6:
        raise NumericalFailure(
            f"witness dominance fails by {deficit:.2e} after scaling")
    if deficit > 0.0:
        base = (base + deficit * system.unit_functional.coords) \
            / (1.0 + deficit)
        comps = [c / (1.0 + deficit) for c in comps]
    witness = Witness(
        components=tuple(system.functional(c) for c in comps),
        base=system.functional(base), normalized=True)
    if witness.detection_value(asm) <= 1.0 + 1e-12:
        raise NumericalFailure("witness lost its violation in normalization")
    return witness


def optimal_witness(asm):
    """Witness attaining the steering norm of the dichotomic reduction."""
    res = tensors.steering_norm(to_dichotomic_tensor(asm))
    return Witness(components=res.witness_components,
                   base=res.witness_base, normalized=True)


def robustness(asm, disk_m=64):
    """Largest s for which s rho_{a|x} + (1-s) sigma/k_x stays classical.

    Two-outcome assemblages use the closed form 1/steering_norm (capped at
    1); centrally symmetric systems reduce to polytopic twins, with an
    inner/outer polygon bracket of disk_m vertices for the l2 ball.  Other
    shapes fall back to bisection with lhs_check at tolerance 1e-6, so the
    returned s tests classical and s + 2e-6 tests steerable.
    """
    system = asm.system
    systems.assert_interior(system, asm.barycenter)
    if all(k == 2 for k in asm.shape):
        t = to_dichotomic_tensor(asm)
        if system.kind == systems.POLYTOPIC:
            value = tensors.steering_norm(t).value
        else:
            value = _cs_steering_norm(t, disk_m)
        return 1.0 if value <= 1.0 else 1.0 / value
    if lhs_check(asm).classical:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if lhs_check(mixed_with_trivial(asm, mid)).classical:
            lo = mid
        else:
            hi = mid
    return lo


def _cs_steering_norm(t, disk_m):
    """Steering norm on a ball system via an equivalent polytopic problem.

    l1 and linf balls have exact polytopic twins (cross polytope and
    hypercube).  The l2 ball needs the barycenter at the center; the
    problem then projects onto the span of the spatial components, which
    must fit in a plane, and the disk value is bracketed between regular
    polygons inscribed and circumscribed with disk_m vertices.
    """
    system = t.system
    n = system.dim - 1
    if system.ball_norm == "l1" or n == 1:
        twin = systems.cross_polytope(n)
    elif system.ball_norm == "linf":
        twin = systems.hypercube(n)
    else:
        return _disk_bracket(t, disk_m)
    t_twin = tensors.DichotomicTensor.unchecked(
        twin.vector(t.sigma.coords),
        tuple(twin.vector(y.coords) for y in t.components))
    return tensors.steering_norm(t_twin).value


def _disk_bracket(t, disk_m):
    system = t.system
    if not systems.is_center(system, t.sigma):
        raise InvalidInput(
            "l2 steering norm needs the barycenter at the center")
    S = np.array([y.coords[0] for y in t.components])
    Z = np.stack([y.coords[1:] for y in t.components])
    sv = np.linalg.svd(Z, compute_uv=False)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0]))) if sv.size else 0
    if rank > 2:
        raise GuardExceeded(
            "l2 steering reduction handles spatial rank <= 2, "
            f"got rank {rank}")
    # Orthonormal rows of Vt span the row space; rank <= 2 means the first
    # two rows suffice (padded with zeros when the space is a line).
    Vt = np.linalg.svd(Z, full_matrices=True)[2]
    Q = np.zeros((2, Z.shape[1]))
    Q[:min(2, Vt.shape[0])] = Vt[:min(2, Vt.shape[0])]
    plane = np.column_stack([S, Z @ Q[0], Z @ Q[1]])
    values = []
    for radius in (1.0, 1.0 / np.cos(np.pi / disk_m)):
        ang = 2.0 * np.pi * np.arange(disk_m) / disk_m
        poly = systems.polytopic(
            np.column_stack(
                [np.ones(disk_m), radius * np.cos(ang),
                 radius * np.sin(ang)]),
            unit=np.array([1.0, 0.0, 0.0]))
        t_poly = tensors.DichotomicTensor.unchecked(
            poly.vector(np.array([1.0, 0.0, 0.0])),
            tuple(poly.vector(row) for row in plane))
        values.append(tensors.steering_norm(t_poly).value)
    inner, outer = values
    if outer > inner + 1e-9:
        raise NumericalFailure("disk bracket lost its ordering")
    if inner - outer > 1e-2 * max(1.0, inner):
        raise NumericalFailure(
            f"disk bracket too wide: [{outer:.6f}, {inner:.6f}]")
    return 0.5 * (inner + outer)


@dataclass(frozen=True)
class WitnessVerdict:
    """witness_verify outcome; `base` is the dominating w_0 found (valid)."""

    valid: bool
    strict: bool
    base: Optional[systems.Functional] = None


def witness_verify(w, sigma):
    """Check sigma-normalizability and strictness of witness components.

    Valid: some w_0 in the dual cone with <w_0, sigma> = 1 dominates all
    signed combinations of the components.  On a polytopic system the 2^g
    sign constraints collapse to one absolute-value bound per vertex.
    Strict: additionally the sigma base norms of the components sum above 1,
    so the witness detects some assemblage.
    """
    system = w.system
    system._require_polytopic()
    if sigma.system != system:
        raise InvalidInput("sigma lives on another system")
    systems.assert_interior(system, sigma)
    guards.check("sign_vectors", w.g)
    V = system.vertices
    need = np.sum(
        np.abs(np.stack([V @ f.coords for f in w.components])), axis=0)
    out = lp.feasibility(lp.LpProblem(
        objective=np.zeros(system.dim),
        eq_rows=sigma.coords.reshape(1, -1), eq_rhs=np.array([1.0]),
        ub_rows=-V, ub_rhs=-need,
        lower=np.full(system.dim, -np.inf)))
    if out.status == "infeasible":
        return WitnessVerdict(valid=False, strict=False)
    if out.status != "optimal":
        raise NumericalFailure(f"witness LP ended {out.status}")
    total = sum(
        systems.sigma_base_norm(system, f, sigma)[0] for f in w.components)
    return WitnessVerdict(valid=True, strict=total > 1.0 + 1e-9,
                          base=system.functional(out.x))


def universal_degree_lower(system, sigma, g):
    """Lower bound 1/min{g, d} on the steering degree of any g assemblage."""
    systems.assert_interior(system, sigma)
    if not isinstance(g, (int, np.integer)) or g < 1:
        raise InvalidInput("g must be a positive integer")
    return 1.0 / min(int(g), system.dim)


def dual_system(system, sigma=None):
    """The effect side of a polytopic system as a system of its own.

    States of the dual are dual-cone elements normalized against sigma;
    its vertices are the cone facets scaled to value 1 on sigma, and its
    unit functional is sigma itself.  Defaults to the vertex barycenter.
    """
    system._require_polytopic()
    if sigma is None:
        sigma = system.barycenter
    systems.assert_interior(system, sigma)
    F = system.cone_facets
    scale = F @ sigma.coords
    return systems.polytopic(F / scale[:, None], unit=sigma.coords)


def measurements_to_assemblage(system, measurements, sigma=None):
    """Measurements as an assemblage on the dual system (barycenter unit).

    The x-th setting's outcome a maps to the effect f_{a|x} viewed as a
    dual-system state; all settings share the unit functional as
    barycenter.  lhs_check on the result decides joint measurability.
    """
    meas = tuple(measurements)
    if len(meas) < 1:
        raise InvalidInput("need at least one measurement")
    for m in meas:
        if not isinstance(m, systems.Measurement) or m.system != system:
            raise InvalidInput("measurements must live on the given system")
    dual = dual_system(system, sigma)
    entries = tuple(
        tuple(dual.vector(f.coords) for f in m.effects) for m in meas)
    return Assemblage(
        barycenter=dual.vector(system.unit_functional.coords),
        entries=entries)


@dataclass(frozen=True)
class DegreeEstimate:
    """Sampled bounds on the degree ratio injective/steering over tensors.

    The worst assemblage determines the universal steering degree, so
    `inf_reading` is the estimator for it (an upper bound on the true
    infimum); `sup_reading` is reported alongside because the source
    formula can be read either way, and the two differ substantially.
    """

    inf_reading: float
    sup_reading: float
    samples: int


def steering_degree_estimate(system, sigma=None, g=2, trials=40, seed=0):
    """Estimate the universal steering degree by sampling assemblages.

    Deterministic seeds first: families of distinct sigma-interval vertices
    (the extreme dichotomic components, which drive the ratio down), then
    random tensors from mixed distributions.  The ratio of the injective to
    the steering norm of each family is its degree.
    """
    system._require_polytopic()
    if sigma is None:
        sigma = system.barycenter
    systems.assert_interior(system, sigma)
    if trials < 0:
        raise InvalidInput("trials must be nonnegative")
    rng = np.random.default_rng(seed)
    B = tensors.sigma_interval_vertices(system, sigma)
    ratios = []

    def push(t):
        value = tensors.steering_norm(t).value
        if value > 1e-12:
            ratios.append(tensors.injective_norm_dichotomic(t) / value)

    for combo in itertools.islice(
            itertools.combinations(range(B.shape[0]), g), 64):
        push(tensors.DichotomicTensor.unchecked(
            sigma, tuple(system.vector(B[j]) for j in combo)))
    for i in range(trials):
        if i % 2 == 0:
            push(sampling.random_steerable_leaning_tensor(
                rng, system, g, sigma=sigma))
        else:
            push(sampling.random_dichotomic_tensor(rng, system, g,
                                                   sigma=sigma))
    if not ratios:
        raise NumericalFailure("no nondegenerate sample families")
    return DegreeEstimate(inf_reading=float(min(ratios)),
                          sup_reading=float(max(ratios)),
                          samples=len(ratios))
