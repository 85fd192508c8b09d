"""GPT systems: cone data, states, effects, and the four norms used everywhere.

A system is the triple (V, V+, unit): an ordered vector space of dimension d,
a pointed generating cone, and the normalizing functional whose level set
carries the state space K.  Two kinds are supported:

  * polytopic: K given by its extreme points; the facet description of V+ is
    computed at construction (brute force, guarded), so both representations
    are always available;
  * centrally symmetric: K = {(1, x): ||x|| <= 1} for an l1/l2/linf ball norm,
    with analytic norms instead of enumerations (the qubit is the l2 ball in
    R^3 under the Bloch identification).

Vectors live in V, functionals in the dual; both carry their system so mixed
pairings fail loudly rather than silently misinterpreting coordinates.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import guards, lp
from .errors import (
    GuardExceeded,
    InvalidInput,
    NotInterior,
    SystemMismatch,
)
from .geometry import facets_of_cone, lex_sorted, vertices_of_polytope
from .kernels import symmetry_search

POLYTOPIC = "polytopic"
CENTRALLY_SYMMETRIC = "centrally_symmetric"
BALL_NORMS = ("l1", "l2", "linf")

_TOL = 1e-9


def _ball_norm_value(x, name):
    if name == "l1":
        return float(np.sum(np.abs(x)))
    if name == "l2":
        return float(np.linalg.norm(x))
    return float(np.max(np.abs(x))) if x.size else 0.0


def _dual_ball_name(name):
    return {"l1": "linf", "l2": "l2", "linf": "l1"}[name]


def _dual_achiever(phi, name):
    """Unit-ball point x (in the `name` ball) with <phi, x> = dual norm."""
    if name == "l2":
        n = np.linalg.norm(phi)
        return phi / n if n > 0 else np.zeros_like(phi)
    if name == "linf":
        return np.sign(phi)
    # l1 ball: best single coordinate, lowest index on ties
    if phi.size == 0 or np.all(phi == 0):
        return np.zeros_like(phi)
    k = int(np.argmax(np.abs(phi)))
    out = np.zeros_like(phi)
    out[k] = 1.0 if phi[k] >= 0 else -1.0
    return out


@dataclass(frozen=True, eq=False)
class GptSystem:
    """Immutable system data; use the factory functions below to build one."""

    kind: str
    dim: int
    vertices: Optional[np.ndarray] = None
    unit: Optional[np.ndarray] = None
    ball_norm: Optional[str] = None
    cone_facets: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == POLYTOPIC:
            self._init_polytopic()
        elif self.kind == CENTRALLY_SYMMETRIC:
            self._init_ball()
        else:
            raise InvalidInput(f"kind must be one of {POLYTOPIC!r}, {CENTRALLY_SYMMETRIC!r}")

    def _init_polytopic(self):
        if self.vertices is None:
            raise InvalidInput("polytopic system requires vertices")
        V = np.asarray(self.vertices, dtype=np.float64)
        if V.ndim != 2 or V.shape[0] < 1:
            raise InvalidInput("vertices must form a nonempty matrix")
        if not np.all(np.isfinite(V)):
            raise InvalidInput("vertices must be finite")
        n, d = V.shape
        if d != self.dim:
            raise InvalidInput("dim does not match the vertex width")
        guards.check("dim", d)
        guards.check("vertices", n)

        if self.unit is None:
            u, res, _, _ = np.linalg.lstsq(V, np.ones(n), rcond=None)
            if np.max(np.abs(V @ u - 1.0)) > 1e-8:
                raise InvalidInput(
                    "vertices must admit a unit functional pairing to 1 with every vertex")
        else:
            u = np.asarray(self.unit, dtype=np.float64).reshape(-1)
            if u.shape[0] != d or not np.all(np.isfinite(u)):
                raise InvalidInput("unit must be a finite vector of length dim")
            if np.max(np.abs(V @ u - 1.0)) > 1e-8:
                raise InvalidInput("unit must pair to 1 with every vertex")

        sv = np.linalg.svd(V, compute_uv=False)
        if sv.size < d or sv[-1] <= 1e-9 * sv[0]:
            raise InvalidInput("vertices must span the full space (generating cone)")

        for j in range(n):
            if n == 1:
                break
            others = np.delete(V, j, axis=0)
            prob = lp.LpProblem(
                np.zeros(n - 1),
                eq_rows=np.vstack([others.T, np.ones((1, n - 1))]),
                eq_rhs=np.concatenate([V[j], [1.0]]),
            )
            if lp.feasibility(prob).status == "optimal":
                raise InvalidInput(f"vertex {j} is not an extreme point of the hull")

        facets = facets_of_cone(V)
        if facets.shape[0] < d:
            raise InvalidInput("cone is not full-dimensional")

        V = V.copy()
        u = u.copy()
        V.setflags(write=False)
        u.setflags(write=False)
        facets.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "unit", u)
        object.__setattr__(self, "cone_facets", facets)

    def _init_ball(self):
        if self.ball_norm not in BALL_NORMS:
            raise InvalidInput(f"ball_norm must be one of {BALL_NORMS}")
        if self.dim < 2:
            raise InvalidInput("centrally symmetric systems need dim >= 2")
        e0 = np.zeros(self.dim)
        e0[0] = 1.0
        if self.unit is not None:
            u = np.asarray(self.unit, dtype=np.float64).reshape(-1)
            if u.shape[0] != self.dim or np.max(np.abs(u - e0)) > 1e-12:
                raise InvalidInput(
                    "centrally symmetric unit must be the first coordinate functional")
        e0.setflags(write=False)
        object.__setattr__(self, "unit", e0)
        object.__setattr__(self, "vertices", None)
        object.__setattr__(self, "cone_facets", None)

    # -- convenience accessors -------------------------------------------

    @property
    def n_vertices(self):
        return 0 if self.vertices is None else self.vertices.shape[0]

    def vector(self, coords):
        return Vector(np.asarray(coords, dtype=np.float64), self)

    def functional(self, coords):
        return Functional(np.asarray(coords, dtype=np.float64), self)

    def vertex(self, i):
        self._require_polytopic()
        return self.vector(self.vertices[i])

    @property
    def unit_functional(self):
        return Functional(np.asarray(self.unit), self)

    @property
    def barycenter(self):
        if self.kind == POLYTOPIC:
            return self.vector(self.vertices.mean(axis=0))
        c = np.zeros(self.dim)
        c[0] = 1.0
        return self.vector(c)

    def _require_polytopic(self):
        if self.kind != POLYTOPIC:
            raise InvalidInput("operation requires a polytopic system")

    def __eq__(self, other):
        if not isinstance(other, GptSystem):
            return NotImplemented
        if self.kind != other.kind or self.dim != other.dim:
            return False
        if self.kind == CENTRALLY_SYMMETRIC:
            return self.ball_norm == other.ball_norm
        if self.n_vertices != other.n_vertices:
            return False
        # vertex order is a construction detail, not part of the system;
        # the unit may carry solver noise when inferred, so compare loosely
        return (np.allclose(lex_sorted(self.vertices),
                            lex_sorted(other.vertices), atol=1e-9)
                and np.allclose(self.unit, other.unit, atol=1e-9))

    def __repr__(self):
        if self.kind == CENTRALLY_SYMMETRIC:
            return f"GptSystem({self.ball_norm} ball, dim={self.dim})"
        return f"GptSystem(polytopic, dim={self.dim}, vertices={self.n_vertices})"


def _coerce(coords, dim, what):
    c = np.asarray(coords, dtype=np.float64).reshape(-1)
    if c.shape[0] != dim:
        raise InvalidInput(f"{what} coordinates must have length {dim}")
    if not np.all(np.isfinite(c)):
        raise InvalidInput(f"{what} coordinates must be finite")
    c = c.copy()
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class Vector:
    """Element of V, tagged with its system."""

    coords: np.ndarray
    system: GptSystem

    def __post_init__(self):
        object.__setattr__(self, "coords", _coerce(self.coords, self.system.dim, "vector"))

    def _same(self, other):
        if not isinstance(other, Vector):
            raise InvalidInput("vector arithmetic requires another vector")
        if self.system != other.system:
            raise SystemMismatch("vectors belong to different systems")

    def __add__(self, other):
        self._same(other)
        return Vector(self.coords + other.coords, self.system)

    def __sub__(self, other):
        self._same(other)
        return Vector(self.coords - other.coords, self.system)

    def __neg__(self):
        return Vector(-self.coords, self.system)

    def __mul__(self, a):
        return Vector(self.coords * float(a), self.system)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Functional:
    """Element of the dual space A = V*, tagged with its system."""

    coords: np.ndarray
    system: GptSystem

    def __post_init__(self):
        object.__setattr__(self, "coords", _coerce(self.coords, self.system.dim, "functional"))

    def _same(self, other):
        if not isinstance(other, Functional):
            raise InvalidInput("functional arithmetic requires another functional")
        if self.system != other.system:
            raise SystemMismatch("functionals belong to different systems")

    def __add__(self, other):
        self._same(other)
        return Functional(self.coords + other.coords, self.system)

    def __sub__(self, other):
        self._same(other)
        return Functional(self.coords - other.coords, self.system)

    def __neg__(self):
        return Functional(-self.coords, self.system)

    def __mul__(self, a):
        return Functional(self.coords * float(a), self.system)

    __rmul__ = __mul__

    def pair(self, v):
        return pair(self, v)


def pair(f, v):
    """Dual pairing <f, v>; rejects mixed systems."""
    if not isinstance(f, Functional) or not isinstance(v, Vector):
        raise InvalidInput("pair expects (Functional, Vector)")
    if f.system != v.system:
        raise SystemMismatch("pairing across different systems")
    return float(f.coords @ v.coords)


# -- factories ------------------------------------------------------------


def polytopic(vertices, unit=None):
    """System from the extreme points of K (each row one vertex)."""
    V = np.asarray(vertices, dtype=np.float64)
    if V.ndim != 2:
        raise InvalidInput("vertices must form a matrix")
    return GptSystem(kind=POLYTOPIC, dim=V.shape[1], vertices=V, unit=unit)


def polytopic_hull(points, unit=None):
    """Like `polytopic`, but non-extreme points are pruned first."""
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 1:
        raise InvalidInput("points must form a nonempty matrix")
    # Drop exact duplicates first so a doubled vertex survives the pruning.
    uniq = []
    for row in P:
        if not any(np.max(np.abs(row - u)) <= 1e-12 for u in uniq):
            uniq.append(row)
    P = np.array(uniq)
    keep = []
    for j in range(P.shape[0]):
        others = np.delete(P, j, axis=0)
        if others.shape[0] == 0:
            keep.append(j)
            continue
        prob = lp.LpProblem(
            np.zeros(others.shape[0]),
            eq_rows=np.vstack([others.T, np.ones((1, others.shape[0]))]),
            eq_rhs=np.concatenate([P[j], [1.0]]),
        )
        if lp.feasibility(prob).status != "optimal":
            keep.append(j)
    return polytopic(P[keep], unit=unit)


def simplex(k):
    """Classical system with k pure states (the probability simplex)."""
    if k < 1:
        raise InvalidInput("simplex needs at least one outcome")
    return polytopic(np.eye(k), unit=np.ones(k))


def hypercube(g):
    """Polytopic l-infinity ball system in R^(g+1): vertices (1, signs)."""
    if g < 1:
        raise InvalidInput("hypercube needs g >= 1")
    rows = []
    for idx in range(2 ** g):
        eps = [1.0 if (idx >> b) & 1 == 0 else -1.0 for b in range(g)]
        rows.append([1.0] + eps)
    unit = np.zeros(g + 1)
    unit[0] = 1.0
    return polytopic(np.array(rows), unit=unit)


def square():
    """The square state space: hypercube with two sign coordinates."""
    return hypercube(2)


def cross_polytope(n):
    """Polytopic l1 ball system in R^(n+1): vertices (1, +-e_i)."""
    if n < 1:
        raise InvalidInput("cross polytope needs n >= 1")
    rows = []
    for i in range(n):
        for s in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = s
            rows.append(np.concatenate([[1.0], e]))
    unit = np.zeros(n + 1)
    unit[0] = 1.0
    return polytopic(np.array(rows), unit=unit)


def ball(n, norm="l2"):
    """Centrally symmetric ball system in R^(n+1) (n=3, l2: the qubit)."""
    if n < 1:
        raise InvalidInput("ball needs n >= 1")
    return GptSystem(kind=CENTRALLY_SYMMETRIC, dim=n + 1, ball_norm=norm)


def regular_polygon(m, offset=0.0):
    """Polytopic disk approximation: m unit-circle vertices in R^3."""
    if m < 3:
        raise InvalidInput("polygon needs at least 3 vertices")
    guards.check("vertices", m)
    ang = offset + 2.0 * np.pi * np.arange(m) / m
    V = np.column_stack([np.ones(m), np.cos(ang), np.sin(ang)])
    return polytopic(V, unit=np.array([1.0, 0.0, 0.0]))


def ball_approximation(n, resolution, which="inner"):
    """Polytopic approximation of the l2 ball system with a certified factor.

    Returns (system, r) where r < 1 is the inradius of the vertex hull:
    "inner" satisfies ball(r) <= hull <= ball(1), "outer" is the hull scaled
    by 1/r, so it contains the unit ball and sits inside ball(1/r).
    """
    if which not in ("inner", "outer"):
        raise InvalidInput("which must be 'inner' or 'outer'")
    if n == 1:
        pts = np.array([[1.0], [-1.0]])
    elif n == 2:
        if resolution < 3:
            raise InvalidInput("need at least 3 points on the circle")
        ang = 2.0 * np.pi * np.arange(resolution) / resolution
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
    elif n == 3:
        if resolution < 2:
            raise InvalidInput("need resolution >= 2 rings")
        rows = [np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])]
        for i in range(1, resolution):
            th = np.pi * i / resolution
            for j in range(2 * resolution):
                ph = np.pi * j / resolution
                rows.append(np.array([
                    math.sin(th) * math.cos(ph),
                    math.sin(th) * math.sin(ph),
                    math.cos(th),
                ]))
        pts = np.vstack(rows)
    else:
        raise InvalidInput("ball approximations are implemented for n <= 3")
    guards.check("vertices", pts.shape[0])
    lifted = np.column_stack([np.ones(pts.shape[0]), pts])
    facets = facets_of_cone(lifted)
    r = np.inf
    for F in facets:
        tail = np.linalg.norm(F[1:])
        if tail > 1e-12:
            r = min(r, F[0] / tail)
    if not (0 < r < np.inf):
        raise InvalidInput("degenerate point set for a ball approximation")
    unit = np.zeros(n + 1)
    unit[0] = 1.0
    if which == "outer":
        lifted = np.column_stack([np.ones(pts.shape[0]), pts / r])
    return polytopic(lifted, unit=unit), float(r)


# -- membership and norms -------------------------------------------------


def _check_vec(system, v):
    if not isinstance(v, Vector):
        raise InvalidInput("expected a Vector")
    if v.system != system:
        raise SystemMismatch("vector tagged with a different system")


def _check_fun(system, f):
    if not isinstance(f, Functional):
        raise InvalidInput("expected a Functional")
    if f.system != system:
        raise SystemMismatch("functional tagged with a different system")


def assert_interior(system, sigma, tol=_TOL):
    """Raise NotInterior unless sigma lies strictly inside V+."""
    _check_vec(system, sigma)
    if system.kind == POLYTOPIC:
        vals = system.cone_facets @ sigma.coords
        scale = 1.0 + float(np.max(np.abs(vals)))
        if float(np.min(vals)) <= tol * scale:
            raise NotInterior("sigma must pair strictly positively with every cone facet")
    else:
        s = float(sigma.coords[0])
        r = _ball_norm_value(sigma.coords[1:], system.ball_norm)
        if r >= s - tol * (1.0 + abs(s)):
            raise NotInterior("sigma must lie strictly inside the ball cone")


def is_center(system, sigma, tol=_TOL):
    c = np.zeros(system.dim)
    c[0] = 1.0
    return float(np.max(np.abs(sigma.coords - c))) <= tol


def _require_center(system, sigma):
    if not is_center(system, sigma):
        raise InvalidInput(
            "centrally symmetric norms are implemented at the center state only")


@dataclass(frozen=True)
class ConeMembership:
    member: bool
    coefficients: Optional[np.ndarray]
    separator: Optional[np.ndarray]


def cone_member(system, v, tol=_TOL):
    """Decide v in V+ with a certificate either way.

    Membership comes with vertex coefficients (polytopic; None for balls),
    rejection with a functional nonnegative on V+ and negative on v.
    """
    _check_vec(system, v)
    if system.kind == CENTRALLY_SYMMETRIC:
        t = float(v.coords[0])
        x = v.coords[1:]
        r = _ball_norm_value(x, system.ball_norm)
        if r <= t + tol * (1.0 + abs(t)):
            return ConeMembership(True, None, None)
        phi = _dual_achiever(x, system.ball_norm)
        return ConeMembership(False, None, np.concatenate([[1.0], -phi]))
    prob = lp.LpProblem(
        np.zeros(system.n_vertices),
        eq_rows=system.vertices.T,
        eq_rhs=v.coords,
    )
    out = lp.feasibility(prob)
    if out.status == "optimal":
        return ConeMembership(True, out.x, None)
    return ConeMembership(False, None, -out.dual_eq)


def base_norm(system, v):
    """||v||_V: minimal total unit mass over decompositions v+ - v- in V+."""
    _check_vec(system, v)
    if system.kind == CENTRALLY_SYMMETRIC:
        return max(abs(float(v.coords[0])),
                   _ball_norm_value(v.coords[1:], system.ball_norm))
    n = system.n_vertices
    prob = lp.LpProblem(
        np.ones(2 * n),
        eq_rows=np.hstack([system.vertices.T, -system.vertices.T]),
        eq_rhs=v.coords,
    )
    out = lp.solve(prob)
    if out.status != "optimal":
        raise InvalidInput("base norm undefined: cone is not generating")
    return float(out.value)


def order_unit_norm(system, f, unit=None):
    """min lambda with lambda*unit +- f in the cone.

    Both arguments Functionals: the cone is A+ (unit defaults to the system
    unit).  Both Vectors: the cone is V+ and `unit` is the reference state
    sigma, giving the sigma order-unit norm on V.
    """
    if isinstance(f, Functional):
        if unit is None:
            unit = system.unit_functional
        if not isinstance(unit, Functional):
            raise InvalidInput("unit must be a Functional when f is a Functional")
        _check_fun(system, f)
        _check_fun(system, unit)
        if system.kind == CENTRALLY_SYMMETRIC:
            e0 = np.zeros(system.dim)
            e0[0] = 1.0
            if np.max(np.abs(unit.coords - e0)) > 1e-12:
                raise InvalidInput(
                    "centrally symmetric dual norms are implemented at the canonical unit")
            return abs(float(f.coords[0])) + _ball_norm_value(
                f.coords[1:], _dual_ball_name(system.ball_norm))
        den = system.vertices @ unit.coords
        scale = 1.0 + float(np.max(np.abs(den)))
        if float(np.min(den)) <= _TOL * scale:
            raise NotInterior("unit must pair strictly positively with every vertex")
        num = np.abs(system.vertices @ f.coords)
        return float(np.max(num / den))
    if isinstance(f, Vector):
        if unit is None or not isinstance(unit, Vector):
            raise InvalidInput("unit must be a reference state Vector when f is a Vector")
        _check_vec(system, f)
        assert_interior(system, unit)
        if system.kind == CENTRALLY_SYMMETRIC:
            _require_center(system, unit)
            return abs(float(f.coords[0])) + _ball_norm_value(
                f.coords[1:], system.ball_norm)
        den = system.cone_facets @ unit.coords
        num = np.abs(system.cone_facets @ f.coords)
        return float(np.max(num / den))
    raise InvalidInput("order_unit_norm expects a Functional or a Vector")


def sigma_base_norm(system, h, sigma):
    """||h||^sigma = max <h, y> over -sigma <= y <= sigma; returns (value, y*)."""
    _check_fun(system, h)
    assert_interior(system, sigma)
    if system.kind == CENTRALLY_SYMMETRIC:
        _require_center(system, sigma)
        t = float(h.coords[0])
        phi = h.coords[1:]
        dual = _ball_norm_value(phi, _dual_ball_name(system.ball_norm))
        if abs(t) >= dual:
            y = np.zeros(system.dim)
            y[0] = 1.0 if t >= 0 else -1.0
            return abs(t), system.vector(y)
        x = _dual_achiever(phi, system.ball_norm)
        return dual, system.vector(np.concatenate([[0.0], x]))
    F = system.cone_facets
    rhs = F @ sigma.coords
    prob = lp.LpProblem(
        -h.coords,
        ub_rows=np.vstack([F, -F]),
        ub_rhs=np.concatenate([rhs, rhs]),
        lower=np.full(system.dim, -np.inf),
    )
    out = lp.solve(prob)
    if out.status != "optimal":
        raise NotInterior("sigma interval is unbounded; sigma cannot be interior")
    return float(-out.value), system.vector(out.x)


def extreme_effects(system):
    """All extreme points of the effect interval {0 <= f <= unit}."""
    system._require_polytopic()
    V = system.vertices
    n = V.shape[0]
    A = np.vstack([V, -V])
    b = np.concatenate([np.ones(n), np.zeros(n)])
    pts = vertices_of_polytope(A, b)
    return [system.functional(p) for p in pts]


def is_effect(system, f, tol=_TOL):
    _check_fun(system, f)
    if system.kind == CENTRALLY_SYMMETRIC:
        t = float(f.coords[0])
        r = _ball_norm_value(f.coords[1:], _dual_ball_name(system.ball_norm))
        return r <= t + tol and r <= (1.0 - t) + tol
    vals = system.vertices @ f.coords
    return float(np.min(vals)) >= -tol and float(np.max(vals)) <= 1.0 + tol


def in_dual_cone(system, f, tol=_TOL):
    """Whether f is nonnegative on every state, i.e. a member of the dual cone."""
    _check_fun(system, f)
    if system.kind == CENTRALLY_SYMMETRIC:
        t = float(f.coords[0])
        r = _ball_norm_value(f.coords[1:], _dual_ball_name(system.ball_norm))
        return r <= t + tol
    return float(np.min(system.vertices @ f.coords)) >= -tol


@dataclass(frozen=True, eq=False)
class Measurement:
    """Finite-outcome measurement: effects summing to the unit."""

    effects: tuple

    def __post_init__(self):
        effects = tuple(self.effects)
        if len(effects) < 1:
            raise InvalidInput("measurement needs at least one effect")
        system = effects[0].system
        total = np.zeros(system.dim)
        for i, f in enumerate(effects):
            _check_fun(system, f)
            if not is_effect(system, f):
                raise InvalidInput(f"effect {i} is outside the effect interval")
            total = total + f.coords
        if np.max(np.abs(total - system.unit)) > 1e-9:
            raise InvalidInput("effects must sum to the unit functional")
        object.__setattr__(self, "effects", effects)

    @property
    def system(self):
        return self.effects[0].system

    @property
    def n_outcomes(self):
        return len(self.effects)


def dichotomic_measurement(system, f):
    """The pair (f, unit - f) for an effect f."""
    _check_fun(system, f)
    return Measurement((f, system.unit_functional - f))


def is_symmetry(system, mat, tol=_TOL):
    """True iff `mat` permutes the vertex set (acting on column vectors)."""
    system._require_polytopic()
    M = np.asarray(mat, dtype=np.float64)
    if M.shape != (system.dim, system.dim):
        return False
    images = system.vertices @ M.T
    taken = [False] * system.n_vertices
    for img in images:
        hit = -1
        for j, w in enumerate(system.vertices):
            if not taken[j] and np.max(np.abs(img - w)) <= tol:
                hit = j
                break
        if hit < 0:
            return False
        taken[hit] = True
    return True


def symmetries(system, fix=None):
    """All linear maps permuting the vertices and fixing `fix` (barycenter
    by default, which every vertex permutation fixes automatically)."""
    system._require_polytopic()
    n = system.n_vertices
    guards.check("symmetry_vertices", n)
    if fix is None:
        fix_coords = system.vertices.mean(axis=0)
    else:
        _check_vec(system, fix)
        fix_coords = np.asarray(fix.coords)
    V = system.vertices
    rows = []
    idx = []
    for i in range(n):
        cand = rows + [V[i]]
        s = np.linalg.svd(np.array(cand), compute_uv=False)
        if s[-1] > 1e-9 * s[0]:
            rows.append(V[i])
            idx.append(i)
        if len(rows) == system.dim:
            break
    if len(rows) < system.dim:
        raise InvalidInput("vertices must span the full space (generating cone)")
    Binv = np.linalg.inv(np.array(rows))
    mats, perms, count, overflow = symmetry_search(
        np.ascontiguousarray(V), np.ascontiguousarray(Binv),
        np.ascontiguousarray(fix_coords), 1e-9, 1024)
    if overflow:
        raise GuardExceeded("symmetry search found more than 1024 maps")
    return [mats[i].copy() for i in range(count)]


# -- JSON ------------------------------------------------------------------


def system_to_payload(system):
    out = {"kind": system.kind, "dim": system.dim}
    if system.kind == POLYTOPIC:
        out["vertices"] = [list(map(float, row)) for row in system.vertices]
    else:
        out["ball_norm"] = system.ball_norm
    out["unit"] = list(map(float, system.unit))
    return out


def system_from_payload(payload):
    if not isinstance(payload, dict):
        raise InvalidInput("system payload must be a JSON object")
    kind = payload.get("kind")
    if kind == POLYTOPIC:
        if "vertices" not in payload:
            raise InvalidInput("polytopic system requires vertices")
        sys_ = polytopic(np.asarray(payload["vertices"], dtype=np.float64),
                         unit=payload.get("unit"))
    elif kind == CENTRALLY_SYMMETRIC:
        if "ball_norm" not in payload:
            raise InvalidInput("centrally symmetric system requires ball_norm")
        if "dim" not in payload:
            raise InvalidInput("centrally symmetric system requires dim")
        sys_ = GptSystem(kind=CENTRALLY_SYMMETRIC, dim=int(payload["dim"]),
                         ball_norm=payload["ball_norm"], unit=payload.get("unit"))
    else:
        raise InvalidInput(f"kind must be one of {POLYTOPIC!r}, {CENTRALLY_SYMMETRIC!r}")
    if "dim" in payload and int(payload["dim"]) != sys_.dim:
        raise InvalidInput("dim does not match the vertex width")
    return sys_
