"""Max-of-quadratics instances with controlled activity and known prox points.

The generator draws the true prox point x* first, then builds quadratics
around it so that a designated active set shares the maximum at x*, the
prox optimality certificate r(z - x*) in hull{grad q_i(x*)} holds by
construction, and a designated set is active at the prox-centre z.

Quadratics are stored in centred form, q(x) = 0.5 (x-c)'A(x-c) + b'(x-c) + w,
so the designated values at x* are exact in floating point (the difference
x - c vanishes bitwise at x = c).  With c = 0 this is the plain
0.5 x'Ax + b'x + w parametrization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .oracles import make_rng, sample_ball, standard_normals
from .qp import QPConvergenceError, dist_to_hull, minimize_simplex_qp

__all__ = [
    "ProblemCertificateError",
    "Quadratic",
    "MaxQuadProblem",
    "generate_max_quad",
    "eval_max_quad",
    "check_problem",
    "reference_prox",
    "problem_to_dict",
    "problem_from_dict",
    "save_problem",
    "load_problem",
]

ACTIVITY_MARGIN = 1e-3


class ProblemCertificateError(RuntimeError):
    """A generated problem failed its ground-truth certificate."""


def _quad_value(A, b, w, center, x):
    e = x - center
    return float(0.5 * (e @ A @ e) + b @ e + w)


@dataclass(frozen=True)
class Quadratic:
    """Convex quadratic 0.5 (x-c)'A(x-c) + b'(x-c) + w with PSD A."""

    A: np.ndarray
    b: np.ndarray
    c: float
    center: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if not np.all(np.abs(A - A.T) <= 1e-12 * (1.0 + np.abs(A).max())):
            raise ValueError("Hessian must be symmetric")
        if A.size and np.linalg.eigvalsh(A).min() < -1e-10:
            raise ValueError("Hessian must be positive semidefinite")

    @classmethod
    def plain(cls, A, b, c):
        """Quadratic 0.5 x'Ax + b'x + c (centred at the origin)."""
        A = np.asarray(A, dtype=float)
        return cls(A, np.asarray(b, dtype=float), float(c), np.zeros(A.shape[0]))

    def value(self, x):
        return _quad_value(self.A, self.b, self.c, self.center, np.asarray(x, dtype=float))

    def gradient(self, x):
        e = np.asarray(x, dtype=float) - self.center
        return self.A @ e + self.b


@dataclass(frozen=True)
class MaxQuadProblem:
    """f(x) = max_i q_i(x) with certified prox ground truth at (z, r)."""

    quadratics: tuple
    z: np.ndarray
    r: float
    x_star: np.ndarray
    active_at_xstar: tuple
    active_at_z: tuple
    lipschitz_bound: float
    seed: int
    sparse: bool = False

    @property
    def n(self):
        return self.z.size

    @property
    def nf(self):
        return len(self.quadratics)

    def evaluate(self, x):
        """(max value, argmax index set by exact fp equality, gradient of the
        first active quadratic)."""
        x = np.asarray(x, dtype=float)
        vals = np.array([q.value(x) for q in self.quadratics])
        top = float(vals.max())
        active = tuple(int(i) for i in np.nonzero(vals == top)[0])
        return top, active, self.quadratics[active[0]].gradient(x)


def eval_max_quad(problem, x):
    return problem.evaluate(x)


def _pin_curvature(quad, x, target):
    """Return A' = A + t I (t >= 0) with the quadratic's value at x exactly
    equal to target, or None if no such float t is found.

    Adding t I leaves the value and gradient at the quadratic's own centre
    untouched, so activity at x* and the hull certificate survive.
    """
    A, b, w, c = quad.A, quad.b, quad.c, quad.center
    n = A.shape[0]
    eye = np.eye(n)

    def val(t):
        return _quad_value(A + t * eye, b, w, c, x)

    v0 = val(0.0)
    if v0 == target:
        return A
    if v0 > target:
        return None
    e = x - c
    ee = float(e @ e)
    if ee == 0.0:
        return None
    t_hi = 4.0 * (target - v0) / ee + 1e-300
    for _ in range(80):
        if val(t_hi) >= target:
            break
        t_hi *= 2.0
    else:
        return None
    lo, hi = 0.0, t_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        vm = val(mid)
        if vm == target:
            return A + mid * eye
        if vm < target:
            lo = mid
        else:
            hi = mid
    t = lo
    for _ in range(64):
        t = np.nextafter(t, np.inf)
        vt = val(t)
        if vt == target:
            return A + t * eye
        if vt > target:
            return None
    return None


def _try_generate(rng, n, nf, nf_xstar, nf_z, r, sparse):
    z = standard_normals(rng, n)
    d = standard_normals(rng, n)
    nd = np.linalg.norm(d)
    if nd == 0.0:
        return None
    s = 0.1 + 0.9 * rng.random()
    x_star = z + s * (d / nd)

    act_x = list(range(nf_xstar))
    u = 0.05 + 0.95 * rng.random(nf_xstar)
    lam = u / u.sum()
    target = r * (z - x_star)
    grads = np.empty((nf, n))
    for i in range(nf):
        grads[i] = standard_normals(rng, n)
    grads[act_x[-1]] = (target - sum(lam[i] * grads[act_x[i]]
                                     for i in range(nf_xstar - 1))) / lam[-1]

    quads = []
    for i in range(nf):
        B = standard_normals(rng, (n, n))
        if sparse:
            B = B * (rng.random((n, n)) < 0.05)
        A = B.T @ B
        if i in act_x:
            w = 0.0
        else:
            w = -(ACTIVITY_MARGIN + (1.0 - ACTIVITY_MARGIN) * rng.random())
        quads.append(Quadratic(A, grads[i], w, x_star))

    # z-activity: raise designated quadratics to the current max at z by
    # adding t I; the addition vanishes at x* so the x* certificate is intact
    vals_z = np.array([q.value(z) for q in quads])
    top = int(np.argmax(vals_z))
    others = [i for i in range(nf) if i != top]
    act_z = sorted([top] + others[:nf_z - 1])
    M = float(vals_z[top])
    for i in act_z:
        if quads[i].value(z) == M:
            continue
        A_new = _pin_curvature(quads[i], z, M)
        if A_new is None:
            return None
        quads[i] = Quadratic(A_new, quads[i].b, quads[i].c, quads[i].center)

    # push non-designated quadratics below the margin at z
    for j in range(nf):
        if j in act_z:
            continue
        vj = quads[j].value(z)
        if vj > M - ACTIVITY_MARGIN:
            if j in act_x:
                return None
            quads[j] = replace(quads[j], c=quads[j].c - (vj - (M - 1.5 * ACTIVITY_MARGIN)))

    # local Lipschitz bound on a ball about z containing the prox step,
    # iterated once on the radius estimate
    def max_grad_norm(radius, samples=32):
        best = max(np.linalg.norm(q.gradient(z)) for q in quads)
        for _ in range(samples):
            x = z + sample_ball(rng, n, radius)
            best = max(best, max(np.linalg.norm(q.gradient(x)) for q in quads))
        return float(best)

    k0 = max(np.linalg.norm(q.gradient(z)) for q in quads)
    k1 = max_grad_norm(2.0 * max(k0, 1e-6) / r)
    lipschitz = max(k1, max_grad_norm(2.0 * k1 / r))

    return MaxQuadProblem(tuple(quads), z, float(r), x_star,
                          tuple(act_x), tuple(act_z), lipschitz,
                          seed=-1, sparse=sparse)


def generate_max_quad(n, nf, nf_xstar, nf_z, r, seed, sparse=False):
    """Generate a certified max-of-quadratics instance.

    Deterministic in ``seed``.  Raises ValueError on bad parameters and
    ProblemCertificateError if no valid draw is found (not observed in
    practice; restarts are rare).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (1 <= nf_xstar <= nf and 1 <= nf_z <= nf):
        raise ValueError("need 1 <= nf_xstar <= nf and 1 <= nf_z <= nf")
    if not r > 0:
        raise ValueError("r must be positive")
    rng = make_rng(seed)
    for _ in range(80):
        prob = _try_generate(rng, n, nf, nf_xstar, nf_z, r, sparse)
        if prob is None:
            continue
        prob = replace(prob, seed=int(seed))
        check_problem(prob)
        return prob
    raise ProblemCertificateError(
        f"could not generate a certified instance for seed {seed}")


def check_problem(problem, hull_tol=1e-10):
    """Verify the ground-truth certificate; raises ProblemCertificateError."""
    nf = problem.nf
    if not (1 <= len(problem.active_at_xstar) <= nf
            and 1 <= len(problem.active_at_z) <= nf):
        raise ProblemCertificateError("active set sizes out of range")

    def check_activity(point, designated, label):
        vals = np.array([q.value(point) for q in problem.quadratics])
        top = vals.max()
        argmax = set(int(i) for i in np.nonzero(vals == top)[0])
        if argmax != set(designated):
            raise ProblemCertificateError(
                f"max at {label} attained on {sorted(argmax)}, expected {sorted(designated)}")
        rest = [vals[j] for j in range(nf) if j not in argmax]
        if rest and max(rest) > top - ACTIVITY_MARGIN:
            raise ProblemCertificateError(f"activity margin violated at {label}")

    check_activity(problem.x_star, problem.active_at_xstar, "x_star")
    check_activity(problem.z, problem.active_at_z, "z")

    active_grads = [problem.quadratics[i].gradient(problem.x_star)
                    for i in problem.active_at_xstar]
    dist = dist_to_hull(problem.r * (problem.z - problem.x_star), active_grads)
    if dist > hull_tol:
        raise ProblemCertificateError(
            f"prox optimality certificate violated: hull distance {dist:.3e}")


def _newton_polish(problem, x, rounds=20):
    """Refine a near-optimal prox point to machine precision.

    Detects the pieces that are active near ``x`` and solves the
    stationarity system (weighted gradients balance the prox pull, active
    values equal, weights sum to one) by Newton's method.  Pieces whose
    weight turns negative are dropped.  Falls back to the input if the
    polish does not improve the stationarity residual.
    """
    z, r, n = problem.z, problem.r, problem.z.size
    vals = np.array([q.value(x) for q in problem.quadratics])
    scale = 1.0 + np.abs(vals).max()
    active = [int(i) for i in np.flatnonzero(vals >= vals.max()
                                             - 0.1 * ACTIVITY_MARGIN * scale)]

    def residual(pt, act):
        # stationarity defect with the best recombination weights
        grads = np.array([problem.quadratics[i].gradient(pt) for i in act])
        lhs = np.vstack([grads.T, np.ones(len(act))])
        rhs = np.append(r * (z - pt), 1.0)
        w, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        return np.linalg.norm(w @ grads + r * (pt - z))

    x0 = x.copy()
    while active:
        quads = [problem.quadratics[i] for i in active]
        m = len(quads)
        # initial weights: least-squares recombination of the prox pull
        G = np.array([q.gradient(x) for q in quads])
        lhs = np.vstack([G.T, np.ones(m)])
        rhs = np.append(r * (z - x), 1.0)
        lam, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        for _ in range(rounds):
            G = np.array([q.gradient(x) for q in quads])
            v = np.array([q.value(x) for q in quads])
            F = np.concatenate([
                lam @ G + r * (x - z),
                v[1:] - v[0],
                [lam.sum() - 1.0],
            ])
            J = np.zeros((n + m, n + m))
            J[:n, :n] = r * np.eye(n) + sum(
                l * q.A for l, q in zip(lam, quads))
            J[:n, n:] = G.T
            J[n:n + m - 1, :n] = G[1:] - G[0]
            J[n + m - 1, n:] = 1.0
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                return x0
            x = x + step[:n]
            lam = lam + step[n:]
            if np.linalg.norm(step) <= 1e-14 * (1.0 + np.linalg.norm(x)):
                break
        if m == 1 or lam.min() >= -1e-12:
            break
        # a piece priced out: drop it and re-solve on the smaller set
        active.pop(int(np.argmin(lam)))
        x = x0.copy()
    if not active or not np.all(np.isfinite(x)):
        return x0
    if residual(x, active) <= residual(x0, active):
        return x
    return x0


def reference_prox(problem, tol=1e-7, max_iter=4000):
    """Recompute the prox point independently of the stored ground truth.

    Classical cutting-plane prox iteration with exact subgradients and a full
    bundle, run until the gap certifies a distance below ``tol``.  Raises
    ProblemCertificateError if the result disagrees with x_star by more than
    1e-5.
    """
    z, r = problem.z, problem.r
    sites, vals, grads = [], [], []
    x = z
    f_x, _, g_x = problem.evaluate(x)
    lam = None
    for _ in range(max_iter):
        sites.append(x)
        vals.append(f_x)
        grads.append(g_x)
        G = np.array(grads)  # (m, n)
        e = np.array(vals) + np.einsum("ij,ij->i", G, z[None, :] - np.array(sites))
        Q = (G @ G.T) / r
        warm = None
        if lam is not None:
            warm = np.append(lam, 1.0 / (lam.size + 1))
        base_tol = 1e-12 * (1.0 + np.abs(e).max())
        for mult in (1.0, 1e2, 1e4):
            try:
                lam, _ = minimize_simplex_qp(Q, -e, lam0=warm,
                                             tol=mult * base_tol)
                break
            except QPConvergenceError:
                if mult == 1e4:
                    raise
        x_next = z - (lam @ G) / r
        phi = float((e + G @ (x_next - z)).max())
        f_x, _, g_x = problem.evaluate(x_next)
        x = x_next
        if np.sqrt(max(f_x - phi, 0.0) / r) <= tol:
            break
    else:
        raise ProblemCertificateError(
            f"reference prox solve did not converge in {max_iter} iterations")
    x = _newton_polish(problem, x)
    if np.linalg.norm(x - problem.x_star) > 1e-5:
        raise ProblemCertificateError(
            "reference prox disagrees with the stored ground truth: "
            f"distance {np.linalg.norm(x - problem.x_star):.3e}")
    return x


# ---------------------------------------------------------------------------
# serialization: self-describing JSON, bit-exact round trip


def problem_to_dict(problem):
    def arr(a):
        return np.asarray(a).tolist()

    return {
        "format": "proxbundle-maxquad",
        "version": 1,
        "n": problem.n,
        "r": problem.r,
        "seed": problem.seed,
        "sparse": problem.sparse,
        "z": arr(problem.z),
        "x_star": arr(problem.x_star),
        "active_at_xstar": list(problem.active_at_xstar),
        "active_at_z": list(problem.active_at_z),
        "lipschitz_bound": problem.lipschitz_bound,
        "quadratics": [
            {"A": arr(q.A), "b": arr(q.b), "c": q.c, "center": arr(q.center)}
            for q in problem.quadratics
        ],
    }


def problem_from_dict(data):
    if data.get("format") != "proxbundle-maxquad":
        raise ValueError("not a proxbundle max-of-quadratics problem file")
    quads = tuple(
        Quadratic(np.array(q["A"], dtype=float), np.array(q["b"], dtype=float),
                  float(q["c"]), np.array(q["center"], dtype=float))
        for q in data["quadratics"])
    return MaxQuadProblem(
        quads,
        np.array(data["z"], dtype=float),
        float(data["r"]),
        np.array(data["x_star"], dtype=float),
        tuple(data["active_at_xstar"]),
        tuple(data["active_at_z"]),
        float(data["lipschitz_bound"]),
        int(data["seed"]),
        bool(data.get("sparse", False)),
    )


def save_problem(problem, path):
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem), fh, indent=1)


def load_problem(path):
    with open(path) as fh:
        return problem_from_dict(json.load(fh))
