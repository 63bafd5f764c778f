"""Simplex-constrained quadratic programming.

The prox of a max-of-affine model is computed through its dual: minimize
``(1/(2r))||G @ lam||^2 - e @ lam`` over the unit simplex, then recover the
primal point ``x = z - (1/r) G @ lam``.  The same machinery measures the
distance from a vector to the convex hull of a finite set of vectors.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "QPConvergenceError",
    "project_simplex",
    "minimize_simplex_qp",
    "default_tol_kkt",
    "prox_of_model",
    "dist_to_hull",
]


class QPConvergenceError(RuntimeError):
    """Inner QP solver hit its iteration cap before reaching the target residual."""


def project_simplex(v):
    """Euclidean projection of v onto {lam >= 0, sum(lam) = 1}.

    Sort-based exact algorithm; output components satisfy
    ``out_i = max(v_i - tau, 0)`` for the unique feasible threshold tau.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex expects a nonempty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("project_simplex: non-finite input")
    m = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, m + 1)
    rho = np.nonzero(u * ks > css)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _kkt_residual(lam, grad):
    # Complementary slackness on the simplex: at the optimum the support of
    # lam lies on the minimal coordinates of the gradient.
    tau = grad.min()
    return float(np.max(lam * np.abs(grad - tau)))


def _spectral_bound(Q, iters=60):
    """Power-iteration estimate of the largest eigenvalue of PSD Q."""
    m = Q.shape[0]
    v = np.full(m, 1.0 / np.sqrt(m))
    lam = 0.0
    for _ in range(iters):
        w = Q @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam = nw
    return lam


def _face_minimizer(Q, q, face):
    """Minimizer of the QP on the affine hull of a simplex face.

    Eliminates the sum-to-one constraint through a null-space parametrization
    and solves the reduced system by least squares, which stays accurate when
    the face block of Q is singular or badly scaled.  Returns
    ``(weights, descent)``: face weights summing to one (possibly negative),
    or ``(None, descent)`` when the face problem is unbounded below, in which
    case ``descent`` is a flat in-face descent ray direction.
    """
    k = len(face)
    if k == 1:
        return np.ones(1), None
    Qff = Q[np.ix_(face, face)]
    qf = q[face]
    lam0 = np.full(k, 1.0 / k)
    N = np.zeros((k, k - 1))
    idx = np.arange(k - 1)
    N[idx, idx] = 1.0
    N[idx + 1, idx] = -1.0
    H = N.T @ Qff @ N
    g = N.T @ (Qff @ lam0 + qf)
    y, *_ = np.linalg.lstsq(H, -g, rcond=None)
    rho = H @ y + g
    for _ in range(3):
        # iterative refinement: consistent systems approach machine accuracy
        if not np.all(np.isfinite(rho)):
            break
        dy, *_ = np.linalg.lstsq(H, -rho, rcond=None)
        y_ref = y + dy
        rho_ref = H @ y_ref + g
        if np.linalg.norm(rho_ref) >= np.linalg.norm(rho):
            break
        y, rho = y_ref, rho_ref
    if np.linalg.norm(rho) > 1e-9 * (1.0 + np.linalg.norm(g)):
        # g has a component in the null space of PSD H: the quadratic is flat
        # along -rho while the linear term decreases, so no interior minimum
        return None, N @ (-rho)
    return lam0 + N @ y, None


def _polish(Q, q, lam, tol):
    """Active-set refinement from an approximate simplex minimizer.

    Repeatedly minimizes over the affine hull of the current support face,
    stepping to the face boundary and dropping the blocking coordinate when
    the unconstrained face point is infeasible or the face is unbounded, and
    pulling in coordinates whose gradient undercuts the face value by more
    than the target residual.  Returns the best candidate found or None.
    """
    m = q.size
    face = [i for i in range(m) if lam[i] > 1e-12]
    if not face:
        face = [int(np.argmin(Q @ lam + q))]
    w = np.zeros(m)
    w[face] = np.maximum(lam[face], 1.0 / (m * m))
    w /= w.sum()
    best = None
    best_resid = np.inf
    seen = {tuple(face)}

    def step_to_boundary(direction):
        # longest feasible step from w along an in-face direction, then
        # shrink the face to the surviving support
        nonlocal w, face
        neg = [i for i in face if direction[i] < 0.0 and w[i] > 0.0]
        if not neg:
            return False
        t = min(w[i] / -direction[i] for i in neg)
        w = w + t * direction
        for i in neg:
            if w[i] <= w.max() * 1e-15:
                w[i] = 0.0
        face = [i for i in face if w[i] > 0.0]
        s = w.sum()
        if s <= 0.0 or not face:
            return False
        w /= s
        return True

    for _ in range(3 * m + 20):
        weights, descent = _face_minimizer(Q, q, face)
        if descent is not None:
            direction = np.zeros(m)
            direction[face] = descent
            if not step_to_boundary(direction):
                return best
            continue
        if not np.all(np.isfinite(weights)):
            return best
        target = np.zeros(m)
        target[face] = weights
        if weights.min() < -1e-12:
            if not step_to_boundary(target - w):
                return best
            continue
        w = np.maximum(target, 0.0)
        w /= w.sum()
        grad = Q @ w + q
        resid = _kkt_residual(w, grad)
        if resid < best_resid:
            best, best_resid = w.copy(), resid
        if best_resid <= tol:
            return best
        face_val = np.min(grad[face])
        j = int(np.argmin(grad))
        if j not in face and grad[j] < face_val - 0.25 * tol:
            trial = sorted(face + [j])
            if tuple(trial) not in seen:
                seen.add(tuple(trial))
                face = trial
                continue
        # stuck above tolerance: evict the worst complementarity violator
        # (a small weight sitting on a non-minimal gradient) and re-solve
        if len(face) > 1:
            viol = [(w[i] * (grad[i] - face_val), i) for i in face]
            worst, i_worst = max(viol)
            trial = sorted(set(face) - {i_worst})
            if worst > tol and tuple(trial) not in seen:
                seen.add(tuple(trial))
                face = trial
                w[i_worst] = 0.0
                s = w.sum()
                if s > 0.0:
                    w /= s
                else:
                    w = np.zeros(m)
                    w[face] = 1.0 / len(face)
                continue
        return best
    return best


def minimize_simplex_qp(Q, q, lam0=None, tol=1e-12, max_iter=50_000):
    """Minimize 0.5 lam'Q lam + q'lam over the unit simplex.

    Accelerated projected gradient (step 1/L with L from power iteration,
    restarted on non-monotone objective), interleaved with an active-set
    polish that finishes the solve once the support has settled.

    Returns (lam, residual) with residual = max_i lam_i |grad_i - min grad|.
    Raises QPConvergenceError if the cap is hit first.
    """
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    m = q.size
    if m == 1:
        return np.ones(1), 0.0
    if not np.any(Q):
        lam = np.zeros(m)
        lam[int(np.argmin(q))] = 1.0
        return lam, 0.0

    if lam0 is None:
        lam = np.full(m, 1.0 / m)
    else:
        lam = project_simplex(np.asarray(lam0, dtype=float))

    L = _spectral_bound(Q) * 1.01
    if L <= 0.0:
        L = 1.0
    step = 1.0 / L

    def finished(cand):
        return cand is not None and _kkt_residual(cand, Q @ cand + q) <= tol

    if finished(lam):
        return lam, _kkt_residual(lam, Q @ lam + q)
    polished = _polish(Q, q, lam, tol)
    if finished(polished):
        return polished, _kkt_residual(polished, Q @ polished + q)

    y = lam.copy()
    t = 1.0
    f_best = np.inf
    for it in range(max_iter):
        grad_y = Q @ y + q
        lam_new = project_simplex(y - step * grad_y)
        f_new = 0.5 * lam_new @ Q @ lam_new + q @ lam_new
        if f_new > f_best:
            # restart the momentum sequence
            y = lam_new.copy()
            t = 1.0
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = lam_new + ((t - 1.0) / t_next) * (lam_new - lam)
            t = t_next
            f_best = f_new
        lam = lam_new
        if it % 25 == 0 or it == max_iter - 1:
            if finished(lam):
                return lam, _kkt_residual(lam, Q @ lam + q)
            polished = _polish(Q, q, lam, tol)
            if finished(polished):
                return polished, _kkt_residual(polished, Q @ polished + q)
    raise QPConvergenceError(
        f"simplex QP did not reach residual {tol:.3e} in {max_iter} iterations "
        f"(m={m}, last residual {_kkt_residual(lam, Q @ lam + q):.3e}); "
        "the subproblem may be ill-conditioned -- consider loosening tol_kkt"
    )


def default_tol_kkt(bundle):
    """Default KKT residual target: 1e-10 scaled by the largest plane value
    at the prox-centre."""
    e = bundle.plane_values(bundle.prox_centre)
    return 1e-10 * (1.0 + np.abs(e).max())


def prox_of_model(bundle, tol_kkt=None, warm_start=None):
    """Prox of the bundle's piecewise-linear model at its prox-centre.

    Solves the dual simplex QP and recovers ``x_next = z - (1/r) G @ lam``.

    Parameters
    ----------
    bundle : Bundle
        Current model bundle (nonempty).
    tol_kkt : float, optional
        Target KKT residual; defaults to ``1e-10 * (1 + max|e|)`` where e
        holds the linearization values at the prox-centre.
    warm_start : array, optional
        Dual weights aligned with the bundle's element order.

    Returns
    -------
    (x_next, lam, kkt_residual)
    """
    z = bundle.prox_centre
    r = bundle.prox_param
    G = bundle.subgrads.T  # (n, m), columns are bundle subgradients
    e = bundle.plane_values(z)
    m = e.size
    if tol_kkt is None:
        tol_kkt = default_tol_kkt(bundle)
    if tol_kkt <= 0:
        raise ValueError("tol_kkt must be positive")

    if not np.any(G):
        # all subgradients vanish: the dual is linear, pick the top plane
        lam = np.zeros(m)
        lam[int(np.argmax(e))] = 1.0
        return z.copy(), lam, 0.0

    Q = (G.T @ G) / r
    lam, _ = minimize_simplex_qp(Q, -e, lam0=warm_start, tol=tol_kkt)
    x_next = z - (G @ lam) / r
    planes = e + (x_next - z) @ G
    phi = planes.max()
    kkt = float(np.max(np.abs(lam * (planes - phi)))
                + abs(lam.sum() - 1.0)
                + max(0.0, -lam.min()))
    return x_next, lam, kkt


def dist_to_hull(g, vectors):
    """Euclidean distance from g to the convex hull of the given vectors.

    ``vectors`` is an iterable of n-vectors (or an (m, n) array).
    """
    g = np.asarray(g, dtype=float)
    V = np.atleast_2d(np.asarray(list(vectors) if not isinstance(vectors, np.ndarray) else vectors, dtype=float))
    if V.size == 0:
        raise ValueError("dist_to_hull needs a nonempty vector set")
    for row in V:
        if np.array_equal(row, g):
            return 0.0
    if V.shape[0] == 1:
        return float(np.linalg.norm(g - V[0]))
    Q = V @ V.T
    q = -V @ g
    tol = 1e-12 * (1.0 + np.abs(Q).max() + np.abs(q).max())
    lam, _ = minimize_simplex_qp(Q, q, tol=tol, max_iter=200_000)
    return float(np.linalg.norm(g - lam @ V))
