"""Cyclic MMSE design of paired downlink/uplink pilot matrices.

Each outer iteration refreshes the closed-form auxiliary minimizers for
both link directions, builds majorize-minimize targets for the two pilot
blocks, and then runs an inner cycle of exact projections onto the
constraint sets: per-column power balls, zero cross-correlation between
the two pilots over a lag window, and the convexified low-autocorrelation
ellipsoids on the downlink (sensing) pilot.  The total estimation MSE of
the two links is non-increasing across outer iterations once the iterate
is feasible, which the initialization guarantees.
"""

import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .estimation import channel_mse_lemma, optimal_V
from .tensorops import adjoint_embed, power_iteration_opnorm, shift_matrix

_DYKSTRA_MAX_CYCLES = 5000
_ELLIPSOID_NEWTON_MAX = 200
_TINY = 1e-300


class DegenerateConstraintWarning(UserWarning):
    """Cross-correlation constraints admit only the zero column."""


@dataclass(frozen=True)
class DesignConfig:
    """Designer knobs.

    k is the correlation zone depth (lags 1..k are suppressed in the
    downlink autocorrelation; cross-correlation is zeroed on lags 0..k,
    or 1..k with lags_from_one).  p is the per-column power bound; leave
    None to derive gamma/n_columns per link.  literal_transpose switches
    correlations from the conjugated form x^H J y to the plain transpose.
    """

    k: int = 4
    p: float | None = None
    epsilon: float = 1e-5
    eta: float = 1e-5
    mu: int = 50
    max_outer: int = 200
    inner_tol: float = 1e-8
    seed: int = 0
    lags_from_one: bool = False
    literal_transpose: bool = False

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.p is not None and self.p <= 0:
            raise ValueError("p must be positive")
        if self.epsilon <= 0 or self.eta <= 0 or self.inner_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")


def _cross_lags(cfg):
    return range(1 if cfg.lags_from_one else 0, cfg.k + 1)


def _cross_vectors(fixed, b, lags, transpose_shift, literal):
    """Constraint vectors a with a^H x = 0 zeroing correlation against `fixed`.

    For the downlink step the vectors are J_m y_l; for the uplink step
    J_m^T x_q.  Under the literal-transpose convention the constraint is
    on x^T J y, i.e. the conjugated vectors.
    """
    fixed = np.asarray(fixed, dtype=np.complex128)
    cols = [np.zeros((b, 0), dtype=np.complex128)]
    for i in lags:
        j = shift_matrix(b, i)
        cols.append((j.T if transpose_shift else j) @ fixed)
    a = np.hstack(cols)
    return a.conj() if literal else a


def _null_basis(vectors):
    """Orthonormal basis of span(vectors), rank-revealed at 1e-10 * smax."""
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=np.complex128)
    u, sv, _ = np.linalg.svd(vectors, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((vectors.shape[0], 0), dtype=np.complex128)
    rank = int(np.count_nonzero(sv > 1e-10 * sv[0]))
    return u[:, :rank]


@lru_cache(maxsize=None)
def _ellipsoid_eigs(b, k):
    """Eigendecompositions of J_m^T + J_m + 2I for m = 1..k (treat read-only)."""
    out = []
    for m in range(1, k + 1):
        j = shift_matrix(b, m)
        w, u = np.linalg.eigh(j + j.T + 2.0 * np.eye(b))
        out.append((w, u))
    return tuple(out)


def _column_power(t):
    return np.einsum("ij,ij->j", t.real, t.real) + np.einsum(
        "ij,ij->j", t.imag, t.imag
    )


def _project_ball_cols(t, p):
    """Shrink every column of t into the ball of squared radius p."""
    n2 = _column_power(t)
    scale = np.where(n2 > p, np.sqrt(p / np.maximum(n2, _TINY)), 1.0)
    return t * scale


def _project_ellipsoid_cols(t, w, u, bound):
    """Project columns of t onto {x : x^H U diag(w) U^T x <= bound}.

    w >= 0 and U real orthogonal come from an eigendecomposition.  Each
    violating column gets its own multiplier via Newton on the secular
    equation phi(nu) = sum_i w_i |t_i|^2 / (1 + nu w_i)^2 = bound; phi is
    convex decreasing, so Newton from 0 climbs monotonically to the root.
    """
    tt = u.T @ t
    wc = w[:, None]
    q = wc * (tt.real**2 + tt.imag**2)
    tol = 1e-13 * bound
    phi = q.sum(axis=0) - bound
    live = phi > tol
    if not live.any():
        return t
    wq = wc * q
    nu = np.zeros(t.shape[1])
    for _ in range(_ELLIPSOID_NEWTON_MAX):
        d = 1.0 + wc * nu
        d2 = d * d
        dphi = -2.0 * (wq / (d2 * d)).sum(axis=0)
        # dphi < 0 strictly wherever live; the where keeps dead columns
        # out of the division.
        nu = np.where(live, nu - phi / np.where(live, dphi, -1.0), nu)
        d = 1.0 + wc * nu
        phi = (q / (d * d)).sum(axis=0) - bound
        live = phi > tol
        if not live.any():
            break
    return u @ (tt / (1.0 + wc * nu))


def _dykstra(t, projections, tol, max_cycles=_DYKSTRA_MAX_CYCLES):
    """Dykstra's alternating projections onto an intersection of convex sets."""
    x = t.copy()
    incs = [np.zeros_like(t) for _ in projections]
    for _ in range(max_cycles):
        x_prev = x
        for i, proj in enumerate(projections):
            shifted = x + incs[i]
            x = proj(shifted)
            incs[i] = shifted - x
        if np.linalg.norm(x - x_prev) <= tol:
            return x, True
    return x, False


def _project_matrix(t, basis, eigs, p, tol):
    """Project every column of t onto nullspace ∩ ellipsoids ∩ ball.

    All columns share the constraint sets, so they run through Dykstra
    together as one matrix iterate.
    """

    def p_sub(v):
        return v - basis @ (basis.conj().T @ v)

    has_sub = basis.shape[1] > 0
    if not eigs:
        # With no quadratic sets, nullspace-then-shrink is the exact
        # projection onto the intersection (both sets contain 0 and
        # scaling preserves nullspace membership).
        z = p_sub(t) if has_sub else t
        return _project_ball_cols(z, p), True

    projs = []
    if has_sub:
        projs.append(p_sub)
    for w, u in eigs:
        projs.append(lambda v, w=w, u=u: _project_ellipsoid_cols(v, w, u, 2.0 * p))
    projs.append(lambda v: _project_ball_cols(v, p))
    x, ok = _dykstra(t, projs, tol)
    # Feasibility polish: restore the affine constraints exactly, then
    # shrink each column uniformly until every ball/ellipsoid holds.
    # Scaling keeps nullspace membership, so the exit point is feasible
    # in all sets at an optimality cost of the order of the Dykstra
    # residual.
    if has_sub:
        x = p_sub(x)
    n2 = _column_power(x)
    scale2 = np.where(n2 > p, p / np.maximum(n2, _TINY), 1.0)
    for w, u in eigs:
        tt = u.T @ x
        val = (w[:, None] * (tt.real**2 + tt.imag**2)).sum(axis=0)
        scale2 = np.minimum(
            scale2, np.where(val > 2.0 * p, 2.0 * p / np.maximum(val, _TINY), 1.0)
        )
    return x * np.sqrt(scale2), ok


def _resolve_p(cfg, p):
    p = cfg.p if p is None else p
    if p is None:
        raise ValueError("no per-column power bound: set cfg.p or pass p")
    if p <= 0:
        raise ValueError("p must be positive")
    return float(p)


def x_step(x_target, y_fixed, cfg, p=None):
    """Project each target column onto the downlink constraint set.

    The set per column is {||x||^2 <= p} ∩ {x^H J_m y_l = 0 for all fixed
    columns y_l and lags m} ∩ {x^H (J_m^T + J_m + 2I) x <= 2p, m = 1..k}.
    If the cross-correlation vectors span the whole space only x = 0 is
    feasible; those columns are zeroed under a DegenerateConstraintWarning.
    """
    x_target = np.asarray(x_target, dtype=np.complex128)
    y_fixed = np.asarray(y_fixed, dtype=np.complex128).reshape(x_target.shape[0], -1)
    b = x_target.shape[0]
    p = _resolve_p(cfg, p)
    if cfg.k >= b:
        raise ValueError(f"k={cfg.k} must be smaller than the training length {b}")
    vecs = _cross_vectors(y_fixed, b, _cross_lags(cfg), False, cfg.literal_transpose)
    basis = _null_basis(vecs)
    if basis.shape[1] >= b:
        warnings.warn(
            "cross-correlation constraints span the whole space; "
            "returning zero columns",
            DegenerateConstraintWarning,
            stacklevel=2,
        )
        return np.zeros_like(x_target)
    eigs = _ellipsoid_eigs(b, cfg.k)
    out, ok = _project_matrix(x_target, basis, eigs, p, cfg.inner_tol)
    if not ok:
        warnings.warn(
            f"projection did not reach tol={cfg.inner_tol} within "
            f"{_DYKSTRA_MAX_CYCLES} cycles",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def y_step(y_target, x_fixed, cfg, p=None):
    """Project each target column onto the uplink constraint set (exact).

    The set is {||y||^2 <= p} ∩ {x_q^H J_m y = 0 for all fixed columns and
    lags}; projecting onto the nullspace and then shrinking into the ball
    is the true projection onto the intersection.
    """
    y_target = np.asarray(y_target, dtype=np.complex128)
    x_fixed = np.asarray(x_fixed, dtype=np.complex128).reshape(y_target.shape[0], -1)
    b = y_target.shape[0]
    p = _resolve_p(cfg, p)
    if cfg.k >= b:
        raise ValueError(f"k={cfg.k} must be smaller than the training length {b}")
    vecs = _cross_vectors(x_fixed, b, _cross_lags(cfg), True, cfg.literal_transpose)
    basis = _null_basis(vecs)
    if basis.shape[1] >= b:
        warnings.warn(
            "cross-correlation constraints span the whole space; "
            "returning zero columns",
            DegenerateConstraintWarning,
            stacklevel=2,
        )
        return np.zeros_like(y_target)
    z = y_target - basis @ (basis.conj().T @ y_target)
    return _project_ball_cols(z, p)


def inner_cycle(x_sigma, y_sigma, x0, y0, cfg, p_x=None, p_y=None):
    """Alternate x_step/y_step toward the targets for at most mu rounds.

    Each step is an exact constrained minimization in one block, so
    G = ||X - X_sigma||^2 + ||Y - Y_sigma||^2 never increases across
    rounds.  Stops early when a round moves the pair by <= inner_tol.
    """
    x, y = x0, y0
    x_seen = y_seen = None
    for _ in range(cfg.mu):
        # The targets are fixed for the whole cycle and each step is a
        # deterministic function of (target, other block), so a step whose
        # other block did not move since its last run returns the same
        # matrix and is skipped.
        if x_seen is None or not np.array_equal(y, x_seen):
            x_new = x_step(x_sigma, y, cfg, p=p_x)
            x_seen = y
        else:
            x_new = x
        if y_seen is None or not np.array_equal(x_new, y_seen):
            y_new = y_step(y_sigma, x_new, cfg, p=p_y)
            y_seen = x_new
        else:
            y_new = y
        move = max(
            np.linalg.norm(x_new - x) if x.size else 0.0,
            np.linalg.norm(y_new - y) if y.size else 0.0,
        )
        x, y = x_new, y_new
        if move <= cfg.inner_tol:
            break
    g = float(np.linalg.norm(x - x_sigma) ** 2 + np.linalg.norm(y - y_sigma) ** 2)
    return x, y, g


def _mm_quadratic(v, s):
    """Quadratic model pieces of F(V, .) at fixed V.

    F(V, P) = <L(P), W2 L(P) R> + 2 Re <L(P), V2 V1^H R> + const with
    L the pilot embedding and W2 = V2 V2^H, so the (self-adjoint, PSD)
    curvature operator is T(P) = adj(W2 L(P) R) and the linear term is
    G = adj(V2 V1^H R).  Returns (apply_t, g).
    """
    w2 = v.v2 @ v.v2.conj().T
    r = s.chan_cov
    n_r = s.n_r
    b, n_t = s.b, s.n_t
    # Densify T once: T(P)_{ij} = sum_{r,s} W2[i,r,k,s] P_{kl} R[l,s,j,r],
    # so repeated applications inside the power iteration are one
    # tensordot instead of embed/adjoint round trips.
    dense = np.einsum(
        "irks,lsjr->ijkl",
        w2.reshape(b, n_r, b, n_r),
        r.reshape(n_t, n_r, n_t, n_r),
    )

    def apply_t(q):
        return np.tensordot(dense, q, axes=([2, 3], [0, 1]))

    g = adjoint_embed(v.v2 @ v.v1.conj().T @ r, n_r)
    return apply_t, g


def build_sigma_target(v, p_current, s, opnorm_tol=1e-6, opnorm_max_iter=500):
    """Majorize-minimize target for one pilot block at fixed auxiliary V.

    With lam >= opnorm(T), F(V, P) <= F(V, P0) + 2<P-P0, T(P0)+G> +
    lam ||P-P0||^2, whose constrained minimizer is the projection of
    P_sigma = P0 - (T(P0)+G)/lam.  lam comes from power iteration with a
    10% safety margin.  A zero V2 makes F constant in P and returns P0.
    """
    p_current = np.asarray(p_current, dtype=np.complex128)
    if p_current.shape != (s.b, s.n_t):
        raise ValueError(
            f"pilot shape {p_current.shape}, scenario expects {(s.b, s.n_t)}"
        )
    n = s.n_t * s.n_r
    if v.v1.shape != (n, n) or v.v2.shape != (s.b * s.n_r, n):
        raise ValueError("auxiliary variable does not conform with the scenario")
    if not np.any(v.v2):
        return p_current.copy()
    apply_t, g = _mm_quadratic(v, s)
    lam = power_iteration_opnorm(
        apply_t, p_current.shape, tol=opnorm_tol, max_iter=opnorm_max_iter
    )
    lam *= 1.1
    if not np.isfinite(lam) or lam <= 0.0:
        return p_current.copy()
    return p_current - (apply_t(p_current) + g) / lam


@dataclass(frozen=True)
class PilotPair:
    """Designed pilot matrices and their feasibility residuals."""

    x: np.ndarray
    y: np.ndarray
    max_column_power: float
    max_cross_corr: float
    max_auto_corr: float


@dataclass
class DesignTrace:
    """Per-outer-iteration progress (entry 0 is the initialization)."""

    mse: list[float] = field(default_factory=list)
    max_cross: list[float] = field(default_factory=list)
    max_auto: list[float] = field(default_factory=list)
    max_power: list[float] = field(default_factory=list)
    converged: bool = False
    outer_iterations: int = 0
    wall_time: float = 0.0
    warnings: list[str] = field(default_factory=list)


def _pair_residuals(x, y, cfg):
    """Max |cross-corr| over the lag set, |autocorr| of x at lags 1..k, power."""
    b = x.shape[0]
    xc = x if cfg.literal_transpose else x.conj()
    max_cross = 0.0
    for i in _cross_lags(cfg):
        c = xc.T @ shift_matrix(b, i) @ y
        if c.size:
            max_cross = max(max_cross, float(np.abs(c).max()))
    max_auto = 0.0
    for m in range(1, cfg.k + 1):
        vals = np.einsum("bq,bc,cq->q", xc, shift_matrix(b, m), x)
        if vals.size:
            max_auto = max(max_auto, float(np.abs(vals).max()))
    powers = [0.0]
    for mat in (x, y):
        if mat.size:
            powers.append(float(np.real(np.sum(mat.conj() * mat, axis=0)).max()))
    return max(powers), max_cross, max_auto


def design_pilots(dl, ul, cfg):
    """Run the full cyclic design; returns (PilotPair, DesignTrace).

    dl/ul are the two link scenarios sharing the training length B; the
    downlink pilot X is B x dl.n_t and the uplink pilot Y is B x ul.n_t.
    Stops when the total MSE moves by less than eta between outer
    iterations, or flags non-convergence at max_outer and returns the
    best pair seen.
    """
    if dl.b != ul.b:
        raise ValueError("link scenarios must share the training length")
    if cfg.k >= dl.b:
        raise ValueError(f"k={cfg.k} must be smaller than the training length {dl.b}")
    p_x = cfg.p if cfg.p is not None else dl.gamma / dl.n_t
    p_y = cfg.p if cfg.p is not None else ul.gamma / ul.n_t

    t0 = time.perf_counter()
    trace = DesignTrace()
    rng = np.random.default_rng(cfg.seed)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        # Feasible start: X into ball ∩ ellipsoids (no cross constraints
        # yet), then Y projected against that X.  Every constraint the
        # inner cycle later enforces holds from iteration 0, so the MM
        # descent argument applies to the whole trace.
        x_raw = rng.standard_normal((dl.b, dl.n_t)) + 1j * rng.standard_normal(
            (dl.b, dl.n_t)
        )
        y_raw = rng.standard_normal((ul.b, ul.n_t)) + 1j * rng.standard_normal(
            (ul.b, ul.n_t)
        )
        x = x_step(x_raw, np.zeros((dl.b, 0)), cfg, p=p_x)
        y = y_step(y_raw, x, cfg, p=p_y)

        mse = channel_mse_lemma(x, dl) + channel_mse_lemma(y, ul)
        power, cross, auto = _pair_residuals(x, y, cfg)
        trace.mse.append(mse)
        trace.max_power.append(power)
        trace.max_cross.append(cross)
        trace.max_auto.append(auto)

        best = (mse, x, y)
        for _ in range(cfg.max_outer):
            v_dl = optimal_V(x, dl)
            v_ul = optimal_V(y, ul)
            x_sigma = build_sigma_target(v_dl, x, dl)
            y_sigma = build_sigma_target(v_ul, y, ul)
            x, y, _ = inner_cycle(x_sigma, y_sigma, x, y, cfg, p_x=p_x, p_y=p_y)

            prev, mse = mse, channel_mse_lemma(x, dl) + channel_mse_lemma(y, ul)
            power, cross, auto = _pair_residuals(x, y, cfg)
            trace.mse.append(mse)
            trace.max_power.append(power)
            trace.max_cross.append(cross)
            trace.max_auto.append(auto)
            trace.outer_iterations += 1
            if mse < best[0]:
                best = (mse, x, y)
            if abs(prev - mse) < cfg.eta:
                trace.converged = True
                break

    trace.warnings = list(dict.fromkeys(str(w.message) for w in caught))
    mse, x, y = best
    power, cross, auto = _pair_residuals(x, y, cfg)
    pair = PilotPair(
        x=x,
        y=y,
        max_column_power=power,
        max_cross_corr=cross,
        max_auto_corr=auto,
    )
    # A successful design guarantees the cross-correlation residual; an
    # MSE plateau alone does not count.
    if trace.converged and cross > cfg.epsilon:
        trace.converged = False
        trace.warnings.append(
            f"cross-correlation residual {cross:.3g} exceeds epsilon={cfg.epsilon}"
        )
    trace.wall_time = time.perf_counter() - t0
    return pair, trace
