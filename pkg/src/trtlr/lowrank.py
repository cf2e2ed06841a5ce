"""Rank-adaptive parallel BUG integrator for the micro field g = X S V^T.

Per step:

1. pre-augmentation of X with sigma_t^{-1} d0_v B(T^n) and of V with
   Omega_v, so the diffusion limit lies in the approximation space;
2. K-, L- and S-steps, each a pure function of the frozen step-n data;
3. assembly of the 2r x 2r augmented coefficient matrix;
4. conservative truncation, which keeps the augmented directions exactly
   and SVD-truncates the rest;

followed by the wall rows and the macro update.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .boundary import impose_lowrank_bc, interpolate_h
from .full import StepFailure, flux_divergence, macro_update, scalar_flux

SIGMA_FLOOR = 1e-14
N_CONSERVED = 2


@dataclass
class LowRankState:
    X: np.ndarray
    S: np.ndarray
    V: np.ndarray
    h: np.ndarray
    T: np.ndarray
    t: float = 0.0
    step: int = 0

    @property
    def rank(self):
        return self.S.shape[0]

    def dense(self):
        return self.X @ self.S @ self.V.T


@dataclass(frozen=True)
class TruncationPolicy:
    """Rank truncation rule.

    ``mode='relative-spectral'`` uses theta = tol * ||S_hat||_2,
    ``mode='absolute'`` uses theta = tol.
    """

    mode: str = "relative-spectral"
    tol: float = 1e-2
    r_max: int = 100
    conserved_spatial: int = N_CONSERVED
    conserved_angular: int = N_CONSERVED

    def __post_init__(self):
        if self.mode not in ("relative-spectral", "absolute"):
            raise ValueError(f"unknown truncation mode {self.mode!r}")
        if self.tol < 0:
            raise ValueError("truncation tolerance must be non-negative")
        if self.r_max < N_CONSERVED + 1:
            raise ValueError(f"r_max must be at least {N_CONSERVED + 1}")
        if self.conserved_spatial != N_CONSERVED or self.conserved_angular != N_CONSERVED:
            raise ValueError("exactly two conserved spatial and angular directions are supported")

    def threshold(self, S_hat):
        if self.mode == "absolute":
            return float(self.tol)
        return float(self.tol * np.linalg.norm(S_hat, 2)) if S_hat.size else 0.0


@dataclass
class StepInfo:
    rank: int = 0
    kept: int = 0
    truncated: bool = False
    cap_hit: bool = False
    padded: int = 0
    regularized: bool = False
    newton: object = None
    flags: list = field(default_factory=list)


def orthonormalize(A, basis=None, w=None, rng=None, rtol=1e-12):
    """Orthonormal columns spanning ``A`` orthogonally to ``basis`` and ``w``.

    Modified Gram-Schmidt with a second pass.  Columns whose remainder is
    negligible relative to their original norm are replaced by vectors from
    a seeded random complement, keeping the original slot order.  Once the
    complement is exhausted the remaining slots are zero columns.

    Returns
    -------
    Q : ndarray
    n_pad : int
        Number of padded columns.
    """
    n, m = A.shape
    rng = np.random.default_rng(0) if rng is None else rng
    fixed = []
    if w is not None:
        fixed.append((w / np.linalg.norm(w))[:, None])
    if basis is not None and basis.shape[1]:
        fixed.append(basis)
    F = np.hstack(fixed) if fixed else np.zeros((n, 0))
    Q = np.zeros((n, m))
    good = np.zeros(m, dtype=bool)

    def project(x, B):
        for _ in range(2):
            x = x - B @ (B.T @ x)
        return x

    nrm0 = np.linalg.norm(A, axis=0)
    R = project(np.asarray(A, dtype=float), F)
    for j in range(m):
        if nrm0[j] == 0:
            continue
        x = project(R[:, j], Q[:, :j][:, good[:j]])
        nrm = np.linalg.norm(x)
        if nrm > rtol * nrm0[j]:
            Q[:, j] = x / nrm
            good[j] = True
    n_pad = int((~good).sum())
    for j in np.flatnonzero(~good):
        B = np.hstack([F, Q[:, good]])
        if B.shape[1] >= n:
            break  # space exhausted: remaining slots stay zero
        while True:
            x = project(rng.standard_normal(n), B)
            nrm = np.linalg.norm(x)
            if nrm > 1e-8:
                break
        Q[:, j] = x / nrm
        good[j] = True
    return Q, n_pad


def gradient_vectors(T, disc):
    """sigma_t^{-1} d0_v B(T) on K^I (zero where sigma_t vanishes)."""
    B = disc.planck(T)
    sig = disc.params.sigma_t_I
    inv = np.divide(1.0, sig, out=np.zeros_like(sig), where=sig > 0)
    return inv * disc.gradient(B, "x"), inv * disc.gradient(B, "y")


def pre_augment(state, disc, rng=None):
    """Return a state of rank r+2 whose bases contain the limit directions."""
    gx, gy = gradient_vectors(state.T, disc)
    ang = disc.ang
    Xa, pad_x = orthonormalize(np.column_stack([gx, gy, state.X]), rng=rng)
    Va, pad_v = orthonormalize(np.column_stack([ang.Q_x, ang.Q_y, state.V]), w=ang.w, rng=rng)
    Sa = (Xa.T @ state.X) @ state.S @ (state.V.T @ Va)
    return replace(state, X=Xa, S=Sa, V=Va), pad_x + pad_v


def _galerkin_angular(V, ang):
    """V^T Q_v^+- V and V^T Q_v^+- w for both axes."""
    out = {}
    for v in ("x", "y"):
        for s, q in (("p", ang.Qplus(v)), ("m", ang.Qminus(v))):
            out[s + v] = V.T @ (q[:, None] * V)
            out[s + v + "w"] = V.T @ (q * ang.w)
    return out


def _system(X, disc, dt):
    """Left/right r x r matrix eps^2/(c dt) I + X^T sigma_t X."""
    p = disc.params
    c0 = p.eps**2 / (p.c * dt)
    M = X.T @ (p.sigma_t_I[:, None] * X)
    M = 0.5 * (M + M.T) + c0 * np.eye(X.shape[1])
    regularized = c0 == 0 and np.any(p.sigma_t_I <= 0)
    if regularized:
        M += SIGMA_FLOOR * np.eye(X.shape[1])
    return M, c0, regularized


def k_step(state, phi, disc, dt, rng=None):
    """K-step.  Returns (X_hat, S_tilde_K, K_new)."""
    p, ops, ang = disc.params, disc.ops, disc.ang
    X, S, V = state.X, state.S, state.V
    c0 = p.eps**2 / (p.c * dt)
    denom = c0 + p.sigma_t_I
    if np.any(denom <= 0):
        raise StepFailure("K-step denominator vanishes (eps = 0 in vacuum)")
    K = X @ S
    rhs = -(np.outer(disc.gradient(phi, "x"), ang.Q_x @ V) + np.outer(disc.gradient(phi, "y"), ang.Q_y @ V))
    if p.eps != 0:
        G = _galerkin_angular(V, ang)
        LV = np.zeros_like(K)
        Lw = np.zeros(K.shape[0])
        for v in ("x", "y"):
            DpK = ops.Dp[v] @ K
            DmK = ops.Dm[v] @ K
            LV += DpK @ G["m" + v] + DmK @ G["p" + v]
            Lw += DpK @ G["m" + v + "w"] + DmK @ G["p" + v + "w"]
        LV -= np.outer(Lw, V.sum(axis=0)) / (2.0 * np.pi)
        rhs += c0 * K - p.eps * LV
    K_new = rhs / denom[:, None]
    Xt, _ = orthonormalize(K_new, basis=X, rng=rng)
    return np.hstack([X, Xt]), Xt.T @ K_new, K_new


def _spatial_galerkin(X, ops):
    return {v: (X.T @ (ops.Dp[v] @ X), X.T @ (ops.Dm[v] @ X)) for v in ("x", "y")}


def l_step(state, phi, disc, dt, rng=None):
    """L-step.  Returns (V_hat, S_tilde_L, L_new)."""
    p, ops, ang = disc.params, disc.ops, disc.ang
    X, S, V = state.X, state.S, state.V
    M, c0, _ = _system(X, disc, dt)
    L = V @ S.T
    rhs = -(np.outer(ang.Q_x, X.T @ disc.gradient(phi, "x")) + np.outer(ang.Q_y, X.T @ disc.gradient(phi, "y")))
    if p.eps != 0:
        A = _spatial_galerkin(X, ops)
        Z = np.zeros_like(L)
        for v in ("x", "y"):
            Ap, Am = A[v]
            Z += ang.Qminus(v)[:, None] * (L @ Ap.T) + ang.Qplus(v)[:, None] * (L @ Am.T)
        Z -= np.outer(np.ones(L.shape[0]), ang.w @ Z) / (2.0 * np.pi)
        rhs += c0 * L - p.eps * Z
    L_new = np.linalg.solve(M, rhs.T).T
    Vt, _ = orthonormalize(L_new, basis=V, w=ang.w, rng=rng)
    return np.hstack([V, Vt]), L_new.T @ Vt, L_new


def s_step(state, phi, disc, dt):
    """S-step.  Returns S_bar."""
    p, ops, ang = disc.params, disc.ops, disc.ang
    X, S, V = state.X, state.S, state.V
    M, c0, _ = _system(X, disc, dt)
    rhs = -(np.outer(X.T @ disc.gradient(phi, "x"), ang.Q_x @ V)
            + np.outer(X.T @ disc.gradient(phi, "y"), ang.Q_y @ V))
    if p.eps != 0:
        A = _spatial_galerkin(X, ops)
        G = _galerkin_angular(V, ang)
        LV = np.zeros_like(S)
        Lw = np.zeros(S.shape[0])
        for v in ("x", "y"):
            Ap, Am = A[v]
            LV += Ap @ S @ G["m" + v] + Am @ S @ G["p" + v]
            Lw += Ap @ S @ G["m" + v + "w"] + Am @ S @ G["p" + v + "w"]
        LV -= np.outer(Lw, V.sum(axis=0)) / (2.0 * np.pi)
        rhs += c0 * S - p.eps * LV
    return np.linalg.solve(M, rhs)


def assemble_augmented(S_bar, S_tilde_K, S_tilde_L):
    """[[S_bar, S_tilde_L], [S_tilde_K, 0]]."""
    r = S_bar.shape[0]
    if S_bar.shape != (r, r) or S_tilde_K.shape != (r, r) or S_tilde_L.shape != (r, r):
        raise ValueError("augmented blocks must all be r x r")
    return np.block([[S_bar, S_tilde_L], [S_tilde_K, np.zeros((r, r))]])


def _tail_rank(sv, theta):
    """Smallest k with sqrt(sum_{j >= k} sv_j^2) <= theta."""
    tails = np.sqrt(np.cumsum((sv**2)[::-1]))[::-1]
    below = np.flatnonzero(tails <= theta)
    return int(below[0]) if below.size else sv.size


def _coef_basis(cols, drop):
    """Orthonormal basis of span(cols), dropping directions below ``drop``."""
    if cols.shape[1] == 0:
        return cols
    U, s, _ = np.linalg.svd(cols, full_matrices=False)
    return U[:, s > drop]


def _complete(U, dim, rng):
    """Append orthonormal columns to U until it has ``dim`` columns."""
    n = U.shape[0]
    extra = dim - U.shape[1]
    if extra <= 0:
        return U
    Q, _ = orthonormalize(np.zeros((n, extra)), basis=U if U.shape[1] else None, rng=rng)
    return np.hstack([U, Q])


def _orthonormal(A, tol=1e-12):
    return A.shape[1] == 0 or np.allclose(A.T @ A, np.eye(A.shape[1]), rtol=0, atol=tol)


def conservative_truncate(X_hat, S_hat, V_hat, policy, rng=None):
    """Truncate the augmented factorisation while keeping the leading
    conserved directions of X_hat and V_hat exactly.

    With c conserved columns, S_hat = [[S_cc, S_cr], [S_rc, S_rr]].  Only
    S_rr (the part orthogonal to the conserved directions on both sides) is
    truncated; the cross blocks stay exact, so the discarded part is
    ``X_r (S_rr - P_k Sigma_k Q_k^T) V_r^T`` with norm at most theta.
    Zero columns left by an exhausted padding are dropped first.  For
    theta > 0 the new rank is capped below the augmented rank 2 r~; with
    theta = 0 the untruncated factorisation is returned.

    Returns
    -------
    X, S, V : ndarray
    info : StepInfo
    """
    c = N_CONSERVED
    n_aug = max(S_hat.shape)
    # zero columns left by an exhausted padding carry no information
    keep_x = np.linalg.norm(X_hat, axis=0) > 0
    keep_v = np.linalg.norm(V_hat, axis=0) > 0
    X_hat, V_hat, S_hat = X_hat[:, keep_x], V_hat[:, keep_v], S_hat[np.ix_(keep_x, keep_v)]
    if not _orthonormal(X_hat):
        X_hat, R = np.linalg.qr(X_hat)
        S_hat = R @ S_hat
    if not _orthonormal(V_hat):
        V_hat, R = np.linalg.qr(V_hat)
        S_hat = S_hat @ R.T
    nx, nv = S_hat.shape
    theta = policy.threshold(S_hat)
    scale = np.linalg.norm(S_hat, 2) if S_hat.size else 0.0
    drop = 1e-14 * scale
    S_cr, S_rc, S_rr = S_hat[:c, c:], S_hat[c:, :c], S_hat[c:, c:]
    P, sv, Qt = np.linalg.svd(S_rr, full_matrices=False)
    k = _tail_rank(sv, theta)
    cap = min(policy.r_max, nx, nv)
    if theta > 0:
        # the rank must drop below the augmented rank; with theta = 0 the
        # exact factorisation is kept instead
        cap = min(cap, n_aug - 1)
    rng = np.random.default_rng(0) if rng is None else rng
    info = StepInfo()
    while True:
        Ux = _coef_basis(np.hstack([P[:, :k], S_rc]), drop)
        Wv = _coef_basis(np.hstack([Qt[:k].T, S_cr.T]), drop)
        r_new = c + max(Ux.shape[1], Wv.shape[1])
        if r_new <= cap or k == 0:
            break
        k -= 1
        info.cap_hit = True
    S_rr_k = (P[:, :k] * sv[:k]) @ Qt[:k]
    if r_new > cap:
        # even k = 0 exceeds the cap: compress the cross terms as well
        info.cap_hit = True
        m = cap - c
        Ux = np.linalg.svd(np.hstack([S_rc, S_rr]), full_matrices=False)[0][:, :m]
        Wv = np.linalg.svd(np.hstack([S_cr.T, S_rr.T]), full_matrices=False)[0][:, :m]
        r_new = cap
    m = r_new - c
    Ux = _complete(Ux, m, rng)
    Wv = _complete(Wv, m, rng)
    S_t = S_hat.copy()
    S_t[c:, c:] = S_rr_k
    Ex = np.zeros((nx, r_new))
    Ex[:c, :c] = np.eye(c)
    Ex[c:, c:] = Ux
    Ev = np.zeros((nv, r_new))
    Ev[:c, :c] = np.eye(c)
    Ev[c:, c:] = Wv
    X = X_hat @ Ex
    V = V_hat @ Ev
    S = Ex.T @ S_t @ Ev
    info.rank = r_new
    info.kept = k
    info.truncated = bool(np.any(sv[k:] > 0))
    return X, S, V, info


def lowrank_fluxes(X, S, V, disc):
    """Normal fluxes g Q_v w of g = X S V^T without forming g."""
    w = disc.ang.w
    return (X @ (S @ (V.T @ (disc.ang.Q_x * w))),
            X @ (S @ (V.T @ (disc.ang.Q_y * w))))


def parallel_update(state, disc, dt, rng=None):
    """Pre-augmentation plus K/L/S steps and augmentation.

    Returns
    -------
    X_hat, S_hat, V_hat : ndarray
        Augmented factorisation of rank 2(r+2) before truncation.
    info : StepInfo
    """
    info = StepInfo()
    aug, info.padded = pre_augment(state, disc, rng)
    phi = scalar_flux(state.T, state.h, disc)
    rng = np.random.default_rng(0) if rng is None else rng
    rng_k, rng_l = rng.spawn(2)
    X_hat, S_tK, _ = k_step(aug, phi, disc, dt, rng_k)
    V_hat, S_tL, _ = l_step(aug, phi, disc, dt, rng_l)
    S_bar = s_step(aug, phi, disc, dt)
    info.regularized = _system(aug.X, disc, dt)[2]
    return X_hat, assemble_augmented(S_bar, S_tK, S_tL), V_hat, info


def dlra_step(state, disc, dt, policy, seed=0):
    """One step of the low-rank scheme."""
    rng = np.random.default_rng([seed, state.step])
    X_hat, S_hat, V_hat, pinfo = parallel_update(state, disc, dt, rng)
    X, S, V, info = conservative_truncate(X_hat, S_hat, V_hat, policy, rng)
    info.padded, info.regularized = pinfo.padded, pinfo.regularized
    if disc.boundary is not None and disc.grid.boundary_I.size:
        X, S = impose_lowrank_bc(X, S, V, disc, interpolate_h(disc.grid, state.h))
    Fx, Fy = lowrank_fluxes(X, S, V, disc)
    h, T, newton = macro_update(state.T, state.h, flux_divergence(Fx, Fy, disc), disc, dt)
    info.newton = newton
    new = replace(state, X=X, S=S, V=V, h=h, T=T, t=state.t + dt, step=state.step + 1)
    return new, info


def initial_lowrank_state(T0, disc, rank=10, seed=0, g0=None):
    """Factorised start.

    With ``g0=None`` (equilibrium data) the factors are a deterministic
    random orthonormal pair with S = 0.  Otherwise ``g0`` is truncated to
    ``rank`` by SVD and completed with w-orthogonal columns.
    """
    grid, ang = disc.grid, disc.ang
    rank = int(min(rank, grid.n_I, disc.quad.n_dirs - 1))
    if rank < 1:
        raise ValueError("initial rank must be >= 1")
    rng = np.random.default_rng([seed, 2**31 - 1])
    if g0 is None:
        X, _ = orthonormalize(np.zeros((grid.n_I, rank)), rng=rng)
        V, _ = orthonormalize(np.zeros((disc.quad.n_dirs, rank)), w=ang.w, rng=rng)
        S = np.zeros((rank, rank))
    else:
        U, s, Vt = np.linalg.svd(g0, full_matrices=False)
        X, _ = orthonormalize(U[:, :rank] * (s[:rank] > 0), rng=rng)
        V, _ = orthonormalize(Vt[:rank].T * (s[:rank] > 0), w=ang.w, rng=rng)
        S = X.T @ g0 @ V
    T0 = np.asarray(T0, dtype=float).copy()
    return LowRankState(X=X, S=S, V=V, h=np.zeros(grid.n_C), T=T0)
