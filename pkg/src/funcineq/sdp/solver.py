"""Primal-dual interior-point method on the homogeneous self-dual embedding.

Works on the equality form (P)/(D) described in :mod:`funcineq.sdp.model`
with Nesterov-Todd scaling and a Mehrotra predictor-corrector.  The
embedding variables (X, y, S, tau, kappa) satisfy

    A X - b tau = 0,   A* y + S - C tau = 0,   b^T y - <C, X> - kappa = 0,

and every iterate reduces the residuals of these equations at the same rate
as the complementarity measure.  tau -> 0 with kappa > 0 signals
infeasibility; the last (y, S) or X is then an improving ray.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps

from .model import BlockSdp, SolveReport, SolverOptions

__all__ = ["solve", "dimacs_errors", "EqualityForm"]


class EqualityForm:
    """Dense/sparse operators for (P): C blocks, A as sparse m x n_b^2 matrices."""

    def __init__(self, p: BlockSdp):
        self.p = p
        self.m = p.m
        self.dims = p.dims
        self.b = p.c.astype(float)
        self.C = []
        self.A = []
        self.act = []
        self.sub = []   # per block: list of (constraint, support rows, dense submatrix)
        for k, n in enumerate(self.dims):
            self.C.append(-p.matrix(0, k))
            sel = (p.blk == k) & (p.mat > 0)
            i = p.mat[sel] - 1
            r, c, v = p.row[sel], p.col[sel], p.val[sel]
            off = r != c
            rows = np.concatenate([i, i[off]])
            cols = np.concatenate([r * n + c, c[off] * n + r[off]])
            vals = np.concatenate([v, v[off]])
            A = sps.csr_matrix((vals, (rows, cols)), shape=(self.m, n * n))
            A.sum_duplicates()
            self.A.append(A)
            active = np.unique(i)
            self.act.append(active)
            self.sub.append(None)

    def op(self, X: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for A, Xb in zip(self.A, X):
            out += A @ Xb.ravel()
        return out

    def adj(self, y: np.ndarray) -> list[np.ndarray]:
        return [(A.T @ y).reshape(n, n) for A, n in zip(self.A, self.dims)]

    def _supports(self, k: int):
        if self.sub[k] is None:
            n = self.dims[k]
            A = self.A[k]
            items = []
            for i in self.act[k]:
                start, end = A.indptr[i], A.indptr[i + 1]
                cols = A.indices[start:end]
                vals = A.data[start:end]
                r, c = np.divmod(cols, n)
                P = np.unique(np.concatenate([r, c]))
                loc = {v: j for j, v in enumerate(P)}
                D = np.zeros((len(P), len(P)))
                D[[loc[v] for v in r], [loc[v] for v in c]] = vals
                items.append((i, P, D))
            self.sub[k] = items
        return self.sub[k]

    def schur(self, W: list[np.ndarray]) -> np.ndarray:
        """M_ij = sum_b tr(A_i W A_j W)."""
        M = np.zeros((self.m, self.m))
        for k, n in enumerate(self.dims):
            act = self.act[k]
            if not len(act):
                continue
            Wk = W[k]
            A = self.A[k]
            Aact = A[act]
            if n <= 48 and len(act) * n * n <= 4_000_000:
                Ad = Aact.toarray().reshape(len(act), n, n)
                T = np.matmul(np.matmul(Wk, Ad), Wk).reshape(len(act), n * n)
                M[np.ix_(act, act)] += Ad.reshape(len(act), -1) @ T.T
                continue
            items = self._supports(k)
            chunk = 64
            for s in range(0, len(items), chunk):
                part = items[s:s + chunk]
                T = np.empty((len(part), n * n))
                for j, (_, P, D) in enumerate(part):
                    WP = Wk[:, P]
                    T[j] = (WP @ D @ WP.T).ravel()
                ids = np.array([it[0] for it in part])
                M[np.ix_(act, ids)] += (Aact @ T.T)
        return 0.5 * (M + M.T)


def _inner(U: list[np.ndarray], V: list[np.ndarray]) -> float:
    return float(sum(np.vdot(u, v) for u, v in zip(U, V)))


def _norm(U: list[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.vdot(u, u) for u in U)))


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _nt_scaling(X: np.ndarray, S: np.ndarray):
    """Return (G, lam) with W = G G^T, G^{-1} X G^{-T} = G^T S G = diag(lam)."""
    LX = np.linalg.cholesky(X)
    LS = np.linalg.cholesky(S)
    U, sv, Vt = np.linalg.svd(LS.T @ LX)
    G = LX @ Vt.T / np.sqrt(sv)
    return G, sv


def _max_step(lam: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha D >= 0 (D symmetric, lam > 0)."""
    s = 1.0 / np.sqrt(lam)
    ev = np.linalg.eigvalsh(_sym(s[:, None] * D * s[None, :]))
    lo = ev[0] if len(ev) else 0.0
    return np.inf if lo >= 0 else -1.0 / lo


def _scaled(G: np.ndarray, Ginv: np.ndarray, dX: np.ndarray, dS: np.ndarray):
    return Ginv @ dX @ Ginv.T, G.T @ dS @ G


def dimacs_errors(form: EqualityForm, X, y, S) -> dict:
    b, C = form.b, form.C
    bn = 1.0 + float(np.max(np.abs(b))) if len(b) else 1.0
    cn = 1.0 + max((float(np.max(np.abs(c))) if c.size else 0.0) for c in C)
    pobj = _inner(C, X)
    dobj = float(b @ y)
    rd = [c - a - s for c, a, s in zip(C, form.adj(y), S)]
    den = 1.0 + abs(pobj) + abs(dobj)
    minX = min(float(np.linalg.eigvalsh(_sym(x))[0]) for x in X if x.size)
    minS = min(float(np.linalg.eigvalsh(_sym(s))[0]) for s in S if s.size)
    return {
        "err1": float(np.linalg.norm(form.op(X) - b)) / bn,
        "err2": max(0.0, -minX) / bn,
        "err3": _norm(rd) / cn,
        "err4": max(0.0, -minS) / cn,
        "err5": (pobj - dobj) / den,
        "err6": _inner(X, S) / den,
    }


def _factor(M: np.ndarray):
    try:
        return ("chol", sla.cho_factor(M, check_finite=False))
    except (np.linalg.LinAlgError, sla.LinAlgError):
        pass
    reg = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(M)))))
    for _ in range(6):
        try:
            return ("chol", sla.cho_factor(M + reg * np.eye(len(M)), check_finite=False))
        except (np.linalg.LinAlgError, sla.LinAlgError):
            reg *= 100
    return ("lstsq", M)


def _back(fac, rhs):
    kind, data = fac
    if kind == "chol":
        return sla.cho_solve(data, rhs, check_finite=False)
    return np.linalg.lstsq(data, rhs, rcond=None)[0]


def solve(p: BlockSdp, opt: SolverOptions | None = None) -> SolveReport:
    """Solve the SDP; never raises on numerical trouble (status reports it)."""
    opt = opt or SolverOptions()
    t0 = time.perf_counter()
    form = EqualityForm(p)
    try:
        return _solve(form, opt, t0)
    except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        n = form.dims
        return SolveReport("numerical", [np.eye(k) for k in n], np.zeros(form.m),
                           [np.eye(k) for k in n], message=f"breakdown: {exc}",
                           wall_time=time.perf_counter() - t0)


def _solve(form: EqualityForm, opt: SolverOptions, t0: float) -> SolveReport:
    dims, m = form.dims, form.m
    b, C = form.b, form.C
    N = sum(dims)
    X = [np.eye(n) for n in dims]
    S = [np.eye(n) for n in dims]
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0
    history = []
    status, message = "max_iter", ""
    frac = opt.step_fraction
    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + _norm(C)

    it = 0
    for it in range(1, opt.max_iter + 1):
        AX = form.op(X)
        ATy = form.adj(y)
        Rp = b * tau - AX
        Rd = [c * tau - a - s for c, a, s in zip(C, ATy, S)]
        pobj_h = _inner(C, X)
        dobj_h = float(b @ y)
        Rg = kappa + pobj_h - dobj_h
        mu = (_inner(X, S) + tau * kappa) / (N + 1)

        # termination tests on the de-homogenized point
        pinf = float(np.linalg.norm(Rp)) / tau / bnorm
        dinf = _norm(Rd) / tau / cnorm
        pobj, dobj = pobj_h / tau, dobj_h / tau
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        # pobj - dobj = (<X, S> + <Rd, X> - Rp^T y) / tau^2 exactly; <X, S> >= 0 makes
        # the residual part a lower bound on the gap (weak duality for infeasible iterates)
        gap_floor = (_inner(Rd, X) - float(Rp @ y)) / tau ** 2
        history.append({"iter": it - 1, "pobj": pobj, "dobj": dobj, "pinf": pinf, "dinf": dinf,
                        "gap": relgap, "gap_floor": gap_floor, "xs": _inner(X, S) / tau ** 2,
                        "mu": mu, "tau": tau, "kappa": kappa})
        if opt.verbose:
            print(f"{it - 1:3d} pobj {pobj: .8e} dobj {dobj: .8e} pinf {pinf:.1e} dinf {dinf:.1e} "
                  f"gap {relgap:.1e} tau {tau:.1e} kappa {kappa:.1e}")
        if pinf <= opt.tol_feas and dinf <= opt.tol_feas and relgap <= opt.tol_gap:
            status = "optimal"
            break
        # improving rays
        if dobj_h > 0:
            ray = _norm([a + s for a, s in zip(ATy, S)]) / dobj_h
            if ray <= opt.tol_infeas and kappa > tau:
                status, message = "primal_infeasible", f"dual improving ray, |A*y + S| / b^T y = {ray:.1e}"
                break
        if pobj_h < 0:
            ray = float(np.linalg.norm(AX)) / -pobj_h
            if ray <= opt.tol_infeas and kappa > tau:
                status, message = "dual_infeasible", f"primal improving ray, |A X| / -<C,X> = {ray:.1e}"
                break
        if mu < 1e-30 or not np.isfinite(mu):
            status, message = "numerical", "complementarity underflow"
            break

        scal = [_nt_scaling(x, s) for x, s in zip(X, S)]
        Gs = [g for g, _ in scal]
        lams = [l for _, l in scal]
        Ginvs = [np.linalg.inv(g) for g in Gs]
        W = [g @ g.T for g in Gs]
        Mschur = form.schur(W)
        fac = _factor(Mschur)
        WCW = [w @ c @ w for w, c in zip(W, C)]
        a = form.op(WCW)
        u = _back(fac, a + b)
        cWCW = _inner(C, WCW)
        WRdW = [w @ r @ w for w, r in zip(W, Rd)]
        AWRdW = form.op(WRdW)
        CWRdW = _inner(WCW, Rd)
        denom = float((b - a) @ u) + cWCW + kappa / tau

        def direction(eta: float, H: list[np.ndarray], rtk: float):
            # H: scaled complementarity right-hand sides -> R_c = G E G^T
            Rc = []
            for g, lam, h in zip(Gs, lams, H):
                E = h / (lam[:, None] + lam[None, :])
                Rc.append(g @ E @ g.T)
            r1 = eta * Rp - form.op(Rc) + eta * AWRdW
            v = _back(fac, r1)
            rhs = (eta * Rg + rtk / tau - float((b - a) @ v) + _inner(C, Rc) - eta * CWRdW)
            dtau = rhs / denom
            dy = u * dtau + v
            ATdy = form.adj(dy)
            dS = [_sym(eta * r - q + c * dtau) for r, q, c in zip(Rd, ATdy, C)]
            dX = [_sym(rc - w @ ds @ w) for rc, w, ds in zip(Rc, W, dS)]
            dkappa = (rtk - kappa * dtau) / tau
            return dX, dy, dS, dtau, dkappa

        def step_length(dX, dS, dtau, dkappa):
            alpha = np.inf
            for g, gi, lam, dx, ds in zip(Gs, Ginvs, lams, dX, dS):
                dxs, dss = _scaled(g, gi, dx, ds)
                alpha = min(alpha, _max_step(lam, dxs), _max_step(lam, dss))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # predictor
        Haff = [-2.0 * np.diag(lam ** 2) for lam in lams]
        dXa, dya, dSa, dta, dka = direction(1.0, Haff, -tau * kappa)
        aa = min(1.0, step_length(dXa, dSa, dta, dka))
        mu_aff = (sum(_inner([x + aa * dx], [s + aa * ds]) for x, dx, s, ds in zip(X, dXa, S, dSa))
                  + (tau + aa * dta) * (kappa + aa * dka)) / (N + 1)
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # corrector
        H = []
        for g, gi, lam, dx, ds in zip(Gs, Ginvs, lams, dXa, dSa):
            dxs, dss = _scaled(g, gi, dx, ds)
            cross = dxs @ dss
            H.append(2.0 * sigma * mu * np.eye(len(lam)) - 2.0 * np.diag(lam ** 2) - (cross + cross.T))
        rtk = sigma * mu - tau * kappa - dta * dka
        dX, dy, dS, dtau, dkappa = direction(1.0 - sigma, H, rtk)
        alpha = min(1.0, frac * step_length(dX, dS, dtau, dkappa))
        if not np.isfinite(alpha) or alpha < 1e-12:
            status, message = "numerical", f"step length collapsed ({alpha:.1e})"
            break

        X = [_sym(x + alpha * dx) for x, dx in zip(X, dX)]
        S = [_sym(s + alpha * ds) for s, ds in zip(S, dS)]
        y = y + alpha * dy
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa
    else:
        message = f"no convergence within {opt.max_iter} iterations"

    if status in ("primal_infeasible", "dual_infeasible"):
        Xo, yo, So = X, y, S
        pobj, dobj = _inner(C, X), float(b @ y)
    else:
        Xo = [x / tau for x in X]
        So = [s / tau for s in S]
        yo = y / tau
        pobj, dobj = _inner(C, Xo), float(b @ yo)
    errs = dimacs_errors(form, Xo, yo, So)
    rep = SolveReport(status, Xo, yo, So, pobj, dobj, pobj - dobj, errs, len(history) - 1,
                      time.perf_counter() - t0, message, history)
    return rep
