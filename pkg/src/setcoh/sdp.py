"""Dense Hermitian linear-matrix-inequality solver.

Solves problems of the form

    minimize    c . x
    subject to  F(x) = F_0 + sum_i x_i F_i  >= 0   (block-diagonal Hermitian)
                A x = b                            (optional linear equalities)

with an infeasible-start primal-dual path-following iteration using
Nesterov-Todd scaling on each Hermitian block.  Problems here are tiny
(blocks up to ~32, a few hundred variables), so the implementation favours
robustness and determinism over asymptotic speed.

The dual solution is a PSD block matrix X with tr(F_i X) = c_i; its
objective -tr(F_0 X) certifies the primal value through the duality gap.
Linear equalities are eliminated up front by restricting x to an affine
subspace, so the core iteration only ever sees a pure matrix inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = ["SdpProblem", "SdpSolution", "SolverError", "solve"]


class SolverError(RuntimeError):
    """The interior-point iteration broke down numerically."""


class SdpProblem:
    """Block-diagonal Hermitian pencil F(x) = F_0 + sum_i x_i F_i with objective c.

    Coefficient matrices default to zero; populate them with add_const /
    add_term.  Callers are expected to pass Hermitian data (symmetrised once
    at solve time).
    """

    def __init__(self, num_vars: int, block_dims):
        self.num_vars = int(num_vars)
        self.block_dims = tuple(int(d) for d in block_dims)
        if any(d < 1 for d in self.block_dims):
            raise ValueError("block dimensions must be positive")
        self.c = np.zeros(self.num_vars)
        self.blocks = [
            np.zeros((self.num_vars + 1, d, d), dtype=complex) for d in self.block_dims
        ]
        self.eq_a: np.ndarray | None = None
        self.eq_b: np.ndarray | None = None

    def set_objective(self, c) -> None:
        c = np.asarray(c, dtype=float)
        if c.shape != (self.num_vars,):
            raise ValueError(f"objective must have shape ({self.num_vars},)")
        self.c = c

    def add_const(self, block: int, mat) -> None:
        self.blocks[block][0] += np.asarray(mat, dtype=complex)

    def add_term(self, block: int, var: int, mat) -> None:
        if not 0 <= var < self.num_vars:
            raise ValueError(f"variable index {var} out of range")
        self.blocks[block][1 + var] += np.asarray(mat, dtype=complex)

    def set_equalities(self, a, b) -> None:
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if a.shape != (b.shape[0], self.num_vars):
            raise ValueError("equality system has inconsistent shape")
        self.eq_a, self.eq_b = a, b


@dataclass
class SdpSolution:
    x: np.ndarray
    primal_objective: float
    dual_blocks: list
    dual_objective: float
    gap: float
    status: str
    iterations: int
    residuals: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _herm(a):
    return 0.5 * (a + a.conj().T)


def _tr(a, b) -> float:
    """Re tr(a b) for matrices of matching shape."""
    return float(np.einsum("mn,nm->", a, b).real)


def _chol_inv(p):
    """Inverse of the lower Cholesky factor of a PD matrix."""
    low = np.linalg.cholesky(p)
    trtri = scipy.linalg.get_lapack_funcs("trtri", (low,))
    inv, info = trtri(low, lower=1)
    if info != 0:
        raise np.linalg.LinAlgError("triangular inversion failed")
    return inv


def _min_scaled_eig(linv, d):
    """Smallest eigenvalue of L^{-1} d L^{-H} for the Cholesky factor L of P."""
    return float(np.linalg.eigvalsh(_herm(linv @ d @ linv.conj().T))[0])


def _eliminate_equalities(prob: SdpProblem):
    """Restrict x to the affine solution set of A x = b.

    Returns (reduced objective, reduced blocks, particular solution,
    nullspace basis, objective offset); the transform is the identity when
    there are no equalities.
    """
    c = prob.c
    if prob.eq_a is None:
        return c, prob.blocks, np.zeros(prob.num_vars), np.eye(prob.num_vars), 0.0
    a, b = prob.eq_a, prob.eq_b
    x0, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.abs(a @ x0 - b).max() > 1e-9 * (1 + np.abs(b).max()):
        raise SolverError("equality constraints are inconsistent")
    _, sv, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(sv > 1e-12 * (sv[0] if sv.size else 1.0)))
    nullsp = vh[rank:].T.copy()
    blocks = []
    for mats in prob.blocks:
        f0 = mats[0] + np.einsum("i,imn->mn", x0, mats[1:])
        fi = np.einsum("imn,ij->jmn", mats[1:], nullsp)
        blocks.append(np.concatenate([f0[None], fi], axis=0))
    return nullsp.T @ c, blocks, x0, nullsp, float(c @ x0)


def solve(
    prob: SdpProblem,
    gap_tol: float = 1e-9,
    feas_tol: float = 1e-9,
    max_iter: int = 100,
) -> SdpSolution:
    """Run the interior-point iteration and return primal and dual solutions.

    Status is "optimal" once the relative duality gap and both feasibility
    residuals are below tolerance (the contract levels 1e-7 / 1e-8 are
    accepted if the tighter targets stall), "max-iterations" otherwise, and
    "infeasible" when the objective diverges.
    """
    c, blocks, x0, nullsp, offset = _eliminate_equalities(prob)
    m = c.shape[0]
    nb = len(blocks)
    dims = [mats.shape[1] for mats in blocks]
    n_tot = sum(dims)
    f0s = [_herm(mats[0]) for mats in blocks]
    fis = [np.stack([_herm(f) for f in mats[1:]]) if m else mats[1:] for mats in blocks]

    if m == 0:
        lo = min(np.linalg.eigvalsh(f)[0] for f in f0s)
        status = "optimal" if lo >= -1e-9 else "infeasible"
        zeros = [np.zeros((d, d), complex) for d in dims]
        return SdpSolution(x0, offset, zeros, offset, 0.0, status, 0,
                           {"primal": max(0.0, -lo), "dual": 0.0})

    scale = max(1.0, max(np.abs(f).max() for f in f0s), float(np.abs(c).max()))
    eta = max(1.0, *(1.2 * max(0.0, -np.linalg.eigvalsh(f)[0]) + 0.1 * scale for f in f0s))
    x = np.zeros(m)
    s_list = [eta * np.eye(d, dtype=complex) for d in dims]
    x_list = [max(1.0, scale) * np.eye(d, dtype=complex) for d in dims]

    status = "max-iterations"
    iters = 0
    pobj = dobj = 0.0
    gap = res_p = res_d = np.inf
    best = None
    best_merit = np.inf

    for iters in range(1, max_iter + 1):
        r_s = [f0s[b] + np.einsum("i,imn->mn", x, fis[b]) - s_list[b] for b in range(nb)]
        r_d = c - sum(np.einsum("imn,nm->i", fis[b], x_list[b]).real for b in range(nb))
        mu = sum(_tr(x_list[b], s_list[b]) for b in range(nb)) / n_tot
        pobj = float(c @ x) + offset
        dobj = -sum(_tr(f0s[b], x_list[b]) for b in range(nb)) + offset
        gap = abs(pobj - dobj)
        res_p = max(np.abs(r).max() for r in r_s)
        res_d = float(np.abs(r_d).max())

        merit = max(gap / (1 + abs(pobj) + abs(dobj)), res_p, res_d)
        if merit < best_merit:
            best_merit = merit
            best = (x.copy(), [xb.copy() for xb in x_list], pobj, dobj, gap, res_p, res_d)

        if gap <= gap_tol * (1 + abs(pobj) + abs(dobj)) and res_p <= feas_tol and res_d <= feas_tol:
            status = "optimal"
            break
        if abs(pobj) > 1e9 * scale or abs(dobj) > 1e9 * scale:
            status = "infeasible"
            break

        try:
            # Per-block Nesterov-Todd scaling W with W S W = X, plus the
            # inverse Cholesky factors used for step-length computation.
            w_list, s_inv_list, s_li_list, x_li_list = [], [], [], []
            for b in range(nb):
                ws, vs = np.linalg.eigh(s_list[b])
                ws = np.maximum(ws, 1e-300)
                rt = np.sqrt(ws)
                s_half = (vs * rt) @ vs.conj().T
                s_ihalf = (vs / rt) @ vs.conj().T
                s_inv_list.append((vs / ws) @ vs.conj().T)
                wt, vt = np.linalg.eigh(_herm(s_half @ x_list[b] @ s_half))
                t_half = (vt * np.sqrt(np.maximum(wt, 1e-300))) @ vt.conj().T
                w_list.append(_herm(s_ihalf @ t_half @ s_ihalf))
                s_li_list.append(_chol_inv(s_list[b]))
                x_li_list.append(_chol_inv(x_list[b]))

            wfw = [w_list[b] @ fis[b] @ w_list[b] for b in range(nb)]
            wrw = [w_list[b] @ r_s[b] @ w_list[b] for b in range(nb)]
            mmat = sum(np.einsum("imn,jnm->ij", fis[b], wfw[b]).real for b in range(nb))
            chol = scipy.linalg.cho_factor(
                mmat + (1e-14 * np.trace(mmat) / m) * np.eye(m), check_finite=False
            )

            def direction(v_list):
                rhs = sum(
                    np.einsum("imn,nm->i", fis[b], v_list[b] - wrw[b]).real
                    for b in range(nb)
                ) - r_d
                dx = scipy.linalg.cho_solve(chol, rhs, check_finite=False)
                ds = [np.einsum("i,imn->mn", dx, fis[b]) + r_s[b] for b in range(nb)]
                dxm = [_herm(v_list[b] - w_list[b] @ ds[b] @ w_list[b]) for b in range(nb)]
                return dx, ds, dxm

            def step_lengths(ds, dxm):
                a_s = a_x = 1.0
                for b in range(nb):
                    lo = _min_scaled_eig(s_li_list[b], ds[b])
                    if lo < -1e-14:
                        a_s = min(a_s, -0.98 / lo)
                    lo = _min_scaled_eig(x_li_list[b], dxm[b])
                    if lo < -1e-14:
                        a_x = min(a_x, -0.98 / lo)
                return a_s, a_x

            dx_a, ds_a, dxm_a = direction([-x_list[b] for b in range(nb)])
            a_s, a_x = step_lengths(ds_a, dxm_a)
            mu_aff = sum(
                _tr(x_list[b] + a_x * dxm_a[b], s_list[b] + a_s * ds_a[b]) for b in range(nb)
            ) / n_tot
            sigma = min(0.999, max(1e-10, (max(mu_aff, 0.0) / mu) ** 2))

            dx, ds, dxm = direction(
                [sigma * mu * s_inv_list[b] - x_list[b] for b in range(nb)]
            )
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            status = "numerical-breakdown"
            break

        a_s, a_x = step_lengths(ds, dxm)
        x = x + a_s * dx
        for b in range(nb):
            s_list[b] = _herm(s_list[b] + a_s * ds[b])
            x_list[b] = _herm(x_list[b] + a_x * dxm[b])
        if not np.isfinite(x).all():
            status = "numerical-breakdown"
            break

    if status in ("max-iterations", "numerical-breakdown") and best is not None:
        x, x_list, pobj, dobj, gap, res_p, res_d = best
        if gap <= 1e-7 * (1 + abs(pobj)) and max(res_p, res_d) <= 1e-8:
            status = "optimal"

    return SdpSolution(
        x=x0 + nullsp @ x,
        primal_objective=pobj,
        dual_blocks=x_list,
        dual_objective=dobj,
        gap=gap,
        status=status,
        iterations=iters,
        residuals={"primal": float(res_p), "dual": float(res_d)},
    )
