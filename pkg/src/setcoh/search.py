"""Minimisation over reference frames: Bloch-sphere search for qubits and a
multi-restart unitary search for general dimension.

Reported values are certified upper bounds: any frame is feasible, and the
returned frame reproduces the value through the fixed-frame measures.  The
underlying problem is nonconvex, so no claim of global optimality is made.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import robustness as rb
from .core import (
    MeasurementAssemblage,
    Povm,
    StateSet,
    ValidationError,
    check_density,
    commutator_norm,
    conjugate_set,
    overlap,
    random_haar_unitary,
    state_to_bloch,
)

__all__ = [
    "SearchOptions",
    "SetCoherenceResult",
    "qubit_r1",
    "qubit_rmax",
    "pair_r1",
    "pair_rmax_pure",
    "set_coherence_r1",
    "set_coherence_rmax",
    "mean_set_coherence_povm",
    "is_incoherent",
    "common_eigenframe",
    "fibonacci_directions",
    "sphere_minimize",
    "frame_from_bloch",
]

# Loosened solver targets used only while navigating the frame landscape;
# final values are always re-evaluated at full precision.
_NAV_TOL = 3e-8

_GOLDEN = (np.sqrt(5) - 1) / 2

_PAULI_STACK = np.stack([
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
])


@dataclass
class SearchOptions:
    restarts: int = 50
    max_iters: int = 500
    step_tol: float = 1e-9
    value_tol: float = 1e-8
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("at least one restart is required")


@dataclass
class SetCoherenceResult:
    value: float
    frame: np.ndarray
    per_restart: list = field(default_factory=list)
    certificate: object = None
    bloch: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Qubit sphere search
# ---------------------------------------------------------------------------


def fibonacci_directions(n: int = 4096) -> np.ndarray:
    """Deterministic, nearly uniform lattice of n unit vectors."""
    k = np.arange(n)
    z = 1.0 - (2 * k + 1) / n
    phi = k * (np.pi * (3 - np.sqrt(5)))
    r = np.sqrt(np.maximum(1 - z * z, 0.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _sines(qs, norms, p):
    """|q_j x p| for unit p, one value per row of qs."""
    dots = qs @ p
    return np.sqrt(np.maximum(norms * norms - dots * dots, 0.0))


def _lattice_values(qs, norms, dirs, mean: bool, chunk: int = 512) -> np.ndarray:
    out = np.empty(dirs.shape[0])
    sq = norms * norms
    for lo in range(0, dirs.shape[0], chunk):
        dots = dirs[lo:lo + chunk] @ qs.T
        s = np.sqrt(np.maximum(sq[None, :] - dots * dots, 0.0))
        out[lo:lo + chunk] = s.mean(axis=1) if mean else s.max(axis=1)
    return out


def _golden_section(g, a, b, tol):
    """Golden-section minimisation of g on [a, b]."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = g(x1), g(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = g(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = g(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _tangent_frame(p):
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(p)))] = 1.0
    e1 = np.cross(p, axis)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(p, e1)


_RING_ANGLES = np.linspace(0.0, 2 * np.pi, 16, endpoint=False)
_RING_RADII = np.array([1.0, 0.5, 0.25])
_SCAN_ANGLES = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)


def _golden_polish(f, p, fp, angle_tol: float, w0: float, rounds: int = 40):
    """Alternating golden-section searches along axis and diagonal circles."""
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    w = w0
    for _ in range(rounds):
        moved = 0.0
        for slot in range(4):
            e1, e2 = _tangent_frame(p)
            e = (e1, e2, (e1 + e2) * inv_sqrt2, (e1 - e2) * inv_sqrt2)[slot]

            def g(t, e=e):
                return f(np.cos(t) * p + np.sin(t) * e)

            t, ft = _golden_section(g, -w, w, angle_tol)
            if ft < fp:
                p = np.cos(t) * p + np.sin(t) * e
                p /= np.linalg.norm(p)
                fp = ft
                moved = max(moved, abs(t))
        w = max(min(4 * moved, 0.06), w * 0.5)
        if w <= max(2 * angle_tol, 1e-8) and moved <= 2 * angle_tol:
            break
    return p, fp


def _refine_mean_direction(f, fbatch, p, fp, angle_tol: float):
    """Shrinking polar grid followed by golden polish; ample for the smooth
    mean objective."""
    w = 0.05
    while w > angle_tol:
        e1, e2 = _tangent_frame(p)
        radii = np.repeat(w * _RING_RADII, _RING_ANGLES.size)
        phis = np.tile(_RING_ANGLES, _RING_RADII.size)
        tangent = np.outer(np.cos(phis), e1) + np.outer(np.sin(phis), e2)
        pts = np.cos(radii)[:, None] * p + np.sin(radii)[:, None] * tangent
        vals = fbatch(pts)
        k = int(np.argmin(vals))
        if vals[k] < fp:
            p, fp = pts[k] / np.linalg.norm(pts[k]), float(vals[k])
            if radii[k] < 0.9 * w:
                w *= 0.5
        else:
            w *= 0.4
    return _golden_polish(f, p, fp, angle_tol, w0=16 * angle_tol)


def _refine_max_direction(f, fbatch, p, fp, angle_tol: float):
    """Valley-tracking descent for the max objective.

    Its minima sit where several smooth sheets cross, at the bottom of
    narrow curved valleys: at each radius w the exact descent direction is
    located by golden section over the tangent angle, then the step length
    is chosen by golden section along that great circle.
    """
    w = 0.05
    while w > angle_tol:
        e1, e2 = _tangent_frame(p)
        cw, sw = np.cos(w), np.sin(w)
        tangent = np.outer(np.cos(_SCAN_ANGLES), e1) + np.outer(np.sin(_SCAN_ANGLES), e2)
        vals = fbatch(cw * p + sw * tangent)
        k = int(np.argmin(vals))

        def g_phi(phi):
            return f(cw * p + sw * (np.cos(phi) * e1 + np.sin(phi) * e2))

        step = 2 * np.pi / _SCAN_ANGLES.size
        phi, f_phi = _golden_section(g_phi, _SCAN_ANGLES[k] - step, _SCAN_ANGLES[k] + step, 1e-6)
        e = np.cos(phi) * e1 + np.sin(phi) * e2

        def g_rad(t):
            return f(np.cos(t) * p + np.sin(t) * e)

        t, ft = _golden_section(g_rad, 0.0, min(4 * w, 0.3), max(0.02 * w, angle_tol))
        if min(ft, f_phi) < fp - 1e-16:
            if f_phi < ft:
                t, ft = w, f_phi
            p = np.cos(t) * p + np.sin(t) * e
            p /= np.linalg.norm(p)
            fp = ft
            w = min(max(2 * t, 10 * angle_tol), 0.05)
        else:
            w *= 0.5
    return _golden_polish(f, p, fp, angle_tol, w0=16 * angle_tol)


def sphere_minimize(bloch_vectors, mean: bool, lattice: int = 4096,
                    top_k: int = 24, angle_tol: float = 1e-9):
    """Minimise the (mean or max) cross-product magnitude over unit directions.

    Returns (value, direction, candidate values).  Deterministic: a Fibonacci
    lattice scan followed by local refinement of the best basins; candidates
    are kept angularly apart so several distinct basins get refined (the
    objective is antipodally symmetric, so +-p count as one basin).
    """
    qs = np.asarray(bloch_vectors, dtype=float).reshape(-1, 3)
    norms = np.linalg.norm(qs, axis=1)
    dirs = fibonacci_directions(lattice)
    vals = _lattice_values(qs, norms, dirs, mean)
    order = []
    min_sep = np.cos(0.12)
    for idx in np.argsort(vals, kind="stable"):
        if len(order) >= top_k:
            break
        if all(abs(dirs[idx] @ dirs[j]) < min_sep for j in order):
            order.append(int(idx))

    def f(p):
        s = _sines(qs, norms, p)
        return float(s.mean() if mean else s.max())

    def fbatch(pts):
        return _lattice_values(qs, norms, pts, mean)

    refine = _refine_mean_direction if mean else _refine_max_direction
    best_p, best_v = None, np.inf
    candidates = []
    for idx in order:
        p, v = refine(f, fbatch, dirs[idx], float(vals[idx]), angle_tol)
        candidates.append(v)
        if v < best_v:
            best_v, best_p = v, p
    return best_v, best_p, candidates


def frame_from_bloch(p) -> np.ndarray:
    """Unitary sending the +p spin axis to the computational z-axis."""
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    op = p[0] * np.array([[0, 1], [1, 0]]) + p[1] * np.array([[0, -1j], [1j, 0]]) \
        + p[2] * np.array([[1, 0], [0, -1]])
    w, v = np.linalg.eigh(op)
    return v[:, ::-1].conj().T


def _qubit_sphere_result(s: StateSet, mean: bool, opts: SearchOptions) -> SetCoherenceResult:
    qs = np.stack([state_to_bloch(rho) for rho in s])
    value, p, cands = sphere_minimize(qs, mean=mean, angle_tol=min(opts.step_tol, 1e-9))
    frame = frame_from_bloch(p)
    conj = conjugate_set(s, frame)
    if mean:
        cert = [rb.robustness_state_sdp(rho) for rho in conj]
    else:
        cert = rb.robustness_set_fixed(conj)
    return SetCoherenceResult(value, frame, cands, cert, bloch=p)


def qubit_r1(s: StateSet, opts: SearchOptions | None = None) -> SetCoherenceResult:
    """Mean robustness of a qubit set, minimised over Bloch directions."""
    opts = opts or SearchOptions()
    if s.dim != 2:
        raise ValidationError("qubit search requires dimension 2")
    return _qubit_sphere_result(s, mean=True, opts=opts)


def qubit_rmax(s: StateSet, opts: SearchOptions | None = None) -> SetCoherenceResult:
    """Max robustness of a qubit set, minimised over Bloch directions."""
    opts = opts or SearchOptions()
    if s.dim != 2:
        raise ValidationError("qubit search requires dimension 2")
    return _qubit_sphere_result(s, mean=False, opts=opts)


# ---------------------------------------------------------------------------
# Closed forms for pairs
# ---------------------------------------------------------------------------


def _is_pure(rho, atol=1e-9) -> bool:
    return abs(np.trace(rho @ rho).real - 1.0) <= atol


def pair_r1(rho1, rho2) -> float:
    """Mean robustness of a pair: closed form for qubit or pure-state pairs.

    For qubit pairs the best frame aligns with the longer Bloch vector; a
    pure pair of any dimension spans a qubit subspace and reduces to
    sqrt(F (1 - F)) with F the overlap.
    """
    rho1, rho2 = check_density(rho1), check_density(rho2)
    if rho1.shape != rho2.shape:
        raise ValidationError("pair states must share a dimension")
    if rho1.shape[0] == 2:
        q1, q2 = state_to_bloch(rho1), state_to_bloch(rho2)
        n1, n2 = np.linalg.norm(q1), np.linalg.norm(q2)
        if n1 * n2 < 1e-15:
            return 0.0
        sin = np.linalg.norm(np.cross(q1, q2)) / (n1 * n2)
        return 0.5 * min(n1, n2) * float(sin)
    if _is_pure(rho1) and _is_pure(rho2):
        f = overlap(rho1, rho2)
        return float(np.sqrt(max(f * (1.0 - f), 0.0)))
    raise ValidationError("mixed pairs are only supported for qubits")


def pair_rmax_pure(rho1, rho2) -> float:
    """Max robustness of a pure pair: sqrt(1 - overlap)."""
    rho1, rho2 = check_density(rho1), check_density(rho2)
    if rho1.shape != rho2.shape:
        raise ValidationError("pair states must share a dimension")
    if not (_is_pure(rho1) and _is_pure(rho2)):
        raise ValidationError("closed form requires pure states")
    return float(np.sqrt(max(1.0 - overlap(rho1, rho2), 0.0)))


# ---------------------------------------------------------------------------
# General unitary search
# ---------------------------------------------------------------------------


_GEN_CACHE: dict = {}


def _su_generators(d: int):
    """Traceless Hermitian generator basis with cached eigendecompositions."""
    if d in _GEN_CACHE:
        return _GEN_CACHE[d]
    gens = []
    for i in range(d):
        for j in range(i + 1, d):
            g = np.zeros((d, d), complex)
            g[i, j] = g[j, i] = 1.0
            gens.append(g)
            g = np.zeros((d, d), complex)
            g[i, j] = -1j
            g[j, i] = 1j
            gens.append(g)
    for k in range(1, d):
        g = np.zeros((d, d), complex)
        g[:k, :k] = np.eye(k) / k
        g[k, k] = -1.0
        gens.append(g)
    cache = [(np.linalg.eigh(g)) for g in gens]
    _GEN_CACHE[d] = cache
    return cache


def _gen_exp(gen_eig, t: float) -> np.ndarray:
    w, v = gen_eig
    return (v * np.exp(1j * t * w)) @ v.conj().T


def _reunitarize(u: np.ndarray) -> np.ndarray:
    uu, _, vh = np.linalg.svd(u)
    return uu @ vh


def common_eigenframe(ops, cluster_tol: float = 1e-7) -> np.ndarray:
    """Frame built by sequential block diagonalisation of a list of operators.

    Exactly diagonalises commuting Hermitian families (degeneracies are
    refined operator by operator); for non-commuting input it still returns
    a valid frame, useful as a search start.
    """
    d = ops[0].shape[0]
    v = np.eye(d, dtype=complex)
    blocks = [list(range(d))]
    for op in ops:
        transformed = v.conj().T @ op @ v
        new_blocks = []
        for blk in blocks:
            if len(blk) == 1:
                new_blocks.append(blk)
                continue
            sub = transformed[np.ix_(blk, blk)]
            w, vv = np.linalg.eigh(0.5 * (sub + sub.conj().T))
            v[:, blk] = v[:, blk] @ vv
            start = 0
            for i in range(1, len(blk)):
                if w[i] - w[i - 1] > cluster_tol:
                    new_blocks.append(blk[start:i])
                    start = i
            new_blocks.append(blk[start:])
        blocks = new_blocks
    return v.conj().T


def is_incoherent(obj, tol: float = 1e-8) -> bool:
    """Whether some frame simultaneously diagonalises all operators.

    Hermitian operators admit a joint eigenbasis exactly when they pairwise
    commute, so the test is the pairwise commutator norm; the frame built
    from sequential diagonalisation is then verified explicitly.
    """
    ops = _operators_of(obj)
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if commutator_norm(ops[i], ops[j]) > tol:
                return False
    frame = common_eigenframe(ops, cluster_tol=max(1e-7, 10 * tol))
    return rb.membership_free_set(obj, frame, tol=max(1e-7, 100 * tol))


def _operators_of(obj):
    if isinstance(obj, StateSet):
        return list(obj.states)
    if isinstance(obj, Povm):
        return list(obj.elements)
    if isinstance(obj, MeasurementAssemblage):
        return obj.operators()
    raise TypeError(f"unsupported object type {type(obj).__name__}")


def _structured_starts(ops, d: int, rng) -> list:
    """Deterministic frames worth refining: joint-eigenbasis attempt, the
    eigenbasis of every operator (tilted toward the rest to orient any
    degenerate subspaces), barycentre and pairwise-mixture eigenbases
    (which seed bisector-type optima of the max objective), and a few
    random mixtures."""
    mean_op = sum(ops) / len(ops)
    starts = [common_eigenframe(ops)]
    for op in ops:
        starts.append(common_eigenframe([op + 1e-6 * mean_op]))
    starts.append(common_eigenframe([mean_op]))
    for i in range(len(ops)):
        for j in range(i + 1, min(len(ops), 6)):
            starts.append(common_eigenframe([ops[i] + ops[j] + 1e-6 * mean_op]))
    for _ in range(3):
        w = rng.dirichlet(np.ones(len(ops)))
        starts.append(common_eigenframe([sum(wi * op for wi, op in zip(w, ops))]))
    starts.append(np.eye(d, dtype=complex))
    return starts


def _refine_frame(f, u0, value0, opts: SearchOptions):
    """Coordinate-wise quadratic-fit line search over su(d) directions.

    Each coordinate move is u -> exp(i t G_k) u with t chosen from a
    three-point parabola (golden step fallback); per-coordinate windows
    adapt to the accepted steps, shrinking toward kinks of the objective.
    """
    d = u0.shape[0]
    gens = _su_generators(d)
    u, fu = u0, value0
    h = np.full(len(gens), 0.3)
    floor = max(opts.step_tol, 1e-9)
    # With d = 2 the endgame is handled by the axis-sphere polish, so the
    # coordinate phase only needs to localise the basin.
    h_floor = 2e-4 if d == 2 else floor
    budget = min(opts.max_iters, 150) if d == 2 else opts.max_iters
    searches = 0
    while searches < budget:
        f_before = fu
        u_sweep = u
        for k, gen in enumerate(gens):
            searches += 1

            def g(t, gen=gen):
                return f(_gen_exp(gen, t) @ u)

            fp, fm = g(h[k]), g(-h[k])
            denom = fp - 2 * fu + fm
            cands = [(fu, 0.0), (fp, h[k]), (fm, -h[k])]
            if denom > 1e-18:
                t_star = 0.5 * h[k] * (fm - fp) / denom
                t_star = float(np.clip(t_star, -4 * h[k], 4 * h[k]))
                if min(abs(t_star), abs(t_star - h[k]), abs(t_star + h[k])) > 1e-14:
                    cands.append((g(t_star), t_star))
            fbest, tbest = min(cands, key=lambda c: c[0])
            if fbest >= fu - 1e-15 and h[k] > 10 * h_floor and d > 2:
                # Parabola stalled: the slice likely has a kink minimum, so
                # localise it by golden section before shrinking the window.
                t_g, f_g = _golden_section(g, -h[k], h[k], floor)
                if f_g < fbest:
                    fbest, tbest = f_g, t_g
            if tbest != 0.0 and fbest < fu:
                u = _gen_exp(gen, tbest) @ u
                fu = fbest
                h[k] = min(max(abs(tbest) * 2.0, 10 * h_floor), 0.5)
            else:
                h[k] = max(h[k] * 0.35, h_floor)
            if searches >= budget:
                break
        u = _reunitarize(u)
        fu = f(u)
        # Pattern move along the net displacement of the whole sweep, which
        # keeps coordinate descent from zigzagging on ridge minima.
        skew = u @ u_sweep.conj().T
        wp, vp = np.linalg.eigh(0.5j * (skew.conj().T - skew))
        norm = float(np.abs(wp).max())
        if norm > 1e-13 and searches < budget:
            searches += 1
            wp = wp / norm

            def g_pat(t, wp=wp, vp=vp):
                return f(((vp * np.exp(1j * t * wp)) @ vp.conj().T) @ u)

            t_p, f_p = _golden_section(g_pat, -2.0 * norm, 2.0 * norm, floor)
            if f_p < fu:
                u = _reunitarize(((vp * np.exp(1j * t_p * wp)) @ vp.conj().T) @ u)
                fu = f(u)
        if f_before - fu <= opts.value_tol * 1e-2 and h.max() <= 2 * h_floor:
            break
        if fu <= 1e-11:
            break
    if d == 2 and fu > 1e-11:
        u, fu = _polish_su2(f, u, fu, floor)
    return u, fu


def _polish_su2(f, u, fu, tol):
    """Axis-sphere endgame for qubit frames.

    Every fixed-frame measure is invariant under diagonal phase rotations,
    so a qubit frame matters only through the Bloch axis it diagonalises;
    the final descent therefore runs on that axis with the same
    valley-tracking refinement used by the qubit sphere search."""
    v0 = u[0].conj()
    p = np.array([(v0.conj() @ (sig @ v0)).real for sig in _PAULI_STACK])
    p /= np.linalg.norm(p)

    def f_axis(q):
        return f(frame_from_bloch(q))

    def f_axis_batch(pts):
        return np.array([f_axis(q) for q in pts])

    f0 = f_axis(p)
    p_best, f_best = _refine_max_direction(f_axis, f_axis_batch, p, f0, tol)
    if f_best < fu:
        return frame_from_bloch(p_best), f_best
    return u, fu


def _frame_search(obj, nav, final, opts: SearchOptions, extra_starts=()):
    """Multi-restart minimisation of nav(frame); final(frame) scores the winner."""
    d = obj.dim
    ops = _operators_of(obj)
    rng = np.random.default_rng(np.random.SeedSequence(opts.seed, spawn_key=(2 ** 20,)))
    starts = list(extra_starts) + _structured_starts(ops, d, rng)
    while len(starts) < opts.restarts:
        k = len(starts)
        rng_k = np.random.default_rng(np.random.SeedSequence(opts.seed, spawn_key=(k,)))
        starts.append(random_haar_unitary(rng_k, d))
    starts = starts[: max(opts.restarts, len(extra_starts) + 1)]

    def attempt(u0):
        return _refine_frame(nav, u0, nav(u0), opts)

    if opts.threads and opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            outcomes = list(pool.map(attempt, starts))
    else:
        outcomes = []
        for u0 in starts:
            outcomes.append(attempt(u0))
            if outcomes[-1][1] <= 1e-11:
                break

    per_restart = [v for _, v in outcomes]
    best_u = min(outcomes, key=lambda o: o[1])[0]
    value, certificate = final(best_u)
    return SetCoherenceResult(value, best_u, per_restart, certificate)


def _nav_states(s: StateSet, mean: bool):
    if s.dim == 2:
        # Equal to the per-state program value within solver tolerance, so
        # navigation may use it; final scoring still goes through the SDP.
        def nav(u):
            vals = [2.0 * abs((u @ rho @ u.conj().T)[0, 1]) for rho in s]
            return float(np.mean(vals) if mean else np.max(vals))
        return nav

    def nav(u):
        vals = [
            rb.robustness_state_sdp(u @ rho @ u.conj().T, _NAV_TOL, _NAV_TOL).value
            for rho in s
        ]
        return float(np.mean(vals) if mean else np.max(vals))
    return nav


def set_coherence_r1(s: StateSet, opts: SearchOptions | None = None,
                     extra_starts=()) -> SetCoherenceResult:
    """Mean robustness minimised over unitary frames (any dimension)."""
    opts = opts or SearchOptions()

    def final(u):
        conj = conjugate_set(s, u)
        certs = [rb.robustness_state_sdp(rho) for rho in conj]
        return float(np.mean([c.value for c in certs])), certs

    return _frame_search(s, _nav_states(s, mean=True), final, opts, extra_starts)


def set_coherence_rmax(obj, opts: SearchOptions | None = None,
                       extra_starts=()) -> SetCoherenceResult:
    """Max robustness minimised over unitary frames, for state sets or
    measurement assemblages."""
    opts = opts or SearchOptions()
    if isinstance(obj, StateSet):
        def final(u):
            cert = rb.robustness_set_fixed(conjugate_set(obj, u))
            return cert.value, cert

        return _frame_search(obj, _nav_states(obj, mean=False), final, opts, extra_starts)

    m = obj if isinstance(obj, MeasurementAssemblage) else MeasurementAssemblage([obj])

    def nav(u):
        return rb.robustness_assemblage_fixed(
            conjugate_set(m, u), _NAV_TOL, _NAV_TOL
        ).value

    def final(u):
        cert = rb.robustness_assemblage_fixed(conjugate_set(m, u))
        return cert.value, cert

    return _frame_search(m, nav, final, opts, extra_starts)


def mean_set_coherence_povm(m, opts: SearchOptions | None = None,
                            extra_starts=()) -> SetCoherenceResult:
    """Mean of per-setting measurement robustness, minimised over frames."""
    opts = opts or SearchOptions()
    m = m if isinstance(m, MeasurementAssemblage) else MeasurementAssemblage([m])

    def nav(u):
        return rb.mean_robustness_assemblage_fixed(
            conjugate_set(m, u), _NAV_TOL, _NAV_TOL
        )

    def final(u):
        conj = conjugate_set(m, u)
        certs = [rb.robustness_assemblage_fixed(p) for p in conj.povms]
        return float(np.mean([c.value for c in certs])), certs

    return _frame_search(m, nav, final, opts, extra_starts)
