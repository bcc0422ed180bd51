"""Fixed-reference-frame robustness measures with dual witnesses.

All quantities here measure how much arbitrary noise must be mixed into an
object before it becomes diagonal in the *computational* basis; the outer
minimisation over reference frames lives in :mod:`setcoh.search`.

For a single state the program solved is

    min  tr(D) - 1   s.t.  D diagonal,  D >= rho,

whose optimum equals the generalised robustness with respect to diagonal
states (substitute D = (1+t) delta and noise tau = (D - rho)/t).  The
equivalence is exercised against a literal mix-to-free encoding by the test
suite; see robustness_state_direct.  Measurement assemblages follow the
analogous program over diagonal measurement assemblages with one shared
noise weight per assemblage; robustness_assemblage_direct is its literal
counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .core import (
    DimensionMismatchError,
    MeasurementAssemblage,
    Povm,
    StateSet,
    check_density,
    check_unitary,
    conjugate_set,
)

__all__ = [
    "RobustnessCertificate",
    "robustness_state_qubit",
    "robustness_state_sdp",
    "robustness_set_fixed",
    "mean_robustness_fixed",
    "robustness_assemblage_fixed",
    "mean_robustness_assemblage_fixed",
    "membership_free_set",
    "robustness_state_direct",
    "robustness_assemblage_direct",
]


@dataclass
class RobustnessCertificate:
    """Robustness value with the dual witness and recovered optimal noise.

    witness holds one PSD block per object component; pairing it with the
    input object gives 1 + value, and its pairing with any free (diagonal)
    object stays below 1.  noise holds the objects tau with
    (input + value * tau) / (1 + value) free.
    """

    value: float
    witness: list
    noise: object
    residuals: dict = field(default_factory=dict)


def _diag_unit(d, i):
    e = np.zeros((d, d), dtype=complex)
    e[i, i] = 1.0
    return e


def _project_state(tau):
    """Nearest exact density matrix: hermitise, clip spectrum, renormalise.

    Used on recovered noise operators, where dividing by a small robustness
    amplifies solver roundoff; the projection moves the operator by no more
    than that roundoff."""
    tau = 0.5 * (tau + tau.conj().T)
    w, v = np.linalg.eigh(tau)
    w = np.maximum(w, 0.0)
    tau = (v * w) @ v.conj().T
    return tau / tau.trace().real


def _solved(problem, gap_tol, feas_tol):
    sol = sdp.solve(problem, gap_tol=gap_tol, feas_tol=feas_tol)
    if not sol.optimal:
        raise sdp.SolverError(f"robustness program ended with status {sol.status}")
    return sol


def robustness_state_qubit(rho) -> float:
    """Closed-form qubit robustness: twice the off-diagonal magnitude."""
    rho = check_density(rho)
    if rho.shape != (2, 2):
        raise DimensionMismatchError("closed form applies to qubits only")
    return 2.0 * float(np.abs(rho[0, 1]))


def _state_problem(rho) -> sdp.SdpProblem:
    d = rho.shape[0]
    prob = sdp.SdpProblem(d, [d])
    prob.set_objective(np.ones(d))
    prob.add_const(0, -rho)
    for i in range(d):
        prob.add_term(0, i, _diag_unit(d, i))
    return prob


def robustness_state_sdp(rho, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> RobustnessCertificate:
    """Robustness of a single state with respect to diagonal states."""
    rho = check_density(rho)
    d = rho.shape[0]
    sol = _solved(_state_problem(rho), gap_tol, feas_tol)
    raw = sol.primal_objective - 1.0
    t = max(0.0, raw)
    diag = np.maximum(sol.x, 0.0)
    if t > 1e-9:
        tau = _project_state((np.diag(diag).astype(complex) - rho) / t)
    else:
        tau = rho.copy()
    witness = sol.dual_blocks[0]
    mix = (rho + t * tau) / (1.0 + t)
    residuals = {
        "raw_value": raw,
        "gap": sol.gap,
        "noise_min_eig": float(np.linalg.eigvalsh(0.5 * (tau + tau.conj().T))[0]),
        "noise_trace_dev": float(abs(tau.trace() - 1.0)),
        "mix_offdiag": float(np.abs(mix - np.diag(np.diagonal(mix))).max()),
        "witness_pairing_dev": float(abs(np.trace(rho @ witness).real - (1.0 + t))),
        "witness_max_diag": float(np.diagonal(witness).real.max()),
    }
    return RobustnessCertificate(t, [witness], tau, residuals)


def robustness_set_fixed(s: StateSet, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> RobustnessCertificate:
    """Joint robustness of a state set: the maximum of the per-state values.

    The optimal shared noise is assembled from the per-state optima: with
    t = max_j t_j and sigma_j the free state reached by state j, the noise
    tau_j = ((1+t) sigma_j - rho_j) / t is again a valid state because
    t >= t_j.  The witness keeps only the block of the maximising state;
    every other block is zero, which pairs to zero against any free set.
    """
    certs = [robustness_state_sdp(rho, gap_tol, feas_tol) for rho in s]
    j_star = int(np.argmax([c.value for c in certs]))
    t = certs[j_star].value
    d = s.dim
    taus = []
    for rho, cert in zip(s, certs):
        if t <= 1e-9:
            taus.append(rho.copy())
            continue
        sigma = (rho + cert.value * cert.noise) / (1.0 + cert.value)
        taus.append(_project_state(((1.0 + t) * sigma - rho) / t))
    witness = [
        certs[j].witness[0] if j == j_star else np.zeros((d, d), complex)
        for j in range(len(s))
    ]
    residuals = {
        "per_state": [c.value for c in certs],
        "noise_min_eig": min(
            float(np.linalg.eigvalsh(0.5 * (tau + tau.conj().T))[0]) for tau in taus
        ),
        "noise_trace_dev": max(float(abs(tau.trace() - 1.0)) for tau in taus),
        "mix_offdiag": max(
            float(
                np.abs((m := (rho + t * tau) / (1 + t)) - np.diag(np.diagonal(m))).max()
            )
            for rho, tau in zip(s, taus)
        ),
    }
    return RobustnessCertificate(t, witness, StateSet(taus), residuals)


def mean_robustness_fixed(s: StateSet, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> float:
    """Average of the per-state robustness values."""
    vals = [robustness_state_sdp(rho, gap_tol, feas_tol).value for rho in s]
    return float(np.mean(vals))


def _as_assemblage(m) -> MeasurementAssemblage:
    if isinstance(m, MeasurementAssemblage):
        return m
    if isinstance(m, Povm):
        return MeasurementAssemblage([m])
    return MeasurementAssemblage(m)


def _assemblage_problem(m: MeasurementAssemblage):
    """Shared-weight program over diagonal assemblages dominating the input.

    Variables are the common column sum sigma = 1 + t and the diagonal
    weights of all but the last outcome of every setting (the last outcome
    is fixed by the column-sum constraint), giving one PSD block per
    outcome and setting.
    """
    d = m.dim
    counts = m.outcome_counts
    num_vars = 1 + sum(d * (n - 1) for n in counts)
    blocks = []
    for x, n in enumerate(counts):
        blocks.extend([d] * n)
    prob = sdp.SdpProblem(num_vars, blocks)
    c = np.zeros(num_vars)
    c[0] = 1.0
    prob.set_objective(c)

    var = 1
    block = 0
    var_index = []
    for x, n in enumerate(counts):
        setting_vars = []
        for a in range(n - 1):
            setting_vars.append([var + i for i in range(d)])
            var += d
        var_index.append(setting_vars)
        for a in range(n):
            prob.add_const(block + a, -m.povms[x].elements[a])
        last = block + n - 1
        prob.add_term(last, 0, np.eye(d, dtype=complex))
        for a in range(n - 1):
            for i in range(d):
                prob.add_term(block + a, var_index[x][a][i], _diag_unit(d, i))
                prob.add_term(last, var_index[x][a][i], -_diag_unit(d, i))
        block += n
    return prob, var_index


def robustness_assemblage_fixed(m, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> RobustnessCertificate:
    """Robustness of a POVM or measurement assemblage w.r.t. diagonal ones.

    Whole measurements are mixed at a single weight shared by all settings;
    the recovered noise N_{a|x} = ((1+t) F_{a|x} - A_{a|x}) / t is reported
    as a valid assemblage (a copy of the input when t = 0, where any
    assemblage is admissible).
    """
    m = _as_assemblage(m)
    d = m.dim
    prob, var_index = _assemblage_problem(m)
    sol = _solved(prob, gap_tol, feas_tol)
    sigma = sol.x[0]
    raw = sigma - 1.0
    t = max(0.0, raw)

    betas = []
    for x, n in enumerate(m.outcome_counts):
        cols = []
        rest = np.full(d, sigma)
        for a in range(n - 1):
            col = np.array([sol.x[i] for i in var_index[x][a]])
            cols.append(col)
            rest = rest - col
        cols.append(rest)
        betas.append(np.stack(cols))

    if t > 1e-6:
        def _noise_elem(x, a):
            elem = (np.diag(betas[x][a]).astype(complex) - m.povms[x].elements[a]) / t
            return 0.5 * (elem + elem.conj().T)

        noise = MeasurementAssemblage(
            [
                Povm([_noise_elem(x, a) for a in range(n)], atol=1e-6)
                for x, n in enumerate(m.outcome_counts)
            ],
            atol=1e-6,
        )
    else:
        noise = m
    witness = list(sol.dual_blocks)
    pairing = sum(
        np.trace(m.povms[x].elements[a] @ witness[sum(m.outcome_counts[:x]) + a]).real
        for x, n in enumerate(m.outcome_counts)
        for a in range(n)
    )
    residuals = {
        "raw_value": raw,
        "gap": sol.gap,
        "beta_min": min(float(b.min()) for b in betas),
        "witness_pairing_dev": float(abs(pairing - (1.0 + t))),
    }
    return RobustnessCertificate(t, witness, noise, residuals)


def mean_robustness_assemblage_fixed(m, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> float:
    """Average over settings of the single-measurement robustness."""
    m = _as_assemblage(m)
    vals = [
        robustness_assemblage_fixed(p, gap_tol, feas_tol).value for p in m.povms
    ]
    return float(np.mean(vals))


def membership_free_set(obj, frame, tol: float = 1e-8) -> bool:
    """Whether every operator is diagonal in the given frame, up to tol."""
    frame = check_unitary(frame)
    conj = conjugate_set(obj, frame)
    ops = conj.states if isinstance(conj, StateSet) else (
        conj.elements if isinstance(conj, Povm) else conj.operators()
    )
    for op in ops:
        if np.abs(op - np.diag(np.diagonal(op))).max() > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Literal mix-to-free encodings, kept as independent cross-checks of the
# production programs above.  They carry the noise operators as explicit
# variables tied down by linear equalities.
# ---------------------------------------------------------------------------


def _hermitian_basis(d):
    """Real basis of Hermitian d x d matrices: diagonal, then re/im pairs."""
    basis = [_diag_unit(d, i) for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            b = np.zeros((d, d), complex)
            b[i, j] = b[j, i] = 1.0
            basis.append(b)
            b = np.zeros((d, d), complex)
            b[i, j] = 1j
            b[j, i] = -1j
            basis.append(b)
    return basis


def robustness_state_direct(rho, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> float:
    """Literal encoding: min tr(noise) with rho + noise diagonal and PSD noise."""
    rho = check_density(rho)
    d = rho.shape[0]
    basis = _hermitian_basis(rho.shape[0])
    n_sigma = len(basis)
    num_vars = n_sigma + d
    prob = sdp.SdpProblem(num_vars, [d, d])
    c = np.zeros(num_vars)
    c[n_sigma:] = 1.0
    prob.set_objective(c)
    for k, b in enumerate(basis):
        prob.add_term(0, k, b)
    for i in range(d):
        prob.add_term(1, n_sigma + i, _diag_unit(d, i))

    rows, rhs = [], []
    for i in range(d):
        row = np.zeros(num_vars)
        row[i] = 1.0
        row[n_sigma + i] = -1.0
        rows.append(row)
        rhs.append(-rho[i, i].real)
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            for part, val in ((k, rho[i, j].real), (k + 1, rho[i, j].imag)):
                row = np.zeros(num_vars)
                row[part] = 1.0
                rows.append(row)
                rhs.append(-val)
            k += 2
    prob.set_equalities(np.array(rows), np.array(rhs))
    sol = _solved(prob, gap_tol, feas_tol)
    return max(0.0, sol.primal_objective - 1.0)


def robustness_assemblage_direct(m, gap_tol: float = 1e-9, feas_tol: float = 1e-9) -> float:
    """Literal encoding with explicit noise operators and mixing equalities."""
    m = _as_assemblage(m)
    d = m.dim
    counts = m.outcome_counts
    basis = _hermitian_basis(d)
    nh = len(basis)
    pairs = [(x, a) for x, n in enumerate(counts) for a in range(n)]
    # variables: sigma, beta(i|a,x) for all outcomes, noise coefficients per pair
    n_beta = sum(d * n for n in counts)
    num_vars = 1 + n_beta + nh * len(pairs)
    prob = sdp.SdpProblem(num_vars, [d] * len(pairs))
    c = np.zeros(num_vars)
    c[0] = 1.0
    prob.set_objective(c)

    beta_at = {}
    pos = 1
    for x, n in enumerate(counts):
        for a in range(n):
            for i in range(d):
                beta_at[(x, a, i)] = pos
                pos += 1
    noise_at = {pair: pos + nh * k for k, pair in enumerate(pairs)}

    for blk, (x, a) in enumerate(pairs):
        for k, b in enumerate(basis):
            prob.add_term(blk, noise_at[(x, a)] + k, b)

    rows, rhs = [], []
    for x, a in pairs:
        elem = m.povms[x].elements[a]
        base = noise_at[(x, a)]
        # diagonal of A + noise equals beta
        for i in range(d):
            row = np.zeros(num_vars)
            row[base + i] = 1.0
            row[beta_at[(x, a, i)]] = -1.0
            rows.append(row)
            rhs.append(-elem[i, i].real)
        # off-diagonals of A + noise vanish
        k = d
        for i in range(d):
            for j in range(i + 1, d):
                for part, val in ((k, elem[i, j].real), (k + 1, elem[i, j].imag)):
                    row = np.zeros(num_vars)
                    row[base + part] = 1.0
                    rows.append(row)
                    rhs.append(-val)
                k += 2
    for x, n in enumerate(counts):
        # outcome weights of each basis element sum to sigma
        for i in range(d):
            row = np.zeros(num_vars)
            for a in range(n):
                row[beta_at[(x, a, i)]] = 1.0
            row[0] = -1.0
            rows.append(row)
            rhs.append(0.0)
        # noise operators of one setting sum to (sigma - 1) identity
        for i in range(d):
            row = np.zeros(num_vars)
            for a in range(n):
                row[noise_at[(x, a)] + i] = 1.0
            row[0] = -1.0
            rows.append(row)
            rhs.append(-1.0)
        k = d
        for i in range(d):
            for j in range(i + 1, d):
                for part in (k, k + 1):
                    row = np.zeros(num_vars)
                    for a in range(n):
                        row[noise_at[(x, a)] + part] = 1.0
                    rows.append(row)
                    rhs.append(0.0)
                k += 2
    prob.set_equalities(np.array(rows), np.array(rhs))
    sol = _solved(prob, gap_tol, feas_tol)
    return max(0.0, sol.primal_objective - 1.0)
