"""Discrimination games built from robustness dual witnesses.

The dual witness of every robustness program turns into an explicit game
in which the measured object beats all free (diagonal-in-frame) objects by
exactly a factor 1 + robustness: subchannel discrimination for single
states, prior-weighted collections of subgames for state sets, and a state
discrimination task for measurement assemblages.  Ratios for *arbitrary*
games never exceed that factor, which the test suite checks against random
games.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import robustness as rb
from .core import (
    MeasurementAssemblage,
    Povm,
    StateSet,
    ValidationError,
    check_density,
    check_psd,
    check_unitary,
    conjugate_set,
    eigh_desc,
    random_haar_unitary,
    random_povm,
)

__all__ = [
    "SubchannelGame",
    "GameWithPriors",
    "StateDiscriminationGame",
    "game_from_witness",
    "p_succ_subchannel",
    "best_incoherent_success",
    "advantage_ratio_state",
    "build_set_game",
    "score",
    "advantage_ratio_set",
    "game_for_povm",
    "p_succ_povm",
    "best_incoherent_povm_success",
    "advantage_ratio_povm",
    "random_game",
]


@dataclass(frozen=True)
class SubchannelGame:
    """d subchannels rho -> (1/d) U_a rho U_a' with a discriminating POVM."""

    unitaries: tuple
    povm: Povm

    def __post_init__(self):
        d = self.povm.dim
        if len(self.unitaries) != d or len(self.povm) != d:
            raise ValidationError("a subchannel game needs d branches and d outcomes")
        total = sum((u.conj().T @ u) / d for u in self.unitaries)
        if np.abs(total - np.eye(d)).max() > 1e-9:
            raise ValidationError("branch maps do not sum to a trace-preserving channel")

    @property
    def dim(self) -> int:
        return self.povm.dim


@dataclass(frozen=True)
class GameWithPriors:
    """Per-index subchannel games weighted by priors; free components carry
    prior zero and no subgame."""

    priors: np.ndarray
    subgames: tuple

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float)
        if p.min() < 0 or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("priors must be a probability vector")


@dataclass(frozen=True)
class StateDiscriminationGame:
    """Minimum-error discrimination of states rho_{a|x} with prior knowledge
    of the setting x and conditional outcome priors p(a|x)."""

    setting_priors: np.ndarray
    outcome_priors: tuple
    states: tuple

    def __post_init__(self):
        px = np.asarray(self.setting_priors, dtype=float)
        if px.min() < 0 or abs(px.sum() - 1.0) > 1e-9:
            raise ValidationError("setting priors must be a probability vector")
        for pax in self.outcome_priors:
            if np.asarray(pax).min() < -1e-15 or abs(np.asarray(pax).sum() - 1.0) > 1e-9:
                raise ValidationError("outcome priors must be probability vectors")


def game_from_witness(y) -> SubchannelGame:
    """Shift game in the eigenbasis of a PSD witness Y.

    U_a cyclically shifts the eigenvectors of Y (sorted by descending
    eigenvalue), the subchannels are (1/d) U_a . U_a', and the POVM elements
    are U_a Y U_a' / tr(Y).
    """
    y = check_psd(y, atol=1e-7)
    tr = float(y.trace().real)
    if tr <= 1e-12:
        raise ValidationError("witness has zero trace")
    d = y.shape[0]
    _, vecs = eigh_desc(y)
    unitaries = []
    for a in range(d):
        shift = vecs[:, np.roll(np.arange(d), -a)] @ vecs.conj().T
        unitaries.append(shift)
    elements = [u @ y @ u.conj().T / tr for u in unitaries]
    return SubchannelGame(tuple(unitaries), Povm(elements, atol=1e-7))


def p_succ_subchannel(rho, g: SubchannelGame) -> float:
    """Probability of naming the applied branch correctly."""
    rho = check_density(rho)
    if rho.shape[0] != g.dim:
        raise ValidationError("state dimension does not match the game")
    d = g.dim
    total = 0.0
    for u, a in zip(g.unitaries, g.povm):
        total += np.trace(u @ rho @ u.conj().T @ a).real / d
    return float(total)


def best_incoherent_success(g: SubchannelGame, frame=None) -> float:
    """Best success over states diagonal in the given frame.

    The success probability is linear in the state and the free set is the
    convex hull of the d conjugated basis projectors, so the optimum sits
    at one of those vertices.
    """
    d = g.dim
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    best = 0.0
    for i in range(d):
        v = frame.conj().T[:, i]
        best = max(best, p_succ_subchannel(np.outer(v, v.conj()), g))
    return best


def advantage_ratio_state(rho, frame=None, gap_tol: float = 1e-9) -> float:
    """Witness-game advantage of rho over frame-diagonal states.

    Equals 1 + the fixed-frame robustness of U rho U' up to solver
    tolerance.
    """
    rho = check_density(rho)
    d = rho.shape[0]
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    cert = rb.robustness_state_sdp(frame @ rho @ frame.conj().T, gap_tol=gap_tol)
    y = frame.conj().T @ cert.witness[0] @ frame
    g = game_from_witness(y)
    return p_succ_subchannel(rho, g) / best_incoherent_success(g, frame)


def build_set_game(s: StateSet, frame=None) -> GameWithPriors:
    """Prior-weighted game from the joint witness of a state set.

    Priors follow the witness block traces; zero-trace blocks (free
    components) get prior zero and no subgame.
    """
    d = s.dim
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    cert = rb.robustness_set_fixed(conjugate_set(s, frame))
    traces = np.array([max(b.trace().real, 0.0) for b in cert.witness])
    if traces.sum() <= 1e-12:
        raise ValidationError("all witness blocks have zero trace")
    priors = traces / traces.sum()
    subgames = tuple(
        game_from_witness(frame.conj().T @ b @ frame) if priors[j] > 1e-14 else None
        for j, b in enumerate(cert.witness)
    )
    return GameWithPriors(priors, subgames)


def score(s: StateSet, g: GameWithPriors) -> float:
    """Prior-weighted success of the set in its subgames."""
    total = 0.0
    for rho, p, sub in zip(s, g.priors, g.subgames):
        if sub is not None and p > 0:
            total += p * p_succ_subchannel(rho, sub)
    return float(total)


def advantage_ratio_set(s: StateSet, frame=None) -> float:
    """Set-game advantage over free sets; equals 1 + the joint robustness."""
    d = s.dim
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    g = build_set_game(s, frame)
    denom = sum(
        p * best_incoherent_success(sub, frame)
        for p, sub in zip(g.priors, g.subgames)
        if sub is not None and p > 0
    )
    return score(s, g) / denom


def game_for_povm(m, frame=None) -> StateDiscriminationGame:
    """State-assemblage discrimination task from the measurement witness."""
    m = m if isinstance(m, MeasurementAssemblage) else MeasurementAssemblage([m])
    d = m.dim
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    cert = rb.robustness_assemblage_fixed(conjugate_set(m, frame))
    counts = m.outcome_counts
    blocks, pos = [], 0
    for n in counts:
        blocks.append([frame.conj().T @ cert.witness[pos + a] @ frame for a in range(n)])
        pos += n
    block_tr = [np.array([max(b.trace().real, 0.0) for b in row]) for row in blocks]
    per_setting = np.array([t.sum() for t in block_tr])
    total = per_setting.sum()
    if total <= 1e-12:
        raise ValidationError("all witness blocks have zero trace")
    setting_priors = per_setting / total
    outcome_priors, states = [], []
    for x, n in enumerate(counts):
        tr_x = per_setting[x]
        if tr_x <= 1e-14:
            outcome_priors.append(np.full(n, 1.0 / n))
            states.append(tuple([None] * n))
            continue
        outcome_priors.append(block_tr[x] / tr_x)
        row = []
        for a in range(n):
            t = block_tr[x][a]
            row.append(blocks[x][a] / t if t > 1e-14 else None)
        states.append(tuple(row))
    return StateDiscriminationGame(setting_priors, tuple(outcome_priors), tuple(states))


def p_succ_povm(t: StateDiscriminationGame, m) -> float:
    """Success of the assemblage in the discrimination task."""
    m = m if isinstance(m, MeasurementAssemblage) else MeasurementAssemblage([m])
    total = 0.0
    for x, povm in enumerate(m.povms):
        px = t.setting_priors[x]
        if px <= 0:
            continue
        for a, elem in enumerate(povm.elements):
            rho = t.states[x][a]
            if rho is None:
                continue
            total += px * t.outcome_priors[x][a] * np.trace(rho @ elem).real
    return float(total)


def best_incoherent_povm_success(t: StateDiscriminationGame, frame=None) -> float:
    """Best success over frame-diagonal measurement assemblages.

    Free assemblages assign each basis element of each setting to an
    outcome independently, so the optimum is the per-element greedy
    assignment of the frame-diagonal weights.
    """
    some = next(r for row in t.states for r in row if r is not None)
    d = some.shape[0]
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    total = 0.0
    for x, row in enumerate(t.states):
        px = t.setting_priors[x]
        if px <= 0:
            continue
        weights = np.zeros((len(row), d))
        for a, rho in enumerate(row):
            if rho is None:
                continue
            diag = np.diagonal(frame @ rho @ frame.conj().T).real
            weights[a] = t.outcome_priors[x][a] * diag
        total += px * weights.max(axis=0).sum()
    return float(total)


def advantage_ratio_povm(m, frame=None) -> float:
    """Witness-task advantage; equals 1 + the fixed-frame robustness."""
    m = m if isinstance(m, MeasurementAssemblage) else MeasurementAssemblage([m])
    d = m.dim
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    t = game_for_povm(m, frame)
    return p_succ_povm(t, m) / best_incoherent_povm_success(t, frame)


def random_game(seed, d: int) -> SubchannelGame:
    """Arbitrary game: d Haar branch unitaries and a random d-outcome POVM."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    unitaries = tuple(random_haar_unitary(rng, d) for _ in range(d))
    return SubchannelGame(unitaries, random_povm(rng, d, d))
