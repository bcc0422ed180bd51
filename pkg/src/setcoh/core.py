"""Validated quantum objects, Bloch-sphere conversions, and random generators.

All operators are plain complex numpy arrays; the small container classes
below only group them and check their defining constraints once, at
construction time.  Everything here is pure and safe to share across
threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ValidationError",
    "DimensionMismatchError",
    "NotCommutingError",
    "NotIncoherentError",
    "StateSet",
    "Povm",
    "MeasurementAssemblage",
    "PAULI",
    "HERMITICITY_ATOL",
    "PSD_ATOL",
    "check_hermitian",
    "check_density",
    "check_unitary",
    "bloch_to_state",
    "state_to_bloch",
    "overlap",
    "commutator_norm",
    "conjugate",
    "conjugate_set",
    "product_povm",
    "eigh_desc",
    "random_pure_state",
    "random_density",
    "random_haar_unitary",
    "random_povm",
    "random_projective_povm",
    "trine_povm",
    "sic_povm",
    "computational_povm",
]


class ValidationError(ValueError):
    """An object violates one of its defining constraints."""


class DimensionMismatchError(ValidationError):
    """Operands act on Hilbert spaces of different dimensions."""


class NotCommutingError(ValidationError):
    """A construction requiring commuting operators received ones that do not."""


class NotIncoherentError(ValidationError):
    """An operation requiring frame-diagonal operators received ones that are not."""


# Default tolerances for object validation.  The hermiticity check is a pure
# representation issue and is held tighter than the spectral checks.
HERMITICITY_ATOL = 1e-10
PSD_ATOL = 1e-9

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (_SX, _SY, _SZ)


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_hermitian(a, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    m = _as_matrix(a)
    dev = np.abs(m - m.conj().T).max()
    if dev > atol:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3g})")
    return m


def check_psd(a, atol: float = PSD_ATOL) -> np.ndarray:
    m = check_hermitian(a, atol=max(atol, HERMITICITY_ATOL))
    lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
    if lo < -atol:
        raise ValidationError(f"matrix is not PSD (min eigenvalue {lo:.3g})")
    return m


def check_density(a, atol: float = PSD_ATOL) -> np.ndarray:
    m = check_psd(a, atol=atol)
    tr = m.trace()
    if abs(tr - 1.0) > atol:
        raise ValidationError(f"trace is {tr:.12g}, expected 1")
    return m


def check_unitary(a, atol: float = PSD_ATOL) -> np.ndarray:
    m = _as_matrix(a)
    dev = np.abs(m @ m.conj().T - np.eye(m.shape[0])).max()
    if dev > atol:
        raise ValidationError(f"matrix is not unitary (deviation {dev:.3g})")
    return m


@dataclass(frozen=True)
class StateSet:
    """An ordered collection of density matrices on a common Hilbert space."""

    states: tuple = field()
    dim: int = field(init=False, default=0)

    def __init__(self, states, atol: float = PSD_ATOL):
        states = tuple(check_density(s, atol=atol) for s in states)
        if not states:
            raise ValidationError("a state set needs at least one state")
        d = states[0].shape[0]
        if any(s.shape[0] != d for s in states):
            raise DimensionMismatchError("states have mixed dimensions")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "dim", d)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


@dataclass(frozen=True)
class Povm:
    """Outcome-indexed PSD operators summing to the identity."""

    elements: tuple = field()
    dim: int = field(init=False, default=0)

    def __init__(self, elements, atol: float = PSD_ATOL):
        elements = tuple(check_psd(e, atol=atol) for e in elements)
        if not elements:
            raise ValidationError("a POVM needs at least one element")
        d = elements[0].shape[0]
        if any(e.shape[0] != d for e in elements):
            raise DimensionMismatchError("POVM elements have mixed dimensions")
        dev = np.abs(sum(elements) - np.eye(d)).max()
        if dev > atol:
            raise ValidationError(f"POVM elements do not sum to identity (deviation {dev:.3g})")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "dim", d)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class MeasurementAssemblage:
    """A finite indexed family of POVMs sharing one Hilbert space."""

    povms: tuple = field()
    dim: int = field(init=False, default=0)

    def __init__(self, povms, atol: float = PSD_ATOL):
        povms = tuple(p if isinstance(p, Povm) else Povm(p, atol=atol) for p in povms)
        if not povms:
            raise ValidationError("an assemblage needs at least one measurement")
        d = povms[0].dim
        if any(p.dim != d for p in povms):
            raise DimensionMismatchError("POVMs have mixed dimensions")
        object.__setattr__(self, "povms", povms)
        object.__setattr__(self, "dim", d)

    def __len__(self) -> int:
        return len(self.povms)

    def __iter__(self):
        return iter(self.povms)

    @property
    def outcome_counts(self):
        return tuple(len(p) for p in self.povms)

    def operators(self):
        """All POVM elements across settings, flattened in setting-major order."""
        return [e for p in self.povms for e in p.elements]


def bloch_to_state(q) -> np.ndarray:
    """Map a Bloch vector of norm <= 1 to the corresponding qubit state."""
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise ValidationError("a Bloch vector has exactly three real components")
    r = np.linalg.norm(q)
    if r > 1 + PSD_ATOL:
        raise ValidationError(f"Bloch vector norm {r:.12g} exceeds 1")
    return 0.5 * (np.eye(2, dtype=complex) + q[0] * _SX + q[1] * _SY + q[2] * _SZ)


def state_to_bloch(rho) -> np.ndarray:
    """Pauli expectation values of a qubit state."""
    rho = _as_matrix(rho)
    if rho.shape != (2, 2):
        raise DimensionMismatchError("Bloch coordinates are defined for qubits only")
    return np.array([np.trace(rho @ s).real for s in PAULI])


def overlap(rho, sigma) -> float:
    """tr(rho sigma) for two states of equal dimension."""
    rho, sigma = _as_matrix(rho), _as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError("states have different dimensions")
    return float(np.trace(rho @ sigma).real)


def commutator_norm(rho, eta) -> float:
    """Spectral norm of the commutator [rho, eta].

    The commutator of Hermitian matrices is anti-Hermitian, so its spectral
    norm equals the largest absolute eigenvalue of i[rho, eta].
    """
    rho, eta = _as_matrix(rho), _as_matrix(eta)
    if rho.shape != eta.shape:
        raise DimensionMismatchError("operands have different dimensions")
    comm = rho @ eta - eta @ rho
    h = 1j * comm
    return float(np.abs(np.linalg.eigvalsh(0.5 * (h + h.conj().T))).max())


def conjugate(op, u) -> np.ndarray:
    return u @ op @ u.conj().T


def conjugate_set(obj, u):
    """Map every operator of a StateSet / Povm / MeasurementAssemblage to U O U†."""
    u = check_unitary(u)
    if isinstance(obj, StateSet):
        if obj.dim != u.shape[0]:
            raise DimensionMismatchError("frame dimension does not match the set")
        return StateSet([conjugate(s, u) for s in obj])
    if isinstance(obj, Povm):
        if obj.dim != u.shape[0]:
            raise DimensionMismatchError("frame dimension does not match the POVM")
        return Povm([conjugate(e, u) for e in obj])
    if isinstance(obj, MeasurementAssemblage):
        if obj.dim != u.shape[0]:
            raise DimensionMismatchError("frame dimension does not match the assemblage")
        return MeasurementAssemblage([Povm([conjugate(e, u) for e in p]) for p in obj])
    raise TypeError(f"cannot conjugate object of type {type(obj).__name__}")


def product_povm(m: MeasurementAssemblage, atol: float = 1e-8) -> Povm:
    """Joint POVM with elements prod_x A_{a_x|x} over tuples of outcomes.

    Requires all elements across different settings to commute; the joint
    outcome order is itertools.product over per-setting outcome indices, so
    marginalising outcome position x recovers the x-th input POVM.
    """
    for x, y in itertools.combinations(range(len(m)), 2):
        for a, b in itertools.product(m.povms[x], m.povms[y]):
            if commutator_norm(a, b) > atol:
                raise NotCommutingError(
                    f"elements of settings {x} and {y} do not commute"
                )
    elements = []
    for combo in itertools.product(*[p.elements for p in m.povms]):
        g = np.eye(m.dim, dtype=complex)
        for e in combo:
            g = g @ e
        elements.append(0.5 * (g + g.conj().T))
    return Povm(elements, atol=10 * atol)


def eigh_desc(h):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    h = check_hermitian(h, atol=1e-8)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_dim(d: int) -> int:
    d = int(d)
    if d < 2:
        raise ValidationError(f"dimension must be at least 2, got {d}")
    return d


def random_haar_unitary(seed, d: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian with phase fix."""
    d = _check_dim(d)
    rng = _rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_pure_state(seed, d: int) -> np.ndarray:
    d = _check_dim(d)
    rng = _rng(seed)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density(seed, d: int) -> np.ndarray:
    """Mixed state with Haar eigenbasis and flat-Dirichlet eigenvalues."""
    d = _check_dim(d)
    rng = _rng(seed)
    v = random_haar_unitary(rng, d)
    p = rng.dirichlet(np.ones(d))
    return (v * p) @ v.conj().T


def random_povm(seed, d: int, n: int) -> Povm:
    """Generic full-rank POVM from normalised random PSD operators."""
    d = _check_dim(d)
    rng = _rng(seed)
    gs = []
    for _ in range(n):
        w = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        gs.append(w @ w.conj().T)
    s = sum(gs)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return Povm([s_inv_half @ g @ s_inv_half for g in gs])


def random_projective_povm(seed, d: int, n: int | None = None) -> Povm:
    """Projective measurement in a Haar-random basis, optionally coarse-grained.

    With n outcomes < d the basis projectors are grouped into n consecutive
    nonempty blocks.
    """
    d = _check_dim(d)
    rng = _rng(seed)
    n = d if n is None else int(n)
    if not 1 <= n <= d:
        raise ValidationError(f"a projective measurement on dimension {d} has at most {d} outcomes")
    u = random_haar_unitary(rng, d)
    cuts = np.sort(rng.choice(np.arange(1, d), size=n - 1, replace=False)) if n > 1 else np.array([], int)
    bounds = [0, *cuts.tolist(), d]
    elements = []
    for a in range(n):
        cols = u[:, bounds[a]:bounds[a + 1]]
        elements.append(cols @ cols.conj().T)
    return Povm(elements)


def trine_povm() -> Povm:
    """Ternary qubit POVM with coplanar Bloch directions at 120 degrees."""
    angles = [0.0, 2 * np.pi / 3, 4 * np.pi / 3]
    elements = []
    for t in angles:
        q = np.array([np.sin(t), 0.0, np.cos(t)])
        elements.append((2 / 3) * bloch_to_state(q))
    return Povm(elements)


def sic_povm() -> Povm:
    """Qubit POVM with four tetrahedral Bloch directions."""
    dirs = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    ) / np.sqrt(3)
    return Povm([0.5 * bloch_to_state(q) for q in dirs])


def computational_povm(d: int) -> Povm:
    eye = np.eye(d, dtype=complex)
    return Povm([np.outer(eye[i], eye[i]) for i in range(d)])
