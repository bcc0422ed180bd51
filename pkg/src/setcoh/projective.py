"""Decomposition of incoherent POVMs into mixtures of projective measurements.

Pipeline: read off the diagonal weight matrix in the diagonalising frame,
peel off trivial one-outcome terms so all column sums match, decompose the
rebalanced matrix into integer points of its transportation polytope, and
split every integer matrix into one-hot layers, each a diagonal projective
measurement.  Works in float arithmetic by default; an exact mode on
Fraction entries reproduces rational inputs bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .core import NotIncoherentError, Povm, ValidationError, check_unitary

__all__ = [
    "DecompositionStallError",
    "StochasticMatrix",
    "IntegerVertex",
    "ProjectiveDecomposition",
    "incoherent_matrix",
    "strip_trivial",
    "vertex_decompose",
    "integer_to_projective",
    "decompose",
    "verify_decomposition",
]


class DecompositionStallError(RuntimeError):
    """No integral transportation plan exists on the current support."""


@dataclass(frozen=True)
class StochasticMatrix:
    """Nonnegative d x n matrix of outcome weights with recorded margins."""

    entries: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray

    def __init__(self, entries):
        e = np.asarray(entries)
        if e.dtype != object:
            e = e.astype(float)
            if e.min() < -1e-12:
                raise ValidationError(f"negative entry {e.min():.3g}")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "row_sums", e.sum(axis=1))
        object.__setattr__(self, "col_sums", e.sum(axis=0))

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object


@dataclass(frozen=True)
class IntegerVertex:
    """Integer transportation plan with its convex weight."""

    weight: object
    matrix: np.ndarray


@dataclass(frozen=True)
class ProjectiveDecomposition:
    """Convex combination of projective measurements reproducing a POVM."""

    terms: tuple
    dim: int
    outcomes: int


def _matrix_from_elements(elements, frame, tol: float) -> StochasticMatrix:
    cols = []
    for elem in elements:
        conj = frame @ elem @ frame.conj().T
        off = np.abs(conj - np.diag(np.diagonal(conj))).max()
        if off > tol:
            raise NotIncoherentError(
                f"POVM element has off-diagonal weight {off:.3g} in this frame"
            )
        cols.append(np.maximum(np.diagonal(conj).real, 0.0))
    return StochasticMatrix(np.stack(cols, axis=1))


def incoherent_matrix(povm: Povm, frame=None, tol: float = 1e-8) -> StochasticMatrix:
    """Diagonal weights of the POVM in the frame; rows are basis elements,
    columns outcomes."""
    frame = np.eye(povm.dim, dtype=complex) if frame is None else check_unitary(frame)
    return _matrix_from_elements(povm.elements, frame, tol)


def strip_trivial(m: StochasticMatrix):
    """Split off one-outcome identity terms so all column sums equal d.

    Returns (trivial weights w_j = (colsum_j - t)/d, rebalanced matrix with
    row sums n and column sums d, t = min column sum).
    """
    d, n = m.entries.shape
    col = m.col_sums
    if m.exact:
        t = min(col)
        if t == 0:
            raise ValidationError("zero-trace outcome must be dropped before rebalancing")
        weights = np.array([(c - t) / d for c in col], dtype=object)
        scaled = np.empty((d, n), dtype=object)
        for i in range(d):
            for j in range(n):
                scaled[i, j] = (m.entries[i, j] - weights[j]) * d / t
        return weights, StochasticMatrix(scaled), t
    t = float(col.min())
    if t <= 1e-12:
        raise ValidationError("zero-trace outcome must be dropped before rebalancing")
    weights = (col - t) / d
    scaled = (m.entries - weights[None, :]) * (d / t)
    return weights, StochasticMatrix(np.maximum(scaled, 0.0)), t


def _integral_plan(support: np.ndarray) -> np.ndarray:
    """Integer transportation plan (row sums n, column sums d) supported on
    the given d x n mask, found by max flow; transportation polytopes with
    integer margins have integral plans whenever fractional ones exist."""
    d, n = support.shape
    src, snk = 0, d + n + 1
    rows, cols, caps = [], [], []
    for i in range(d):
        rows.append(src)
        cols.append(1 + i)
        caps.append(n)
    for j in range(n):
        rows.append(1 + d + j)
        cols.append(snk)
        caps.append(d)
    for i in range(d):
        for j in range(n):
            if support[i, j]:
                rows.append(1 + i)
                cols.append(1 + d + j)
                caps.append(n * d)
    graph = csr_matrix((np.array(caps, dtype=np.int64), (rows, cols)),
                       shape=(d + n + 2, d + n + 2))
    res = maximum_flow(graph, src, snk)
    if res.flow_value != n * d:
        raise DecompositionStallError(
            "support admits no full transportation plan (margins numerically broken)"
        )
    flow = res.flow.toarray()
    plan = np.zeros((d, n), dtype=np.int64)
    for i in range(d):
        for j in range(n):
            if support[i, j]:
                plan[i, j] = flow[1 + i, 1 + d + j]
    return plan


def vertex_decompose(m: StochasticMatrix, support_tol: float = 1e-12):
    """Write the rebalanced matrix as a convex mix of integer plans.

    Every step subtracts as much of an integral plan on the current support
    as possible, zeroing at least one entry, so at most d*n terms appear.
    """
    d, n = m.entries.shape
    exact = m.exact
    cur = m.entries.copy()
    remaining = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    terms = []
    for _ in range(d * n + 2):
        if exact:
            if remaining == 0:
                break
            scaled = cur / remaining
            if all(v.denominator == 1 for v in scaled.ravel()):
                plan = np.array([[int(v) for v in row] for row in scaled], dtype=np.int64)
                terms.append(IntegerVertex(remaining, plan))
                remaining = zero
                break
            support = np.array([[v != 0 for v in row] for row in cur], dtype=bool)
        else:
            if remaining <= 1e-10:
                break
            scaled = cur / remaining
            rounded = np.round(scaled)
            if np.abs(scaled - rounded).max() <= 1e-9:
                terms.append(IntegerVertex(float(remaining), rounded.astype(np.int64)))
                remaining = zero
                break
            support = cur > support_tol
        plan = _integral_plan(support)
        ratios = [
            cur[i, j] / plan[i, j]
            for i in range(d)
            for j in range(n)
            if plan[i, j] > 0
        ]
        lam = min(ratios)
        if not exact:
            lam = float(lam)
        lam = min(lam, remaining)
        if lam <= zero:
            raise DecompositionStallError("no progress possible on current support")
        terms.append(IntegerVertex(lam, plan.copy()))
        cur = cur - lam * plan
        if not exact:
            cur[np.abs(cur) < 1e-12] = 0.0
            cur = np.maximum(cur, 0.0)
        remaining = remaining - lam
    if exact:
        if remaining != 0:
            raise DecompositionStallError("exact decomposition left residual mass")
    elif abs(float(remaining)) > 1e-8:
        raise DecompositionStallError("decomposition left residual mass")
    return terms


def integer_to_projective(r: np.ndarray):
    """Split an integer plan with row sums n into n one-hot layers.

    Each layer marks, per basis element, the smallest outcome index still
    holding weight; the layers are exactly the diagonal projective
    measurements summing to the plan.
    """
    r = np.asarray(r, dtype=np.int64)
    d, n = r.shape
    if not np.all(r.sum(axis=1) == n):
        raise ValidationError("plan rows must sum to the number of outcomes")
    if r.min() < 0:
        raise ValidationError("plan entries must be nonnegative")
    work = r.copy()
    layers = []
    for _ in range(n):
        layer = np.zeros_like(work)
        for i in range(d):
            nz = np.nonzero(work[i])[0]
            if nz.size == 0:
                raise ValidationError("plan row exhausted early; margins malformed")
            layer[i, nz[0]] = 1
        work -= layer
        layers.append(layer)
    return layers


def _diag_projector(frame_cols, mask):
    sub = frame_cols[:, mask]
    return sub @ sub.conj().T


def decompose(povm: Povm, frame=None, exact: bool = False,
              tol: float = 1e-8) -> ProjectiveDecomposition:
    """Full decomposition of an incoherent POVM into projective terms.

    Zero elements are dropped for the rebalancing step and re-enter as zero
    operators on their outcome labels.  In exact mode the POVM elements
    must be diagonal with rational entries and the frame must be the
    identity; weights are then Fractions and reconstruction is exact.
    """
    d, n = povm.dim, len(povm)
    frame = np.eye(d, dtype=complex) if frame is None else check_unitary(frame)
    keep = [j for j, e in enumerate(povm) if np.abs(e).max() > tol]
    if not keep:
        raise ValidationError("POVM has no nonzero element")

    if exact:
        if np.abs(frame - np.eye(d)).max() > 0:
            raise ValidationError("exact mode requires the identity frame")
        cols = []
        for j in keep:
            elem = povm.elements[j]
            if np.abs(elem - np.diag(np.diagonal(elem))).max() > 0 or np.abs(np.diagonal(elem).imag).max() > 0:
                raise ValidationError("exact mode requires exactly diagonal real elements")
            # Rational entries round-trip through their float representation.
            cols.append([Fraction(x).limit_denominator(10 ** 12) for x in np.diagonal(elem).real])
        matrix = StochasticMatrix(np.array(cols, dtype=object).T)
    else:
        matrix = _matrix_from_elements([povm.elements[j] for j in keep], frame, tol)

    weights, rebalanced, t = strip_trivial(matrix)
    vertices = vertex_decompose(rebalanced)
    basis = frame.conj().T  # columns are the frame basis vectors
    n_kept = len(keep)

    def embed(kept_elements):
        full = [np.zeros((d, d), dtype=complex) for _ in range(n)]
        for pos, j in enumerate(keep):
            full[j] = kept_elements[pos]
        return full

    terms = []
    eye = np.eye(d, dtype=complex)
    for pos, w in enumerate(weights):
        if (w != 0) if exact else (w > 1e-12):
            elements = [np.zeros((d, d), dtype=complex) for _ in range(n_kept)]
            elements[pos] = eye.copy()
            terms.append((w, Povm(embed(elements), atol=1e-7)))
    for vert in vertices:
        layer_weight = vert.weight * t / d if exact else float(vert.weight) * t / d
        if (layer_weight == 0) if exact else (layer_weight <= 1e-14):
            continue
        for layer in integer_to_projective(vert.matrix):
            elements = [
                _diag_projector(basis, layer[:, a].astype(bool)) for a in range(n_kept)
            ]
            terms.append((layer_weight, Povm(embed(elements), atol=1e-7)))
    return ProjectiveDecomposition(tuple(terms), d, n)


def verify_decomposition(povm: Povm, dec: ProjectiveDecomposition,
                         tol: float = 1e-8) -> bool:
    """Check weights, idempotency of every component, and reconstruction."""
    total = sum(float(w) for w, _ in dec.terms)
    if abs(total - 1.0) > 1e-9:
        return False
    for w, comp in dec.terms:
        if float(w) <= 0:
            return False
        for p in comp:
            if np.abs(p @ p - p).max() > max(tol, 1e-9):
                return False
    for a in range(len(povm)):
        rebuilt = sum(float(w) * comp.elements[a] for w, comp in dec.terms)
        if np.abs(rebuilt - povm.elements[a]).max() > tol:
            return False
    return True
