"""Extremal qubit configurations: pure-state sets maximising set-coherence.

A configuration is a list of unit Bloch vectors; its mean set-coherence is
the inner sphere minimisation from :mod:`setcoh.search`, and the pairwise
sine energy gives an upper bound on the best achievable value (averaging
the bounds obtained by aligning the reference axis with each vector).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ValidationError
from .search import SearchOptions, sphere_minimize

__all__ = [
    "SphereConfig",
    "energy_upper_bound",
    "evaluate_r1_config",
    "evaluate_rmax_config",
    "known_config",
    "uniform_sample_config",
    "search_optimal_r1",
    "search_optimal_rmax",
]


@dataclass(frozen=True)
class SphereConfig:
    """n unit Bloch vectors standing for pure qubit states."""

    vectors: np.ndarray

    def __init__(self, vectors, atol: float = 1e-10):
        v = np.asarray(vectors, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(v, axis=1)
        if np.abs(norms - 1.0).max() > atol:
            raise ValidationError("configuration vectors must be unit length")
        object.__setattr__(self, "vectors", v)

    def __len__(self) -> int:
        return len(self.vectors)


def energy_upper_bound(c: SphereConfig) -> float:
    """Mean pairwise |sin| interaction, including the vanishing diagonal."""
    g = np.clip(c.vectors @ c.vectors.T, -1.0, 1.0)
    s = np.sqrt(np.maximum(1.0 - g * g, 0.0))
    return float(s.sum()) / len(c) ** 2


def evaluate_r1_config(c: SphereConfig, fast: bool = False) -> float:
    """Mean set-coherence of the configuration (inner sphere minimisation)."""
    if fast:
        return sphere_minimize(c.vectors, mean=True, lattice=2048, top_k=3,
                               angle_tol=1e-6)[0]
    return sphere_minimize(c.vectors, mean=True)[0]


def evaluate_rmax_config(c: SphereConfig, fast: bool = False) -> float:
    """Max set-coherence of the configuration (inner sphere minimisation)."""
    if fast:
        return sphere_minimize(c.vectors, mean=False, lattice=2048, top_k=2,
                               angle_tol=1e-4)[0]
    return sphere_minimize(c.vectors, mean=False)[0]


def known_config(n: int) -> SphereConfig:
    """Configurations known to maximise the mean set-coherence.

    n = 2: orthonormal pair; n = 3: orthonormal basis; n = 4: regular
    tetrahedron; n = 6: half of an icosahedron (north pole plus upper ring,
    one vector per antipodal pair; any hemisphere choice is equivalent
    because the objective is antipodally symmetric).
    """
    if n == 2:
        return SphereConfig([[0, 0, 1], [1, 0, 0]])
    if n == 3:
        return SphereConfig(np.eye(3))
    if n == 4:
        v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
        return SphereConfig(v / np.sqrt(3))
    if n == 6:
        ring_z = 1 / np.sqrt(5)
        ring_r = 2 / np.sqrt(5)
        angles = 2 * np.pi * np.arange(5) / 5
        vecs = [[0.0, 0.0, 1.0]]
        vecs += [[ring_r * np.cos(a), ring_r * np.sin(a), ring_z] for a in angles]
        return SphereConfig(vecs)
    raise ValidationError(f"no catalogued optimal configuration for n = {n}")


def uniform_sample_config(n: int, seed) -> SphereConfig:
    """Area-uniform sample of n directions."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return SphereConfig(np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1))


def _anneal(vectors, value, evaluate, moves, r0, r1, rng):
    """Greedy hill climb with a shrinking spherical-cap proposal radius."""
    v = vectors.copy()
    n = len(v)
    decay = (r1 / r0) ** (1.0 / max(moves, 1))
    radius = r0
    for step in range(moves):
        i = step % n
        g = rng.standard_normal(3)
        cand = v[i] + radius * g
        cand /= np.linalg.norm(cand)
        old = v[i].copy()
        v[i] = cand
        val = evaluate(v)
        if val > value:
            value = val
        else:
            v[i] = old
        radius *= decay
    return v, value


def _search_optimal(n: int, opts: SearchOptions, mean: bool):
    if n < 2:
        raise ValidationError("configurations need at least two vectors")

    def cheap(v):
        dots = _LATTICE @ v.T
        s = np.sqrt(np.maximum(1.0 - dots * dots, 0.0))
        vals = s.mean(axis=1) if mean else s.max(axis=1)
        return float(vals.min())

    def medium(v):
        cfg = SphereConfig(v)
        return evaluate_r1_config(cfg, fast=True) if mean else evaluate_rmax_config(cfg, fast=True)

    moves = max(opts.max_iters, 60 * n)
    results = []
    for k in range(opts.restarts):
        rng = np.random.default_rng(np.random.SeedSequence(opts.seed, spawn_key=(k,)))
        v0 = uniform_sample_config(n, rng).vectors
        v, val = _anneal(v0, cheap(v0), cheap, moves, r0=0.6, r1=0.02, rng=rng)
        results.append((val, k, v))
    results.sort(key=lambda r: (-r[0], r[1]))

    best_cfg, best_val = None, -np.inf
    for val, k, v in results[:3]:
        rng = np.random.default_rng(np.random.SeedSequence(opts.seed, spawn_key=(2 ** 16 + k,)))
        v, _ = _anneal(v, medium(v), medium, moves=40 * n, r0=0.03, r1=1e-3, rng=rng)
        cfg = SphereConfig(v / np.linalg.norm(v, axis=1, keepdims=True))
        precise = evaluate_r1_config(cfg) if mean else evaluate_rmax_config(cfg)
        if precise > best_val:
            best_val, best_cfg = precise, cfg
    return best_cfg, float(best_val)


_LATTICE = None


def _init_lattice():
    global _LATTICE
    if _LATTICE is None:
        from .search import fibonacci_directions

        _LATTICE = fibonacci_directions(4096)


def search_optimal_r1(n: int, opts: SearchOptions | None = None):
    """Best found configuration for the mean measure, with its value."""
    _init_lattice()
    return _search_optimal(n, opts or SearchOptions(), mean=True)


def search_optimal_rmax(n: int, opts: SearchOptions | None = None):
    """Best found configuration for the max measure, with its value."""
    _init_lattice()
    return _search_optimal(n, opts or SearchOptions(), mean=False)
