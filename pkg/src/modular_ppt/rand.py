"""Seeded sampling helpers.

All randomness in the package flows through ``generator``, which wraps
numpy's Philox bit generator.  Philox is counter-based, so a given integer
seed reproduces the same stream on every platform and numpy build; this is
what makes seeded CLI reports byte-identical across runs.
"""

from __future__ import annotations

import numpy as np


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``seed``; ``stream`` splits independent uses."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) + (np.uint64(stream) << np.uint64(32))))


def complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng: np.random.Generator, dim: int, norm: float | None = 1.0) -> np.ndarray:
    g = complex_gaussian(rng, dim, dim)
    h = (g + g.conj().T) / 2
    if norm is not None:
        h = h * (norm / max(np.linalg.norm(h), 1e-300))
    return h


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Wishart-style PSD sample G G^dagger, normalized to unit trace."""
    g = complex_gaussian(rng, dim, rank or dim)
    p = g @ g.conj().T
    return p / np.trace(p).real


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    return random_psd(rng, dim)


def random_faithful_density(rng: np.random.Generator, dim: int, floor: float = 0.1) -> np.ndarray:
    """Trace-one PSD sample with min eigenvalue >= floor/dim (well-conditioned)."""
    return (1 - floor) * random_psd(rng, dim) + floor * np.eye(dim) / dim


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_product_density(rng: np.random.Generator, dim_a: int, dim_b: int, terms: int = 1) -> np.ndarray:
    """Convex mixture of ``terms`` product states on the given bipartite shape."""
    out = np.zeros((dim_a * dim_b, dim_a * dim_b), dtype=complex)
    weights = rng.dirichlet(np.ones(terms)) if terms > 1 else [1.0]
    for w in weights:
        out = out + w * np.kron(random_psd(rng, dim_a), random_psd(rng, dim_b))
    return out
