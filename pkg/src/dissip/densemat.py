"""Small dense-matrix helpers shared by the generator and evolution code.

Vectorization uses column stacking (Fortran order), so vec(A X B) =
(B^T kron A) vec(X).
"""

from __future__ import annotations

import numpy as np


def vec(mat: np.ndarray) -> np.ndarray:
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def hermitian_deviation(mat: np.ndarray) -> float:
    return float(np.abs(mat - mat.conj().T).max())


def spectral_norm(mat: np.ndarray, hermitian: bool = False) -> float:
    """Operator (largest singular value) norm."""
    if hermitian:
        return float(np.abs(np.linalg.eigvalsh(mat)).max())
    return float(np.linalg.norm(mat, 2))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random density matrix (Wishart normalized to unit trace)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    w = g @ g.conj().T
    return w / np.trace(w).real
