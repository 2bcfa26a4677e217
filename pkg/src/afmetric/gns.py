"""GNS geometry of a tower level.

In coordinates rescaled by sqrt(mu_j / d_j) per block, the trace inner
product <a,b> = tau(b* a) becomes the standard complex dot product, so
projections are plain linear algebra.  This module builds orthonormal
bases of the embedded subalgebra images, the trace-preserving conditional
expectations E_{n,k}, and the differences Q_{n,k} = E_{n,k} - E_{n,k-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasis, LevelOutOfRange, ShapeMismatch
from .fdca import AlgebraElement, flatten, unflatten
from .tower import Tower, embed_through

_GRAM_FAST_PATH_TOL = 1e-12
_MGS_DROP_TOL = 1e-12


def gns_dim(t: Tower, n: int) -> int:
    return t.shape(n).total_dim


def scale_vector(t: Tower, n: int) -> np.ndarray:
    """Per-coordinate sqrt(mu_j / d_j), constant on each block."""

    def build():
        shape, w = t.shape(n), t.weights(n)
        parts = [
            np.full(d * d, np.sqrt(mu / d)) for d, mu in zip(shape.dims, w.weights)
        ]
        return np.concatenate(parts)

    return t.cached(("scales", n), build)


def to_coords(t: Tower, n: int, a: AlgebraElement) -> np.ndarray:
    if a.shape != t.shape(n):
        raise ShapeMismatch(f"{a.shape.dims} is not level {n} of the tower")
    return flatten(a) * scale_vector(t, n)


def from_coords(t: Tower, n: int, v: np.ndarray) -> AlgebraElement:
    return unflatten(t.shape(n), v / scale_vector(t, n))


@dataclass(frozen=True)
class SubalgebraBasis:
    """Orthonormal basis (rows of `matrix`, in scaled coordinates) of the
    level-k image inside level n."""

    level: int
    sublevel: int
    matrix: np.ndarray
    gram_residual: float

    @property
    def count(self) -> int:
        return self.matrix.shape[0]

    def vectors(self, t: Tower) -> list[AlgebraElement]:
        return [from_coords(t, self.level, row) for row in self.matrix]

    def project(self, v: np.ndarray) -> np.ndarray:
        u = self.matrix
        return u.T @ (u.conj() @ v)


def _canonical_basis(t: Tower, k: int) -> list[AlgebraElement]:
    """Matrix units of every block of level k, in (block, row, col) order."""
    shape = t.shape(k)
    out = []
    for b, d in enumerate(shape.dims):
        for i in range(d):
            for j in range(d):
                e = AlgebraElement.zero(shape)
                e.blocks[b][i, j] = 1.0
                out.append(e)
    return out


def _gram_schmidt(rows: np.ndarray) -> np.ndarray:
    """Orthonormalize full-rank rows; two projection passes per vector."""
    out = np.empty_like(rows)
    for i, v in enumerate(rows):
        orig = np.linalg.norm(v)
        v = v.copy()
        for _ in range(2):
            if i:
                u = out[:i]
                v -= u.T @ (u.conj() @ v)
        nv = np.linalg.norm(v)
        if nv <= _MGS_DROP_TOL * orig:
            raise DegenerateBasis(
                f"vector {i} collapsed under orthonormalization ({nv:.3e} of {orig:.3e})"
            )
        out[i] = v / nv
    return out


def subalgebra_basis(t: Tower, n: int, k: int) -> SubalgebraBasis:
    """Orthonormalized image of the canonical level-k basis inside level n.

    Trace compatibility makes the embedded matrix units orthogonal already,
    so orthonormalization normally reduces to row normalization; the Gram
    residual records how true that was, and a genuine dependence (an
    embedding bug) raises DegenerateBasis.
    """
    t._check_level(n)
    if not 0 <= k <= n:
        raise LevelOutOfRange(f"sublevel {k} outside 0..{n}")

    def build():
        rows = np.stack(
            [to_coords(t, n, embed_through(t, k, n, e)) for e in _canonical_basis(t, k)]
        )
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms <= 0):
            raise DegenerateBasis("embedded basis vector vanished")
        normalized = rows / norms[:, None]
        gram = normalized.conj() @ normalized.T
        residual = float(np.max(np.abs(gram - np.eye(len(rows)))))
        matrix = normalized if residual < _GRAM_FAST_PATH_TOL else _gram_schmidt(rows)
        return SubalgebraBasis(n, k, matrix, residual)

    return t.cached(("basis", n, k), build)


def cond_expectation(t: Tower, n: int, k: int, a: AlgebraElement) -> AlgebraElement:
    """E_{n,k}(a): the trace-preserving conditional expectation of the
    level-n element a onto the embedded level-k subalgebra."""
    if a.shape != t.shape(n):
        raise ShapeMismatch(f"{a.shape.dims} is not level {n} of the tower")
    if not 0 <= k <= n:
        raise LevelOutOfRange(f"sublevel {k} outside 0..{n}")
    if k == n:
        return a.copy()
    basis = subalgebra_basis(t, n, k)
    return from_coords(t, n, basis.project(to_coords(t, n, a)))


def q_projection(t: Tower, n: int, k: int, a: AlgebraElement) -> AlgebraElement:
    """Q_{n,k}(a) = E_{n,k}(a) - E_{n,k-1}(a), for 1 <= k <= n."""
    if not 1 <= k <= n:
        raise LevelOutOfRange(f"difference index {k} outside 1..{n}")
    return cond_expectation(t, n, k, a) - cond_expectation(t, n, k - 1, a)
