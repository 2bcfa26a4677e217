"""Truncated Christensen-Ivan Dirac operator and the induced Lip-seminorm.

At tower level n the operator is D = sum_k a_k Q_k with coefficients
a_k = c_k / beta_k, where c_k is the sharp norm-equivalence constant of
level k and beta_k the reciprocal level dimension.  The seminorm of an
element a is the operator norm of b |-> [D, pi(a)](b) on the level-n GNS
space; it is computed either from the assembled matrix (dense) or
matrix-free (power iteration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .errors import DegenerateBasis, NonConvergence, ShapeMismatch
from .fdca import AlgebraElement, op_norm, power_top_eigenvalue, sharp_constant
from .gns import from_coords, gns_dim, subalgebra_basis, to_coords
from .tower import Tower

DENSE_MAX_GNS_DIM = 4096
# full LAPACK SVD keeps absolute singular-value error near eps*sigma, which
# the seminorm symmetry checks need; above this the dense path extracts the
# top singular value iteratively from the assembled matrix
_FULL_SVD_MAX_DIM = 1200
_Q_RANK_TOL = 1e-8
LIP_POWER_SEED = 31337


@dataclass(frozen=True)
class DiracData:
    """Coefficients and orthonormal bases of the Q_k ranges at one level.

    `stacked` holds every Q-range basis row (scaled coordinates), and
    `row_coeffs` the Dirac coefficient attached to each row, so applying D
    is two matrix-vector products.
    """

    tower: Tower
    level: int
    coeffs: tuple[float, ...]
    q_bases: tuple[np.ndarray, ...]
    stacked: np.ndarray
    stacked_conj: np.ndarray
    row_coeffs: np.ndarray


def dirac_coeffs(t: Tower, n: int) -> list[float]:
    """(c_k / beta_k) for k = 1..n; c_k is intrinsic to level k because the
    embeddings are isometric for both norms."""
    t._check_level(n)
    return [
        sharp_constant(t.shape(k), t.weights(k)) / float(t.beta(k))
        for k in range(1, n + 1)
    ]


def _q_range_bases(t: Tower, n: int) -> list[np.ndarray]:
    dim = gns_dim(t, n)
    bases: list[np.ndarray] = []
    for k in range(1, n + 1):
        u_prev = subalgebra_basis(t, n, k - 1).matrix
        m_prev = u_prev.shape[0]
        m_k = t.shape(k).total_dim
        rank = m_k - m_prev
        if k == n:
            w = null_space(u_prev.conj()).T
            if w.shape != (rank, dim):
                raise DegenerateBasis(
                    f"complement of sublevel {k - 1} has dimension {w.shape[0]}, expected {rank}"
                )
        else:
            b = subalgebra_basis(t, n, k).matrix
            x = b - (b @ u_prev.conj().T) @ u_prev
            _, s, vh = np.linalg.svd(x, full_matrices=False)
            if s[rank - 1] <= _Q_RANK_TOL or (len(s) > rank and s[rank] > _Q_RANK_TOL):
                raise DegenerateBasis(
                    f"Q-range at sublevel {k}: singular values {s[max(0, rank - 1):rank + 1]}"
                )
            w = vh[:rank]
        bases.append(np.ascontiguousarray(w))
    return bases


def dirac_data(t: Tower, n: int) -> DiracData:
    t._check_level(n)

    def build():
        coeffs = tuple(dirac_coeffs(t, n))
        bases = tuple(_q_range_bases(t, n))
        dim = gns_dim(t, n)
        if bases:
            stacked = np.vstack(bases)
            row_coeffs = np.repeat(coeffs, [b.shape[0] for b in bases])
        else:
            stacked = np.zeros((0, dim), dtype=np.complex128)
            row_coeffs = np.zeros(0)
        return DiracData(t, n, coeffs, bases, stacked, stacked.conj().copy(), row_coeffs)

    return t.cached(("dirac", n), build)


def _dirac_coords(d: DiracData, v: np.ndarray) -> np.ndarray:
    return d.stacked.T @ (d.row_coeffs * (d.stacked_conj @ v))


def dirac_apply(d: DiracData, a: AlgebraElement) -> AlgebraElement:
    """D(a) = sum_k a_k Q_k(a) for a at the DiracData's level."""
    v = to_coords(d.tower, d.level, a)
    return from_coords(d.tower, d.level, _dirac_coords(d, v))


def _commutator_coords(d: DiracData, a: AlgebraElement, v: np.ndarray) -> np.ndarray:
    """[D, pi(a)] applied to the coordinate vector v."""
    t, n = d.tower, d.level
    b = from_coords(t, n, v)
    ab = to_coords(t, n, a * b)
    db = from_coords(t, n, _dirac_coords(d, v))
    return _dirac_coords(d, ab) - to_coords(t, n, a * db)


def commutator_apply(d: DiracData, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """D(a b) - a D(b), the commutator [D, pi(a)] acting on b."""
    v = to_coords(d.tower, d.level, b)
    return from_coords(d.tower, d.level, _commutator_coords(d, a, v))


def dirac_matrix(t: Tower, n: int) -> np.ndarray:
    """Dense matrix of D in the orthonormal (scaled) coordinates."""

    def build():
        d = dirac_data(t, n)
        return (d.stacked.T * d.row_coeffs) @ d.stacked_conj

    return t.cached(("dirac-matrix", n), build)


def _commutator_matrix(t: Tower, n: int, a: AlgebraElement) -> np.ndarray:
    """Dense matrix of [D, pi(a)], assembled blockwise: left multiplication
    by a acts as (a x I) on each block's row-major coordinates, so both
    products against the Dirac matrix are batched small matmuls."""
    dmat = dirac_matrix(t, n)
    dim = dmat.shape[0]
    shape = t.shape(n)
    out = np.empty((dim, dim), dtype=np.complex128)
    pos = 0
    for blk, d in zip(a.blocks, shape.dims):
        cols = slice(pos, pos + d * d)
        d3 = dmat[:, cols].reshape(dim, d, d)
        # out[x, (k,l)] = sum_i dmat[x, (i,l)] a[i,k]
        out[:, cols] = np.matmul(blk.T, d3).reshape(dim, d * d)
        pos += d * d
    pos = 0
    for blk, d in zip(a.blocks, shape.dims):
        rows = slice(pos, pos + d * d)
        d3 = dmat[rows, :].reshape(d, d * dim)
        # out[(i,l), y] -= sum_k a[i,k] dmat[(k,l), y]
        out[rows, :] -= (blk @ d3).reshape(d * d, dim)
        pos += d * d
    return out


@dataclass(frozen=True)
class LipResult:
    value: float
    method: str
    iterations: int
    residual: float
    gns_dim: int


def _noise_floor(d: DiracData, a: AlgebraElement) -> float:
    scale = (1.0 + sum(d.coeffs)) * (1.0 + op_norm(a))
    return (1e-12 * scale) ** 2


def _lip_dense(t: Tower, n: int, a: AlgebraElement) -> LipResult:
    c = _commutator_matrix(t, n, a)
    dim = c.shape[0]
    if dim <= _FULL_SVD_MAX_DIM:
        value = float(np.linalg.svd(c, compute_uv=False)[0]) if dim else 0.0
        return LipResult(value, "dense", 0, 0.0, dim)
    ch = np.ascontiguousarray(c.conj().T)
    floor = _noise_floor(dirac_data(t, n), a)
    try:
        rho, iters, resid = power_top_eigenvalue(
            lambda v: ch @ (c @ v), dim, seed=LIP_POWER_SEED, zero_floor=floor
        )
    except NonConvergence:
        value = float(np.linalg.svd(c, compute_uv=False)[0])
        return LipResult(value, "dense", 0, 0.0, dim)
    return LipResult(math.sqrt(max(rho, 0.0)), "dense", iters, resid, dim)


def _lip_power(t: Tower, n: int, a: AlgebraElement) -> LipResult:
    d = dirac_data(t, n)
    dim = gns_dim(t, n)
    a_star = a.adjoint()

    def apply_psd(v):
        # (C_a)* (C_a) = -C_{a*} C_a since D is GNS self-adjoint
        return -_commutator_coords(d, a_star, _commutator_coords(d, a, v))

    rho, iters, resid = power_top_eigenvalue(
        apply_psd, dim, seed=LIP_POWER_SEED, zero_floor=_noise_floor(d, a)
    )
    return LipResult(math.sqrt(max(rho, 0.0)), "power", iters, resid, dim)


def lip_seminorm_detailed(t: Tower, n: int, a: AlgebraElement,
                          method: str = "auto") -> LipResult:
    """Operator norm of b |-> [D, pi(a)](b) on level n with its GNS norm.

    dense: assemble the commutator matrix and take its largest singular
    value.  power: iterate the matrix-free adjoint composition.  auto picks
    dense up to GNS dimension 4096.
    """
    if a.shape != t.shape(n):
        raise ShapeMismatch(f"{a.shape.dims} is not level {n} of the tower")
    if method == "auto":
        method = "dense" if gns_dim(t, n) <= DENSE_MAX_GNS_DIM else "power"
    if method == "dense":
        return _lip_dense(t, n, a)
    if method == "power":
        return _lip_power(t, n, a)
    raise ValueError(f"unknown method {method!r}")


def lip_seminorm(t: Tower, n: int, a: AlgebraElement, method: str = "auto") -> float:
    return lip_seminorm_detailed(t, n, a, method).value
