"""Finite-dimensional C*-algebras as direct sums of full matrix algebras.

Block-diagonal elements, operator norm, tracial states built from block
weights, the GNS inner product <a,b> = tau(b* a), and the sharp constant
c = max_k sqrt(d_k / mu_k) relating operator and GNS norms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InternalInconsistency, NonConvergence, ShapeMismatch

_DENSE_SVD_MAX_DIM = 64
POWER_SEED = 20240
POWER_TOL = 1e-10
POWER_BUDGET = 10_000
_POWER_RESID_TOL = 1e-7


@dataclass(frozen=True)
class BlockShape:
    """Sizes (d_1, ..., d_K) of the simple summands."""

    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims or any(d < 1 for d in self.dims):
            raise ShapeMismatch(f"invalid block dimensions {self.dims}")

    @property
    def total_dim(self) -> int:
        """Linear dimension sum d_k^2 (= GNS dimension)."""
        return sum(d * d for d in self.dims)

    def __len__(self):
        return len(self.dims)


class AlgebraElement:
    """Block-diagonal tuple of dense complex matrices."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: BlockShape, blocks: Sequence[np.ndarray]):
        blocks = tuple(np.asarray(b, dtype=np.complex128) for b in blocks)
        if len(blocks) != len(shape.dims) or any(
            b.shape != (d, d) for b, d in zip(blocks, shape.dims)
        ):
            raise ShapeMismatch(
                f"blocks {[b.shape for b in blocks]} do not fit {shape.dims}"
            )
        self.shape = shape
        self.blocks = blocks

    @classmethod
    def unit(cls, shape: BlockShape) -> "AlgebraElement":
        return cls(shape, [np.eye(d, dtype=np.complex128) for d in shape.dims])

    @classmethod
    def zero(cls, shape: BlockShape) -> "AlgebraElement":
        return cls(shape, [np.zeros((d, d), dtype=np.complex128) for d in shape.dims])

    def _check(self, other: "AlgebraElement"):
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape.dims} vs {other.shape.dims}")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.shape, [x + y for x, y in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.shape, [x - y for x, y in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.shape, [-x for x in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(self.shape, [x @ y for x, y in zip(self.blocks, other.blocks)])
        return AlgebraElement(self.shape, [other * x for x in self.blocks])

    def __rmul__(self, scalar):
        return AlgebraElement(self.shape, [scalar * x for x in self.blocks])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [x.conj().T for x in self.blocks])

    def copy(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [x.copy() for x in self.blocks])

    def __repr__(self):
        return f"AlgebraElement(dims={self.shape.dims})"


def flatten(a: AlgebraElement) -> np.ndarray:
    """Row-major concatenation of the blocks into one complex vector."""
    return np.concatenate([b.reshape(-1) for b in a.blocks])


def unflatten(shape: BlockShape, v: np.ndarray) -> AlgebraElement:
    blocks = []
    pos = 0
    for d in shape.dims:
        blocks.append(np.asarray(v[pos : pos + d * d]).reshape(d, d))
        pos += d * d
    if pos != len(v):
        raise ShapeMismatch(f"vector of length {len(v)} does not fit {shape.dims}")
    return AlgebraElement(shape, blocks)


def random_element(shape: BlockShape, rng: np.random.Generator,
                   hermitian: bool = False) -> AlgebraElement:
    blocks = []
    for d in shape.dims:
        b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        if hermitian:
            b = (b + b.conj().T) / 2
        blocks.append(b)
    return AlgebraElement(shape, blocks)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def power_top_eigenvalue(apply_psd, dim: int, seed: int = POWER_SEED,
                         tol: float = POWER_TOL, budget: int = POWER_BUDGET,
                         zero_floor: float = 0.0):
    """Largest eigenvalue of a positive semidefinite operator given by its
    action on complex vectors.

    The iteration space is the power-method Krylov sequence of the
    operator, extracted with an implicitly-restarted Lanczos solve: plain
    Rayleigh-quotient updates cannot certify the pinned tolerance within
    the budget when the top of the spectrum is clustered, while the
    Lanczos extraction converges on the same matrix-vector applies.  The
    start vector is drawn from the fixed seed; on non-convergence one
    random restart is attempted.  Rayleigh values at or below `zero_floor`
    count as zero (the operator is numerically null).  Returns
    (eigenvalue, matvec count, residual).
    """
    from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

    rng = np.random.default_rng(seed)
    count = 0

    def matvec(v):
        nonlocal count
        count += 1
        return apply_psd(np.asarray(v).reshape(-1))

    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v0 /= np.linalg.norm(v0)
    w0 = apply_psd(v0)
    rho0 = float(np.real(np.vdot(v0, w0)))
    if float(np.linalg.norm(w0)) < 1e-300 or rho0 <= zero_floor:
        return max(rho0, 0.0), 1, 0.0
    if dim == 1:
        return max(rho0, 0.0), 1, 0.0

    op = LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    ncv = min(dim, max(20, 4))
    last_err = None
    for _attempt in range(2):
        try:
            vals, vecs = eigsh(
                op, k=1, which="LA", v0=v0, tol=tol, maxiter=budget, ncv=ncv
            )
            rho = float(vals[0])
            vec = vecs[:, 0]
            resid = float(np.linalg.norm(apply_psd(vec) - rho * vec))
            return max(rho, 0.0), count, resid
        except (ArpackNoConvergence, ArpackError) as exc:
            last_err = exc
            v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            v0 /= np.linalg.norm(v0)
    raise NonConvergence(
        f"matrix-free eigensolve failed after {count} applies: {last_err}",
        iterations=count,
        residual=math.inf,
    )


def _sigma_max(m: np.ndarray) -> float:
    """Largest singular value; dense decomposition for small blocks, power
    iteration on m* m above the dense cutoff."""
    n = m.shape[0]
    if n <= _DENSE_SVD_MAX_DIM:
        return float(np.linalg.svd(m, compute_uv=False)[0]) if n else 0.0
    mh = m.conj().T

    def apply_psd(v):
        return mh @ (m @ v)

    rho, _, _ = power_top_eigenvalue(apply_psd, n)
    return math.sqrt(max(rho, 0.0))


def op_norm(a: AlgebraElement) -> float:
    """C*-norm: the largest singular value over the blocks."""
    return max(_sigma_max(b) for b in a.blocks)


# ---------------------------------------------------------------------------
# traces and the GNS inner product
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceWeights:
    """Positive block weights mu_1..mu_K summing to 1.

    Weight vectors arriving as floats may miss the normalization tolerance
    of 1e-12; they are renormalized and flagged rather than rejected.
    """

    weights: tuple[float, ...]
    renormalized: bool = False

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or any(x <= 0 for x in w):
            raise ValueError(f"weights must be positive, got {w}")
        s = sum(w)
        flag = abs(s - 1.0) > 1e-12
        if flag:
            w = tuple(x / s for x in w)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "renormalized", flag)

    def __len__(self):
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights)


def _check_weights(shape: BlockShape, w: TraceWeights):
    if len(w) != len(shape):
        raise ShapeMismatch(f"{len(w)} weights for {len(shape)} blocks")


def trace_state(w: TraceWeights, a: AlgebraElement) -> complex:
    """tau(a) = sum_k (mu_k / d_k) Tr(a_k); unital and tracial."""
    _check_weights(a.shape, w)
    return complex(
        sum(mu / d * np.trace(b) for mu, d, b in zip(w.weights, a.shape.dims, a.blocks))
    )


def gns_inner(w: TraceWeights, a: AlgebraElement, b: AlgebraElement) -> complex:
    """<a, b> = tau(b* a); positive definite since every mu_k > 0."""
    a._check(b)
    _check_weights(a.shape, w)
    return complex(
        sum(
            mu / d * np.vdot(y, x)
            for mu, d, x, y in zip(w.weights, a.shape.dims, a.blocks, b.blocks)
        )
    )


def gns_norm(w: TraceWeights, a: AlgebraElement) -> float:
    return math.sqrt(max(gns_inner(w, a, a).real, 0.0))


def sharp_constant(shape: BlockShape, w: TraceWeights) -> float:
    """Least c with ||a|| <= c ||a||_tau, namely max_k sqrt(d_k / mu_k).

    The closed form is cross-checked against its extremal witness (the
    matrix unit e_11 of the maximizing block); disagreement signals a bug.
    """
    _check_weights(shape, w)
    ratios = [d / mu for d, mu in zip(shape.dims, w.weights)]
    k_star = max(range(len(ratios)), key=ratios.__getitem__)
    c = math.sqrt(ratios[k_star])
    witness = AlgebraElement.zero(shape)
    witness.blocks[k_star][0, 0] = 1.0
    attained = op_norm(witness) / gns_norm(w, witness)
    if abs(attained - c) > 1e-10 * c:
        raise InternalInconsistency(
            f"sharp constant {c} not attained by extremal witness ({attained})"
        )
    return c


# ---------------------------------------------------------------------------
# element file format
# ---------------------------------------------------------------------------

def element_to_dict(a: AlgebraElement) -> dict:
    return {
        "shape": list(a.shape.dims),
        "blocks": [
            [[float(z.real), float(z.imag)] for z in b.reshape(-1)] for b in a.blocks
        ],
    }


def element_from_dict(doc: dict) -> AlgebraElement:
    shape = BlockShape(tuple(doc["shape"]))
    blocks = []
    for d, entries in zip(shape.dims, doc["blocks"]):
        if len(entries) != d * d:
            raise ShapeMismatch(f"block of {len(entries)} entries for size {d}")
        flat = np.array([complex(re, im) for re, im in entries])
        blocks.append(flat.reshape(d, d))
    return AlgebraElement(shape, blocks)


def save_element(a: AlgebraElement, path):
    with open(path, "w") as fh:
        json.dump(element_to_dict(a), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_element(path) -> AlgebraElement:
    with open(path) as fh:
        return element_from_dict(json.load(fh))
