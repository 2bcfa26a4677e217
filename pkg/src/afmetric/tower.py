"""Inductive towers of finite-dimensional C*-algebras.

Builders for the Effros-Shen family (levels M_{q_n} + M_{q_{n-1}}, one
embedding per continued-fraction digit) and for UHF tensor towers, with
compatible traces at every level and a verification report covering the
*-monomorphism laws and trace compatibility.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cfrac
from .cfrac import BaireSequence, IrrationalHandle, boxtimes, convergents
from .errors import LevelOutOfRange, ShapeMismatch
from .fdca import (
    AlgebraElement,
    BlockShape,
    TraceWeights,
    gns_norm,
    op_norm,
    random_element,
    trace_state,
)

Layout = tuple[tuple[tuple[int, int], ...], ...]


@dataclass(frozen=True)
class Embedding:
    """Unital *-monomorphism given by a block-diagonal layout.

    layout[j] lists (source block index, copies) placed in order along the
    diagonal of target block j.  The copy counts must exactly fill each
    target block.
    """

    source_shape: BlockShape
    target_shape: BlockShape
    layout: Layout

    def __post_init__(self):
        object.__setattr__(
            self,
            "layout",
            tuple(tuple((int(s), int(r)) for s, r in row) for row in self.layout),
        )
        if len(self.layout) != len(self.target_shape.dims):
            raise ShapeMismatch("layout rows do not match target blocks")
        for j, row in enumerate(self.layout):
            filled = sum(r * self.source_shape.dims[s] for s, r in row)
            if filled != self.target_shape.dims[j]:
                raise ShapeMismatch(
                    f"target block {j}: layout fills {filled} of {self.target_shape.dims[j]}"
                )

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.source_shape:
            raise ShapeMismatch(f"{a.shape.dims} does not match source {self.source_shape.dims}")
        blocks = []
        for j, row in enumerate(self.layout):
            d_t = self.target_shape.dims[j]
            m = np.zeros((d_t, d_t), dtype=np.complex128)
            pos = 0
            for s, reps in row:
                d_s = self.source_shape.dims[s]
                for _ in range(reps):
                    m[pos : pos + d_s, pos : pos + d_s] = a.blocks[s]
                    pos += d_s
            blocks.append(m)
        return AlgebraElement(self.target_shape, blocks)


@dataclass(frozen=True)
class EsProvenance:
    irrational: str
    digits: tuple[int, ...]
    kind: str = "effros-shen"


@dataclass(frozen=True)
class UhfProvenance:
    digits: tuple[int, ...]
    kind: str = "uhf"


@dataclass(frozen=True)
class Tower:
    """Levels 0..depth with embeddings between consecutive levels.

    Level 0 is the scalars.  betas[k-1] is the reciprocal dimension of
    level k, exact.  Towers are immutable; the cache only memoizes derived
    orthonormal bases and Dirac data.
    """

    levels: tuple[tuple[BlockShape, TraceWeights], ...]
    embeddings: tuple[Embedding, ...]
    provenance: EsProvenance | UhfProvenance
    betas: tuple[Fraction, ...]
    _caches: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    # RLock: cache builders may consult other cached entries
    _lock: threading.RLock = field(
        default_factory=threading.RLock, init=False, repr=False, compare=False
    )

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def _check_level(self, n: int):
        if not 0 <= n <= self.depth:
            raise LevelOutOfRange(f"level {n} outside 0..{self.depth}")

    def shape(self, n: int) -> BlockShape:
        self._check_level(n)
        return self.levels[n][0]

    def weights(self, n: int) -> TraceWeights:
        self._check_level(n)
        return self.levels[n][1]

    def beta(self, k: int) -> Fraction:
        if not 1 <= k <= self.depth:
            raise LevelOutOfRange(f"beta index {k} outside 1..{self.depth}")
        return self.betas[k - 1]

    def cached(self, key, build):
        """Race-free single initialization of derived data."""
        try:
            return self._caches[key]
        except KeyError:
            pass
        with self._lock:
            if key not in self._caches:
                self._caches[key] = build()
            return self._caches[key]


def es_tower(x: IrrationalHandle, depth: int) -> Tower:
    """Effros-Shen tower: level n is M_{q_n} + M_{q_{n-1}} with trace
    weights (t(theta,n), 1-t(theta,n)); each embedding places r_{n+1}
    copies of the first source block and then the second."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    digits = cfrac.cf_expand(x, depth)
    table = convergents(digits)
    levels: list[tuple[BlockShape, TraceWeights]] = [
        (BlockShape((1,)), TraceWeights((1.0,)))
    ]
    embeddings: list[Embedding] = []
    for n in range(1, depth + 1):
        shape = BlockShape((table.q(n), table.q(n - 1)))
        t_n = cfrac.t_weight(x, table, n)
        levels.append((shape, TraceWeights((t_n, 1.0 - t_n))))
        prev_shape = levels[n - 1][0]
        r = digits[n - 1]
        if n == 1:
            layout: Layout = (((0, r),), ((0, 1),))
        else:
            layout = (((0, r), (1, 1)), ((0, 1),))
        embeddings.append(Embedding(prev_shape, shape, layout))
    betas = tuple(cfrac.es_beta(table, k) for k in range(1, depth + 1))
    return Tower(
        tuple(levels),
        tuple(embeddings),
        EsProvenance(x.spec(), tuple(digits)),
        betas,
    )


def uhf_tower(b: BaireSequence, depth: int) -> Tower:
    """UHF tower: level n is the full matrix algebra of size boxtimes(n)
    with its unique trace; each embedding repeats the source beta(n)+1 times."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > len(b):
        raise LevelOutOfRange(f"{len(b)} multiplicity digits, depth {depth} requested")
    levels = [(BlockShape((boxtimes(b, n),)), TraceWeights((1.0,))) for n in range(depth + 1)]
    embeddings = [
        Embedding(levels[n][0], levels[n + 1][0], (((0, b.digits[n] + 1),),))
        for n in range(depth)
    ]
    betas = tuple(cfrac.uhf_gamma(b, k) for k in range(1, depth + 1))
    return Tower(
        tuple(levels),
        tuple(embeddings),
        UhfProvenance(b.digits[:depth]),
        betas,
    )


def embed(e: Embedding, a: AlgebraElement) -> AlgebraElement:
    return e.apply(a)


def embed_through(t: Tower, frm: int, to: int, a: AlgebraElement) -> AlgebraElement:
    """Composition of the tower embeddings from level `frm` to level `to`."""
    t._check_level(frm)
    t._check_level(to)
    if frm > to:
        raise LevelOutOfRange(f"cannot embed downwards: {frm} -> {to}")
    if a.shape != t.shape(frm):
        raise ShapeMismatch(f"element shape {a.shape.dims} is not level {frm}")
    for n in range(frm, to):
        a = t.embeddings[n].apply(a)
    return a


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    level: int
    name: str
    residual: float
    passed: bool


@dataclass(frozen=True)
class TowerReport:
    entries: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[CheckResult]:
        return [e for e in self.entries if not e.passed]


def _trace_vector_residual(t: Tower, n: int) -> float:
    """Exact spanning-set check of tau_{n+1} o alpha_n = tau_n: compare the
    per-source-block trace coefficients induced through the layout."""
    e = t.embeddings[n]
    w_src, w_tgt = t.weights(n), t.weights(n + 1)
    induced = [0.0] * len(e.source_shape.dims)
    for j, row in enumerate(e.layout):
        coef = w_tgt.weights[j] / e.target_shape.dims[j]
        for s, reps in row:
            induced[s] += coef * reps
    direct = [mu / d for mu, d in zip(w_src.weights, e.source_shape.dims)]
    return max(abs(x - y) for x, y in zip(induced, direct))


def verify_tower(t: Tower, seed: int = 0, tol: float = 1e-10) -> TowerReport:
    """Per-level report: unitality, multiplicativity and adjoint preservation
    on random elements, exact trace compatibility, GNS isometry, and the
    shape recurrences of the tower's provenance."""
    rng = np.random.default_rng(seed)
    entries: list[CheckResult] = []

    def add(level, name, residual, passed=None):
        residual = float(residual)
        entries.append(
            CheckResult(level, name, residual, residual <= tol if passed is None else passed)
        )

    for n in range(t.depth):
        e = t.embeddings[n]
        src, tgt = t.shape(n), t.shape(n + 1)
        one_src, one_tgt = AlgebraElement.unit(src), AlgebraElement.unit(tgt)
        add(n, "unitality", op_norm(e.apply(one_src) - one_tgt))
        x, y = random_element(src, rng), random_element(src, rng)
        add(n, "multiplicativity", op_norm(e.apply(x * y) - e.apply(x) * e.apply(y)))
        add(n, "adjoint", op_norm(e.apply(x.adjoint()) - e.apply(x).adjoint()))
        add(n, "isometry", abs(op_norm(e.apply(x)) - op_norm(x)))
        add(n, "trace-compatibility", _trace_vector_residual(t, n))
        add(
            n,
            "trace-on-random",
            abs(trace_state(t.weights(n + 1), e.apply(x)) - trace_state(t.weights(n), x)),
        )
        add(
            n,
            "gns-isometry",
            abs(gns_norm(t.weights(n + 1), e.apply(x)) - gns_norm(t.weights(n), x)),
        )

    if isinstance(t.provenance, EsProvenance):
        digits = t.provenance.digits
        table = convergents(list(digits))
        for n in range(1, t.depth + 1):
            expected = (table.q(n), table.q(n - 1))
            add(n, "shape-recurrence", 0.0, passed=t.shape(n).dims == expected)
            w = t.weights(n).weights
            add(n, "weights-in-(0,1)", 0.0, passed=all(0 < x < 1 for x in w))
    else:
        digits = t.provenance.digits
        for n in range(t.depth):
            ok = t.shape(n + 1).dims[0] == (digits[n] + 1) * t.shape(n).dims[0]
            add(n, "size-product", 0.0, passed=ok)

    return TowerReport(tuple(entries))


# ---------------------------------------------------------------------------
# descriptor file
# ---------------------------------------------------------------------------

def tower_descriptor(t: Tower) -> dict:
    doc = {
        "provenance": {
            "kind": t.provenance.kind,
            "digits": list(t.provenance.digits),
        },
        "depth": t.depth,
        "levels": [
            {"shape": list(shape.dims), "weights": [repr(x) for x in w.weights]}
            for shape, w in t.levels
        ],
        "embeddings": [
            [[list(placement) for placement in row] for row in e.layout]
            for e in t.embeddings
        ],
        "betas": [f"{b.numerator}/{b.denominator}" for b in t.betas],
    }
    if isinstance(t.provenance, EsProvenance):
        doc["provenance"]["irrational"] = t.provenance.irrational
    return doc


def save_tower_descriptor(t: Tower, path):
    with open(path, "w") as fh:
        json.dump(tower_descriptor(t), fh, sort_keys=True, indent=2)
        fh.write("\n")
