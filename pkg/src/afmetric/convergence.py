"""Numerical convergence experiments and propinquity-bound certificates.

Scans sharp constants and Lip-seminorms along families of trace parameters,
evaluates the unit-ball Hausdorff bound and its sampled counterpart, checks
the sup-transfer mechanism on finite clouds, and assembles distance
certificates whose tail terms are rigorous exact-rational bounds while the
finite-level middle term stays a labeled heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import cfrac
from .cfrac import (
    BaireSequence,
    ConvergentTable,
    DigitStream,
    IrrationalHandle,
    TailBound,
    boxtimes,
    cf_agreement_depth,
    convergents,
)
from .errors import AgreementTooShallow, EmptyCloud, PrecisionExhausted, ShapeMismatch
from .fdca import AlgebraElement, BlockShape, TraceWeights, op_norm, gns_norm, random_element
from .intervals import RatInterval
from .spectral import lip_seminorm
from .tower import EsProvenance, Tower, es_tower

_SCAN_T_WIDTH = Fraction(1, 10**30)
_SQRT_SCALE = 45


# ---------------------------------------------------------------------------
# scan results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    """Per-approximant values and absolute gaps to the limit value.

    `decreasing_steps[i]` states gaps[i+1] <= gaps[i]; for the certified
    (interval-arithmetic) scans it is asserted only when provable.
    """

    labels: tuple[str, ...]
    values: tuple[float, ...]
    limit_value: float
    gaps: tuple[float, ...]
    decreasing_steps: tuple[bool, ...]

    def nonincreasing_from(self, start: int = 0) -> bool:
        return all(self.decreasing_steps[start:])


def _es_sharp_sq_interval(x: IrrationalHandle, table: ConvergentTable,
                          n: int) -> RatInterval:
    """Certified enclosure of c^2 = max(q_n / t, q_{n-1} / (1 - t))."""
    t = cfrac.t_weight_interval(x, table, n, _SCAN_T_WIDTH)
    one_minus = RatInterval.point(1) - t
    branch1 = RatInterval.point(table.q(n)) / t
    branch2 = RatInterval.point(table.q(n - 1)) / one_minus
    return branch1.max(branch2)


def _sharp_sq_interval(handle, level: int) -> RatInterval:
    if isinstance(handle, BaireSequence):
        return RatInterval.point(boxtimes(handle, level))
    digits = cfrac.cf_expand(handle, level)
    return _es_sharp_sq_interval(handle, convergents(digits), level)


def _prefix_digits(handle, level: int) -> tuple[int, ...]:
    if isinstance(handle, BaireSequence):
        return handle.digits[:level]
    return tuple(cfrac.cf_expand(handle, level))


def constants_convergence_scan(limit, approximants: Sequence, level: int,
                               labels: Sequence[str] | None = None) -> ScanResult:
    """Sharp constants c_N of each approximant's level-N trace against the
    limit's, with gaps computed in interval arithmetic so monotonicity stays
    meaningful far below float resolution."""
    limit_prefix = _prefix_digits(limit, level)
    c2_lim = _sharp_sq_interval(limit, level)
    c_lim = c2_lim.sqrt(_SQRT_SCALE)

    values, gap_ivals = [], []
    for ap in approximants:
        if _prefix_digits(ap, level) != limit_prefix:
            raise ShapeMismatch(f"approximant {ap!r} diverges before level {level}")
        c2 = _sharp_sq_interval(ap, level)
        c = c2.sqrt(_SQRT_SCALE)
        values.append(float(c))
        if (c2.lo, c2.hi) == (c2_lim.lo, c2_lim.hi):
            # identical certified data: the gap is exactly zero, not an
            # interval-width artifact
            gap_ivals.append(RatInterval.point(0))
        else:
            gap_ivals.append(((c2 - c2_lim) / (c + c_lim)).abs())

    decreasing = tuple(
        bool(gap_ivals[i + 1].hi <= gap_ivals[i].lo) for i in range(len(gap_ivals) - 1)
    )
    if labels is None:
        labels = [f"approximant-{i}" for i in range(len(approximants))]
    return ScanResult(
        tuple(labels),
        tuple(values),
        float(c_lim),
        tuple(float(g) for g in gap_ivals),
        decreasing,
    )


def lip_convergence_scan(limit, approximants: Sequence, level: int,
                         a: AlgebraElement, method: str = "auto",
                         labels: Sequence[str] | None = None) -> ScanResult:
    """Lip-seminorm of the fixed element under each approximant's tower
    (its own trace weights and Dirac coefficients) against the limit's."""
    limit_prefix = _prefix_digits(limit, level)

    def build(handle) -> Tower:
        if isinstance(handle, BaireSequence):
            from .tower import uhf_tower

            return uhf_tower(handle, level)
        return es_tower(handle, level)

    t_lim = build(limit)
    if a.shape != t_lim.shape(level):
        raise ShapeMismatch(f"element shape {a.shape.dims} is not level {level}")
    l_lim = lip_seminorm(t_lim, level, a, method=method)

    values = []
    for ap in approximants:
        if _prefix_digits(ap, level) != limit_prefix:
            raise ShapeMismatch(f"approximant {ap!r} diverges before level {level}")
        values.append(lip_seminorm(build(ap), level, a, method=method))

    gaps = tuple(abs(v - l_lim) for v in values)
    decreasing = tuple(gaps[i + 1] <= gaps[i] for i in range(len(gaps) - 1))
    if labels is None:
        labels = [f"approximant-{i}" for i in range(len(approximants))]
    return ScanResult(tuple(labels), tuple(values), l_lim, gaps, decreasing)


def prefix_swap_family(limit: IrrationalHandle, suffix: Sequence[int],
                       js: Sequence[int]) -> list[DigitStream]:
    """theta_j handles: the limit's first j digits, then the suffix repeated."""
    return [DigitStream(cfrac.cf_expand(limit, j), period=tuple(suffix)) for j in js]


def baire_prefix_swap_family(limit: BaireSequence, suffix: Sequence[int],
                             js: Sequence[int], length: int) -> list[BaireSequence]:
    out = []
    for j in js:
        digits = list(limit.digits[:j])
        while len(digits) < length:
            digits.append(suffix[(len(digits) - j) % len(suffix)])
        out.append(BaireSequence(tuple(digits[:length])))
    return out


# ---------------------------------------------------------------------------
# unit-ball Hausdorff estimates
# ---------------------------------------------------------------------------

def _directed_bound(shape: BlockShape, w_from: TraceWeights, w_to: TraceWeights) -> float:
    return max(
        abs(1.0 - math.sqrt(mu_f) / math.sqrt(mu_t)) * math.sqrt(d) / math.sqrt(mu_f)
        for d, mu_f, mu_t in zip(shape.dims, w_from.weights, w_to.weights)
    )


def ball_hausdorff_bound(shape: BlockShape, w_n: TraceWeights,
                         w_inf: TraceWeights) -> float:
    """Closed-form bound on the Hausdorff distance (operator norm) between
    the GNS unit balls of two traces: the worse of the two directed
    per-block rescaling defects |1 - sqrt(mu/mu')| sqrt(d)/sqrt(mu)."""
    if len(w_n) != len(shape) or len(w_inf) != len(shape):
        raise ShapeMismatch("weight count does not match block count")
    return max(_directed_bound(shape, w_inf, w_n), _directed_bound(shape, w_n, w_inf))


def _directed_sampled(shape, w_from, w_to, samples, rng) -> float:
    scale = np.array(
        [math.sqrt(f / t) for f, t in zip(w_from.weights, w_to.weights)]
    )
    worst = 0.0
    for _ in range(samples):
        a = random_element(shape, rng)
        nrm = gns_norm(w_from, a)
        a = (1.0 / nrm) * a
        matched = AlgebraElement(shape, [s * b for s, b in zip(scale, a.blocks)])
        worst = max(worst, op_norm(a - matched))
    return worst


def ball_hausdorff_sampled(shape: BlockShape, w1: TraceWeights, w2: TraceWeights,
                           samples: int = 1000, seed: int = 0) -> float:
    """Sampled two-sided estimate of the same Hausdorff distance, matching
    each unit-sphere sample through the per-block rescaling map.  Heuristic,
    but never exceeds ball_hausdorff_bound (the matching is the bound's own
    witness)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    return max(
        _directed_sampled(shape, w1, w2, samples, rng),
        _directed_sampled(shape, w2, w1, samples, rng),
    )


# ---------------------------------------------------------------------------
# sup transfer on finite clouds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupTransferStep:
    sup_gap: float
    hausdorff: float
    uniform_gap: float
    slope: float
    bound: float
    within_bound: bool


@dataclass(frozen=True)
class SupTransferReport:
    limit_sup: float
    steps: tuple[SupTransferStep, ...]

    @property
    def ok(self) -> bool:
        return all(s.within_bound for s in self.steps)


def sup_transfer_check(limit_cloud: Sequence, f_limit: Callable,
                       clouds: Sequence[Sequence], fns: Sequence[Callable],
                       metric: Callable) -> SupTransferReport:
    """Numerical check that suprema transfer along converging clouds:
    |sup_{C_n} f_n - sup_C f| <= uniform gap of f_n vs f plus the empirical
    slope of f_n times the Hausdorff distance of the clouds (brute force
    over all points and pairs)."""
    if not limit_cloud or any(not c for c in clouds):
        raise EmptyCloud("all clouds must be nonempty")
    limit_cloud = list(limit_cloud)
    limit_sup = max(f_limit(x) for x in limit_cloud)

    steps = []
    for cloud, fn in zip(clouds, fns):
        cloud = list(cloud)
        sup_n = max(fn(x) for x in cloud)
        sup_gap = abs(sup_n - limit_sup)
        d_forward = max(min(metric(x, y) for y in limit_cloud) for x in cloud)
        d_back = max(min(metric(x, y) for y in cloud) for x in limit_cloud)
        haus = max(d_forward, d_back)
        joint = cloud + limit_cloud
        uniform_gap = max(abs(fn(x) - f_limit(x)) for x in joint)
        slope = 0.0
        for i, x in enumerate(joint):
            for y in joint[i + 1 :]:
                d = metric(x, y)
                if d > 0:
                    slope = max(slope, abs(fn(x) - fn(y)) / d)
        bound = uniform_gap + slope * haus
        steps.append(
            SupTransferStep(sup_gap, haus, uniform_gap, slope, bound,
                            sup_gap <= bound + 1e-12)
        )
    return SupTransferReport(limit_sup, tuple(steps))


# ---------------------------------------------------------------------------
# tail bounds and certificates
# ---------------------------------------------------------------------------

def propinquity_tail_bound(t: Tower, n: int, depth: int | None = None) -> TailBound:
    """Rigorous upper bound sum_{k>=n} beta_k on the distance between the
    full filtration and its level-n truncation: exact partial sum to
    `depth` plus the certified geometric remainder."""
    depth = t.depth if depth is None else depth
    if isinstance(t.provenance, EsProvenance):
        table = convergents(list(t.provenance.digits))
        return cfrac.tail_bound(table, n, depth)
    return cfrac.tail_bound(BaireSequence(t.provenance.digits), n, depth)


@dataclass(frozen=True)
class DistortionStats:
    """Spread of two Lip-seminorms over sampled seminorm-one elements.
    Diagnostic only; never part of a rigorous total."""

    max_abs_diff: float
    mean_abs_diff: float
    ratio_min: float
    ratio_max: float
    samples: int
    seed: int
    certified: bool = False


def seminorm_distortion(t1: Tower, t2: Tower, n: int, samples: int = 64,
                        seed: int = 0, method: str = "auto") -> DistortionStats:
    """|L1 - L2| over random self-adjoint elements rescaled to L1 = 1
    (so the reported numbers are |1 - L2(a)/L1(a)| and the ratio range)."""
    if t1.shape(n) != t2.shape(n):
        raise ShapeMismatch(
            f"towers disagree at level {n}: {t1.shape(n).dims} vs {t2.shape(n).dims}"
        )
    rng = np.random.default_rng(seed)
    diffs, ratios = [], []
    attempts = 0
    while len(diffs) < samples and attempts < 4 * samples:
        attempts += 1
        a = random_element(t1.shape(n), rng, hermitian=True)
        l1 = lip_seminorm(t1, n, a, method=method)
        if l1 <= 1e-12:
            continue
        l2 = lip_seminorm(t2, n, a, method=method)
        ratios.append(l2 / l1)
        diffs.append(abs(l1 - l2) / l1)
    if not diffs:
        raise EmptyCloud("no usable samples (every draw had vanishing seminorm)")
    return DistortionStats(
        max(diffs), sum(diffs) / len(diffs), min(ratios), max(ratios), len(diffs), seed
    )


@dataclass(frozen=True)
class Certificate:
    """epsilon/3-style distance certificate for two parameters.

    Both tail terms are rigorous exact-rational bounds; the finite-level
    distortion is a sampled diagnostic and is never added to them.
    """

    label_a: str
    label_b: str
    epsilon: float
    n1: int
    n2: int | float
    tail_a: TailBound
    tail_b: TailBound
    distortion: DistortionStats
    status: str = "rigorous-tails-only"

    @property
    def rigorous_tail_total(self) -> Fraction:
        return self.tail_a.total + self.tail_b.total


def es_certificate(a: IrrationalHandle, b: IrrationalHandle, epsilon: float,
                   depth: int = 48, samples: int = 32, seed: int = 0) -> Certificate:
    """Find the cutoff N1 where a dominating beta-sequence tail (elementwise
    max of both, plus both geometric remainders) drops below epsilon/3,
    check the streams agree at least that far (N2 >= N1), bound both tails
    rigorously, and attach the level-N1 seminorm distortion diagnostic."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    avail = min(
        depth,
        a.available if isinstance(a, DigitStream) else depth,
        b.available if isinstance(b, DigitStream) else depth,
    )
    avail = int(avail)
    if avail < 1:
        raise PrecisionExhausted("no digits available for the tail estimate")
    digits_a = cfrac.cf_expand(a, avail)
    digits_b = cfrac.cf_expand(b, avail)
    table_a, table_b = convergents(digits_a), convergents(digits_b)

    target = Fraction(epsilon) / 3
    n1 = None
    for n in range(1, avail + 1):
        dom = sum(
            (max(cfrac.es_beta(table_a, k), cfrac.es_beta(table_b, k))
             for k in range(n, avail + 1)),
            Fraction(0),
        )
        dom += cfrac.tail_bound(table_a, n, avail).remainder
        dom += cfrac.tail_bound(table_b, n, avail).remainder
        if dom < target:
            n1 = n
            break
    if n1 is None:
        raise PrecisionExhausted(
            f"{avail} digits cannot push the dominating tail below epsilon/3 = {float(target):.3g}"
        )

    n2 = cf_agreement_depth(digits_a, digits_b)
    if n2 < n1:
        raise AgreementTooShallow(
            f"streams agree to depth {n2}, tail cutoff needs {n1}", n1=n1, n2=n2
        )

    tail_a = cfrac.tail_bound(table_a, n1, avail)
    tail_b = cfrac.tail_bound(table_b, n1, avail)
    distortion = seminorm_distortion(
        es_tower(a, n1), es_tower(b, n1), n1, samples=samples, seed=seed
    )
    return Certificate(
        a.spec(), b.spec(), float(epsilon), n1, n2, tail_a, tail_b, distortion
    )
