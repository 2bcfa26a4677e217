"""Exact continued-fraction machinery.

Digits, big-integer convergents, Effros-Shen trace parameters t(theta, n)
and beta sequences, UHF multiplicity products, certified tail bounds, and
the Baire-space ultrametric.  Everything here is exact rational or
certified-interval arithmetic; floats appear only at the reporting
boundary.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import NamedTuple, Sequence

from .errors import InvalidDigit, PrecisionExhausted, RationalInput
from .intervals import RatInterval, sqrt_enclosure

_DEFAULT_T_WIDTH = 1e-13
_MAX_SQRT_SCALE = 1 << 16
_MAX_STREAM_DEPTH = 1 << 14


# ---------------------------------------------------------------------------
# irrational handles
# ---------------------------------------------------------------------------

class IrrationalHandle:
    """A number in (0,1) presented so that CF digits can be certified."""

    def cf_digits(self, depth: int) -> list[int]:
        raise NotImplementedError

    def enclosure(self, width: Fraction) -> RatInterval:
        """Certified interval containing the value, of at most the given width."""
        raise NotImplementedError

    def spec(self) -> str:
        """Round-trippable text form (accepted by parse_irrational)."""
        raise NotImplementedError


def _surd_sign(a: int, b: int, d: int) -> int:
    """Sign of a + b*sqrt(d) for nonsquare d."""
    if b == 0:
        return (a > 0) - (a < 0)
    if b > 0:
        if a >= 0:
            return 1
        return 1 if b * b * d > a * a else -1
    if a <= 0:
        return -1
    return 1 if a * a > b * b * d else -1


class QuadraticSurd(IrrationalHandle):
    """(a + b*sqrt(d))/c with integer a, b, c, d; exact to any depth."""

    def __init__(self, a: int, b: int, d: int, c: int):
        if c == 0:
            raise InvalidDigit("zero denominator in surd")
        if d < 0:
            raise InvalidDigit("negative radicand")
        if b == 0 or isqrt(d) ** 2 == d:
            raise RationalInput(f"({a}+{b}*sqrt({d}))/{c} is rational")
        self.a, self.b, self.d, self.c = a, b, d, c
        sc = (c > 0) - (c < 0)
        if _surd_sign(a, b, d) != sc or _surd_sign(a - c, b, d) == sc:
            raise InvalidDigit(f"({a}+{b}*sqrt({d}))/{c} is not in (0,1)")

    def spec(self) -> str:
        return f"({self.a}+{self.b}*sqrt({self.d}))/{self.c}"

    def __repr__(self):
        return f"QuadraticSurd({self.spec()!r})"

    def _pqd_state(self) -> tuple[int, int, int]:
        # normal form (P + sqrt(D))/Q with Q | D - P^2
        a, b, c = self.a, self.b, self.c
        if b > 0:
            P, D, Q = a, b * b * self.d, c
        else:
            P, D, Q = -a, b * b * self.d, -c
        if (D - P * P) % Q != 0:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        return P, D, Q

    def cf_digits(self, depth: int) -> list[int]:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        P, D, Q = self._pqd_state()
        s = isqrt(D)
        digits: list[int] = []
        for k in range(depth + 1):
            if Q > 0:
                a_k = (P + s) // Q
            else:
                a_k = -((P + s) // (-Q)) - 1
            if k == 0:
                if a_k != 0:
                    raise InvalidDigit("integer part is not zero")
            else:
                digits.append(a_k)
            P = a_k * Q - P
            Q = (D - P * P) // Q
        return digits

    def enclosure(self, width) -> RatInterval:
        width = Fraction(width)
        scale = 20
        while scale <= _MAX_SQRT_SCALE:
            ival = (RatInterval.point(self.a) + self.b * sqrt_enclosure(self.d, scale)) / self.c
            if ival.width <= width:
                return ival
            scale *= 2
        raise PrecisionExhausted("surd enclosure refinement budget exceeded")


class DecimalLiteral(IrrationalHandle):
    """Decimal text with a stated count of exact fractional digits.

    The literal's exact rational value anchors the expansion; digits are
    emitted only when stable under a one-ulp perturbation at the stated
    precision.
    """

    def __init__(self, text: str, precision: int | None = None):
        m = re.fullmatch(r"(\d*)\.(\d+)", text.strip())
        if not m:
            raise InvalidDigit(f"not a decimal literal: {text!r}")
        self.text = text.strip()
        self.value = Fraction(self.text)
        self.precision = len(m.group(2)) if precision is None else precision
        if not 0 < self.value < 1:
            raise InvalidDigit(f"{text!r} is not in (0,1)")

    def spec(self) -> str:
        return self.text

    def __repr__(self):
        return f"DecimalLiteral({self.text!r}, precision={self.precision})"

    @property
    def ulp(self) -> Fraction:
        return Fraction(1, 10**self.precision)

    def cf_digits(self, depth: int) -> list[int]:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if _rational_cf_terminates(self.value, depth):
            raise RationalInput(f"expansion of {self.text} terminates")
        stable = _stable_digits(self.value - self.ulp, self.value + self.ulp, depth)
        if len(stable) < depth:
            raise PrecisionExhausted(
                f"{self.text} certifies only {len(stable)} digits at precision {self.precision}"
            )
        return stable[:depth]

    def enclosure(self, width) -> RatInterval:
        ival = RatInterval(self.value - self.ulp, self.value + self.ulp)
        if ival.width > Fraction(width):
            raise PrecisionExhausted(
                f"stated precision {self.precision} cannot reach width {width}"
            )
        return ival


def _rational_cf_terminates(v: Fraction, depth: int) -> bool:
    x = v
    for _ in range(depth):
        inv = 1 / x
        x = inv - (inv.numerator // inv.denominator)
        if x == 0:
            return True
    return False


def _stable_digits(lo: Fraction, hi: Fraction, depth: int) -> list[int]:
    """Digits shared by every number in [lo, hi] subset of (0,1)."""
    digits: list[int] = []
    while len(digits) < depth:
        if lo <= 0:
            break
        inv_lo, inv_hi = 1 / hi, 1 / lo
        a_lo = inv_lo.numerator // inv_lo.denominator
        a_hi = inv_hi.numerator // inv_hi.denominator
        if a_lo != a_hi:
            break
        digits.append(a_lo)
        lo, hi = inv_lo - a_lo, inv_hi - a_lo
    return digits


class DigitStream(IrrationalHandle):
    """Explicit partial quotients r_1, r_2, ...; optionally eventually periodic."""

    def __init__(self, digits: Sequence[int], period: Sequence[int] | None = None):
        self.digits = tuple(int(r) for r in digits)
        self.period = tuple(int(r) for r in period) if period else None
        for r in self.digits + (self.period or ()):
            if r < 1:
                raise InvalidDigit(f"partial quotient {r} < 1")
        if not self.digits and not self.period:
            raise InvalidDigit("empty digit stream")

    def spec(self) -> str:
        head = "[" + ",".join(str(r) for r in self.digits) + "]"
        if self.period:
            head += " periodic:[" + ",".join(str(r) for r in self.period) + "]"
        return head

    def __repr__(self):
        return f"DigitStream({self.spec()!r})"

    @property
    def available(self) -> int | float:
        return math.inf if self.period else len(self.digits)

    def cf_digits(self, depth: int) -> list[int]:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if depth > self.available:
            raise PrecisionExhausted(
                f"stream holds {len(self.digits)} digits, {depth} requested"
            )
        out = list(self.digits[:depth])
        i = 0
        while len(out) < depth:
            out.append(self.period[i % len(self.period)])
            i += 1
        return out

    def enclosure(self, width) -> RatInterval:
        width = Fraction(width)
        depth = 2
        while True:
            depth = min(depth, self.available)
            table = convergents(self.cf_digits(int(depth)))
            n = table.max_n
            # every continuation lies strictly between p_n/q_n and
            # (p_n + p_{n-1})/(q_n + q_{n-1})
            end_a = Fraction(table.p(n), table.q(n))
            end_b = Fraction(table.p(n) + table.p(n - 1), table.q(n) + table.q(n - 1))
            ival = RatInterval(min(end_a, end_b), max(end_a, end_b))
            if ival.width <= width:
                return ival
            if depth >= self.available or depth >= _MAX_STREAM_DEPTH:
                raise PrecisionExhausted(
                    f"{len(self.digits)} digits certify width {float(ival.width):.3g}, "
                    f"requested {float(width):.3g}"
                )
            depth *= 2


_SURD_RE = re.compile(
    r"\(\s*(-?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*(-?\d+)"
)
_LIST_RE = re.compile(r"\[\s*((?:-?\d+\s*,\s*)*-?\d+)\s*\](?:\s*periodic:\s*\[\s*((?:-?\d+\s*,\s*)*-?\d+)\s*\])?")


def parse_digit_list(text: str) -> tuple[tuple[int, ...], tuple[int, ...] | None]:
    m = _LIST_RE.fullmatch(text.strip())
    if not m:
        raise InvalidDigit(f"not a digit list: {text!r}")
    head = tuple(int(s) for s in m.group(1).split(","))
    period = tuple(int(s) for s in m.group(2).split(",")) if m.group(2) else None
    return head, period


def parse_irrational(text: str) -> IrrationalHandle:
    """Parse a surd "(a+b*sqrt(d))/c", a digit list "[...]" (with optional
    "periodic:[...]" suffix), or a decimal literal."""
    text = text.strip().replace("−", "-")
    m = _SURD_RE.fullmatch(text)
    if m:
        a, sign, b, d, c = m.groups()
        b = int(b) if sign == "+" else -int(b)
        return QuadraticSurd(int(a), b, int(d), int(c))
    if text.startswith("["):
        head, period = parse_digit_list(text)
        return DigitStream(head, period)
    return DecimalLiteral(text)


# ---------------------------------------------------------------------------
# convergents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergentTable:
    """Rows (p_n, q_n) for n = 0..N, exact big integers."""

    rows: tuple[tuple[int, int], ...]

    @property
    def max_n(self) -> int:
        return len(self.rows) - 1

    def p(self, n: int) -> int:
        return self.rows[n][0]

    def q(self, n: int) -> int:
        return self.rows[n][1]


def convergents(digits: Sequence[int]) -> ConvergentTable:
    """Exact convergent table from partial quotients r_1..r_N (theta in (0,1))."""
    for r in digits:
        if r < 1:
            raise InvalidDigit(f"partial quotient {r} < 1")
    rows = [(0, 1)]
    p_prev, q_prev = 0, 1
    p_cur, q_cur = 1, digits[0] if digits else 1
    if digits:
        rows.append((p_cur, q_cur))
    for r in digits[1:]:
        p_prev, p_cur = p_cur, r * p_cur + p_prev
        q_prev, q_cur = q_cur, r * q_cur + q_prev
        rows.append((p_cur, q_cur))
    return ConvergentTable(tuple(rows))


def cf_expand(x: IrrationalHandle, depth: int) -> list[int]:
    """First `depth` certified partial quotients of x."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return x.cf_digits(depth)


# ---------------------------------------------------------------------------
# Effros-Shen / UHF weight data
# ---------------------------------------------------------------------------

def t_weight_interval(x: IrrationalHandle, table: ConvergentTable, n: int,
                      width) -> RatInterval:
    """Certified enclosure of t(theta, n) = (-1)^(n-1) q_n (theta q_{n-1} - p_{n-1})."""
    if n < 1 or n > table.max_n:
        raise ValueError(f"level {n} outside table range 1..{table.max_n}")
    width = Fraction(width)
    qn, qn1, pn1 = table.q(n), table.q(n - 1), table.p(n - 1)
    theta_width = width / (qn * max(qn1, 1)) / 2
    for _ in range(8):
        theta = x.enclosure(theta_width)
        t = (theta * qn1 - pn1) * qn
        if n % 2 == 0:
            t = -t
        if t.width <= width and t.strictly_inside(0, 1):
            return t
        theta_width /= 10**6
    raise PrecisionExhausted(f"cannot certify t(theta,{n}) in (0,1) at width {width}")


def t_weight(x: IrrationalHandle, table: ConvergentTable, n: int,
             width: float = _DEFAULT_T_WIDTH) -> float:
    """t(theta, n) as a float, certified to lie in (0,1)."""
    return float(t_weight_interval(x, table, n, width))


def es_beta(table: ConvergentTable, n: int) -> Fraction:
    """1 / (q_n^2 + q_{n-1}^2), the reciprocal level dimension, exact."""
    if n < 1 or n > table.max_n:
        raise ValueError(f"level {n} outside table range 1..{table.max_n}")
    return Fraction(1, table.q(n) ** 2 + table.q(n - 1) ** 2)


@dataclass(frozen=True)
class BaireSequence:
    """Finite truncation of a positive-integer multiplicity sequence (index from 0)."""

    digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(r) for r in self.digits))
        for r in self.digits:
            if r < 1:
                raise InvalidDigit(f"multiplicity {r} < 1")

    def __len__(self):
        return len(self.digits)


def boxtimes(b: BaireSequence, n: int) -> int:
    """Product of (digit + 1) over the first n entries; matrix size at level n."""
    if n < 0 or n > len(b):
        raise ValueError(f"level {n} outside 0..{len(b)}")
    out = 1
    for j in range(n):
        out *= b.digits[j] + 1
    return out


def uhf_gamma(b: BaireSequence, n: int) -> Fraction:
    """1 / boxtimes(n)^2, the reciprocal level dimension, exact."""
    return Fraction(1, boxtimes(b, n) ** 2)


# ---------------------------------------------------------------------------
# tail bounds
# ---------------------------------------------------------------------------

class TailBound(NamedTuple):
    partial: Fraction
    remainder: Fraction

    @property
    def total(self) -> Fraction:
        return self.partial + self.remainder


def tail_bound(source: ConvergentTable | BaireSequence, n: int, depth: int) -> TailBound:
    """Exact partial sum of the beta sequence over k = n..depth plus a
    rigorous upper bound on the remainder past `depth`.

    Effros-Shen: q_{k+2} >= 2 q_k gives a geometric-pair bound
    sum_{k>depth} beta_k <= 4 / (3 q_depth^2).  UHF: each step divides
    gamma by at least 4, so the remainder is at most gamma(depth)/3.
    """
    if n < 1:
        raise ValueError("tail starts at n >= 1")
    if depth < n:
        raise ValueError("depth must be >= n")
    if isinstance(source, ConvergentTable):
        if depth > source.max_n:
            raise ValueError(f"table holds {source.max_n} levels, depth {depth} requested")
        partial = sum((es_beta(source, k) for k in range(n, depth + 1)), Fraction(0))
        remainder = Fraction(4, 3 * source.q(depth) ** 2)
        return TailBound(partial, remainder)
    if isinstance(source, BaireSequence):
        partial = sum((uhf_gamma(source, k) for k in range(n, depth + 1)), Fraction(0))
        remainder = uhf_gamma(source, depth) / 3
        return TailBound(partial, remainder)
    raise TypeError(f"unsupported beta source {type(source).__name__}")


# ---------------------------------------------------------------------------
# stream comparison
# ---------------------------------------------------------------------------

def cf_agreement_depth(a: Sequence[int], b: Sequence[int]) -> int | float:
    """Largest N with a_k = b_k for all k <= N; math.inf when the streams
    agree through both truncations of equal length."""
    n = 0
    for x, y in zip(a, b):
        if x != y:
            return n
        n += 1
    if len(a) == len(b):
        return math.inf
    return n


class BaireDistance(NamedTuple):
    value: float
    truncated_equality: bool


def baire_distance(a: BaireSequence | Sequence[int], b: BaireSequence | Sequence[int]) -> BaireDistance:
    """2^(-first index of disagreement), indices from 0; 0 when the common
    truncation agrees everywhere (flagged, since deeper digits are unknown)."""
    xs = a.digits if isinstance(a, BaireSequence) else tuple(a)
    ys = b.digits if isinstance(b, BaireSequence) else tuple(b)
    for i, (x, y) in enumerate(zip(xs, ys)):
        if x != y:
            return BaireDistance(2.0 ** (-i), False)
    return BaireDistance(0.0, True)
