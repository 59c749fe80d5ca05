"""Discrepancy of finite sequences on the circle R/Z.

Exact star and extreme discrepancy from sorted points, exponential sums,
the Erdos-Turan upper bound, the van der Corput shift estimate, the
Diophantine quality of the golden ratio and the closed-form bound for
quadratic sequences at admissible scales.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .compensated import frac_mul, golden_z_dd
from .errors import BelowRangeError, InsufficientTermsError

if TYPE_CHECKING:
    from .constructions import AdmissibleScale


@dataclass(frozen=True)
class TorusSequence:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1:
            raise ValueError("points must be one-dimensional")
        if np.any(pts < 0) or np.any(pts >= 1):
            raise ValueError("points must lie in [0, 1)")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @classmethod
    def wrap(cls, values) -> "TorusSequence":
        v = np.asarray(values, dtype=np.float64)
        v = v - np.floor(v)
        return cls(np.where(v >= 1.0, 0.0, v))


def _points(seq) -> np.ndarray:
    return seq.points if isinstance(seq, TorusSequence) else TorusSequence(seq).points


# -- exact discrepancies -----------------------------------------------------


def star_discrepancy_exact(seq, exact: bool = False):
    """Star discrepancy ``sup_b |#{x_k < b}/n - b|`` from the sorted points.

    With ``exact=True`` the computation is done in rationals and a
    :class:`fractions.Fraction` is returned.
    """
    x = np.sort(_points(seq))
    n = len(x)
    if n == 0:
        raise ValueError("need at least one point")
    if exact:
        xs = [Fraction(float(v)) for v in x]
        return max(max(Fraction(i + 1, n) - v, v - Fraction(i, n)) for i, v in enumerate(xs))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def extreme_discrepancy_exact(seq, exact: bool = False):
    """Extreme discrepancy over all intervals ``[a, b)`` in ``[0, 1)``.

    Equals ``D+ + D-`` with ``D+ = max(i/n - x_(i))`` and
    ``D- = max(x_(i) - (i-1)/n)``; the value is unchanged by rotating all
    points on the circle.
    """
    x = np.sort(_points(seq))
    n = len(x)
    if n == 0:
        raise ValueError("need at least one point")
    if exact:
        xs = [Fraction(float(v)) for v in x]
        d_plus = max(Fraction(i + 1, n) - v for i, v in enumerate(xs))
        d_minus = max(v - Fraction(i, n) for i, v in enumerate(xs))
        return d_plus + d_minus
    i = np.arange(1, n + 1)
    return float(np.max(i / n - x) + np.max(x - (i - 1) / n))


def extreme_discrepancy_rows(matrix) -> np.ndarray:
    """Row-wise extreme discrepancy of an ``(rows, n)`` array of points."""
    x = np.sort(np.asarray(matrix, dtype=np.float64), axis=1)
    n = x.shape[1]
    i = np.arange(1, n + 1)
    return np.max(i / n - x, axis=1) + np.max(x - (i - 1) / n, axis=1)


# -- exponential sums --------------------------------------------------------


def _phases(x: np.ndarray, m: int) -> np.ndarray:
    # frac(m * x) computed exactly before taking cos/sin
    return frac_mul(x, 0.0, float(m))


def _mean_exp(x: np.ndarray, m: int, weights=None) -> complex:
    t = 2 * math.pi * _phases(x, m)
    c, s = np.cos(t), np.sin(t)
    if weights is not None:
        c, s = c * weights, s * weights
    return complex(math.fsum(c), math.fsum(s))


def exp_sum(seq, m: int) -> float:
    """``|n^-1 sum_k exp(2 pi i m x_k)|`` with exactly rounded summation."""
    if m < 1:
        raise ValueError("m must be >= 1")
    x = _points(seq)
    return abs(_mean_exp(x, m)) / len(x)


def exp_sums(seq, M: int) -> np.ndarray:
    x = _points(seq)
    return np.array([exp_sum(x, m) for m in range(1, M + 1)])


def erdos_turan_bound(seq, M: int, sums: Sequence[float] | None = None) -> float:
    """``6/(M+1) + (4/pi) sum_{m<=M} |exp sum_m| / m``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if sums is None:
        sums = exp_sums(seq, M)
    return 6 / (M + 1) + 4 / math.pi * math.fsum(s / m for m, s in enumerate(sums, start=1))


def vdc_shift_gap(seq_extended, m: int, H: int, n: int | None = None) -> tuple[float, float]:
    """Gap between an exponential sum and its average over shifts ``1..H``.

    Returns ``(gap, 2H/n)``; the gap never exceeds the bound.
    """
    x = _points(seq_extended)
    if n is None:
        n = len(x) - H
    if H < 1 or n < 1 or len(x) < n + H:
        raise InsufficientTermsError(f"need {n + H} terms, have {len(x)}")
    x = x[: n + H]
    j = np.arange(n + H)
    # number of shifts h in [1, H] with 0 <= j - h < n
    mult = np.minimum(j, H) - np.maximum(1, j - n + 1) + 1
    mult = np.maximum(mult, 0)
    weights = (j < n).astype(np.float64) - mult / H
    gap = abs(_mean_exp(x, m, weights)) / n
    return gap, 2 * H / n


# -- golden ratio ------------------------------------------------------------


@dataclass(frozen=True)
class DiophantineQuality:
    z: float
    q_max: int
    min_product: float
    witness_q: int
    tail_start: int
    tail_min_product: float
    tail_witness_q: int


def golden_quality(q_max: int) -> DiophantineQuality:
    """Scan ``q * dist(q z, Z)`` for ``q = 1..q_max`` with z the golden ratio.

    Besides the overall minimum (attained at ``q = 1``), the minimum over the
    upper half ``q > q_max // 2`` is reported; it sits at a Fibonacci
    denominator and approaches ``1/sqrt(5)``.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    hi, lo = golden_z_dd()
    q = np.arange(1, q_max + 1, dtype=np.float64)
    f = frac_mul(hi, lo, q)
    prod = q * np.minimum(f, 1.0 - f)
    best = int(np.argmin(prod))
    start = q_max // 2 + 1 if q_max > 1 else 1
    tail = prod[start - 1 :]
    tbest = int(np.argmin(tail))
    return DiophantineQuality(
        hi, q_max, float(prod[best]), best + 1, start, float(tail[tbest]), start + tbest
    )


def viete_identity(p: int, q: int) -> int:
    """``|p^2 + p q - q^2|``; never zero for ``q != 0``."""
    if q == 0:
        raise ValueError("q must be non-zero")
    return abs(p * p + p * q - q * q)


def viete_minimum(bound: int) -> tuple[int, tuple[int, int]]:
    """Minimum of :func:`viete_identity` over ``|p|, |q| <= bound``, ``q != 0``."""
    p = np.arange(-bound, bound + 1, dtype=np.int64)
    best, arg = None, None
    for q in range(-bound, bound + 1):
        if q == 0:
            continue
        vals = np.abs(p * p + p * q - q * q)
        i = int(np.argmin(vals))
        if best is None or vals[i] < best:
            best, arg = int(vals[i]), (int(p[i]), q)
    return best, arg


# -- closed-form bounds ------------------------------------------------------


def _iroot(value: int, k: int) -> int:
    """Largest integer ``x >= 0`` with ``x**k <= value``."""
    if value < 0:
        raise ValueError("value must be non-negative")
    x = int(round(value ** (1.0 / k))) if value < 2**1000 else int(value ** (1.0 / k))
    while x**k > value:
        x -= 1
    while (x + 1) ** k <= value:
        x += 1
    return x


def shift_count(n: int) -> int:
    """``H = floor(n^(2/5) / 25)``, exact for integer n."""
    return _iroot(n * n, 5) // 25


def frequency_cutoff(n: int) -> int:
    """``M = floor(4 n^(1/5))``, exact for integer n."""
    return _iroot(4**5 * n, 5)


def theorem_bound(n) -> float:
    """``10 log n / n^(1/5)`` with the natural logarithm."""
    return 10 * math.log(n) / n**0.2


@dataclass(frozen=True)
class FinalBound:
    H: int
    M: int
    value: float


def final_bound(n: int) -> FinalBound:
    """Discrepancy bound for quadratic sequences at admissible scales.

    ``6/(M+1) + (4/pi)(1 + log M)(2H/n + H^-1/2) + (8 sqrt3/pi) (HM/n)^1/2``
    with ``H = floor(n^(2/5)/25)`` and ``M = floor(4 n^(1/5))``.
    """
    n = int(n)
    if n < 2:
        raise BelowRangeError("n must be >= 2")
    H, M = shift_count(n), frequency_cutoff(n)
    if H < 1:
        raise BelowRangeError(f"H = floor(n^(2/5)/25) is 0 for n = {n}; need n >= 3125")
    value = (
        6 / (M + 1)
        + 4 / math.pi * (1 + math.log(M)) * (2 * H / n + H**-0.5)
        + 8 * math.sqrt(3) / math.pi * math.sqrt(H * M / n)
    )
    return FinalBound(H, M, value)


@dataclass(frozen=True)
class ExpSumBound:
    exact: float
    geometric: float
    analytic: float


def analytic_expsum_bound(n: int, m: int, H: int) -> float:
    return 2 * H / n + math.sqrt(1 / H + 3 * H * m / n)


def quadratic_expsum_bound(n: int, m: int, H: int, scale: "AdmissibleScale", A: float, B: float = 0.0) -> ExpSumBound:
    """Exact exponential sum of a quadratic sequence and two upper bounds.

    ``geometric`` keeps the finite geometric sums ``1/|1 - e(2 l m r^2)|``
    explicitly; ``analytic`` replaces them via ``dist(q z, Z) >= 1/(3q)``.
    For admissible scales ``exact <= geometric <= analytic``.
    """
    from .constructions import QuadraticSeq, quadratic_sequence

    if H < 1 or m < 1:
        raise ValueError("H and m must be >= 1")
    seq = quadratic_sequence(QuadraticSeq(scale.r_squared_dd, A, B, n))
    exact = exp_sum(seq, m)
    hi, lo = scale.r_squared_dd
    l = np.arange(1, H, dtype=np.float64)
    theta = frac_mul(hi, lo, 2.0 * m * l)
    chords = 2.0 * np.abs(np.sin(math.pi * theta))
    geometric = 2 * H / n + math.sqrt(1 / H + 4 / (H * n) * math.fsum(1.0 / chords))
    return ExpSumBound(exact, geometric, analytic_expsum_bound(n, m, H))


@dataclass(frozen=True)
class DiscrepancyReport:
    n: int
    exact_star: float
    exact_extreme: float
    et_bound: float
    M: int
    H: int
    vdc_bound: float
    final_bound: float
    theorem_bound: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["m"] = out.pop("M")
        out["h"] = out.pop("H")
        return out


def full_report(n: int, scale: "AdmissibleScale", A: float = 0.0, B: float = 0.0) -> tuple[DiscrepancyReport, list[tuple[int, float, float]]]:
    """Discrepancy of the first n terms and the whole chain of upper bounds.

    Also returns the rows ``(m, exact exp sum, analytic bound)`` for
    ``m = 1..M``.
    """
    from .constructions import QuadraticSeq, quadratic_sequence

    fb = final_bound(n)
    H, M = fb.H, fb.M
    seq = quadratic_sequence(QuadraticSeq(scale.r_squared_dd, A, B, n))
    sums = exp_sums(seq, M)
    analytic = [analytic_expsum_bound(n, m, H) for m in range(1, M + 1)]
    vdc = 6 / (M + 1) + 4 / math.pi * math.fsum(a / m for m, a in enumerate(analytic, start=1))
    report = DiscrepancyReport(
        n=n,
        exact_star=star_discrepancy_exact(seq),
        exact_extreme=extreme_discrepancy_exact(seq),
        et_bound=erdos_turan_bound(seq, M, sums),
        M=M,
        H=H,
        vdc_bound=vdc,
        final_bound=fb.value,
        theorem_bound=theorem_bound(n),
    )
    rows = [(m, float(s), a) for m, (s, a) in enumerate(zip(sums, analytic), start=1)]
    return report, rows
