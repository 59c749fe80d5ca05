"""Error-free transformations and double-double helpers.

Everything here works elementwise on numpy arrays (or plain floats).  The
main consumer is :func:`frac_mul`, which reduces ``c * k mod 1`` without the
cancellation that plain float64 suffers once ``c * k`` grows past ~1e7.
"""

from __future__ import annotations

from decimal import Decimal, localcontext

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

# (sqrt(5) - 1) / 2 to 40 significant digits
GOLDEN_Z = "0.6180339887498948482045868343656381177203"


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Return ``(p, e)`` with ``p = fl(a*b)`` and ``a*b = p + e`` exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_from_decimal(value: Decimal | str) -> tuple[float, float]:
    """Round a high precision decimal to a (hi, lo) double-double pair."""
    with localcontext() as ctx:
        ctx.prec = 60
        d = Decimal(value)
        hi = float(d)
        lo = float(d - Decimal(hi))
    return hi, lo


def golden_z_dd() -> tuple[float, float]:
    return dd_from_decimal(GOLDEN_Z)


def frac_mul(c_hi, c_lo, k):
    """Fractional part of ``(c_hi + c_lo) * k`` for integer-valued float ``k``.

    ``k`` must be exactly representable (|k| < 2**53).  The leading product is
    split exactly, so the result is accurate to a few ulps of 1 regardless of
    the magnitude of ``c * k``.
    """
    k = np.asarray(k, dtype=np.float64)
    p, e = two_prod(c_hi, k)
    f = p - np.floor(p)
    tail = e + c_lo * k
    x = f + tail
    return _wrap_unit(x - np.floor(x))


def _wrap_unit(x):
    # x - floor(x) can land on exactly 1.0 after rounding a value just below 1
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 1.0, 0.0, x)


def frac_sum(*parts):
    """Sum of values already reduced to [0, 1), reduced again mod 1."""
    total = np.zeros_like(np.asarray(parts[0], dtype=np.float64))
    comp = np.zeros_like(total)
    for part in parts:
        total, err = two_sum(total, np.asarray(part, dtype=np.float64))
        comp = comp + err
    x = total - np.floor(total)
    x = x + comp
    return _wrap_unit(x - np.floor(x))
