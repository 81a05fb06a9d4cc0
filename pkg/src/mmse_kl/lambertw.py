"""Real branches of the Lambert W function and the derived maps ``omega_0``, ``omega_-1``.

``omega_i(t) = -W_i(-exp(-(2t + 1)))`` is the solution of ``w - log(w) = 2t + 1``
on ``(0, 1]`` (branch 0) or ``[1, inf)`` (branch -1). Both are evaluated close to
the branch point ``-1/e`` when ``t`` is small, so the distance to the branch
point is carried explicitly instead of being recovered by cancellation.
"""

from __future__ import annotations

import math

from .errors import DomainError

INV_E = math.exp(-1.0)
_E_HI = 2.718281828459045
_E_LO = 1.4456468917292502e-16
_MAX_ITER = 50

# W(x) = -1 + p - p^2/3 + ... with p = +-sqrt(2 (1 + e x))
_BRANCH_POINT_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
    -5776369.0 / 1515591000.0,
)


def _check_branch(branch) -> int:
    if branch not in (0, -1):
        raise DomainError(f"branch must be 0 or -1, got {branch!r}")
    return int(branch)


def _branch_point_series(p: float) -> float:
    acc = 0.0
    for coef in reversed(_BRANCH_POINT_SERIES):
        acc = acc * p + coef
    return acc


def _halley(w: float, x: float) -> float:
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0 or f == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if abs(w_new - w) <= 1e-15 * max(1.0, abs(w_new)):
            return w_new
        w = w_new
    return w


def _log_newton(w: float, log_abs_x: float) -> float:
    """Newton on ``w + log|w| = log|x|``; for large x on branch 0 or tiny |x| on branch -1."""
    for _ in range(_MAX_ITER):
        f = w + math.log(abs(w)) - log_abs_x
        w_new = w - f * w / (w + 1.0)
        if abs(w_new - w) <= 4e-16 * abs(w_new):
            return w_new
        w = w_new
    return w


def lambert_w(branch: int, x: float) -> float:
    """Real Lambert W, the inverse of ``w -> w exp(w)``.

    Branch 0 is defined for ``x >= -1/e`` and returns ``w >= -1``; branch -1 is
    defined for ``-1/e <= x < 0`` and returns ``w <= -1``.
    """
    branch = _check_branch(branch)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"lambert_w argument must be finite, got {x}")
    q = (_E_HI * x + 1.0) + _E_LO * x  # 1 + e*x without losing the low bits of e
    if q < -4e-16:
        raise DomainError(f"lambert_w undefined for x={x!r} < -1/e")
    if branch == -1 and x >= 0.0:
        raise DomainError(f"lambert_w branch -1 requires x < 0, got {x!r}")
    q = max(q, 0.0)
    if q == 0.0:
        return -1.0
    if branch == 0 and x == 0.0:
        return 0.0
    return _lambert_w_offset(branch, x, q)


def _lambert_w_offset(branch: int, x: float, q: float) -> float:
    p = math.sqrt(2.0 * q)
    if branch == -1:
        p = -p
    if q < 1e-6:
        return _branch_point_series(p)
    if q < 0.3:
        w = _branch_point_series(p)
        return _halley(w, x)
    if branch == 0:
        if abs(x) < 1e-8:
            return x - x * x + 1.5 * x**3
        if x > math.e:
            l1 = math.log(x)
            l2 = math.log(l1)
            return _log_newton(l1 - l2 + l2 / l1, l1)
        return _halley(math.log1p(x), x)
    l1 = math.log(-x)
    l2 = math.log(-l1)
    return _log_newton(l1 - l2 + l2 / l1, l1)


def _delta_minus_log1p(d: float) -> float:
    """``d - log(1 + d)`` without cancellation for small ``d``."""
    if abs(d) < 0.1:
        acc = 0.0
        term = -d
        for n in range(2, 40):
            term *= -d
            acc += term / n
            if abs(term) < 1e-18 * abs(acc):
                break
        return acc
    return d - math.log1p(d)


def omega(branch: int, t: float) -> float:
    """``omega_i(t) = -W_i(-exp(-(2t + 1)))`` for ``t >= 0``.

    ``omega_0`` decreases from 1 to 0 and ``omega_-1`` increases from 1 to
    infinity; both equal 1 at ``t = 0``.
    """
    branch = _check_branch(branch)
    t = float(t)
    if not t >= 0.0 or math.isinf(t):
        raise DomainError(f"omega requires finite t >= 0, got {t!r}")
    if t == 0.0:
        return 1.0
    s = 2.0 * t
    q = -math.expm1(-s)
    if q < 0.3:
        p = math.sqrt(2.0 * q)
        if branch == -1:
            p = -p
        w = -_branch_point_series(p)
        if q < 1e-6:
            return w
        # polish on w - 1 - log(w) = s, written in d = w - 1
        d = w - 1.0
        for _ in range(_MAX_ITER):
            f = _delta_minus_log1p(d) - s
            step = f * (1.0 + d) / d
            d -= step
            if abs(step) <= 1e-16 * max(abs(d), 1e-300):
                break
        return 1.0 + d

    if branch == 0:
        log_x = -(1.0 + s)
        if log_x < -700.0:
            # tiny root of w = exp(w - 1 - s)
            w = math.exp(log_x)
            return math.exp(w + log_x)
        return -lambert_w(0, -math.exp(log_x))

    if s > 700.0:
        # Newton in log-space on exp(L) - L = 1 + s
        lw = math.log1p(s)
        for _ in range(_MAX_ITER):
            ew = math.exp(lw)
            step = (ew - lw - 1.0 - s) / (ew - 1.0)
            lw -= step
            if abs(step) <= 1e-16 * abs(lw):
                break
        return math.exp(lw)
    return -lambert_w(-1, -math.exp(-(1.0 + s)))
