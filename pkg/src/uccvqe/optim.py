"""Limited-memory BFGS with box bounds handled by projection.

Variables sitting on a bound whose gradient pushes outward are frozen for
the iteration; the two-loop direction is computed and restricted to the
free variables, and a strong-Wolfe line search runs along it, capped at
the first bound crossed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

FunGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class TraceRow:
    iteration: int
    energy: float
    grad_norm: float
    step_size: float


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    n_eval: int
    converged: bool
    reason: str
    trace: list[TraceRow] = field(default_factory=list)


class LineSearchError(RuntimeError):
    pass


class _Counter:
    def __init__(self, fg: FunGrad):
        self.fg = fg
        self.n = 0

    def __call__(self, x):
        self.n += 1
        f, g = self.fg(x)
        f = float(f)
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite objective {f!r} at evaluation {self.n}")
        return f, np.asarray(g, dtype=float)


def _interpolate(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi):
    """Cubic minimiser on [a_lo, a_hi], safeguarded toward the middle."""
    lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
    d1 = d_lo + d_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi)
    rad = d1 * d1 - d_lo * d_hi
    a = None
    if rad >= 0:
        d2 = math.copysign(math.sqrt(rad), a_hi - a_lo)
        den = d_hi - d_lo + 2.0 * d2
        if den != 0:
            a = a_hi - (a_hi - a_lo) * (d_hi + d2 - d1) / den
    width = hi - lo
    if a is None or not (lo + 0.1 * width <= a <= hi - 0.1 * width):
        a = 0.5 * (lo + hi)
    return a


def strong_wolfe(
    phi, f0, d0, a_init=1.0, a_max=math.inf, c1=1e-4, c2=0.9, max_eval=40
):
    """Return (alpha, f, g, dphi) satisfying the strong Wolfe conditions.

    ``phi(alpha)`` must return ``(f, g, dphi)``. When the step is capped by
    ``a_max`` and Armijo holds there, the capped step is accepted.
    """
    if d0 >= 0:
        raise LineSearchError("not a descent direction")
    a_prev, f_prev, d_prev = 0.0, f0, d0
    a = min(a_init, a_max)
    n = 0
    while n < max_eval:
        f, g, d = phi(a)
        n += 1
        if f > f0 + c1 * a * d0 or (n > 1 and f >= f_prev):
            return _zoom(phi, f0, d0, a_prev, f_prev, d_prev, a, f, d, c1, c2, max_eval - n)
        if abs(d) <= -c2 * d0:
            return a, f, g, d
        if d >= 0:
            return _zoom(phi, f0, d0, a, f, d, a_prev, f_prev, d_prev, c1, c2, max_eval - n)
        if a >= a_max:
            return a, f, g, d
        a_prev, f_prev, d_prev = a, f, d
        a = min(2.0 * a, a_max)
    raise LineSearchError("bracketing phase exhausted its evaluations")


def _zoom(phi, f0, d0, a_lo, f_lo, d_lo, a_hi, f_hi, d_hi, c1, c2, budget):
    best = None
    for _ in range(max(budget, 1)):
        if abs(a_hi - a_lo) < 1e-14 * max(1.0, abs(a_lo)):
            break
        a = _interpolate(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
        f, g, d = phi(a)
        if f <= f0 + c1 * a * d0 and (best is None or f < best[1]):
            best = (a, f, g, d)
        if f > f0 + c1 * a * d0 or f >= f_lo:
            a_hi, f_hi, d_hi = a, f, d
        else:
            if abs(d) <= -c2 * d0:
                return a, f, g, d
            if d * (a_hi - a_lo) >= 0:
                a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
            a_lo, f_lo, d_lo = a, f, d
    if best is not None:
        return best
    raise LineSearchError("zoom phase found no acceptable step")


def _project(x, lower, upper):
    return np.minimum(np.maximum(x, lower), upper)


def projected_grad_norm(x, g, lower, upper) -> float:
    if len(x) == 0:
        return 0.0
    return float(np.max(np.abs(_project(x - g, lower, upper) - x)))


def minimize_lbfgs(
    fg: FunGrad,
    x0,
    bounds: Sequence[tuple[float, float]] | None = None,
    memory: int = 10,
    tol_f: float = 1e-8,
    tol_g: float = 1e-6,
    max_iter: int = 10000,
    c1: float = 1e-4,
    c2: float = 0.9,
) -> OptimizeResult:
    """Minimise ``fg`` (returning value and gradient) from ``x0``.

    Stops when the change in value between accepted iterates drops below
    ``tol_f``, when the projected-gradient infinity norm drops below
    ``tol_g``, or after ``max_iter`` iterations (not converged).
    """
    x = np.array(x0, dtype=float)
    n = len(x)
    if bounds is None:
        lower, upper = np.full(n, -np.inf), np.full(n, np.inf)
    else:
        lower = np.array([b[0] for b in bounds], dtype=float)
        upper = np.array([b[1] for b in bounds], dtype=float)
        if len(lower) != n or np.any(lower > upper):
            raise ValueError("bounds must match x0 and satisfy lower <= upper")
    x = _project(x, lower, upper)
    fg = _Counter(fg)
    f, g = fg(x)
    pg = projected_grad_norm(x, g, lower, upper)
    trace = [TraceRow(0, f, pg, 0.0)]

    def done(converged, reason, it):
        return OptimizeResult(x, f, g, it, fg.n, converged, reason, trace)

    if pg < tol_g:
        return done(True, "gradient", 0)
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    for it in range(1, max_iter + 1):
        frozen = ((x <= lower) & (g > 0)) | ((x >= upper) & (g < 0))
        free = ~frozen
        q = np.where(free, g, 0.0)
        alphas = []
        for s, y in reversed(list(zip(s_hist, y_hist))):
            rho = 1.0 / (y @ s)
            a = rho * (s @ q)
            alphas.append((a, rho, s, y))
            q = q - a * y
        if s_hist:
            s, y = s_hist[-1], y_hist[-1]
            q = q * ((s @ y) / (y @ y))
        for a, rho, s, y in reversed(alphas):
            b = rho * (y @ q)
            q = q + (a - b) * s
        d = -np.where(free, q, 0.0)
        slope = float(g @ d)
        if slope >= 0:
            s_hist.clear()
            y_hist.clear()
            d = -np.where(free, g, 0.0)
            slope = float(g @ d)
        with np.errstate(divide="ignore", invalid="ignore"):
            to_bound = np.where(d > 0, (upper - x) / d, np.where(d < 0, (lower - x) / d, np.inf))
        a_max = float(np.min(to_bound)) if n else np.inf
        a_init = 1.0 if s_hist else min(1.0, 1.0 / max(np.max(np.abs(g)), 1e-300))

        def phi(a):
            xt = _project(x + a * d, lower, upper)
            ft, gt = fg(xt)
            return ft, gt, float(gt @ d)

        try:
            a, f_new, g_new, _ = strong_wolfe(phi, f, slope, a_init, a_max, c1, c2)
        except LineSearchError as exc:
            return done(False, f"line search failed: {exc}", it - 1)
        x_new = _project(x + a * d, lower, upper)
        s, y = x_new - x, g_new - g
        if s @ y > 1e-12 * (y @ y):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        df = f - f_new
        x, f, g = x_new, f_new, g_new
        pg = projected_grad_norm(x, g, lower, upper)
        trace.append(TraceRow(it, f, pg, float(np.max(np.abs(s))) if n else 0.0))
        if pg < tol_g:
            return done(True, "gradient", it)
        if abs(df) < tol_f:
            return done(True, "energy", it)
    return done(False, "max_iter", max_iter)
