"""Shared numerical kernels: adaptive quadrature, adaptive ODE integration
with event detection, a bracketing root finder, and finite differences.

All kernels are deterministic: fixed evaluation order, no randomized
subdivision.  The ODE driver offers a linearly-implicit Rosenbrock method
(L-stable, numerical Jacobian, suitable for the stiff curve condition) and
an explicit Dormand-Prince 5(4) pair for smooth problems; both share the
step controller and the event machinery.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MaxSteps,
    NoBracket,
    NonFiniteValue,
    QuadratureFailure,
    StepFailure,
)

__all__ = [
    "QuadResult", "quad_adaptive",
    "OdeOptions", "OdeEvent", "OdeResult", "ode_solve",
    "find_root_bracketed", "finite_diff",
]

# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 adaptive quadrature

# (node, Gauss-7 weight, Kronrod-15 weight); Gauss weight 0 on the
# Kronrod-only nodes
_GK15 = (
    (+0.949107912342759, 0.129484966168870, 0.063092092629979),
    (-0.949107912342759, 0.129484966168870, 0.063092092629979),
    (+0.741531185599394, 0.279705391489277, 0.140653259715525),
    (-0.741531185599394, 0.279705391489277, 0.140653259715525),
    (+0.405845151377397, 0.381830050505119, 0.190350578064785),
    (-0.405845151377397, 0.381830050505119, 0.190350578064785),
    (0.000000000000000, 0.417959183673469, 0.209482141084728),
    (+0.991455371120813, 0.000000000000000, 0.022935322010529),
    (-0.991455371120813, 0.000000000000000, 0.022935322010529),
    (+0.864864423359769, 0.000000000000000, 0.104790010322250),
    (-0.864864423359769, 0.000000000000000, 0.104790010322250),
    (+0.586087235467691, 0.000000000000000, 0.169004726639267),
    (-0.586087235467691, 0.000000000000000, 0.169004726639267),
    (+0.207784955007898, 0.000000000000000, 0.204432940075298),
    (-0.207784955007898, 0.000000000000000, 0.204432940075298),
)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int


def _gk15_panel(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    gauss = 0.0
    kronrod = 0.0
    for node, wg, wk in _GK15:
        y = f(mid + half * node)
        if not math.isfinite(y):
            raise NonFiniteValue(f"integrand returned {y!r} near x = {mid + half * node!r}")
        gauss += wg * y
        kronrod += wk * y
    return kronrod * half, abs(kronrod - gauss) * abs(half)


def quad_adaptive(f, a, b, rel_tol=1e-10, abs_tol=1e-12, max_panels=2000):
    """Globally adaptive Gauss-Kronrod integration of f over [a, b].

    The panel with the largest error estimate is bisected until the summed
    estimate satisfies max(abs_tol, rel_tol*|value|); exceeding the panel
    budget raises QuadratureFailure.
    """
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    value, err = _gk15_panel(f, a, b)
    evaluations = 15
    # heap keyed on -error so the worst panel pops first; the counter
    # breaks ties deterministically
    counter = 0
    heap = [(-err, counter, a, b, value, err)]
    total, total_err = value, err
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if len(heap) >= max_panels:
            raise QuadratureFailure(
                f"tolerance not reached within {max_panels} panels "
                f"(error estimate {total_err:.3e})")
        _, _, lo, hi, pv, pe = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        lv, le = _gk15_panel(f, lo, mid)
        rv, re = _gk15_panel(f, mid, hi)
        evaluations += 30
        total += lv + rv - pv
        total_err += le + re - pe
        counter += 1
        heapq.heappush(heap, (-le, counter, lo, mid, lv, le))
        counter += 1
        heapq.heappush(heap, (-re, counter, mid, hi, rv, re))
    return QuadResult(float(sign * total), float(total_err), evaluations)


# ---------------------------------------------------------------------------
# adaptive ODE integration

@dataclass
class OdeEvent:
    """Scalar event g(t, y); a root of g terminates or marks the solve.

    direction: +1 triggers only on - to + crossings, -1 only on + to -,
    0 on any sign change.
    """
    func: object
    terminal: bool = True
    direction: int = 0
    name: str = ""


@dataclass
class OdeOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    initial_step: float | None = None
    max_step: float = math.inf
    max_steps: int = 100_000
    method: str = "rosenbrock"        # rosenbrock | dopri5
    events: tuple = ()

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class OdeResult:
    ts: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    fs: list = field(default_factory=list)
    status: str = "completed"          # completed | event
    event_name: str | None = None
    event_index: int | None = None
    t_event: float | None = None
    y_event: np.ndarray | None = None
    n_steps: int = 0
    n_rhs: int = 0

    def interpolate(self, t):
        """Cubic-Hermite dense output on the stored step mesh."""
        ts = self.ts
        if not ts:
            raise ValueError("empty trace")
        if t <= ts[0]:
            return np.array(self.ys[0], copy=True)
        if t >= ts[-1]:
            return np.array(self.ys[-1], copy=True)
        i = bisect.bisect_right(ts, t) - 1
        return _hermite(ts[i], self.ys[i], self.fs[i],
                        ts[i + 1], self.ys[i + 1], self.fs[i + 1], t)


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


# Rosenbrock tableau: L-stable, order 3, embedded order 2 error estimate
# (the classical 3-stage ROS3 coefficients, 2 function evaluations).
_ROS3 = {
    "S": 3,
    "A": (1.0, 1.0, 0.0),
    "C": (-0.10156171083877702091975600115545e+01,
          0.40759956452537699824805835358067e+01,
          0.92076794298330791242156818474003e+01),
    "M": (0.1e+01,
          0.61697947043828245592553615689730e+01,
          -0.42772256543218573326238373806514),
    "E": (0.5,
          -0.29079558716805469821718236208017e+01,
          0.22354069897811569627360909276199),
    "alpha": (0.0,
              0.43586652150845899941601945119356,
              0.43586652150845899941601945119356),
    "gamma": (0.43586652150845899941601945119356,
              0.24291996454816804366592249683314,
              0.21851380027664058511513169485832e+01),
    "order": 3.0,
    "new_f": (True, True, False),
}


def _numerical_jacobian(f, t, y, f0, n_rhs_box):
    n = y.size
    jac = np.empty((n, n))
    for k in range(n):
        dy = math.sqrt(np.finfo(float).eps) * max(abs(y[k]), 1e-5)
        yp = y.copy()
        yp[k] += dy
        jac[:, k] = (f(t, yp) - f0) / dy
        n_rhs_box[0] += 1
    return jac


def _rosenbrock_step(f, t, y, h, f0, jac, n_rhs_box):
    """One ROS3 step; returns (y_new, error_vector)."""
    tab = _ROS3
    n = y.size
    gamma0 = tab["gamma"][0]
    lhs = np.eye(n) / (h * gamma0) - jac
    k = [None] * tab["S"]

    def solve(rhs):
        return np.linalg.solve(lhs, rhs)

    fcn = f0
    k[0] = solve(fcn)
    for stage in range(2, tab["S"] + 1):
        if tab["new_f"][stage - 1]:
            ynew = y.copy()
            for j in range(stage - 1):
                ynew += tab["A"][(stage - 1) * (stage - 2) // 2 + j] * k[j]
            fcn = f(t + tab["alpha"][stage - 1] * h, ynew)
            n_rhs_box[0] += 1
        rhs = fcn.copy()
        for j in range(stage - 1):
            rhs += (tab["C"][(stage - 1) * (stage - 2) // 2 + j] / h) * k[j]
        k[stage - 1] = solve(rhs)

    y_new = y.copy()
    err = np.zeros(n)
    for j in range(tab["S"]):
        y_new += tab["M"][j] * k[j]
        err += tab["E"][j] * k[j]
    return y_new, err


# Dormand-Prince 5(4) coefficients (exact rationals)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)


def _dopri5_step(f, t, y, h, f0, n_rhs_box):
    ks = [f0]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
        ks.append(f(t + _DP_C[i] * h, yi))
        n_rhs_box[0] += 1
    y_new = y + h * sum(b * k for b, k in zip(_DP_B5, ks))
    y4 = y + h * sum(b * k for b, k in zip(_DP_B4, ks))
    return y_new, y_new - y4, ks[6]   # FSAL: ks[6] = f(t+h, y_new)


def _error_norm(err, y, y_new, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return math.sqrt(float(np.mean((err / scale) ** 2)))


def ode_solve(f, y0, t_span, opts=None):
    """Integrate y' = f(t, y) over t_span with adaptive step control and
    dense event location.

    Events are detected by sign change across each accepted step and
    located by bisection on the cubic-Hermite dense output to 1e-10 in t.
    The first triggered terminal event ends the trace.  Raises StepFailure
    on step-size underflow and MaxSteps on budget exhaustion; both carry
    the partial OdeResult in their ``trace`` attribute.

    The Rosenbrock path integrates the autonomized system (t appended as a
    state with t' = 1) so the numerical Jacobian picks up df/dt; the
    appended component is resynchronized to the exact step time after each
    accepted step.
    """
    opts = opts or OdeOptions()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if t_end <= t0:
        raise ValueError("t_span must be increasing")
    y = np.asarray(y0, dtype=float).copy()
    n = y.size
    n_rhs_box = [0]

    def rhs(t, yy):
        return np.asarray(f(t, yy), dtype=float)

    rosenbrock = opts.method == "rosenbrock"
    if not rosenbrock and opts.method != "dopri5":
        raise ValueError(f"unknown method {opts.method!r}")

    if rosenbrock:
        def work_rhs(_t, w):
            return np.concatenate([rhs(w[n], w[:n]), [1.0]])
        w = np.concatenate([y, [t0]])
    else:
        work_rhs = rhs
        w = y

    f_now = work_rhs(t0, w)
    n_rhs_box[0] += 1
    if not np.all(np.isfinite(f_now)):
        raise NonFiniteValue("right-hand side not finite at the initial point")

    result = OdeResult()
    result.ts.append(t0)
    result.ys.append(w[:n].copy())
    result.fs.append(f_now[:n].copy())

    g_now = [ev.func(t0, w[:n]) for ev in opts.events]

    span = t_end - t0
    h = opts.initial_step if opts.initial_step else min(span / 100.0, opts.max_step)
    h = min(h, opts.max_step, span)
    t = t0
    facmin, facmax, safety = 0.2, 6.0, 0.9
    order = 3.0 if rosenbrock else 5.0
    rejected = False

    while t < t_end:
        if result.n_steps >= opts.max_steps:
            raise MaxSteps(f"exceeded {opts.max_steps} steps", trace=result)
        h = min(h, t_end - t)
        if h < 1e-14 * max(abs(t), 1.0):
            raise StepFailure(f"step size underflow at t = {t!r}", trace=result)

        if rosenbrock:
            jac = _numerical_jacobian(work_rhs, t, w, f_now, n_rhs_box)
        accepted = False
        while not accepted:
            result.n_steps += 1
            if result.n_steps > opts.max_steps:
                raise MaxSteps(f"exceeded {opts.max_steps} steps", trace=result)
            try:
                if rosenbrock:
                    w_new, err_vec = _rosenbrock_step(work_rhs, t, w, h, f_now,
                                                      jac, n_rhs_box)
                    f_new = None
                else:
                    w_new, err_vec, f_new = _dopri5_step(work_rhs, t, w, h,
                                                         f_now, n_rhs_box)
            except np.linalg.LinAlgError:
                w_new, err_vec, f_new = w, None, None
            bad = (err_vec is None or not np.all(np.isfinite(w_new))
                   or not np.all(np.isfinite(err_vec)))
            err = math.inf if bad else _error_norm(err_vec, w, w_new,
                                                   opts.rel_tol, opts.abs_tol)
            if err <= 1.0:
                accepted = True
            else:
                fac = facmin if bad else max(facmin, safety * err ** (-1.0 / order))
                h *= min(fac, 0.5 if rejected else 1.0)
                rejected = True
                if h < 1e-14 * max(abs(t), 1.0):
                    raise StepFailure(f"step size underflow at t = {t!r}",
                                      trace=result)

        t_new = t + h
        if rosenbrock:
            w_new[n] = t_new       # resync the appended time component
        y_new = w_new[:n]
        if f_new is None:
            f_new = work_rhs(t_new, w_new)
            n_rhs_box[0] += 1
        y_old, fy_old, fy_new = w[:n], f_now[:n], f_new[:n]

        # event detection on this step
        g_new = [ev.func(t_new, y_new) for ev in opts.events]
        hit = None
        for i, ev in enumerate(opts.events):
            if _crossed(g_now[i], g_new[i], ev.direction):
                t_hit = _locate_event(ev, t, y_old, fy_old, t_new, y_new,
                                      fy_new)
                if hit is None or t_hit < hit[0]:
                    hit = (t_hit, i)
        if hit is not None:
            t_hit, i = hit
            ev = opts.events[i]
            y_hit = _hermite(t, y_old, fy_old, t_new, y_new, fy_new, t_hit)
            if ev.terminal:
                result.ts.append(t_hit)
                result.ys.append(y_hit)
                result.fs.append(rhs(t_hit, y_hit))
                n_rhs_box[0] += 1
                result.status = "event"
                result.event_name = ev.name
                result.event_index = i
                result.t_event = t_hit
                result.y_event = y_hit
                result.n_rhs = n_rhs_box[0]
                return result

        result.ts.append(t_new)
        result.ys.append(y_new.copy())
        result.fs.append(fy_new.copy())
        t, w, f_now, g_now = t_new, w_new, f_new, g_new

        fac = max(facmin, min(facmax, safety * max(err, 1e-10) ** (-1.0 / order)))
        if rejected:
            fac = min(fac, 1.0)
        rejected = False
        h = min(h * fac, opts.max_step)

    result.n_rhs = n_rhs_box[0]
    return result


def _crossed(g0, g1, direction):
    if g0 == 0.0 and g1 == 0.0:
        return False
    if direction >= 1:
        return g0 < 0.0 <= g1
    if direction <= -1:
        return g0 > 0.0 >= g1
    return (g0 < 0.0 <= g1) or (g0 > 0.0 >= g1)


def _locate_event(ev, t0, y0, f0, t1, y1, f1, tol=1e-10):
    """Bisect g(t, dense(t)) on [t0, t1] down to a bracket of width tol."""
    g0 = ev.func(t0, y0)
    lo, hi = t0, t1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = ev.func(mid, _hermite(t0, y0, f0, t1, y1, f1, mid))
        if gm == 0.0:
            return mid
        if (g0 < 0) != (gm < 0):
            hi = mid
        else:
            lo, g0 = mid, gm
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# root finding

def find_root_bracketed(f, lo, hi, tol=1e-12, max_iter=200):
    """Brent's method on a sign-changing bracket [lo, hi]."""
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise NoBracket(f"f({a}) = {fa!r} and f({b}) = {fb!r} do not bracket a root")
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * np.finfo(float).eps * abs(b) + 0.5 * tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b = b + (d if abs(d) > tol1 else math.copysign(tol1, xm))
        fb = f(b)
    return b


# ---------------------------------------------------------------------------
# finite differences (oracle for the jet kernels)

_FD_DEFAULT_STEP = {1: 1e-4, 2: 2.5e-3, 3: 6e-3}


def finite_diff(f, x, order=1, step=None):
    """Central finite difference of f at x with one Richardson level.

    Supports derivative orders 1..3; the extrapolated truncation error is
    O(step^4).  The default steps sit near the roundoff/truncation optimum
    for each order (cancellation grows like eps/step^order, so higher
    orders need larger steps).
    """
    if order not in (1, 2, 3):
        raise ValueError("finite_diff supports orders 1, 2, 3")
    if step is None:
        step = _FD_DEFAULT_STEP[order]

    def stencil(h):
        if order == 1:
            return (f(x + h) - f(x - h)) / (2.0 * h)
        if order == 2:
            return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
        return (f(x + 2 * h) - 2.0 * f(x + h)
                + 2.0 * f(x - h) - f(x - 2 * h)) / (2.0 * h ** 3)

    coarse = stencil(step)
    fine = stencil(step / 2.0)
    return (4.0 * fine - coarse) / 3.0
