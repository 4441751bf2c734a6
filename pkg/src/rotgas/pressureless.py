"""Exact smoothness criterion for pressureless rotational gas dynamics.

With p = 0 the velocity gradient M along a particle path obeys the matrix
Riccati equation ``M' = -M^2 - l L M``. A classical solution stays smooth for
all time iff, at every point,

    (div u0)^2 - 4 det(grad u0) - 2 l rot u0 - l^2 < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .fields import ROTATION, GriddedData, VortexData, PRESSURELESS

SMOOTH = "smooth"
BLOWUP = "blowup"
MARGINAL = "marginal"
INCONCLUSIVE = "inconclusive"


def criterion_pointwise(grad_u, l):
    """Left-hand side of the criterion; ``grad_u[i, j] = du_i/dx_j`` with trailing batch axes."""
    g = np.asarray(grad_u, dtype=float)
    div = g[0, 0] + g[1, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    rot = g[1, 0] - g[0, 1]
    return div * div - 4.0 * det - 2.0 * l * rot - l * l


@dataclass(frozen=True)
class CriterionField:
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray  # indexed [i, j] with x1 = x1[j], x2 = x2[i]
    l: float
    tol: float = 1e-8

    @property
    def max_value(self):
        return float(self.values.max())

    @property
    def argmax(self):
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.x1[j]), float(self.x2[i])

    @property
    def verdict(self):
        m = self.max_value
        if m > self.tol:
            return BLOWUP
        if m < -self.tol:
            return SMOOTH
        return MARGINAL

    def summary(self):
        x1, x2 = self.argmax
        return {
            "verdict": self.verdict,
            "max_value": self.max_value,
            "argmax": [x1, x2],
            "argmax_radius": math.hypot(x1, x2),
            "n": int(self.values.shape[0]),
            "l": self.l,
            "tol": self.tol,
        }


def scan_criterion(data, n=512, tol=1e-8):
    """Evaluate the criterion on an ``n x n`` cell-centred grid over ``[-R, R]^2``."""
    if n < 64:
        raise ValueError(f"scan needs n >= 64, got {n}")
    params = data.params
    if not params.pressureless:
        raise ValueError("scan_criterion needs pressureless data")
    l = params.l
    if isinstance(data, GriddedData):
        if n != data.n:
            raise ValueError("gridded data is scanned at its own resolution")
        c = data.centers
        values = criterion_pointwise(data.gradients(), l)
        keep = np.abs(c) <= params.R
        return CriterionField(c[keep], c[keep], values[np.ix_(keep, keep)], l, tol)
    R = params.R
    c = -R + (np.arange(n) + 0.5) * (2.0 * R / n)
    X1, X2 = np.meshgrid(c, c, indexing="xy")
    values = criterion_pointwise(data.evaluate(X1, X2).grad_u, l)
    return CriterionField(c, c, values, l, tol)


def vortex_radial_criterion(data, r):
    """Criterion for the vortex family as a function of radius (it is axisymmetric)."""
    r = np.asarray(r, dtype=float)
    return criterion_pointwise(data.evaluate(r, np.zeros_like(r)).grad_u, data.l)


@dataclass(frozen=True)
class RiccatiResult:
    verdict: str  # SMOOTH, BLOWUP or INCONCLUSIVE
    t_end: float
    blowup_time: float | None = None
    max_norm: float = 0.0
    message: str = ""


def _rhs(l):
    def f(t, y):
        M = y.reshape(2, 2)
        return (-(M @ M) - l * (ROTATION @ M)).ravel()

    return f


def riccati_oracle(M0, l, t_max=200.0, blowup_threshold=1e6, rtol=1e-10, atol=1e-12):
    """Integrate ``M' = -M^2 - l L M`` and classify the trajectory.

    Blowup is declared only when the norm exceeds ``blowup_threshold`` and
    ``1/|M|`` over the last decades decays linearly to zero, i.e. the growth
    fits ``c / (T - t)``; the fitted ``T`` is reported.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if blowup_threshold < 1e6:
        raise ValueError("blowup_threshold must be at least 1e6")
    M0 = np.asarray(M0, dtype=float).reshape(2, 2)

    def hit(t, y):
        return np.linalg.norm(y) - blowup_threshold

    hit.terminal = True
    hit.direction = 1
    sol = solve_ivp(_rhs(l), (0.0, t_max), M0.ravel(), method="DOP853",
                    rtol=rtol, atol=atol, events=hit)
    norms = np.linalg.norm(sol.y, axis=0)
    max_norm = float(norms.max())
    if sol.status == -1:
        return RiccatiResult(INCONCLUSIVE, float(sol.t[-1]), None, max_norm, sol.message)
    if sol.status == 0:
        return RiccatiResult(SMOOTH, float(sol.t[-1]), None, max_norm)

    # Terminal event: test the 1/(T - t) law on the final three decades.
    ts = np.append(sol.t, sol.t_events[0])
    ns = np.append(norms, blowup_threshold)
    sel = ns >= blowup_threshold * 1e-3
    if sel.sum() < 4:
        return RiccatiResult(INCONCLUSIVE, float(ts[-1]), None, max_norm,
                             "too few steps near the threshold for a growth fit")
    inv = 1.0 / ns[sel]
    slope, intercept = np.polyfit(ts[sel], inv, 1)
    resid = inv - (slope * ts[sel] + intercept)
    T = -intercept / slope if slope < 0 else math.inf
    if slope >= 0 or np.max(np.abs(resid)) > 0.05 * inv.max():
        return RiccatiResult(INCONCLUSIVE, float(ts[-1]), None, max_norm,
                             "growth does not fit 1/(T - t)")
    return RiccatiResult(BLOWUP, float(ts[-1]), float(T), max(max_norm, blowup_threshold))


def riccati_exact_blowup_time(M0, l):
    """First zero of the specific volume along the path (closed form), or None.

    ``1/rho`` satisfies ``v'' + l^2 v = 2 det M0 + l (rot M0 + l)`` with
    ``v(0) = 1``, ``v'(0) = div M0``.
    """
    M0 = np.asarray(M0, dtype=float)
    d = M0[0, 0] + M0[1, 1]
    J = M0[0, 0] * M0[1, 1] - M0[0, 1] * M0[1, 0]
    w = M0[1, 0] - M0[0, 1]
    K = 2.0 * J + l * (w + l)
    if l == 0.0:
        roots = np.roots([J, d, 1.0]) if J != 0.0 else (np.array([-1.0 / d]) if d else [])
        pos = [r.real for r in np.atleast_1d(roots) if abs(np.imag(r)) < 1e-14 and r.real > 0]
        return min(pos) if pos else None
    c = K / l**2
    A, B = 1.0 - c, d / l
    amp = math.hypot(A, B)
    if amp < c:
        return None
    # v = c + amp cos(l t - phase); first t > 0 with v = 0.
    phase = math.atan2(B, A)
    target = math.acos(max(-1.0, min(1.0, -c / amp)))
    cands = []
    for k in range(-1, 3):
        for s in (target, -target):
            t = (s + phase + 2.0 * math.pi * k) / l
            if t > 1e-15:
                cands.append(t)
    return min(cands)


def criterion_smooth(data, n=512):
    return scan_criterion(data, n).verdict == SMOOTH


def _make_vortex(parameter, value, fixed):
    kw = dict(fixed)
    kw[parameter] = value
    kw.setdefault("mode", PRESSURELESS)
    return VortexData(**kw)


def bisect_threshold(parameter, fixed, predicate="criterion-smooth", bracket=(0.0, 10.0),
                     tol=1e-3, n=512, rtol=1e-10):
    """Locate where ``predicate`` flips along ``parameter`` (``"epsilon"`` or ``"b"``).

    ``fixed`` holds the other :class:`VortexData` arguments. Returns a dict
    with the threshold value and every probe ``[value, predicate]``.
    """
    if parameter not in ("epsilon", "b"):
        raise ValueError(f"parameter must be 'epsilon' or 'b', got {parameter!r}")
    if predicate == "criterion-smooth":
        def pred(v):
            return criterion_smooth(_make_vortex(parameter, v, fixed), n)
    elif predicate == "certificate-issued":
        from .certify import integral_certificate_issued

        def pred(v):
            return integral_certificate_issued(_make_vortex(parameter, v, fixed), rtol)
    else:
        raise ValueError(f"unknown predicate {predicate!r}")
    lo, hi = map(float, bracket)
    p_lo, p_hi = pred(lo), pred(hi)
    probes = [[lo, p_lo], [hi, p_hi]]
    if p_lo == p_hi:
        raise ValueError(f"predicate {predicate!r} is {p_lo} at both ends of {[lo, hi]}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        p_mid = pred(mid)
        probes.append([mid, p_mid])
        if p_mid == p_lo:
            lo = mid
        else:
            hi = mid
    return {
        "parameter": parameter,
        "bracket": [float(bracket[0]), float(bracket[1])],
        "value": 0.5 * (lo + hi),
        "predicate": predicate,
        "fixed": dict(fixed),
        "probes": probes,
    }
