"""Closed-form time functions that bound or solve for G(t).

``G(t)`` is half the second moment of mass over the moving support
``|x| < R + sigma t``. For any classical solution it obeys

    G'' + l^2 G = 2 (2 - gamma) E_k(t) + A0 + q(t),
    G(0) = G0,  G'(0) = F1(0) + pi rho_bar sigma R^3,

and is trapped between ``phi_minus`` and ``phi_plus``. Everything here is a
polynomial in t, a trigonometric function of ``l t``, or a ratio of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .fields import GriddedData, VortexData, ISENTROPIC
from .functionals import momentum_evolution

KINDS = (
    "phi_minus",
    "phi_plus",
    "G_exact_gamma2",
    "G_exact_pressureless",
    "G_polynomial_l0",
    "f_plus",
    "f_minus",
    "g_plus",
    "g_minus",
)


@dataclass(frozen=True)
class Envelope:
    """A named scalar function of time with the constants it was built from."""

    kind: str
    fn: Callable = field(repr=False)
    coefficients: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))


def _support(params):
    return Polynomial([params.R, params.sigma])


def q_polynomial(params):
    rho_t = _support(params)
    R = params.R
    c = math.pi * params.rho_bar
    return params.l**2 * c / 4.0 * (rho_t**4 - R**4) + 3.0 * c * params.sigma**2 * rho_t**2


def phi_plus_polynomial(fs, params):
    rho_t = _support(params)
    return rho_t**2 / 2.0 * (fs.m0 + params.rho_bar * math.pi * rho_t**2)


def q_source(params, fs, t):
    """Source q(t) produced by the moving support; ``fs`` is unused but kept for a uniform signature."""
    return q_polynomial(params)(np.asarray(t, dtype=float))


def Q_double_integral(params, fs, t):
    return q_polynomial(params).integ(2)(np.asarray(t, dtype=float))


def Q1_double_integral(params, fs, t):
    """Double integral of ``q - l^2 phi_plus`` from 0."""
    poly = q_polynomial(params) - params.l**2 * phi_plus_polynomial(fs, params)
    return poly.integ(2)(np.asarray(t, dtype=float))


def phi_plus(fs, params, t):
    """Upper bound (R + sigma t)^2 / 2 times the mass in the support."""
    return phi_plus_polynomial(fs, params)(np.asarray(t, dtype=float))


def phi_minus(fs, params, t, literal=False):
    """Lower bound |P(t)|^2 / (2 M(t)) from Cauchy-Schwarz.

    ``literal=True`` drops the factor 1/2, which no longer bounds G in
    general and is offered only for comparison.
    """
    t = np.asarray(t, dtype=float)
    P, _ = momentum_evolution(fs, params, t)
    mass = fs.m0 + params.rho_bar * math.pi * (params.R + params.sigma * t) ** 2
    factor = 1.0 if literal else 0.5
    return factor * (P[0] ** 2 + P[1] ** 2) / mass


def G_exact_gamma2(fs, params, t, literal=False):
    """Solution of ``G'' + l^2 G = A0 + q`` for gamma = 2 and l > 0.

    The particular part is ``pi rho_bar ((R + sigma t)^4 - R^4) / 4 + A0 / l^2``.
    ``literal=True`` replaces the linear coefficient ``pi rho_bar sigma R^3``
    by ``rho_bar sigma R^3``.
    """
    if params.gamma != 2.0:
        raise ValueError("G_exact_gamma2 needs gamma = 2")
    if params.l <= 0.0:
        raise ValueError("G_exact_gamma2 needs l > 0; use the polynomial branch for l = 0")
    t = np.asarray(t, dtype=float)
    l, R, s = params.l, params.R, params.sigma
    c = math.pi * params.rho_bar
    poly = Polynomial([0.0, c * s * R**3, 1.5 * c * s**2 * R**2, c * s**3 * R, 0.25 * c * s**4])
    if literal:
        poly = poly - Polynomial([0.0, (c - params.rho_bar) * s * R**3])
    shift = fs.A0 / l**2
    return poly(t) + (fs.G0 - shift) * np.cos(l * t) + fs.F10 / l * np.sin(l * t) + shift


def G_polynomial_gamma2_l0(fs, params, t):
    """gamma = 2 with no rotation: ``G = Q + A0 t^2 / 2 + G'(0) t + G0``."""
    t = np.asarray(t, dtype=float)
    return Q_double_integral(params, fs, t) + 0.5 * fs.A0 * t**2 + fs.dG0 * t + fs.G0


def G_exact_pressureless(fs, params, t):
    """Solution of ``G'' + l^2 G = A4`` with a frozen support (sigma = 0)."""
    if params.sigma != 0.0:
        raise ValueError("G_exact_pressureless needs sigma = 0")
    if params.l <= 0.0:
        raise ValueError("G_exact_pressureless needs l > 0; use G_polynomial_l0 for l = 0")
    t = np.asarray(t, dtype=float)
    l = params.l
    shift = fs.A4 / l**2
    return (fs.G0 - shift) * np.cos(l * t) + fs.dG0 / l * np.sin(l * t) + shift


def G_polynomial_l0(fs, t):
    """``G = e0 t^2 + G'(0) t + G0`` (no rotation, frozen support, conserved energy)."""
    t = np.asarray(t, dtype=float)
    return fs.e0 * t**2 + fs.dG0 * t + fs.G0


def polynomial_l0_vanishes(fs):
    """Whether ``e0 t^2 + G'(0) t + G0`` has a root at some t > 0."""
    if fs.e0 == 0.0:
        return fs.dG0 < 0.0
    disc = fs.dG0**2 - 4.0 * fs.e0 * fs.G0
    if disc < 0.0:
        return False
    roots = np.roots([fs.e0, fs.dG0, fs.G0])
    return bool(np.any(roots.real > 0.0))


def check_entropy_condition(data, n_r=128, n_theta=128, tol=1e-12):
    """Whether ln(p0 / rho0^gamma) >= ln(p_bar / rho_bar^gamma) everywhere.

    Returns None when the condition is meaningless (pressureless data).
    """
    params = data.params
    if params.p_bar == 0.0:
        return None
    S_bar = math.log(params.p_bar) - params.gamma * math.log(params.rho_bar)
    if isinstance(data, GriddedData):
        rho, p = data.rho, data.p
    else:
        if isinstance(data, VortexData) and data.mode != ISENTROPIC:
            return None
        r = params.R * (np.arange(n_r) + 0.5) / n_r
        th = 2.0 * np.pi * np.arange(n_theta) / n_theta
        st = data.evaluate(r[:, None] * np.cos(th), r[:, None] * np.sin(th))
        rho, p = st.rho, st.p
    S0 = np.log(p) - params.gamma * np.log(rho)
    return bool(np.min(S0) >= S_bar - tol * max(1.0, abs(S_bar)))


def pressure_excess_lower_bound(fs, params):
    """Lower bound sigma^2 m0 on the pressure excess, valid under the entropy condition."""
    if fs.entropy_condition is False:
        raise ValueError("entropy condition fails; the pressure-excess bound is unavailable")
    return params.sigma**2 * fs.m0


def _one_sided_polys(fs, params, literal=False):
    base = Polynomial([fs.G0, fs.dG0])
    t2 = Polynomial([0.0, 0.0, 0.5])
    Q = q_polynomial(params).integ(2)
    Q1 = (q_polynomial(params) - params.l**2 * phi_plus_polynomial(fs, params)).integ(2)
    with_A0_free = Q + fs.A0 * t2 + base  # G'' <= q + A0
    with_A0_rot = Q1 + fs.A0 * t2 + base  # G'' >= q - l^2 phi_plus + A0
    with_A1_rot = with_A1_free = None
    if fs.A1 is not None:
        with_A1_rot = Q1 + fs.A1 * t2 + base  # G'' >= q - l^2 phi_plus + A1
        with_A1_free = Q + fs.A1 * t2 + base  # G'' <= q + A1
    if params.gamma > 2.0:
        return with_A1_rot, with_A0_free
    if literal:
        return with_A1_free, with_A0_rot
    return with_A0_rot, with_A1_free


def one_sided_bounds(fs, params, t, literal=False):
    """``(lower, upper)`` bounds on G(t) for gamma != 2.

    gamma > 2: lower from ``A1``, upper from ``A0``. gamma < 2: lower from
    ``A0``, upper from ``A1``. Bounds that need ``A1`` are None when the
    entropy condition fails. ``literal=True`` applies the swapped gamma < 2
    pairing for comparison.
    """
    if params.gamma == 2.0:
        raise ValueError("one_sided_bounds needs gamma != 2")
    t = np.asarray(t, dtype=float)
    lo, hi = _one_sided_polys(fs, params, literal)
    return (None if lo is None else lo(t)), (None if hi is None else hi(t))


def make_envelope(kind, fs, params, literal=False):
    """Build an :class:`Envelope`; returns None when its hypotheses are unavailable."""
    coeffs = {"gamma": params.gamma, "l": params.l, "sigma": params.sigma, "literal": literal}
    if kind == "phi_minus":
        fn = lambda t: phi_minus(fs, params, t, literal)
    elif kind == "phi_plus":
        fn = lambda t: phi_plus(fs, params, t)
    elif kind == "G_exact_gamma2":
        if params.l == 0.0:
            fn = lambda t: G_polynomial_gamma2_l0(fs, params, t)
        else:
            fn = lambda t: G_exact_gamma2(fs, params, t, literal)
        coeffs.update(A0=fs.A0, G0=fs.G0, F10=fs.F10)
    elif kind == "G_exact_pressureless":
        fn = lambda t: G_exact_pressureless(fs, params, t)
        coeffs.update(A4=fs.A4, G0=fs.G0, F10=fs.F10)
    elif kind == "G_polynomial_l0":
        fn = lambda t: G_polynomial_l0(fs, t)
        coeffs.update(e0=fs.e0, G0=fs.G0, dG0=fs.dG0)
    elif kind in ("f_plus", "f_minus", "g_plus", "g_minus"):
        if (params.gamma > 2.0) != kind.startswith("f") or params.gamma == 2.0:
            raise ValueError(f"{kind} does not apply at gamma = {params.gamma}")
        lo, hi = _one_sided_polys(fs, params, literal)
        poly = hi if kind.endswith("plus") else lo
        if poly is None:
            return None
        fn = poly
        coeffs.update(A0=fs.A0, A1=fs.A1, polynomial=[float(c) for c in poly.coef])
    else:
        raise ValueError(f"unknown envelope kind {kind!r}")
    return Envelope(kind, fn, coeffs)
