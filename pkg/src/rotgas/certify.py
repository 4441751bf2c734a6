"""Blowup certification from initial data.

A certificate is issued when a curve that G(t) must follow or stay below
(above) leaves the band ``phi_minus <= G <= phi_plus`` at some ``T_star``:
no classical solution can then exist up to ``T_star``. Pressureless data
additionally get the exact pointwise criterion. "Not certified" never means
global smoothness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import envelopes as env
from .fields import GriddedData, PhysicalParams
from .functionals import compute_functionals
from .pressureless import BLOWUP, scan_criterion

GAMMA2 = "gamma_2"
GAMMA_GT_2 = "gamma_gt_2"
GAMMA_LT_2 = "gamma_lt_2"
PRESSURELESS = "pressureless"

LOWER = "lower_crossing"
UPPER = "upper_crossing"
AMPLITUDE = "closed_form_amplitude"
A3_GROWTH = "A3_growth"
POINTWISE = "pointwise_criterion"

BLOWUP_NOTE = "density and/or velocity tend to infinity as G approaches its lower bound"


@dataclass
class CertifyOptions:
    t_max: float | None = None
    n_scan: int = 512
    quad_tol: float = 1e-10
    literal: bool = False
    samples: int = 1001
    run_scan: bool = True


@dataclass
class Certificate:
    certified: bool
    T_star: float | None
    mechanisms: list
    regime: str
    entropy_condition: str
    functionals: dict
    quick_tests: dict
    notes: list
    t_max: float
    crossings: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict, repr=False)

    @property
    def integral_certified(self):
        """Certified by an integral (virial) argument, not by the pointwise criterion."""
        return any(m != POINTWISE for m in self.mechanisms)

    def to_dict(self):
        return {
            "certified": self.certified,
            "T_star": self.T_star,
            "mechanisms": list(self.mechanisms),
            "regime": self.regime,
            "entropy_condition": self.entropy_condition,
            "functionals": self.functionals,
            "quick_tests": self.quick_tests,
            "notes": list(self.notes),
            "t_max": self.t_max,
            "crossings": self.crossings,
        }


def find_crossing(fa, fb, t_max, t_start=1e-9, n_scan=10_000, t_tol=1e-10):
    """Earliest t in ``(0, t_max]`` where ``fa(t) = fb(t)``, or None.

    A uniform scan brackets the first sign change of ``fa - fb``, then
    bisection refines it to ``t_tol``.
    """
    t = np.linspace(t_start, t_max, n_scan + 1)
    d = np.asarray(fa(t), dtype=float) - np.asarray(fb(t), dtype=float)
    if d[0] == 0.0:
        return float(t[0])
    flips = np.nonzero(np.sign(d[1:]) != np.sign(d[:-1]))[0]
    if flips.size == 0:
        return None
    k = flips[0]
    lo, hi = float(t[k]), float(t[k + 1])
    s_lo = math.copysign(1.0, d[k])

    def diff(x):
        return float(fa(np.array(x)) - fb(np.array(x)))

    while hi - lo > t_tol:
        mid = 0.5 * (lo + hi)
        dm = diff(mid)
        if dm == 0.0:
            return mid
        if math.copysign(1.0, dm) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def regime_of(params):
    if params.pressureless:
        return PRESSURELESS
    if params.gamma == 2.0:
        return GAMMA2
    return GAMMA_GT_2 if params.gamma > 2.0 else GAMMA_LT_2


def default_t_max(params, floor=1e-3):
    if params.l > 0.0:
        return 1.05 * 2.0 * math.pi / params.l
    return 10.0 * params.R / max(params.sigma, params.R * params.l, floor)


def quick_test_acond(fs, params):
    """Amplitude bound for the gamma = 2 lower crossing and its necessary condition."""
    if params.gamma != 2.0 or params.l <= 0.0:
        raise ValueError("quick_test_acond needs gamma = 2 and l > 0")
    l = params.l
    c = fs.A0 / l**2
    acond = c**2 - (fs.F10**2 / l**2 + (fs.G0 - c) ** 2)
    necessary = -(l**2) * fs.G0**2 + 2.0 * fs.F10**2
    return {
        "status": "possible" if necessary >= 0.0 else "impossible",
        "necessary_value": necessary,
        "acond_value": acond,
        "acond_holds": acond <= 0.0,
    }


def quick_test_amplitude(fs, params, A=None):
    """Whether ``G = A/l^2 + amp cos(l t - phase)`` reaches 0 or ``G_m`` (frozen support).

    ``A`` defaults to ``A4``; other values are for comparison only.
    """
    if params.sigma != 0.0 or params.l <= 0.0:
        raise ValueError("quick_test_amplitude needs sigma = 0 and l > 0")
    l = params.l
    A = fs.A4 if A is None else A
    c = A / l**2
    amp = math.hypot(fs.F10 / l, fs.G0 - c)
    lower = c - amp <= 0.0
    upper = c + amp >= fs.Gm
    status = "lower_certified" if lower else ("upper_certified" if upper else "none")
    return {
        "status": status,
        "lower": lower,
        "upper": upper,
        "center": c,
        "amplitude": amp,
        "margin_lower": c - amp,
        "margin_upper": fs.Gm - (c + amp),
        "A": A,
    }


def quick_test_A3(fs, params):
    """``G'' >= A3`` against ``G <= G_m``: certified iff ``A3 > 0``."""
    if params.sigma != 0.0:
        raise ValueError("quick_test_A3 needs a frozen support (sigma = 0)")
    gap = fs.Gm - fs.G0
    l_crit = None
    # 2 e0 - gap l^2 - F20 l changes sign at the positive root, if any.
    if gap > 0.0:
        disc = fs.F20**2 + 8.0 * fs.e0 * gap
        if disc >= 0.0:
            root = (-fs.F20 + math.sqrt(disc)) / (2.0 * gap)
            l_crit = root if root > 0.0 else None
    return {
        "status": "certified" if fs.A3 > 0.0 else "none",
        "A3": fs.A3,
        "l_critical": l_crit,
    }


def radial_momentum(fs, params, t):
    """F1(t) where it is known in closed form (gamma = 2 or frozen support), else None."""
    t = np.asarray(t, dtype=float)
    l = params.l
    if params.pressureless:
        if l == 0.0:
            return 2.0 * fs.e0 * t + fs.dG0
        return fs.dG0 * np.cos(l * t) - (l * fs.G0 - fs.A4 / l) * np.sin(l * t)
    if params.gamma != 2.0:
        return None
    if l == 0.0:
        c = math.pi * params.rho_bar
        dQ = env.q_polynomial(params).integ(1)(t)
        G_prime = dQ + fs.A0 * t + fs.dG0
        return G_prime - c * params.sigma * (params.R + params.sigma * t) ** 3
    return fs.F10 * np.cos(l * t) - (l * fs.G0 - fs.A0 / l) * np.sin(l * t)


def kinetic_energy_floor(fs, params, t):
    """Lower bound ``F1(t)^2 / (4 phi_plus(t))`` on E_k(t); None where F1 is unknown."""
    F1 = radial_momentum(fs, params, t)
    if F1 is None:
        return None
    return F1**2 / (4.0 * env.phi_plus(fs, params, t))


def _entropy_label(flag):
    return {True: "holds", False: "fails", None: "not-applicable"}[flag]


def _pairs(fs, params, literal):
    """(mechanism, curve, bound) pairs to test and the curves for output."""
    regime = regime_of(params)
    phi_m = env.make_envelope("phi_minus", fs, params, literal)
    phi_p = env.make_envelope("phi_plus", fs, params)
    curves = {"phi_minus": phi_m, "phi_plus": phi_p}
    pairs = []
    if regime == PRESSURELESS:
        kind = "G_exact_pressureless" if params.l > 0 else "G_polynomial_l0"
        central = env.make_envelope(kind, fs, params)
        curves["central"] = central
        pairs = [(LOWER, central, phi_m), (UPPER, central, phi_p)]
    elif regime == GAMMA2:
        central = env.make_envelope("G_exact_gamma2", fs, params, literal)
        curves["central"] = central
        pairs = [(LOWER, central, phi_m), (UPPER, central, phi_p)]
    else:
        prefix = "f" if regime == GAMMA_GT_2 else "g"
        upper = env.make_envelope(prefix + "_plus", fs, params, literal)
        lower = env.make_envelope(prefix + "_minus", fs, params, literal)
        if upper is not None:
            curves["upper"] = upper
            pairs.append((LOWER, upper, phi_m))
        if lower is not None:
            curves["lower"] = lower
            pairs.append((UPPER, lower, phi_p))
    return regime, pairs, curves


def certify(data, options=None):
    """Run every applicable sufficient condition on ``data`` and return a :class:`Certificate`."""
    opt = options or CertifyOptions()
    params = data.params
    fs = compute_functionals(data, opt.quad_tol)
    t_max = opt.t_max if opt.t_max is not None else default_t_max(params)
    regime, pairs, curves = _pairs(fs, params, opt.literal)

    mechanisms, notes, crossings = [], [], {}
    quick = {"acond": None, "amplitude": None, "A3": None}
    T_star = None

    for mech, curve, bound in pairs:
        t = find_crossing(curve, bound, t_max)
        crossings[f"{curve.kind}~{bound.kind}"] = t
        if t is not None:
            if mech not in mechanisms:
                mechanisms.append(mech)
            T_star = t if T_star is None else min(T_star, t)
            if mech == LOWER:
                F1 = radial_momentum(fs, params, t)
                if F1 is not None and abs(float(F1)) > 0.0:
                    notes.append(BLOWUP_NOTE)

    if regime == GAMMA2 and params.l > 0:
        quick["acond"] = quick_test_acond(fs, params)
    if params.sigma == 0.0:
        quick["A3"] = quick_test_A3(fs, params)
        if quick["A3"]["status"] == "certified":
            mechanisms.append(A3_GROWTH)
        if params.l > 0.0:
            quick["amplitude"] = quick_test_amplitude(fs, params)
            if quick["amplitude"]["status"] != "none":
                mechanisms.append(AMPLITUDE)
    if regime == PRESSURELESS and opt.run_scan:
        field_ = scan_criterion(data, data.n if isinstance(data, GriddedData) else opt.n_scan)
        quick["criterion"] = field_.summary()
        if field_.verdict == BLOWUP:
            mechanisms.append(POINTWISE)
    if regime in (GAMMA_GT_2, GAMMA_LT_2) and fs.entropy_condition is False:
        notes.append("entropy condition fails; bounds using A1 withheld")
    if not opt.literal and len([m for m in mechanisms if m in (LOWER, UPPER)]) > 1:
        notes.append("both crossings fire; T_star is the earlier")

    ts = np.linspace(0.0, t_max, opt.samples)
    curve_vals = {"t": ts}
    for name, c in curves.items():
        curve_vals[name] = c(ts)
    floor = kinetic_energy_floor(fs, params, ts)
    if floor is not None:
        curve_vals["kinetic_energy_floor"] = floor

    return Certificate(
        certified=bool(mechanisms),
        T_star=T_star,
        mechanisms=mechanisms,
        regime=regime,
        entropy_condition=_entropy_label(fs.entropy_condition),
        functionals=fs.to_dict(),
        quick_tests=quick,
        notes=sorted(set(notes), key=notes.index),
        t_max=t_max,
        crossings=crossings,
        curves=curve_vals,
    )


def integral_certificate_issued(data, quad_tol=1e-10):
    """Whether any integral sufficient condition fires (the pointwise criterion excluded)."""
    cert = certify(data, CertifyOptions(quad_tol=quad_tol, run_scan=False, samples=2))
    return cert.integral_certified


def constant_state(gamma, l, rho_bar=1.0, p_bar=1.0, R=1.0):
    """Unperturbed data as a :class:`GriddedData` on a 64 x 64 grid."""
    C = p_bar / rho_bar**gamma if p_bar > 0 else 0.0
    params = PhysicalParams(gamma, l, rho_bar, C * rho_bar**gamma if p_bar > 0 else 0.0, R, C)
    n = 64
    zeros = np.zeros((n, n))
    return GriddedData(n, 1.5 * R, zeros, zeros.copy(), np.full((n, n), rho_bar),
                       np.full((n, n), params.p_bar), params)
