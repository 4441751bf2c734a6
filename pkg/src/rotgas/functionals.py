"""Integral functionals of the initial data and closed-form momentum evolution."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .fields import GriddedData
from .quadrature import integrate_disk

_NAMES = ("m0", "Ek0", "pressure_excess0", "G0", "F10", "F20", "P0_1", "P0_2", "I0_1", "I0_2")


@dataclass(frozen=True)
class FunctionalSet:
    """All t = 0 functionals over B_R(0) plus the derived constants.

    ``A1`` is set only when gamma != 2 and the entropy condition holds;
    ``A3`` and ``Gm`` only for a frozen support (sigma = 0).
    """

    m0: float
    e0: float
    Ek0: float
    pressure_excess0: float
    G0: float
    F10: float
    F20: float
    P0: tuple
    I0: tuple
    dG0: float
    A0: float
    A4: float
    A1: float | None = None
    A3: float | None = None
    Gm: float | None = None
    entropy_condition: bool | None = None
    error_estimate: float = 0.0

    def to_dict(self):
        d = asdict(self)
        d["P0"] = list(self.P0)
        d["I0"] = list(self.I0)
        return d


def derive(raw, params, entropy_ok, error=0.0):
    """Build a :class:`FunctionalSet` from raw integrals (dict keyed like ``_NAMES``)."""
    g, l, R = params.gamma, params.l, params.R
    sigma = params.sigma
    m0 = raw["m0"]
    Ek0 = raw["Ek0"]
    pex = raw["pressure_excess0"]
    e0 = Ek0 + pex / (g - 1.0)
    G0, F10, F20 = raw["G0"], raw["F10"], raw["F20"]
    dG0 = F10 + math.pi * params.rho_bar * sigma * R**3
    A0 = 2.0 * (g - 1.0) * e0 + l * l * G0 - l * F20
    A4 = 2.0 * e0 + l * l * G0 - l * F20
    A1 = None
    if g != 2.0 and entropy_ok:
        A1 = A4 + 2.0 * (g - 2.0) / (g - 1.0) * sigma**2 * m0
    A3 = Gm = None
    if sigma == 0.0:
        Gm = 0.5 * R**2 * (m0 + params.rho_bar * math.pi * R**2)
        A3 = 2.0 * e0 - l * l * (Gm - G0) - l * F20
    return FunctionalSet(
        m0=m0, e0=e0, Ek0=Ek0, pressure_excess0=pex, G0=G0, F10=F10, F20=F20,
        P0=(raw["P0_1"], raw["P0_2"]), I0=(raw["I0_1"], raw["I0_2"]), dG0=dG0,
        A0=A0, A4=A4, A1=A1, A3=A3, Gm=Gm, entropy_condition=entropy_ok,
        error_estimate=error,
    )


def _integrands(state, x1, x2, params):
    rho, p = state.rho, state.p
    u1, u2 = state.u
    return np.stack([
        rho - params.rho_bar,
        0.5 * rho * (u1 * u1 + u2 * u2),
        p - params.p_bar,
        0.5 * (x1 * x1 + x2 * x2) * rho,
        rho * (u1 * x1 + u2 * x2),
        rho * (u1 * x2 - u2 * x1),
        rho * x1,
        rho * x2,
        rho * u1,
        rho * u2,
    ])


def compute_functionals(data, rtol=1e-10, order=32, max_depth=20):
    """Functionals of analytic (:class:`VortexData`) or gridded initial data."""
    from .envelopes import check_entropy_condition

    if not 1e-14 <= rtol <= 1e-4:
        raise ValueError(f"quadrature tolerance {rtol} outside [1e-14, 1e-4]")
    params = data.params
    entropy_ok = check_entropy_condition(data)
    if isinstance(data, GriddedData):
        raw, err = _grid_integrals(data)
        return derive(raw, params, entropy_ok, err)

    def f(x1, x2):
        return _integrands(data.evaluate(x1, x2), x1, x2, params)

    vals, err = integrate_disk(f, params.R, rtol, order, max_depth)
    return derive(dict(zip(_NAMES, map(float, vals))), params, entropy_ok, err)


def _cell_sums(g, step):
    X1, X2 = g.mesh()
    X1, X2 = X1[::step, ::step], X2[::step, ::step]
    rho = g.rho[::step, ::step]
    p = g.p[::step, ::step]
    u1 = g.u1[::step, ::step]
    u2 = g.u2[::step, ::step]
    drho = rho - g.params.rho_bar
    w = (g.h * step) ** 2
    # Outside B_R the perturbation vanishes, so excess integrands are summed
    # over the whole square and the background share of G is added exactly.
    sums = {
        "m0": drho.sum() * w,
        "Ek0": (0.5 * rho * (u1 * u1 + u2 * u2)).sum() * w,
        "pressure_excess0": (p - g.params.p_bar).sum() * w,
        "G0": (0.5 * (X1 * X1 + X2 * X2) * drho).sum() * w
        + math.pi * g.params.rho_bar * g.params.R**4 / 4.0,
        "F10": (rho * (u1 * X1 + u2 * X2)).sum() * w,
        "F20": (rho * (u1 * X2 - u2 * X1)).sum() * w,
        "P0_1": (drho * X1).sum() * w,
        "P0_2": (drho * X2).sum() * w,
        "I0_1": (rho * u1).sum() * w,
        "I0_2": (rho * u2).sum() * w,
    }
    return {k: float(v) for k, v in sums.items()}


def _grid_integrals(g):
    fine = _cell_sums(g, 1)
    # The 2h sub-grid of every other sample is itself a midpoint rule, so
    # |S_h - S_2h| / 3 is the Richardson estimate for a second-order sum.
    coarse = _cell_sums(g, 2) if g.n % 2 == 0 else fine
    scale = max(abs(v) for v in fine.values()) or 1.0
    err = max(abs(fine[k] - coarse[k]) for k in fine) / 3.0 / scale
    return fine, err


def momentum_evolution(fs, params, t):
    """Closed-form (P(t), I(t)) from ``I' = -l L I`` and ``P' = I``."""
    t = np.asarray(t, dtype=float)
    i1, i2 = fs.I0
    p1, p2 = fs.P0
    l = params.l
    if l == 0.0:
        I = np.stack([np.full_like(t, i1), np.full_like(t, i2)])
        P = np.stack([p1 + i1 * t, p2 + i2 * t])
        return P, I
    c, s = np.cos(l * t), np.sin(l * t)
    one_minus_c = 2.0 * np.sin(0.5 * l * t) ** 2  # 1 - cos without cancellation at small l t
    I = np.stack([i1 * c + i2 * s, i2 * c - i1 * s])
    P = np.stack([
        p1 + (i1 * s + i2 * one_minus_c) / l,
        p2 + (i2 * s - i1 * one_minus_c) / l,
    ])
    return P, I


def monte_carlo_functionals(data, n_samples, seed, chunk=1_000_000):
    """Uniform-on-disk Monte Carlo estimates ``(means, standard_errors)`` of the raw integrals."""
    rng = np.random.default_rng(seed)
    R = data.params.R
    area = math.pi * R * R
    total = np.zeros(len(_NAMES))
    total_sq = np.zeros(len(_NAMES))
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        r = R * np.sqrt(rng.random(k))
        th = 2.0 * np.pi * rng.random(k)
        x1, x2 = r * np.cos(th), r * np.sin(th)
        vals = _integrands(data.evaluate(x1, x2), x1, x2, data.params) * area
        total += vals.sum(axis=1)
        total_sq += (vals * vals).sum(axis=1)
        done += k
    mean = total / n_samples
    var = np.maximum(total_sq / n_samples - mean * mean, 0.0)
    return dict(zip(_NAMES, mean)), dict(zip(_NAMES, np.sqrt(var / n_samples)))

