"""Physical parameters and Cauchy data for 2D rotational gas dynamics.

Two kinds of initial data are supported: the analytic vortex family
``u0 = g(r) A x`` with ``g(r) = b (1 - r^2)`` and ``A = [[eps, 1], [-1, eps]]``
supported in the unit disk, and gridded cell-centred fields read from CSV.

The vortex velocity is Lipschitz but not C^1 across ``r = 1``; gradients at
``r = 1`` are the limits from inside.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Rotation by +90 degrees; the Coriolis term is rho * l * ROTATION @ u.
ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])
ROTATION.setflags(write=False)

ISENTROPIC = "isentropic"
PRESSURELESS = "pressureless"


@dataclass(frozen=True)
class PhysicalParams:
    """Heat ratio, Coriolis parameter, background state and support radius.

    ``isentropic_const`` is the constant C in ``p = C rho^gamma``; C = 0
    selects pressureless gas dynamics, where ``p_bar`` must be 0.
    """

    gamma: float
    l: float
    rho_bar: float
    p_bar: float
    R: float
    isentropic_const: float | None = None

    def __post_init__(self):
        for name in ("gamma", "l", "rho_bar", "p_bar", "R"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma <= 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.l < 0:
            raise ValueError(f"l must be nonnegative, got {self.l}")
        if self.rho_bar <= 0:
            raise ValueError(f"rho_bar must be positive, got {self.rho_bar}")
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.p_bar < 0:
            raise ValueError(f"p_bar must be nonnegative, got {self.p_bar}")
        C = self.isentropic_const
        if C is not None:
            if C < 0:
                raise ValueError("isentropic_const must be nonnegative")
            expected = C * self.rho_bar**self.gamma
            if abs(self.p_bar - expected) > 1e-12 * max(abs(expected), 1e-300) and not (
                C == 0 and self.p_bar == 0
            ):
                raise ValueError(
                    f"p_bar={self.p_bar!r} inconsistent with C*rho_bar^gamma={expected!r}"
                )

    @property
    def sigma(self):
        """Sound speed at the background state."""
        return math.sqrt(self.gamma * self.p_bar / self.rho_bar)

    @property
    def pressureless(self):
        return self.p_bar == 0.0

    def support_radius(self, t):
        return self.R + self.sigma * t

    def with_l(self, l):
        return PhysicalParams(self.gamma, l, self.rho_bar, self.p_bar, self.R, self.isentropic_const)


@dataclass(frozen=True)
class State:
    """Pointwise state; arrays broadcast over the evaluation points."""

    u: np.ndarray  # shape (2, ...)
    rho: np.ndarray
    p: np.ndarray
    grad_u: np.ndarray  # shape (2, 2, ...), grad_u[i, j] = d u_i / d x_j


def _pi_coefficients(b, l):
    # Pressure potential Pi(s), s = r^2, solving Pi'(r) = r g (g - l) with
    # Pi(0) = 0; continuous with the outer value at r = 1.
    return np.array([0.0, 6.0 * (b - l), 3.0 * (l - 2.0 * b), 2.0 * b]) * (b / 12.0)


@dataclass(frozen=True)
class VortexData:
    """Perturbed steady vortex in the unit disk.

    In isentropic mode ``p0 = (Pi_bar + Pi)^gamma`` and
    ``rho0 = (p0 / C)^(1/gamma)``; the background state is the r > 1 branch.
    In pressureless mode ``rho0 = 1`` and ``p0 = 0`` everywhere.
    """

    b: float
    epsilon: float
    mode: str = ISENTROPIC
    gamma: float = 2.0
    l: float = 1.0
    C: float = 0.25
    Pi_bar: float = 1.0
    params: PhysicalParams = field(init=False)

    def __post_init__(self):
        if self.mode not in (ISENTROPIC, PRESSURELESS):
            raise ValueError(f"unknown vortex mode {self.mode!r}")
        for name in ("b", "epsilon", "gamma", "l", "C", "Pi_bar"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.mode == PRESSURELESS:
            params = PhysicalParams(self.gamma, self.l, 1.0, 0.0, 1.0, 0.0)
        else:
            if self.C <= 0:
                raise ValueError("isentropic vortex needs C > 0")
            s = np.linspace(0.0, 1.0, 4097)
            w = self.Pi_bar + np.polynomial.polynomial.polyval(s, _pi_coefficients(self.b, self.l))
            if np.min(w) <= 0:
                raise ValueError(
                    f"Pi_bar + Pi must stay positive; min {np.min(w):.6g} for b={self.b}"
                )
            w_out = self.Pi_bar + self.b * (2.0 * self.b - 3.0 * self.l) / 12.0
            p_bar = w_out**self.gamma
            rho_bar = (p_bar / self.C) ** (1.0 / self.gamma)
            # Recompute p_bar from rho_bar so the isentropic identity is exact.
            params = PhysicalParams(
                self.gamma, self.l, rho_bar, self.C * rho_bar**self.gamma, 1.0, self.C
            )
        object.__setattr__(self, "params", params)

    @property
    def radial_sign(self):
        """Sign of the initial radial velocity: -1 convergent, +1 divergent, 0 none."""
        return int(np.sign(self.epsilon * self.b))

    def pi_profile(self, r):
        """Pressure potential Pi(r) and its radial derivative."""
        r = np.asarray(r, dtype=float)
        c = _pi_coefficients(self.b, self.l)
        inside = r <= 1.0
        s = np.minimum(r * r, 1.0)
        val = np.polynomial.polynomial.polyval(s, c)
        dval = 2.0 * r * np.polynomial.polynomial.polyval(s, np.polynomial.polynomial.polyder(c))
        return val, np.where(inside, dval, 0.0)

    def evaluate(self, x1, x2):
        """Exact state at points ``(x1, x2)`` (any broadcastable shapes)."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        r2 = x1 * x1 + x2 * x2
        inside = r2 <= 1.0
        b, eps = self.b, self.epsilon
        g = np.where(inside, b * (1.0 - r2), 0.0)
        ax1 = eps * x1 + x2
        ax2 = -x1 + eps * x2
        u = np.stack([g * ax1, g * ax2])
        # grad(g A x) = g A + (g'(r)/r) (A x) x^T with g'(r)/r = -2b.
        dg = np.where(inside, -2.0 * b, 0.0)
        grad = np.empty((2, 2) + x1.shape)
        grad[0, 0] = g * eps + dg * ax1 * x1
        grad[0, 1] = g + dg * ax1 * x2
        grad[1, 0] = -g + dg * ax2 * x1
        grad[1, 1] = g * eps + dg * ax2 * x2
        if self.mode == PRESSURELESS:
            rho = np.ones_like(x1)
            p = np.zeros_like(x1)
        else:
            pi_val, _ = self.pi_profile(np.sqrt(r2))
            w = self.Pi_bar + pi_val
            p = w**self.gamma
            rho = (p / self.C) ** (1.0 / self.gamma)
        return State(u, rho, p, grad)

    def pressure_gradient(self, x1, x2):
        """Analytic grad p0 (zero outside the support)."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        if self.mode == PRESSURELESS:
            return np.zeros((2,) + x1.shape)
        r = np.sqrt(x1 * x1 + x2 * x2)
        pi_val, dpi = self.pi_profile(r)
        w = self.Pi_bar + pi_val
        dp_dr = self.gamma * w ** (self.gamma - 1.0) * dpi
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(r > 0, dp_dr / r, 0.0)
        return np.stack([factor * x1, factor * x2])

    def to_descriptor(self):
        return {
            "type": "vortex",
            "mode": self.mode,
            "b": self.b,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "l": self.l,
            "C": self.C,
            "Pi_bar": self.Pi_bar,
        }


def evaluate_vortex(data, x):
    """State of the vortex family at a single point ``x``."""
    st = data.evaluate(x[0], x[1])
    return State(st.u.reshape(2), float(st.rho), float(st.p), st.grad_u.reshape(2, 2))


def steady_residual(data, n_r=64, n_theta=64):
    """Max norm of rho (u.grad)u + rho l L u + grad p over a polar grid in r < 1."""
    if data.mode != ISENTROPIC:
        raise ValueError("steady_residual needs isentropic data")
    r = (np.arange(n_r) + 0.5) / n_r
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    x1 = r[:, None] * np.cos(theta)[None, :]
    x2 = r[:, None] * np.sin(theta)[None, :]
    st = data.evaluate(x1, x2)
    convect = np.einsum("ij...,j...->i...", st.grad_u, st.u)
    coriolis = data.l * np.einsum("ij,j...->i...", ROTATION, st.u)
    res = st.rho * (convect + coriolis) + data.pressure_gradient(x1, x2)
    return float(np.max(np.hypot(res[0], res[1])))


@dataclass(frozen=True)
class GriddedData:
    """Cell-centred samples of (u1, u2, rho, p) on ``[-half_width, half_width]^2``.

    Arrays are indexed ``[i, j]`` with ``x1 = centers[j]``, ``x2 = centers[i]``
    (row-major, x1 fastest).
    """

    n: int
    half_width: float
    u1: np.ndarray
    u2: np.ndarray
    rho: np.ndarray
    p: np.ndarray
    params: PhysicalParams

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs n >= 16, got {self.n}")
        if self.half_width < self.params.R:
            raise ValueError("half_width must be at least R")
        for name in ("u1", "u2", "rho", "p"):
            arr = getattr(self, name)
            if arr.shape != (self.n, self.n):
                raise ValueError(f"{name} has shape {arr.shape}, expected {(self.n, self.n)}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        if np.any(self.rho <= 0):
            raise ValueError("rho must be positive at every sample")
        pressureless = self.params.isentropic_const == 0
        if np.any(self.p < 0) or (not pressureless and np.any(self.p <= 0)):
            raise ValueError("p must be positive (nonnegative only for pressureless data)")
        X1, X2 = self.mesh()
        outside = np.hypot(X1, X2) >= self.params.R
        bg = (
            np.abs(self.u1[outside]).max(initial=0.0),
            np.abs(self.u2[outside]).max(initial=0.0),
            np.abs(self.rho[outside] - self.params.rho_bar).max(initial=0.0),
            np.abs(self.p[outside] - self.params.p_bar).max(initial=0.0),
        )
        if max(bg) > 1e-12:
            raise ValueError("samples at radius >= R must equal the background state")

    @property
    def h(self):
        return 2.0 * self.half_width / self.n

    @property
    def centers(self):
        return -self.half_width + (np.arange(self.n) + 0.5) * self.h

    def mesh(self):
        c = self.centers
        return np.meshgrid(c, c, indexing="xy")

    def gradients(self):
        """Second-order finite-difference grad u, shape (2, 2, n, n)."""
        h = self.h
        d1_dx2, d1_dx1 = np.gradient(self.u1, h, h, edge_order=2)
        d2_dx2, d2_dx1 = np.gradient(self.u2, h, h, edge_order=2)
        return np.array([[d1_dx1, d1_dx2], [d2_dx1, d2_dx2]])

    def to_csv(self, path):
        X1, X2 = self.mesh()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2", "u1", "u2", "rho", "p"])
            for row in zip(
                X1.ravel(), X2.ravel(), self.u1.ravel(), self.u2.ravel(),
                self.rho.ravel(), self.p.ravel(),
            ):
                w.writerow([f"{v:.17g}" for v in row])


def grid_from_analytic(data, n, half_width):
    """Sample a vortex at cell centres of an ``n x n`` grid."""
    if n < 16:
        raise ValueError(f"grid needs n >= 16, got {n}")
    if half_width < data.params.R:
        raise ValueError("half_width must be at least R")
    h = 2.0 * half_width / n
    c = -half_width + (np.arange(n) + 0.5) * h
    X1, X2 = np.meshgrid(c, c, indexing="xy")
    st = data.evaluate(X1, X2)
    return GriddedData(n, half_width, st.u[0], st.u[1], st.rho, st.p, data.params)


def read_grid_csv(path, params):
    """Load a grid written with header ``x1,x2,u1,u2,rho,p`` in row-major order."""
    raw = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if header != ["x1", "x2", "u1", "u2", "rho", "p"]:
        raise ValueError(f"unexpected grid header {header}")
    n = math.isqrt(raw.shape[0])
    if n * n != raw.shape[0]:
        raise ValueError(f"grid has {raw.shape[0]} rows, not a square count")
    x1 = raw[:n, 0]
    h = x1[1] - x1[0]
    half_width = -x1[0] + 0.5 * h
    cols = [raw[:, k].reshape(n, n) for k in range(2, 6)]
    if not np.allclose(raw[:, 0].reshape(n, n), x1[None, :]) or not np.allclose(
        raw[:, 1].reshape(n, n), raw[::n, 1][:, None]
    ):
        raise ValueError("grid rows are not in row-major cell-centre order")
    return GriddedData(n, float(half_width), *cols, params=params)
