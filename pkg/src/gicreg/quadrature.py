"""The spectral rate functional phi[f] = (1/4pi) * int_0^{2pi} log2(1 + f(w)) dw.

Integrands here are smooth and 2pi-periodic, so the equispaced (periodic)
trapezoid rule converges geometrically; its error decays like ``r**N`` where
``r`` is the largest pole/zero radius of the rational densities involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .model import eta

__all__ = [
    "QuadratureConfig",
    "phi",
    "closed_form_ar",
    "half_grid",
    "points_for_radius",
    "check_integrand",
]

FIXED = "fixed-trapezoid"
ADAPTIVE = "adaptive"
NEG_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature settings.

    Attributes
    ----------
    method : {"fixed-trapezoid", "adaptive"}
    points : int
        Grid size for the fixed rule (>= 16). In batched scheme evaluation
        this is an upper bound; see ``size_to_poles``.
    tol : float
        Absolute tolerance for the adaptive method.
    size_to_poles : bool
        Batched evaluation only: use the smallest power-of-two grid (capped
        at ``points``) whose geometric error bound ``r**N`` is below
        ``grid_tol``, where ``r`` is the largest pole/zero radius of the
        filters involved. White inputs then need only 16 points.
    grid_tol : float
        Target of the geometric error bound used by ``size_to_poles``.
    """

    method: str = FIXED
    points: int = 4096
    tol: float = 1e-10
    size_to_poles: bool = True
    grid_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.method not in (FIXED, ADAPTIVE):
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if int(self.points) != self.points or self.points < 16:
            raise ValueError(f"points must be an integer >= 16, got {self.points}")
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if not (0 < self.grid_tol < 1):
            raise ValueError("grid_tol must be in (0, 1)")


DEFAULT = QuadratureConfig()


def check_integrand(values: np.ndarray) -> np.ndarray:
    """Validate samples of f and clip round-off negatives to zero."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("integrand has non-finite samples")
    if v.size and v.min() < -NEG_TOL:
        raise ValueError(f"integrand is negative (min {v.min():.3g})")
    return np.maximum(v, 0.0)


def phi(f: Callable[[np.ndarray], np.ndarray], cfg: QuadratureConfig = DEFAULT) -> float:
    """Evaluate phi[f] for a nonnegative 2pi-periodic integrand.

    Parameters
    ----------
    f : callable
        Vectorized function of omega (radians); spectra objects qualify.
    cfg : QuadratureConfig
    """
    if cfg.method == FIXED:
        n = int(cfg.points)
        w = 2.0 * np.pi * np.arange(n) / n
        v = check_integrand(np.broadcast_to(f(w), w.shape))
        return max(0.0, 0.5 * float(np.mean(np.log2(1.0 + v))))

    def integrand(w: float) -> float:
        v = float(f(np.float64(w)))
        if not math.isfinite(v):
            raise ValueError("integrand has non-finite samples")
        if v < -NEG_TOL:
            raise ValueError(f"integrand is negative ({v:.3g})")
        return math.log2(1.0 + max(v, 0.0))

    val, _ = integrate.quad(integrand, 0.0, 2.0 * np.pi, epsabs=cfg.tol, epsrel=0.0, limit=2000)
    return max(0.0, val / (4.0 * np.pi))


def closed_form_ar(rho: float, power: float) -> float:
    """phi of a first-order AR density with the given power, in closed form.

    With ``chi = 1 + rho^2 + (1 - rho^2) P`` the numerator of ``1 + S`` factors
    as ``K |1 - zeta e^{jw}|^2`` with ``|zeta| < 1``, giving ``0.5 log2 K``.
    ``K = (chi + sqrt(chi^2 - 4 rho^2)) / 2`` is the same quantity written
    without the division by rho, so rho = 0 (the white limit) and negative rho
    need no special casing.
    """
    rho = float(rho)
    power = float(power)
    if not math.isfinite(rho) or abs(rho) >= 1.0:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    if not math.isfinite(power) or power < 0:
        raise ValueError(f"power must be finite and nonnegative, got {power}")
    if rho == 0.0:
        return eta(power)
    r2 = rho * rho
    chi = 1.0 + r2 + (1.0 - r2) * power
    k = 0.5 * (chi + math.sqrt((chi - 2.0 * abs(rho)) * (chi + 2.0 * abs(rho))))
    return 0.5 * math.log2(k)


def half_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0, pi] and weights of the n-point periodic trapezoid rule for phi.

    For an even integrand g(w) = g(2pi - w), ``sum(weights * log2(1 + g(nodes)))``
    equals the full n-point rule for phi.
    """
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(n // 2 + 1)
    w = 2.0 * np.pi * k / n
    wt = np.full(k.size, 1.0 / n)
    wt[0] = 0.5 / n
    if n % 2 == 0:
        wt[-1] = 0.5 / n
    return w, wt


def points_for_radius(radius, cap: int, tol: float = 1e-14, minimum: int = 16) -> np.ndarray:
    """Smallest power-of-two grid with ``radius**N <= tol`` (with 25% margin), capped.

    Accepts scalars or arrays; returns an int array of the same shape.
    """
    r = np.asarray(radius, dtype=float)
    out = np.full(r.shape, minimum, dtype=np.int64)
    live = r > 0
    if np.any(live):
        need = 1.25 * math.log(tol) / np.log(np.minimum(r[live], 1.0 - 1e-16))
        exp = np.ceil(np.log2(np.maximum(need, minimum)))
        out[live] = (2 ** exp).astype(np.int64)
    cap_pow = 1 << int(math.floor(math.log2(cap)))
    return np.minimum(np.maximum(out, minimum), max(cap_pow, minimum))
