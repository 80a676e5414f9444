"""Power-normalized spectral densities on [0, 2*pi).

Two families are supported:

* rational (ARMA) densities ``gain * |1 - sum kappa_l e^{j l w}|^2 / |1 - sum rho_l e^{j l w}|^2``
* truncated cosine series ``power * (1 + 2 sum r_k cos(k w))``

Every density owns its per-symbol power, i.e. ``(1/2pi) * integral(S) == power``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate

__all__ = [
    "ArmaSpectrum",
    "CosineSeriesSpectrum",
    "Spectrum",
    "make_arma",
    "make_constant",
    "make_cosine_series",
    "evaluate",
    "frequency_response_modulus",
    "frequency_response_table",
    "write_frequency_response",
    "mean_power",
    "unit_gain",
    "first_order_unit_gain",
    "pole_radius",
    "is_stable",
    "unit_shape_table",
]

NONNEG_GRID = 4096
NONNEG_MARGIN = 1e-12


def _as_coeffs(c) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(c if c is not None else [], dtype=float))
    if arr.ndim != 1:
        raise ValueError("coefficients must be a flat sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    return tuple(float(x) for x in arr)


def _reciprocal_roots(coeffs: Sequence[float]) -> np.ndarray:
    """Roots of z^p - c_1 z^{p-1} - ... - c_p, i.e. inverses of the roots of 1 - sum c_l z^l."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size == 0:
        return np.zeros(0)
    return np.roots(np.concatenate(([1.0], -c)))


def pole_radius(ar: Sequence[float], ma: Sequence[float] = ()) -> float:
    """Largest modulus among the reciprocal roots of the AR and MA polynomials.

    This is the radius that governs the geometric convergence of the periodic
    trapezoid rule for integrands built from the density.
    """
    r = 0.0
    for c in (ar, ma):
        roots = _reciprocal_roots(c)
        if roots.size:
            r = max(r, float(np.max(np.abs(roots))))
    return r


def is_stable(ar: Sequence[float]) -> bool:
    roots = _reciprocal_roots(ar)
    return bool(roots.size == 0 or np.max(np.abs(roots)) < 1.0)


def _poly_mod2(coeffs: Sequence[float], omega: np.ndarray) -> np.ndarray:
    """|1 - sum_l c_l e^{j l w}|^2 evaluated on ``omega``."""
    re = np.ones_like(omega)
    im = np.zeros_like(omega)
    for lag, c in enumerate(coeffs, start=1):
        if c != 0.0:
            re = re - c * np.cos(lag * omega)
            im = im - c * np.sin(lag * omega)
    return re * re + im * im


def first_order_unit_gain(rho, kappa):
    """Closed-form unit-power gain (1 - rho^2) / (1 + kappa^2 - 2 kappa rho)."""
    rho = np.asarray(rho, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    return (1.0 - rho * rho) / (1.0 + kappa * kappa - 2.0 * kappa * rho)


def unit_gain(ar: Sequence[float], ma: Sequence[float]) -> float:
    """Gain that makes the rational density have unit mean over [0, 2pi).

    Order (<=1, <=1) uses the closed form; higher orders integrate the
    unit-gain density with the periodic trapezoid rule, doubling the grid
    until two successive estimates agree to 1e-15 relative.
    """
    ar = _as_coeffs(ar)
    ma = _as_coeffs(ma)
    if len(ar) <= 1 and len(ma) <= 1:
        rho = ar[0] if ar else 0.0
        kap = ma[0] if ma else 0.0
        if kap == 0.0 and rho == 0.0:
            return 1.0
        if 1.0 + kap * kap - 2.0 * kap * rho == 0.0:
            raise ValueError("degenerate ARMA filter: pole and zero cancel on the unit circle")
        return float(first_order_unit_gain(rho, kap))
    n = 256
    prev = None
    while True:
        w = 2.0 * np.pi * np.arange(n) / n
        var = float(np.mean(_poly_mod2(ma, w) / _poly_mod2(ar, w)))
        if prev is not None and abs(var - prev) <= 1e-15 * abs(var):
            break
        if n >= 1 << 22:
            break
        prev = var
        n *= 2
    if not (var > 0.0 and math.isfinite(var)):
        raise ValueError("ARMA filter has zero or non-finite variance")
    return 1.0 / var


@dataclass(frozen=True)
class ArmaSpectrum:
    """Rational spectral density with power normalization.

    Attributes
    ----------
    ar, ma : tuple of float
        Coefficients rho_1..rho_p and kappa_1..kappa_q.
    power : float
        Per-symbol variance (mean of the density over [0, 2pi)).
    gain : float
        Normalization sigma^2 (includes ``power``); set by :func:`make_arma`.
    """

    ar: tuple[float, ...]
    ma: tuple[float, ...]
    power: float
    gain: float

    def __call__(self, omega):
        return evaluate(self, omega)

    @property
    def order(self) -> tuple[int, int]:
        return len(self.ar), len(self.ma)

    @property
    def is_white(self) -> bool:
        return not any(self.ar) and not any(self.ma)

    def with_power(self, power: float) -> "ArmaSpectrum":
        return make_arma(self.ar, self.ma, power)


@dataclass(frozen=True)
class CosineSeriesSpectrum:
    """Density ``power * (1 + 2 sum_k r_k cos(k w))``."""

    coeffs: tuple[float, ...]
    power: float

    def __call__(self, omega):
        return evaluate(self, omega)

    @property
    def m(self) -> int:
        return len(self.coeffs)

    @property
    def is_white(self) -> bool:
        return not any(self.coeffs)

    def with_power(self, power: float) -> "CosineSeriesSpectrum":
        return make_cosine_series(self.coeffs, power)


Spectrum = Union[ArmaSpectrum, CosineSeriesSpectrum]


def _check_power(power) -> float:
    power = float(power)
    if not math.isfinite(power) or power < 0:
        raise ValueError(f"power must be finite and nonnegative, got {power}")
    return power


def make_arma(ar=(), ma=(), power: float = 1.0) -> ArmaSpectrum:
    """Build a power-normalized ARMA density.

    Raises
    ------
    ValueError
        If the AR polynomial has a root on or inside the unit circle, or the
        power is negative.
    """
    ar = _as_coeffs(ar)
    ma = _as_coeffs(ma)
    power = _check_power(power)
    if not is_stable(ar):
        raise ValueError(f"unstable AR polynomial: coefficients {ar}")
    gain = power * unit_gain(ar, ma)
    return ArmaSpectrum(ar=ar, ma=ma, power=power, gain=gain)


def make_constant(power: float) -> ArmaSpectrum:
    """White (i.i.d.) density equal to ``power`` everywhere."""
    return make_arma((), (), power)


def make_cosine_series(coeffs=(), power: float = 1.0) -> CosineSeriesSpectrum:
    """Build a truncated cosine-series density, checking nonnegativity on a dense grid."""
    coeffs = _as_coeffs(coeffs)
    power = _check_power(power)
    if coeffs:
        w = np.linspace(0.0, 2.0 * np.pi, NONNEG_GRID + 1)
        shape = _cosine_shape(coeffs, w)
        lo = float(shape.min())
        if lo < -NONNEG_MARGIN:
            raise ValueError(f"cosine series is negative on the grid (min {lo:.6g})")
    return CosineSeriesSpectrum(coeffs=coeffs, power=power)


def _cosine_shape(coeffs: Sequence[float], omega: np.ndarray) -> np.ndarray:
    out = np.ones_like(omega)
    for k, r in enumerate(coeffs, start=1):
        if r != 0.0:
            out = out + 2.0 * r * np.cos(k * omega)
    return out


def evaluate(spectrum: Spectrum, omega):
    """Evaluate the density at ``omega`` (radians). Scalars in, scalars out."""
    w = np.asarray(omega, dtype=float)
    if isinstance(spectrum, ArmaSpectrum):
        if spectrum.is_white:
            out = np.full_like(w, spectrum.power)
        else:
            out = spectrum.gain * _poly_mod2(spectrum.ma, w) / _poly_mod2(spectrum.ar, w)
    elif isinstance(spectrum, CosineSeriesSpectrum):
        out = spectrum.power * np.maximum(_cosine_shape(spectrum.coeffs, w), 0.0)
    else:
        raise TypeError(f"not a spectrum: {type(spectrum).__name__}")
    return float(out) if out.ndim == 0 else out


def frequency_response_modulus(spectrum: Spectrum, omega):
    """Unnormalized filter modulus |1 - sum kappa e^{-jlw}| / |1 - sum rho e^{-jlw}|."""
    if not isinstance(spectrum, ArmaSpectrum):
        raise TypeError("frequency response is only defined for ARMA spectra")
    w = np.asarray(omega, dtype=float)
    # |P(e^{-jw})| = |P(e^{jw})| for real coefficients
    out = np.sqrt(_poly_mod2(spectrum.ma, w) / _poly_mod2(spectrum.ar, w))
    return float(out) if out.ndim == 0 else out


def frequency_response_table(spectrum: Spectrum, points: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grid on [0, 2pi) and the filter modulus on it."""
    if points < 1:
        raise ValueError("points must be positive")
    w = 2.0 * np.pi * np.arange(points) / points
    return w, np.atleast_1d(frequency_response_modulus(spectrum, w))


def write_frequency_response(path, spectrum: Spectrum, points: int = 512) -> None:
    """Write ``omega,magnitude`` CSV with LF endings and 12 significant digits."""
    w, mag = frequency_response_table(spectrum, points)
    lines = ["omega,magnitude"]
    lines += [f"{a:.12g},{b:.12g}" for a, b in zip(w, mag)]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def mean_power(spectrum: Spectrum, tol: float = 1e-12) -> float:
    """(1/2pi) * integral of the density by adaptive quadrature."""
    if spectrum.is_white:
        return float(spectrum.power)
    val, _ = integrate.quad(
        lambda w: evaluate(spectrum, w), 0.0, 2.0 * np.pi, epsabs=tol, epsrel=tol, limit=1000
    )
    return val / (2.0 * np.pi)


def unit_shape_table(ar: np.ndarray, ma: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Unit-power densities for a batch of filters.

    Parameters
    ----------
    ar : ndarray, shape (U, p)
    ma : ndarray, shape (U, q)
    omega : ndarray, shape (K,)

    Returns
    -------
    ndarray, shape (U, K)
    """
    ar = np.atleast_2d(np.asarray(ar, dtype=float))
    ma = np.atleast_2d(np.asarray(ma, dtype=float))
    u = max(ar.shape[0], ma.shape[0])
    p, q = ar.shape[1], ma.shape[1]
    w = np.asarray(omega, dtype=float)

    def mod2(c: np.ndarray, order: int) -> np.ndarray:
        re = np.ones((u, w.size))
        im = np.zeros((u, w.size))
        for lag in range(1, order + 1):
            cl = c[:, lag - 1 : lag]
            re -= cl * np.cos(lag * w)
            im -= cl * np.sin(lag * w)
        return re * re + im * im

    num = mod2(ma, q) if q else np.ones((u, w.size))
    den = mod2(ar, p) if p else np.ones((u, w.size))
    if p <= 1 and q <= 1:
        rho = ar[:, 0] if p else np.zeros(u)
        kap = ma[:, 0] if q else np.zeros(u)
        g = first_order_unit_gain(rho, kap)
    else:
        g = np.array([unit_gain(a, m) for a, m in zip(ar, ma)])
    return g[:, None] * num / den


# the operation name used in the interface description
eval = evaluate  # noqa: A001
