"""Finite-blocklength check of the spectral rate formulas.

For n consecutive samples of stationary inputs the per-symbol mutual
informations are normalized log-determinants of Toeplitz covariance
matrices. As n grows they converge to phi integrals of the spectra; this
module computes both sides and reports the gap.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from .model import ChannelParams
from .quadrature import QuadratureConfig, phi, points_for_radius
from .spectra import ArmaSpectrum, Spectrum, evaluate, pole_radius

__all__ = [
    "TERMS",
    "TermResult",
    "OracleReport",
    "autocovariance",
    "arma_covariance",
    "first_order_covariance",
    "logdet_bits",
    "finite_n_rate",
    "spectral_limit",
    "convergence_report",
    "converged",
    "reports_to_json",
    "format_table",
]

TERMS = ("direct", "cond", "interference")
FFT_POINTS = 1 << 16
PSD_TOL = 1e-10
FLAT_TOL = 1e-12


def autocovariance(spectrum: Spectrum, lags: int, grid: int = FFT_POINTS) -> np.ndarray:
    """Autocovariances r[0..lags-1] by inverse transform of the density on ``grid`` points."""
    if lags < 1:
        raise ValueError("need at least one lag")
    if grid < 2 * lags:
        raise ValueError("transform grid too small for the requested lags")
    w = 2.0 * np.pi * np.arange(grid) / grid
    s = np.asarray(evaluate(spectrum, w), dtype=float)
    r = np.fft.ifft(s).real
    return r[:lags]


def arma_covariance(spectrum: Spectrum, n: int, grid: int = FFT_POINTS) -> np.ndarray:
    """Covariance of ``n`` consecutive samples of the stationary process.

    Parameters
    ----------
    spectrum : ArmaSpectrum or CosineSeriesSpectrum
    n : int
        Blocklength, ``1 <= n <= grid // 2``.

    Returns
    -------
    ndarray (n, n)
        Symmetric Toeplitz matrix; its diagonal is the spectrum's power.
    """
    if int(n) != n or n < 1:
        raise ValueError("blocklength must be a positive integer")
    if isinstance(spectrum, ArmaSpectrum) and pole_radius(spectrum.ar) >= 1.0:
        raise ValueError("spectrum is not stable")
    r = autocovariance(spectrum, int(n), grid)
    return linalg.toeplitz(r)


def first_order_covariance(rho: float, kappa: float, power: float, n: int) -> np.ndarray:
    """Covariance of a first-order ARMA recursion started from rest.

    ``x = A^{-1} B w`` with ``A`` unit lower bidiagonal (``-rho`` below the
    diagonal), ``B`` the same pattern with ``-kappa`` and ``w`` white with the
    stationary normalization. Early rows carry the start-up transient; deep
    rows approach the stationary covariance geometrically.
    """
    from .spectra import first_order_unit_gain

    if int(n) != n or n < 1:
        raise ValueError("blocklength must be a positive integer")
    if abs(rho) >= 1:
        raise ValueError("|rho| must be < 1")
    n = int(n)
    eye = np.eye(n)
    sub = np.eye(n, k=-1)
    a = eye - rho * sub
    b = eye - kappa * sub
    m = linalg.solve_triangular(a, b, lower=True)
    return float(first_order_unit_gain(rho, kappa)) * power * (m @ m.T)


def logdet_bits(m: np.ndarray) -> float:
    """log2 det of a symmetric positive definite matrix via Cholesky."""
    c = linalg.cholesky(m, lower=True, check_finite=True)
    return float(2.0 * np.sum(np.log2(np.diag(c))))


def _covariances(spectra, n):
    s1, s2 = spectra
    return arma_covariance(s1, n), arma_covariance(s2, n)


def _check_psd(r: np.ndarray) -> None:
    lo = float(np.linalg.eigvalsh(r).min())
    if lo < -PSD_TOL * max(1.0, float(np.abs(r).max())):
        raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {lo:.3g})")


def _term_matrices(term: str, ch: ChannelParams, r1: np.ndarray, r2: np.ndarray):
    eye = np.eye(r1.shape[0])
    if term == "direct":
        # I(X1; Y1 | X2)
        return eye + r1, eye
    if term == "interference":
        # I(X2; Y1): receiver 1 treating its own signal as noise
        return eye + r1 + ch.a12 * r2, eye + r1
    if term == "cond":
        # I(X2; Y2) with X1 as noise
        return eye + ch.a21 * r1 + r2, eye + ch.a21 * r1
    raise ValueError(f"unknown term {term!r}; choose from {TERMS}")


def finite_n_rate(term: str, ch: ChannelParams, spectra: Sequence[Spectrum], n: int, check_psd: bool = False) -> float:
    """Normalized mutual information (bits per use) at blocklength ``n``.

    Parameters
    ----------
    term : {"direct", "cond", "interference"}
        ``direct`` is I(X1;Y1|X2), ``interference`` is I(X2;Y1) and ``cond``
        is I(X2;Y2), the latter two with the other input treated as noise.
    spectra : pair of spectra
        Densities of X1 and X2.
    """
    if len(spectra) != 2:
        raise ValueError("need the two input spectra")
    r1, r2 = _covariances(spectra, n)
    if r1.shape != r2.shape:
        raise ValueError("covariance dimensions differ")
    if check_psd:
        _check_psd(r1)
        _check_psd(r2)
    num, den = _term_matrices(term, ch, r1, r2)
    return 0.5 * (logdet_bits(num) - logdet_bits(den)) / n


def _radius(s: Spectrum) -> float:
    if isinstance(s, ArmaSpectrum):
        return pole_radius(s.ar, s.ma)
    return 0.0


def spectral_limit(term: str, ch: ChannelParams, spectra: Sequence[Spectrum], points: int = 1 << 16) -> float:
    """phi-based limit of :func:`finite_n_rate` as n grows.

    Uses the periodic trapezoid rule on a grid sized to the filters' pole and
    zero radii (exact for white inputs).
    """
    s1, s2 = spectra
    r = max(_radius(s1), _radius(s2))
    n = int(points_for_radius(r, points, tol=1e-15))
    cfg = QuadratureConfig(points=max(n, 16))
    if term == "direct":
        f = lambda w: evaluate(s1, w)  # noqa: E731
    elif term == "interference":
        f = lambda w: ch.a12 * evaluate(s2, w) / (1.0 + evaluate(s1, w))  # noqa: E731
    elif term == "cond":
        f = lambda w: evaluate(s2, w) / (1.0 + ch.a21 * evaluate(s1, w))  # noqa: E731
    else:
        raise ValueError(f"unknown term {term!r}; choose from {TERMS}")
    return phi(f, cfg)


@dataclass(frozen=True)
class TermResult:
    term: str
    finite_rate: float
    limit_rate: float
    abs_error: float


@dataclass(frozen=True)
class OracleReport:
    """Finite-n rate against its spectral limit.

    With several terms checked, ``finite_rate`` and ``limit_rate`` are sums
    over ``terms``.
    """

    n: int
    finite_rate: float
    limit_rate: float
    abs_error: float
    terms: tuple[TermResult, ...]

    def as_dict(self) -> dict:
        return asdict(self)


def convergence_report(
    ch: ChannelParams,
    spectra: Sequence[Spectrum],
    term: str | Sequence[str],
    n_list: Sequence[int],
) -> list[OracleReport]:
    """One report per blocklength in ascending ``n_list``."""
    terms = (term,) if isinstance(term, str) else tuple(term)
    if not terms:
        raise ValueError("no terms requested")
    for t in terms:
        if t not in TERMS:
            raise ValueError(f"unknown term {t!r}; choose from {TERMS}")
    ns = [int(n) for n in n_list]
    if not ns:
        raise ValueError("empty n_list")
    if any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise ValueError("n_list must be positive and strictly ascending")
    limits = {t: spectral_limit(t, ch, spectra) for t in terms}
    out = []
    for n in ns:
        res = []
        for t in terms:
            fin = finite_n_rate(t, ch, spectra, n)
            res.append(TermResult(t, fin, limits[t], abs(fin - limits[t])))
        f = math.fsum(r.finite_rate for r in res)
        lim = math.fsum(r.limit_rate for r in res)
        out.append(OracleReport(n, f, lim, abs(f - lim), tuple(res)))
    return out


def converged(reports: Sequence[OracleReport], atol: float = FLAT_TOL) -> bool:
    """False when the error at the largest n exceeds the error at the smallest n.

    Errors at round-off level (below ``atol``) count as converged.
    """
    if not reports:
        raise ValueError("no reports")
    first, last = reports[0], reports[-1]
    for a, b in zip(first.terms, last.terms):
        if b.abs_error > atol and b.abs_error > a.abs_error:
            return False
    return True


def reports_to_json(reports: Sequence[OracleReport]) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def format_table(reports: Sequence[OracleReport]) -> str:
    lines = [f"{'n':>8}  {'term':<13}{'finite':>16}{'limit':>16}{'abs_error':>12}"]
    for r in reports:
        for t in r.terms:
            lines.append(f"{r.n:>8}  {t.term:<13}{t.finite_rate:>16.10f}{t.limit_rate:>16.10f}{t.abs_error:>12.3e}")
    return "\n".join(lines) + "\n"
