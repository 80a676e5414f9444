"""Achievable-rate formulas for the two-user Gaussian interference channel.

Every scheme time-shares two modes over fractions ``lam`` and ``1 - lam`` of
the block. Inputs in each mode are stationary Gaussian processes whose
densities are scaled to the mode powers ``alpha*P1/lam``, ``beta*P2/lam``,
``(1-alpha)*P1/(1-lam)`` and ``(1-beta)*P2/(1-lam)``. A term multiplied by a
vanished fraction (``lam`` or ``1 - lam`` equal to 0) is 0.

Batched evaluation (``evaluate_points``) is what the optimizer uses; the
single-point functions are thin wrappers around it so that both paths give
identical numbers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .gaussian import JointGaussian, conditional_variance, gaussian_mi, hk_joint
from .model import ChannelParams, RatePair, eta
from .quadrature import DEFAULT, FIXED, QuadratureConfig, half_grid, phi, points_for_radius
from .spectra import (
    ArmaSpectrum,
    CosineSeriesSpectrum,
    Spectrum,
    evaluate,
    is_stable,
    pole_radius,
    unit_shape_table,
)

__all__ = [
    "SasonParams",
    "ArmaSchemeParams",
    "HkSchemeParams",
    "HkBaselineParams",
    "HkBounds",
    "Pentagon",
    "segment_powers",
    "check_power_accounting",
    "sason_rates",
    "theorem2_rates",
    "theorem3_rates",
    "theorem4_rates",
    "theorem5_rates",
    "pentagon_corners",
    "corollary_region_points",
    "hk_baseline_region",
    "hk_baseline_vertices",
    "gaussian_mi",
    "JointGaussian",
    "spectral_phi_batch",
    "SchemeDef",
    "SCHEMES",
    "get_scheme",
    "evaluate_points",
    "reevaluate",
    "DERIVATION",
    "PRINTED",
]

DERIVATION = "derivation"
PRINTED = "printed"

_EPS_ACCOUNT = 8 * np.finfo(float).eps


# ---------------------------------------------------------------------------
# parameter types


def _unit(name: str, v: float) -> float:
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


def _open(name: str, v: float) -> float:
    v = float(v)
    if not (-1.0 < v < 1.0):
        raise ValueError(f"{name} must lie in (-1, 1), got {v}")
    return v


@dataclass(frozen=True)
class SasonParams:
    """Power shares ``alpha``, ``beta`` and time share ``lam``, all in [0, 1]."""

    alpha: float
    beta: float
    lam: float

    def __post_init__(self) -> None:
        for f in ("alpha", "beta", "lam"):
            object.__setattr__(self, f, _unit(f, getattr(self, f)))

    def as_dict(self) -> dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta, "lambda": self.lam}


def _filter(f) -> tuple[tuple[float, ...], tuple[float, ...]]:
    ar, ma = f
    ar = tuple(float(x) for x in np.atleast_1d(np.asarray(ar, dtype=float)))
    ma = tuple(float(x) for x in np.atleast_1d(np.asarray(ma, dtype=float)))
    if not is_stable(ar):
        raise ValueError(f"unstable AR filter {ar}")
    if not all(math.isfinite(x) for x in ar + ma):
        raise ValueError("filter coefficients must be finite")
    return ar, ma


@dataclass(frozen=True)
class ArmaSchemeParams:
    """Time/power shares plus four (ar, ma) filters.

    Slots are ordered (user 1 / mode 1, user 2 / mode 1, user 1 / mode 2,
    user 2 / mode 2). In tied mode a user's two slots hold the same filter.
    """

    base: SasonParams
    filters: tuple
    mode: str = "split"

    def __post_init__(self) -> None:
        if len(self.filters) != 4:
            raise ValueError("exactly four filter slots are required")
        fl = tuple(_filter(f) for f in self.filters)
        object.__setattr__(self, "filters", fl)
        if self.mode not in ("tied", "split"):
            raise ValueError(f"mode must be 'tied' or 'split', got {self.mode!r}")
        if self.mode == "tied" and (fl[0] != fl[2] or fl[1] != fl[3]):
            raise ValueError("tied mode requires each user's two slots to share one filter")

    @classmethod
    def tied(cls, base: SasonParams, user1=((), ()), user2=((), ())) -> "ArmaSchemeParams":
        return cls(base, (user1, user2, user1, user2), "tied")

    @classmethod
    def split(cls, base: SasonParams, f11, f21, f12, f22) -> "ArmaSchemeParams":
        """Filters given as (user1/mode1, user2/mode1, user1/mode2, user2/mode2)."""
        return cls(base, (f11, f21, f12, f22), "split")

    @classmethod
    def first_order(
        cls, alpha, beta, lam, rho_x1=0.0, rho_x2=0.0, kappa1=0.0, kappa2=0.0
    ) -> "ArmaSchemeParams":
        return cls.tied(SasonParams(alpha, beta, lam), ((rho_x1,), (kappa1,)), ((rho_x2,), (kappa2,)))


@dataclass(frozen=True)
class HkSchemeParams:
    """The 11-vector (alpha, beta, lam, xi1, xi2, rho_x1, rho_x2, rho_u1, rho_v1, rho_u2, rho_v2)."""

    alpha: float
    beta: float
    lam: float
    xi1: float
    xi2: float
    rho_x1: float = 0.0
    rho_x2: float = 0.0
    rho_u1: float = 0.0
    rho_v1: float = 0.0
    rho_u2: float = 0.0
    rho_v2: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            chk = _unit if not f.name.startswith("rho") else _open
            object.__setattr__(self, f.name, chk(f.name, v))

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])

    def as_dict(self) -> dict[str, float]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in HK_NAMES}


@dataclass(frozen=True)
class HkBaselineParams:
    """Private power fractions of the two users."""

    xi1: float
    xi2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi1", _unit("xi1", self.xi1))
        object.__setattr__(self, "xi2", _unit("xi2", self.xi2))


@dataclass(frozen=True)
class HkBounds:
    """Right-hand sides of R1<=rho1, R2<=rho2, R1+R2<=rho12, 2R1+R2<=rho10, R1+2R2<=rho20."""

    rho1: float
    rho2: float
    rho12: float
    rho10: float
    rho20: float


@dataclass(frozen=True)
class Pentagon:
    """{R1 <= r1_max, R2 <= r2_max, R1 + R2 <= r_sum}."""

    r1_max: float
    r2_max: float
    r_sum: float

    def __iter__(self):
        return iter((self.r1_max, self.r2_max, self.r_sum))


# ---------------------------------------------------------------------------
# power bookkeeping


def _mode_power(share, total, frac):
    # a mode whose per-use power is not representable (frac subnormal) counts as vanished
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        p = share * total / np.where(frac > 0, frac, 1.0)
    return np.where((frac > 0) & np.isfinite(p), p, 0.0)


def segment_powers(share, total, lam):
    """Mode powers ``share*total/lam`` and ``(1-share)*total/(1-lam)`` (0 in a vanished mode)."""
    share = np.asarray(share, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return _mode_power(share, total, lam), _mode_power(1.0 - share, total, 1.0 - lam)


def check_power_accounting(share, total, lam, p_mode1, p_mode2) -> None:
    """Assert lam*p_mode1 + (1-lam)*p_mode2 == total (to a few ulp) when both modes are live.

    When a mode has vanished only the live mode carries power and the spent
    power can be at most ``total``.
    """
    share = np.asarray(share, dtype=float)
    lam = np.asarray(lam, dtype=float)
    spent = lam * p_mode1 + (1.0 - lam) * p_mode2
    with np.errstate(divide="ignore", over="ignore"):
        both = (lam > 0) & (lam < 1) & np.isfinite(total / lam)
    bad = both & (np.abs(spent - total) > _EPS_ACCOUNT * total)
    bad |= ~both & (spent > total * (1 + _EPS_ACCOUNT))
    if np.any(bad):
        raise AssertionError("segment power accounting violated")


# ---------------------------------------------------------------------------
# batched phi evaluation


class _ArmaFamily:
    """Rows hold ``p`` AR then ``q`` MA coefficients."""

    def __init__(self, p: int, q: int):
        self.p, self.q = p, q

    def radius(self, rows: np.ndarray) -> np.ndarray:
        if self.p <= 1 and self.q <= 1:
            return np.max(np.abs(rows), axis=1) if rows.shape[1] else np.zeros(len(rows))
        return np.array([pole_radius(r[: self.p], r[self.p :]) for r in rows])

    def tabulate(self, rows: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        return unit_shape_table(rows[:, : self.p], rows[:, self.p :], nodes)


class _CosineFamily:
    """Rows hold cosine-series coefficients r_1..r_m (unit power)."""

    def radius(self, rows: np.ndarray):
        return None  # entire functions: use the configured grid

    def tabulate(self, rows: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        out = np.ones((rows.shape[0], nodes.size))
        for k in range(rows.shape[1]):
            out += 2.0 * rows[:, k : k + 1] * np.cos((k + 1) * nodes)
        return np.maximum(out, 0.0)


_CHUNK_ELEMS = 2_000_000


def spectral_phi_batch(
    gains: np.ndarray,
    rows: np.ndarray,
    num: np.ndarray,
    den: np.ndarray,
    family,
    cfg: QuadratureConfig = DEFAULT,
    threads: int = 1,
    backend: str | None = None,
) -> np.ndarray:
    """phi of ``num.g / (1 + den.g)`` for batches of base densities.

    Parameters
    ----------
    gains : ndarray (N, S)
        Power of each base density.
    rows : ndarray (N, S, c)
        Shape coefficients of each base density (interpreted by ``family``).
    num, den : ndarray (T, S)
    family : shape family (ARMA or cosine)
    cfg : QuadratureConfig
    threads : int
        Number of worker threads for the compiled loops.
    backend : {"compiled", "python"}, optional

    Returns
    -------
    ndarray (N, T)
    """
    gains = np.ascontiguousarray(gains, dtype=float)
    n_pts, n_sp = gains.shape
    rows = np.asarray(rows, dtype=float).reshape(n_pts, n_sp, -1)
    num = np.ascontiguousarray(num, dtype=float)
    den = np.ascontiguousarray(den, dtype=float)
    out = np.zeros((n_pts, num.shape[0]))
    if n_pts == 0:
        return out
    flat = rows.reshape(n_pts * n_sp, -1)
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    inv = inv.reshape(n_pts, n_sp)

    if cfg.method != FIXED:
        return _adaptive_batch(gains, uniq, inv, num, den, family, cfg)

    rad = family.radius(uniq)
    if rad is None or not cfg.size_to_poles:
        npts = np.full(n_pts, int(cfg.points), dtype=np.int64)
    else:
        r_pt = np.where(gains > 0, rad[inv], 0.0).max(axis=1)
        npts = points_for_radius(r_pt, int(cfg.points), cfg.grid_tol)

    fn = kernels.get_backend(backend) if backend else kernels.phi_terms
    jobs = []
    for n_nodes in np.unique(npts):
        idx = np.flatnonzero(npts == n_nodes)
        nodes, wts = half_grid(int(n_nodes))
        step = max(1, _CHUNK_ELEMS // (n_sp * nodes.size))
        for lo in range(0, idx.size, step):
            jobs.append((idx[lo : lo + step], nodes, wts))

    def run(job):
        idx, nodes, wts = job
        used, local = np.unique(inv[idx], return_inverse=True)
        table = np.ascontiguousarray(family.tabulate(uniq[used], nodes))
        sidx = np.ascontiguousarray(local.reshape(idx.size, n_sp), dtype=np.int64)
        return fn(np.ascontiguousarray(gains[idx]), sidx, table, wts, num, den)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    for (idx, _, _), res in zip(jobs, results):
        out[idx] = res
    return out


def _adaptive_batch(gains, uniq, inv, num, den, family, cfg):
    out = np.zeros((gains.shape[0], num.shape[0]))
    for i in range(gains.shape[0]):
        sel = uniq[inv[i]]

        def g(w, sel=sel, i=i):
            w1 = np.atleast_1d(w)
            return gains[i][:, None] * family.tabulate(sel, w1)

        for t in range(num.shape[0]):
            if not np.any(num[t]):
                continue

            def f(w, t=t, g=g):
                vals = g(w)
                v = (num[t] @ vals) / (1.0 + den[t] @ vals)
                return v if np.ndim(w) else float(v[0])

            out[i, t] = phi(f, cfg)
    return out


# ---------------------------------------------------------------------------
# Sason region (white inputs, closed form)


def _eta(x):
    return 0.5 * np.log2(1.0 + np.maximum(x, 0.0))


def sason_batch(ch: ChannelParams, alpha, beta, lam) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized white-input region (rates for arrays of alpha, beta, lam)."""
    lam = np.asarray(lam, dtype=float)
    lb = 1.0 - lam
    g11, g12 = segment_powers(alpha, ch.p1, lam)
    g21, g22 = segment_powers(beta, ch.p2, lam)
    a12, a21 = ch.a12, ch.a21
    r1 = lam * _eta(g11) + lb * np.minimum(_eta(g12 / (1.0 + a12 * g22)), _eta(a21 * g12 / (1.0 + g22)))
    r2 = lb * _eta(g22) + lam * np.minimum(_eta(g21 / (1.0 + a21 * g11)), _eta(a12 * g21 / (1.0 + g11)))
    return r1, r2


def sason_rates(ch: ChannelParams, p: SasonParams) -> RatePair:
    """Rate pair of the white-input two-mode scheme."""
    r1, r2 = sason_batch(ch, p.alpha, p.beta, p.lam)
    return RatePair(float(r1), float(r2), {"scheme": "sason", "params": p.as_dict()})


# ---------------------------------------------------------------------------
# two-mode spectral region (general spectra and ARMA)


def _mode_gains(ch: ChannelParams, alpha, beta, lam) -> np.ndarray:
    """(N, 4) powers of slots (u1/m1, u2/m1, u1/m2, u2/m2)."""
    g11, g12 = segment_powers(alpha, ch.p1, lam)
    g21, g22 = segment_powers(beta, ch.p2, lam)
    check_power_accounting(alpha, ch.p1, lam, g11, g12)
    check_power_accounting(beta, ch.p2, lam, g21, g22)
    return np.stack(np.broadcast_arrays(g11, g21, g12, g22), axis=-1)


def _two_mode_terms(ch: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    a12, a21 = ch.a12, ch.a21
    # slot order: 0 = u1/m1, 1 = u2/m1, 2 = u1/m2, 3 = u2/m2
    num = np.array(
        [
            [1, 0, 0, 0],  # A: own signal, mode 1
            [0, a12, 0, 0],  # B: user-2 signal at receiver 1 over user 1
            [0, 1, 0, 0],  # C: user-2 signal at receiver 2 over leaked user 1
            [0, 0, 1, 0],  # D: user-1 signal at receiver 1 over leaked user 2
            [0, 0, a21, 0],  # E: user-1 signal at receiver 2 over user 2
            [0, 0, 0, 1],  # F: own signal, mode 2
        ],
        dtype=float,
    )
    den = np.array(
        [
            [0, 0, 0, 0],
            [1, 0, 0, 0],
            [a21, 0, 0, 0],
            [0, 0, 0, a12],
            [0, 0, 0, 1],
            [0, 0, 0, 0],
        ],
        dtype=float,
    )
    return num, den


def _two_mode_rates(lam, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam = np.asarray(lam, dtype=float)
    lb = 1.0 - lam
    r1 = np.where(lam > 0, lam * t[:, 0], 0.0) + np.where(lb > 0, lb * np.minimum(t[:, 3], t[:, 4]), 0.0)
    r2 = np.where(lb > 0, lb * t[:, 5], 0.0) + np.where(lam > 0, lam * np.minimum(t[:, 1], t[:, 2]), 0.0)
    return np.maximum(r1, 0.0), np.maximum(r2, 0.0)


def arma_batch(
    ch: ChannelParams,
    alpha,
    beta,
    lam,
    ar: np.ndarray,
    ma: np.ndarray,
    cfg: QuadratureConfig = DEFAULT,
    threads: int = 1,
    backend: str | None = None,
):
    """Vectorized ARMA region.

    ``ar`` and ``ma`` have shape (N, 4, p) and (N, 4, q) over the four slots.
    """
    gains = _mode_gains(ch, alpha, beta, lam)
    n = gains.shape[0]
    ar = np.asarray(ar, dtype=float).reshape(n, 4, -1)
    ma = np.asarray(ma, dtype=float).reshape(n, 4, -1)
    rows = np.concatenate([ar, ma], axis=2)
    num, den = _two_mode_terms(ch)
    t = spectral_phi_batch(gains, rows, num, den, _ArmaFamily(ar.shape[2], ma.shape[2]), cfg, threads, backend)
    return _two_mode_rates(np.broadcast_to(lam, (n,)), t)


def cosine_batch(ch, alpha, beta, lam, coeffs: np.ndarray, cfg=DEFAULT, threads=1, backend=None):
    """Vectorized general-spectra region with cosine-series slots; ``coeffs`` is (N, 4, m)."""
    gains = _mode_gains(ch, alpha, beta, lam)
    n = gains.shape[0]
    coeffs = np.asarray(coeffs, dtype=float).reshape(n, 4, -1)
    num, den = _two_mode_terms(ch)
    t = spectral_phi_batch(gains, coeffs, num, den, _CosineFamily(), cfg, threads, backend)
    return _two_mode_rates(np.broadcast_to(lam, (n,)), t)


def theorem2_rates(
    ch: ChannelParams,
    p: SasonParams,
    spectra: Sequence[Spectrum],
    cfg: QuadratureConfig = DEFAULT,
) -> RatePair:
    """Two-mode region for arbitrary slot spectra.

    ``spectra`` are shapes for slots (u1/m1, u2/m1, u1/m2, u2/m2); their
    powers are reset to the mode powers before evaluation.
    """
    if len(spectra) != 4:
        raise ValueError("four slot spectra are required")
    gains = _mode_gains(ch, [p.alpha], [p.beta], [p.lam])[0]
    slots = []
    for s, target in zip(spectra, gains):
        if not isinstance(s, (ArmaSpectrum, CosineSeriesSpectrum)):
            raise TypeError("slots must be spectra")
        scaled = s.with_power(float(target))
        if abs(scaled.power - target) > 1e-12 * max(1.0, target):
            raise ValueError("slot power does not match the scheme parameters")
        slots.append(scaled)
    num, den = _two_mode_terms(ch)

    def term(t: int) -> float:
        if not np.any(num[t]):
            return 0.0

        def f(w):
            v = [np.broadcast_to(evaluate(s, w), np.shape(w)) for s in slots]
            a = sum(num[t, k] * v[k] for k in range(4))
            b = 1.0 + sum(den[t, k] * v[k] for k in range(4))
            return a / b

        return phi(f, cfg)

    t = np.array([[term(i) for i in range(6)]])
    r1, r2 = _two_mode_rates(np.array([p.lam]), t)
    return RatePair(float(r1[0]), float(r2[0]), {"scheme": "theorem2", "params": p.as_dict()})


def _pad_filters(filters) -> tuple[np.ndarray, np.ndarray]:
    p = max(len(f[0]) for f in filters)
    q = max(len(f[1]) for f in filters)
    ar = np.zeros((1, 4, p))
    ma = np.zeros((1, 4, q))
    for k, (a, m) in enumerate(filters):
        ar[0, k, : len(a)] = a
        ma[0, k, : len(m)] = m
    return ar, ma


def theorem3_rates(
    ch: ChannelParams,
    p: ArmaSchemeParams,
    cfg: QuadratureConfig = DEFAULT,
    backend: str | None = None,
) -> RatePair:
    """Two-mode region with ARMA inputs (any order; tied or split filters)."""
    ar, ma = _pad_filters(p.filters)
    b = p.base
    r1, r2 = arma_batch(ch, [b.alpha], [b.beta], [b.lam], ar, ma, cfg, backend=backend)
    prov = {"scheme": "arma" if p.mode == "tied" else "arma-split", "params": _arma_param_dict(p)}
    return RatePair(float(r1[0]), float(r2[0]), prov)


def _arma_param_dict(p: ArmaSchemeParams) -> dict:
    d = dict(p.base.as_dict())
    labels = ("11", "12", "21", "22")  # mode then user
    for lab, (ar, ma) in zip(labels, p.filters):
        d[f"ar_{lab}"] = list(ar)
        d[f"ma_{lab}"] = list(ma)
    return d


# ---------------------------------------------------------------------------
# rate-splitting regions (private/common split of the interfering user)

HK_NAMES = (
    "alpha", "beta", "lambda", "xi1", "xi2",
    "rho_x1", "rho_x2", "rho_u1", "rho_v1", "rho_u2", "rho_v2",
)  # fmt: skip

# base densities: 0 x1, 1 x2, 2 u1, 3 v1, 4 u2, 5 v2
_HK_TERMS = (
    # mode 1 (user 1 plain, user 2 split)
    "m1_x1", "m1_uv2", "m1_v2", "m1_u2", "m1_v2_sc", "m1_v2_sim", "m1_sum",
    # mode 2 (user 2 plain, user 1 split)
    "m2_x2", "m2_uv1", "m2_v1", "m2_u1", "m2_v1_sc", "m2_v1_sim", "m2_sum",
)  # fmt: skip
_HK_INDEX = {n: i for i, n in enumerate(_HK_TERMS)}


def _hk_terms(ch: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    a12, a21 = ch.a12, ch.a21
    X1, X2, U1, V1, U2, V2 = range(6)
    spec = {
        "m1_x1": ({X1: 1}, {U2: a12}),
        "m1_uv2": ({U2: 1, V2: 1}, {X1: a21}),
        "m1_v2": ({V2: 1}, {X1: a21}),
        "m1_u2": ({U2: 1}, {X1: a21}),
        "m1_v2_sc": ({V2: a12}, {X1: 1, U2: a12}),
        "m1_v2_sim": ({V2: a12}, {U2: a12}),
        "m1_sum": ({X1: 1, V2: a12}, {U2: a12}),
        "m2_x2": ({X2: 1}, {U1: a21}),
        "m2_uv1": ({U1: 1, V1: 1}, {X2: a12}),
        "m2_v1": ({V1: 1}, {X2: a12}),
        "m2_u1": ({U1: 1}, {X2: a12}),
        "m2_v1_sc": ({V1: a21}, {X2: 1, U1: a21}),
        "m2_v1_sim": ({V1: a21}, {U1: a21}),
        "m2_sum": ({X2: 1, V1: a21}, {U1: a21}),
    }
    num = np.zeros((len(_HK_TERMS), 6))
    den = np.zeros((len(_HK_TERMS), 6))
    for t, name in enumerate(_HK_TERMS):
        for s, c in spec[name][0].items():
            num[t, s] = c
        for s, c in spec[name][1].items():
            den[t, s] = c
    return num, den


def _hk_gains(ch: ChannelParams, P: np.ndarray) -> np.ndarray:
    alpha, beta, lam, xi1, xi2 = (P[:, i] for i in range(5))
    x1, m2_p1 = segment_powers(alpha, ch.p1, lam)
    m1_p2, x2 = segment_powers(beta, ch.p2, lam)
    check_power_accounting(alpha, ch.p1, lam, x1, m2_p1)
    check_power_accounting(beta, ch.p2, lam, m1_p2, x2)
    return np.stack([x1, x2, xi1 * m2_p1, (1.0 - xi1) * m2_p1, xi2 * m1_p2, (1.0 - xi2) * m1_p2], axis=1)


def hk_phi_batch(ch, P, cfg=DEFAULT, threads=1, backend=None) -> np.ndarray:
    """All 14 phi terms of the rate-splitting regions for rows of ``P`` (N, 11)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    gains = _hk_gains(ch, P)
    rows = P[:, 5:11, None]  # one AR coefficient per base density
    num, den = _hk_terms(ch)
    return spectral_phi_batch(gains, rows, num, den, _ArmaFamily(1, 0), cfg, threads, backend)


def _hk_mode_parts(t: np.ndarray, decoding: str):
    g = lambda n: t[:, _HK_INDEX[n]]  # noqa: E731
    third1 = g("m1_v2_sc") if decoding == "sc" else g("m1_v2_sim")
    third2 = g("m2_v1_sc") if decoding == "sc" else g("m2_v1_sim")
    # user-2 rate in mode 1 and user-1 rate in mode 2
    b1 = np.minimum(np.minimum(g("m1_uv2"), g("m1_v2") + g("m1_u2")), third1 + g("m1_u2"))
    b2 = np.minimum(np.minimum(g("m2_uv1"), g("m2_v1") + g("m2_u1")), third2 + g("m2_u1"))
    return g("m1_x1"), b1, g("m2_x2"), b2


def _w(lam, x):
    return np.where(lam > 0, lam * x, 0.0)


def theorem4_batch(lam, t):
    lam = np.asarray(lam, dtype=float)
    lb = 1.0 - lam
    a1, b1, a2, b2 = _hk_mode_parts(t, "sc")
    r1 = _w(lam, a1) + _w(lb, b2)
    r2 = _w(lb, a2) + _w(lam, b1)
    return np.maximum(r1, 0.0), np.maximum(r2, 0.0)


def theorem5_batch(lam, t, variant: str = DERIVATION):
    """(r1_max, r2_max, r_sum) arrays.

    ``variant="derivation"`` weights mode-1 terms by lam and mode-2 terms by
    1-lam, and caps each mode's sum bound at the sum of that mode's single-user
    bounds before adding the modes (the sum of two pentagons is the pentagon
    of the summed, capped bounds). ``variant="printed"`` uses 1-lam for both
    parts of the user-2 bound and adds the raw sum bounds.
    """
    lam = np.asarray(lam, dtype=float)
    lb = 1.0 - lam
    a1, b1, a2, b2 = _hk_mode_parts(t, "sim")
    g = lambda n: t[:, _HK_INDEX[n]]  # noqa: E731
    s1 = g("m1_sum") + g("m1_u2")
    s2 = g("m2_sum") + g("m2_u1")
    r1 = _w(lam, a1) + _w(lb, b2)
    if variant == DERIVATION:
        r2 = _w(lb, a2) + _w(lam, b1)
        rs = _w(lam, np.minimum(s1, a1 + b1)) + _w(lb, np.minimum(s2, a2 + b2))
    elif variant == PRINTED:
        r2 = _w(lb, a2) + _w(lb, b1)
        rs = _w(lam, s1) + _w(lb, s2)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return np.maximum(r1, 0.0), np.maximum(r2, 0.0), np.maximum(rs, 0.0)


def pentagon_corners(r1_max, r2_max, r_sum):
    """The two dominant corners of {R1<=r1_max, R2<=r2_max, R1+R2<=r_sum}.

    Returns arrays ``(c1_r1, c1_r2, c2_r1, c2_r2)``.
    """
    r1_max, r2_max, r_sum = (np.asarray(x, dtype=float) for x in (r1_max, r2_max, r_sum))
    c1 = (r1_max, np.maximum(np.minimum(r2_max, r_sum - r1_max), 0.0))
    c2 = (np.maximum(np.minimum(r1_max, r_sum - r2_max), 0.0), r2_max)
    return c1[0], c1[1], c2[0], c2[1]


def _hk_point(p: HkSchemeParams) -> np.ndarray:
    return p.as_vector()[None, :]


def theorem4_rates(ch: ChannelParams, p: HkSchemeParams, cfg=DEFAULT, backend=None) -> RatePair:
    """Rectangle corner of the successive-cancellation rate-splitting region."""
    t = hk_phi_batch(ch, _hk_point(p), cfg, backend=backend)
    r1, r2 = theorem4_batch([p.lam], t)
    return RatePair(float(r1[0]), float(r2[0]), {"scheme": "hk-sc", "params": p.as_dict()})


def theorem5_rates(
    ch: ChannelParams, p: HkSchemeParams, cfg=DEFAULT, variant: str = DERIVATION, backend=None
) -> Pentagon:
    """Pentagon bounds of the simultaneous-decoding rate-splitting region."""
    t = hk_phi_batch(ch, _hk_point(p), cfg, backend=backend)
    r1, r2, rs = theorem5_batch([p.lam], t, variant)
    return Pentagon(float(r1[0]), float(r2[0]), float(rs[0]))


def corollary_region_points(ch: ChannelParams, params: Sequence[HkSchemeParams], cfg=DEFAULT, variant=DERIVATION):
    """Convex hull of the union of both rate-splitting regions over ``params``."""
    from .frontier import Frontier, convex_hull

    if len(params) == 0:
        raise ValueError("empty parameter list")
    P = np.array([p.as_vector() for p in params])
    pts = evaluate_points(ch, "hk-corollary", P, cfg, variant=variant)
    return convex_hull(Frontier.from_contributions(pts))


# ---------------------------------------------------------------------------
# baseline: rate splitting with i.i.d. inputs and constant time sharing


def _baseline_bound_arrays(ch: ChannelParams, xi1, xi2) -> dict[str, np.ndarray]:
    j = hk_joint(ch, np.atleast_1d(xi1), np.atleast_1d(xi2))
    cache: dict = {}

    def I(y, tgt, given=()):  # noqa: E743
        key = (y, tuple(tgt), tuple(given))
        if key not in cache:
            v0 = conditional_variance(j, y, list(given))
            v1 = conditional_variance(j, y, list(given) + list(tgt))
            cache[key] = np.maximum(0.5 * np.log2(v0 / v1), 0.0)
        return cache[key]

    pos = lambda x: np.maximum(x, 0.0)  # noqa: E731
    I1 = I("Y1", ["U1"], ["V1", "V2"])
    I2 = I("Y2", ["U2"], ["V1", "V2"])
    s1 = np.minimum(I("Y1", ["V1"], ["V2"]), I("Y2", ["V1"], ["U2", "V2"]))
    s2 = np.minimum(I("Y2", ["V2"], ["V1"]), I("Y1", ["V2"], ["U1", "V1"]))
    s12 = np.minimum.reduce(
        [
            I("Y1", ["V1", "V2"]),
            I("Y2", ["V1", "V2"]),
            I("Y1", ["V1"], ["V2"]) + I("Y2", ["V2"], ["V1"]),
            I("Y2", ["V1"], ["V2"]) + I("Y1", ["V2"], ["V1"]),
        ]
    )
    y2v1 = I("Y2", ["V1"], ["V2"])
    y1v2 = I("Y1", ["V2"], ["V1"])
    rho10 = 2 * s1 + 2 * I1 + I2 - pos(s1 - y2v1) + np.minimum.reduce(
        [
            I("Y2", ["V2"], ["V1"]),
            I("Y2", ["V2"]) + pos(y2v1 - s1),
            I("Y1", ["V2"], ["V1"]),
            I("Y1", ["V1", "V2"]) - s1,
        ]
    )
    rho20 = 2 * s2 + I1 + 2 * I2 - pos(s2 - y1v2) + np.minimum.reduce(
        [
            I("Y1", ["V1"], ["V2"]),
            I("Y1", ["V1"]) + pos(y1v2 - s2),
            I("Y2", ["V1"], ["V2"]),
            I("Y2", ["V2", "V1"]) - s2,
        ]
    )
    return {
        "rho1": s1 + I1,
        "rho2": s2 + I2,
        "rho12": s12 + I1 + I2,
        "rho10": rho10,
        "rho20": rho20,
    }


def hk_baseline_region(ch: ChannelParams, p: HkBaselineParams) -> HkBounds:
    """The five bounds of the rate-splitting region with i.i.d. Gaussian auxiliaries."""
    b = _baseline_bound_arrays(ch, p.xi1, p.xi2)
    return HkBounds(**{k: float(v[0]) for k, v in b.items()})


# constraint lines c1*R1 + c2*R2 <= rhs, in order rho1, rho2, rho12, rho10, rho20, R1>=0, R2>=0
_LINES = np.array([[1, 0], [0, 1], [1, 1], [2, 1], [1, 2], [-1, 0], [0, -1]], dtype=float)
_PAIRS = [(i, j) for i in range(7) for j in range(i + 1, 7)]


def hk_baseline_vertices(ch: ChannelParams, xi1, xi2) -> np.ndarray:
    """Vertices of each baseline polygon; (N, 21, 2) with NaN for non-vertices."""
    b = _baseline_bound_arrays(ch, xi1, xi2)
    n = b["rho1"].shape[0]
    rhs = np.stack([b["rho1"], b["rho2"], b["rho12"], b["rho10"], b["rho20"], np.zeros(n), np.zeros(n)], axis=1)
    out = np.full((n, len(_PAIRS), 2), np.nan)
    for k, (i, j) in enumerate(_PAIRS):
        A = _LINES[[i, j]]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        if det == 0:
            continue
        x = (rhs[:, i] * A[1, 1] - A[0, 1] * rhs[:, j]) / det
        y = (A[0, 0] * rhs[:, j] - rhs[:, i] * A[1, 0]) / det
        xy = np.stack([x, y], axis=1)
        slack = rhs - xy @ _LINES.T
        ok = np.all(slack >= -1e-12 * np.maximum(1.0, np.abs(rhs)), axis=1)
        out[ok, k] = np.maximum(xy[ok], 0.0)
    return out


# ---------------------------------------------------------------------------
# scheme registry used by the optimizer and the CLI


@dataclass(frozen=True)
class SchemeDef:
    """Parameter layout and batch evaluator of a scheme.

    ``lower``/``upper`` give the support; ``open_`` marks open intervals
    (their default grids are clipped to +-0.99).
    """

    name: str
    names: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    open_: tuple[bool, ...]
    tags: tuple[str, ...]
    default_search: str
    evaluate: Callable = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.names)


def _eval_sason(ch, P, cfg, threads, backend, variant):
    r1, r2 = sason_batch(ch, P[:, 0], P[:, 1], P[:, 2])
    return np.stack([r1, r2], axis=-1)[:, None, :]


def _eval_theorem2(ch, P, cfg, threads, backend, variant):
    coeffs = P[:, 3:7, None]
    r1, r2 = cosine_batch(ch, P[:, 0], P[:, 1], P[:, 2], coeffs, cfg, threads, backend)
    return np.stack([r1, r2], axis=-1)[:, None, :]


def _eval_arma(ch, P, cfg, threads, backend, variant):
    rho_x1, rho_x2, k1, k2 = (P[:, 3 + i] for i in range(4))
    ar = np.stack([rho_x1, rho_x2, rho_x1, rho_x2], axis=1)[:, :, None]
    ma = np.stack([k1, k2, k1, k2], axis=1)[:, :, None]
    r1, r2 = arma_batch(ch, P[:, 0], P[:, 1], P[:, 2], ar, ma, cfg, threads, backend)
    return np.stack([r1, r2], axis=-1)[:, None, :]


def _eval_arma_split(ch, P, cfg, threads, backend, variant):
    # columns: rho_1x1, kappa_11, rho_1x2, kappa_12, rho_2x1, kappa_21, rho_2x2, kappa_22
    ar = P[:, [3, 5, 7, 9]][:, :, None]
    ma = P[:, [4, 6, 8, 10]][:, :, None]
    r1, r2 = arma_batch(ch, P[:, 0], P[:, 1], P[:, 2], ar, ma, cfg, threads, backend)
    return np.stack([r1, r2], axis=-1)[:, None, :]


def _eval_hk(kind):
    def run(ch, P, cfg, threads, backend, variant):
        t = hk_phi_batch(ch, P, cfg, threads, backend)
        lam = P[:, 2]
        pts = []
        if kind in ("sc", "corollary"):
            r1, r2 = theorem4_batch(lam, t)
            pts.append(np.stack([r1, r2], axis=-1))
        if kind in ("sim", "corollary"):
            c = pentagon_corners(*theorem5_batch(lam, t, variant))
            pts.append(np.stack([c[0], c[1]], axis=-1))
            pts.append(np.stack([c[2], c[3]], axis=-1))
        return np.stack(pts, axis=1)

    return run


def _eval_baseline(ch, P, cfg, threads, backend, variant):
    return hk_baseline_vertices(ch, P[:, 0], P[:, 1])


_U3 = (("alpha", "beta", "lambda"), (0.0,) * 3, (1.0,) * 3, (False,) * 3)


def _mk(name, extra_names, lo, hi, op, tags, search, fn):
    names = _U3[0] + tuple(extra_names)
    k = len(extra_names)
    return SchemeDef(
        name,
        names,
        _U3[1] + (lo,) * k,
        _U3[2] + (hi,) * k,
        _U3[3] + (op,) * k,
        tags,
        search,
        fn,
    )


SCHEMES: dict[str, SchemeDef] = {
    "sason": _mk("sason", (), 0, 1, False, ("rect",), "grid", _eval_sason),
    "theorem2": _mk("theorem2", ("r_11", "r_21", "r_12", "r_22"), -0.5, 0.5, False, ("rect",), "grid", _eval_theorem2),
    "arma": _mk("arma", ("rho_x1", "rho_x2", "kappa1", "kappa2"), -1, 1, True, ("rect",), "grid", _eval_arma),
    "arma-split": _mk(
        "arma-split",
        ("rho_1x1", "kappa_11", "rho_1x2", "kappa_12", "rho_2x1", "kappa_21", "rho_2x2", "kappa_22"),
        -1,
        1,
        True,
        ("rect",),
        "random",
        _eval_arma_split,
    ),
    "hk-sc": SchemeDef(
        "hk-sc", HK_NAMES, (0.0,) * 5 + (-1.0,) * 6, (1.0,) * 11, (False,) * 5 + (True,) * 6,
        ("sc",), "random", _eval_hk("sc"),
    ),  # fmt: skip
    "hk-sim": SchemeDef(
        "hk-sim", HK_NAMES, (0.0,) * 5 + (-1.0,) * 6, (1.0,) * 11, (False,) * 5 + (True,) * 6,
        ("sim-r1", "sim-r2"), "random", _eval_hk("sim"),
    ),  # fmt: skip
    "hk-corollary": SchemeDef(
        "hk-corollary", HK_NAMES, (0.0,) * 5 + (-1.0,) * 6, (1.0,) * 11, (False,) * 5 + (True,) * 6,
        ("sc", "sim-r1", "sim-r2"), "random", _eval_hk("corollary"),
    ),  # fmt: skip
    "hk-baseline": SchemeDef(
        "hk-baseline", ("xi1", "xi2"), (0.0, 0.0), (1.0, 1.0), (False, False),
        tuple(f"v{i}{j}" for i, j in _PAIRS), "grid", _eval_baseline,
    ),  # fmt: skip
}


def get_scheme(name: str) -> SchemeDef:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}") from None


def evaluate_points(
    ch: ChannelParams,
    scheme: str,
    P: np.ndarray,
    cfg: QuadratureConfig = DEFAULT,
    threads: int = 1,
    backend: str | None = None,
    variant: str = DERIVATION,
):
    """Rate points contributed by each parameter row.

    Returns
    -------
    Contributions
        Holds ``pts`` of shape (N, m, 2) (NaN rows contribute nothing), the
        parameter matrix and the scheme definition.
    """
    from .frontier import Contributions

    sd = get_scheme(scheme)
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape[1] != sd.dim:
        raise ValueError(f"scheme {scheme} expects {sd.dim} parameters, got {P.shape[1]}")
    lo = np.array(sd.lower)
    hi = np.array(sd.upper)
    op = np.array(sd.open_)
    bad = (P < lo) | (P > hi) | (op & ((P <= lo) | (P >= hi)))
    if np.any(bad) or not np.all(np.isfinite(P)):
        raise ValueError(f"parameters outside the support of {scheme}")
    pts = sd.evaluate(ch, P, cfg, threads, backend, variant)
    return Contributions(pts=pts, params=P, scheme=sd, variant=variant)


def reevaluate(ch: ChannelParams, point: RatePair, cfg: QuadratureConfig = DEFAULT, backend=None) -> RatePair:
    """Recompute a frontier point from its provenance."""
    prov = point.provenance
    sd = get_scheme(prov["scheme"])
    P = np.array([[prov["params"][n] for n in sd.names]])
    c = evaluate_points(ch, sd.name, P, cfg, backend=backend, variant=prov.get("variant", DERIVATION))
    k = sd.tags.index(prov.get("tag", sd.tags[0]))
    r1, r2 = c.pts[0, k]
    return RatePair(float(r1), float(r2), prov)
