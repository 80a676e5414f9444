"""Mutual information between jointly Gaussian scalars.

All quantities are computed from one joint covariance matrix through
conditional variances (Schur complements), so that every term of a rate
bound comes from the same assembly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import ChannelParams

__all__ = ["JointGaussian", "gaussian_mi", "conditional_variance", "hk_joint"]

PSD_TOL = 1e-10


@dataclass(frozen=True)
class JointGaussian:
    """Zero-mean jointly Gaussian scalars.

    ``cov`` is (n, n) or a stack (B, n, n) sharing the variable names.
    """

    names: tuple[str, ...]
    cov: np.ndarray

    def __post_init__(self) -> None:
        cov = np.asarray(self.cov, dtype=float)
        n = len(self.names)
        if cov.shape[-2:] != (n, n):
            raise ValueError(f"covariance shape {cov.shape} does not match {n} names")
        if len(set(self.names)) != n:
            raise ValueError("variable names must be unique")
        if not np.all(np.isfinite(cov)):
            raise ValueError("covariance must be finite")
        if not np.allclose(cov, np.swapaxes(cov, -1, -2), rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("covariance is not symmetric")
        scale = max(1.0, float(np.abs(cov).max()))
        lo = float(np.linalg.eigvalsh(cov).min())
        if lo < -PSD_TOL * scale:
            raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {lo:.3g})")
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_linear(
        cls,
        sources: Mapping[str, float | np.ndarray],
        outputs: Mapping[str, Mapping[str, float | np.ndarray]],
    ) -> "JointGaussian":
        """Independent sources with given variances plus linear outputs.

        Variances and coefficients may be arrays of a common shape (B,),
        producing a stacked covariance.
        """
        src = list(sources)
        names = tuple(src) + tuple(outputs)
        var = np.broadcast_arrays(*[np.asarray(sources[s], dtype=float) for s in src])
        batch = var[0].shape
        m = np.zeros(batch + (len(names), len(src)))
        for i, s in enumerate(src):
            m[..., i, i] = 1.0
        for j, (_, combo) in enumerate(outputs.items()):
            for s, c in combo.items():
                if s not in sources:
                    raise ValueError(f"output depends on unknown source {s!r}")
                m[..., len(src) + j, src.index(s)] = c
        d = np.stack(var, axis=-1)
        cov = np.einsum("...is,...s,...js->...ij", m, d, m)
        return cls(names, cov)

    def index(self, names: Sequence[str]) -> list[int]:
        try:
            return [self.names.index(n) for n in names]
        except ValueError:
            missing = [n for n in names if n not in self.names]
            raise ValueError(f"unknown variable(s) {missing}") from None


def conditional_variance(joint: JointGaussian, y: str, given: Sequence[str]) -> np.ndarray:
    """Var(y | given) via the Schur complement with a pseudo-inverse."""
    iy = joint.index([y])[0]
    ig = joint.index(list(dict.fromkeys(given)))
    cov = joint.cov
    vyy = cov[..., iy, iy]
    if not ig:
        return vyy
    s_gg = cov[..., ig, :][..., :, ig]
    s_yg = cov[..., iy, ig]
    scale = max(1.0, float(np.abs(s_gg).max()))
    inv = np.linalg.pinv(s_gg, rcond=1e-13, hermitian=True) if scale > 0 else s_gg
    corr = np.einsum("...i,...ij,...j->...", s_yg, inv, s_yg)
    return vyy - corr


def gaussian_mi(
    target: Sequence[str],
    given: Sequence[str],
    joint: JointGaussian,
    output: str,
):
    """I(target; output | given) in bits for jointly Gaussian scalars.

    Computed as 0.5*log2(Var(output | given) / Var(output | given, target)).
    Returns a float for a single covariance, an array for a stack.
    """
    if isinstance(target, str):
        target = [target]
    if isinstance(given, str):
        given = [given]
    v0 = conditional_variance(joint, output, list(given))
    v1 = conditional_variance(joint, output, list(given) + list(target))
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    if np.any(v1 <= 0):
        raise ValueError("output is deterministic given the conditioning set")
    out = np.maximum(0.5 * np.log2(v0 / v1), 0.0)
    return float(out) if out.ndim == 0 else out


def hk_joint(ch: ChannelParams, xi1, xi2) -> JointGaussian:
    """Joint law of (U1, V1, U2, V2, Z1, Z2, Y1, Y2) for the private/common split.

    ``X_k = U_k + V_k`` with ``U_k ~ N(0, xi_k P_k)`` private and
    ``V_k ~ N(0, (1 - xi_k) P_k)`` common.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    s12 = math.sqrt(ch.a12)
    s21 = math.sqrt(ch.a21)
    one = np.ones(np.broadcast(xi1, xi2).shape)
    return JointGaussian.from_linear(
        {
            "U1": xi1 * ch.p1 * one,
            "V1": (1.0 - xi1) * ch.p1 * one,
            "U2": xi2 * ch.p2 * one,
            "V2": (1.0 - xi2) * ch.p2 * one,
            "Z1": one,
            "Z2": one,
        },
        {
            "Y1": {"U1": 1.0, "V1": 1.0, "U2": s12, "V2": s12, "Z1": 1.0},
            "Y2": {"U1": s21, "V1": s21, "U2": 1.0, "V2": 1.0, "Z2": 1.0},
        },
    )
