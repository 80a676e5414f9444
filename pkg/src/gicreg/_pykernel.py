"""Numpy implementation of the batch phi-term evaluator (fallback backend)."""
from __future__ import annotations

import numpy as np

__all__ = ["phi_terms"]

# bound on the size of the (points, terms, nodes) temporaries, in elements
_CHUNK_ELEMS = 4_000_000


def phi_terms(gains, shape_idx, shapes, weights, num, den) -> np.ndarray:
    """Evaluate phi(sum num*g / (1 + sum den*g)) for every point and term.

    Parameters
    ----------
    gains : ndarray, shape (N, S)
        Per-point scale of each base density.
    shape_idx : ndarray of int, shape (N, S)
        Row of ``shapes`` holding each base density's unit shape.
    shapes : ndarray, shape (U, K)
        Unit shapes tabulated on the quadrature nodes.
    weights : ndarray, shape (K,)
        Quadrature weights (already including the 1/(4pi) factor).
    num, den : ndarray, shape (T, S)
        Linear combinations forming each term's numerator and the
        non-constant part of its denominator.

    Returns
    -------
    ndarray, shape (N, T)
    """
    gains = np.asarray(gains, dtype=float)
    shape_idx = np.asarray(shape_idx, dtype=np.int64)
    shapes = np.asarray(shapes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n_pts, n_sp = gains.shape
    n_t = num.shape[0]
    n_w = shapes.shape[1]
    if shape_idx.shape != gains.shape:
        raise ValueError("shape_idx does not match gains")
    if weights.shape != (n_w,):
        raise ValueError("weights do not match the shape table")
    if num.shape != (n_t, n_sp) or den.shape != (n_t, n_sp):
        raise ValueError("term matrices do not match gains")
    out = np.zeros((n_pts, n_t))
    live = np.flatnonzero(np.any(num != 0.0, axis=1))
    if live.size == 0 or n_pts == 0:
        return out
    step = max(1, _CHUNK_ELEMS // max(1, n_w * max(n_sp, live.size)))
    for lo in range(0, n_pts, step):
        hi = min(n_pts, lo + step)
        g = gains[lo:hi, :, None] * shapes[shape_idx[lo:hi]]  # (n, S, K)
        a = np.einsum("ts,nsk->ntk", num[live], g)
        b = 1.0 + np.einsum("ts,nsk->ntk", den[live], g)
        out[lo:hi, live] = np.log2(1.0 + a / b) @ weights
    return out
