"""Pareto frontiers of two-dimensional rate regions.

A region is a down-set, so it is fully described by its maximal points.
Frontiers are immutable; union is merge plus Pareto reduction, and the
time-sharing closure is the upper concave envelope.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .model import RatePair

__all__ = [
    "Frontier",
    "Contributions",
    "pareto_mask",
    "insert",
    "merge",
    "convex_hull",
    "envelope",
    "dominates",
    "max_violation",
    "excess",
    "witness_margin",
    "corner_query",
    "read_csv",
    "AXIS",
]

AXIS = "axis"
_REL_TOL = 1e-13


def pareto_mask(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Boolean mask of maximal points; among equal points the lowest index survives."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    n = r1.size
    keep = np.zeros(n, dtype=bool)
    if n == 0:
        return keep
    order = np.lexsort((np.arange(n), -r2, -r1))
    s2 = r2[order]
    prev_max = np.concatenate(([-np.inf], np.maximum.accumulate(s2)[:-1]))
    keep[order[s2 > prev_max]] = True
    return keep


@dataclass(frozen=True)
class Contributions:
    """Rate points produced by a batch of parameter rows.

    ``pts`` has shape (N, m, 2): each of the N parameter rows contributes m
    points (rectangle corner, pentagon corners, polygon vertices). NaN rows
    contribute nothing.
    """

    pts: np.ndarray
    params: np.ndarray
    scheme: Any
    variant: str = "derivation"

    def provenance(self, i: int, k: int) -> dict:
        sd = self.scheme
        prov: dict[str, Any] = {
            "scheme": sd.name,
            "params": {n: float(v) for n, v in zip(sd.names, self.params[i])},
        }
        if len(sd.tags) > 1:
            prov["tag"] = sd.tags[k]
        if sd.name in ("hk-sim", "hk-corollary") and self.variant != "derivation":
            prov["variant"] = self.variant
        return prov


@dataclass(frozen=True)
class Frontier:
    """Maximal rate pairs sorted by increasing r1 (hence strictly decreasing r2)."""

    r1: np.ndarray
    r2: np.ndarray
    provenance: tuple = field(default=())

    def __post_init__(self) -> None:
        r1 = np.asarray(self.r1, dtype=float).copy()
        r2 = np.asarray(self.r2, dtype=float).copy()
        r1.setflags(write=False)
        r2.setflags(write=False)
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)
        prov = tuple(self.provenance) if self.provenance else tuple({} for _ in range(r1.size))
        object.__setattr__(self, "provenance", prov)
        if len(prov) != r1.size or r2.size != r1.size:
            raise ValueError("inconsistent frontier arrays")

    # construction -------------------------------------------------------

    @classmethod
    def empty(cls) -> "Frontier":
        return cls(np.zeros(0), np.zeros(0), ())

    @classmethod
    def _reduced(cls, r1, r2, prov_fn) -> "Frontier":
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        ok = np.isfinite(r1) & np.isfinite(r2)
        idx = np.flatnonzero(ok)
        keep = idx[pareto_mask(r1[idx], r2[idx])]
        keep = keep[np.argsort(r1[keep], kind="stable")]
        return cls(r1[keep], r2[keep], tuple(prov_fn(int(i)) for i in keep))

    @classmethod
    def from_points(cls, points: Iterable[RatePair]) -> "Frontier":
        pts = list(points)
        if not pts:
            return cls.empty()
        r1 = np.array([p.r1 for p in pts])
        r2 = np.array([p.r2 for p in pts])
        return cls._reduced(r1, r2, lambda i: dict(pts[i].provenance))

    @classmethod
    def from_arrays(cls, r1, r2, provenance: Sequence | None = None) -> "Frontier":
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        if np.any(r1[np.isfinite(r1)] < 0) or np.any(r2[np.isfinite(r2)] < 0):
            raise ValueError("rates must be nonnegative")
        prov = list(provenance) if provenance is not None else None
        return cls._reduced(r1, r2, (lambda i: dict(prov[i])) if prov else (lambda i: {}))

    @classmethod
    def from_contributions(cls, c: Contributions) -> "Frontier":
        pts = np.asarray(c.pts, dtype=float)
        n, m, _ = pts.shape
        flat = pts.reshape(n * m, 2)
        return cls._reduced(flat[:, 0], flat[:, 1], lambda i: c.provenance(i // m, i % m))

    # access ---------------------------------------------------------------

    def __len__(self) -> int:
        return int(self.r1.size)

    def __bool__(self) -> bool:
        return self.r1.size > 0

    @property
    def points(self) -> list[RatePair]:
        return [RatePair(a, b, p) for a, b, p in zip(self.r1, self.r2, self.provenance)]

    def as_array(self) -> np.ndarray:
        return np.stack([self.r1, self.r2], axis=1)

    # export -----------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO(newline="\n")
        buf.write("r1,r2\n")
        for a, b in zip(self.r1, self.r2):
            buf.write(f"{a:.12g},{b:.12g}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv())

    def to_json(self) -> str:
        rows = []
        for a, b, p in zip(self.r1, self.r2, self.provenance):
            row = {"r1": float(a), "r2": float(b), "scheme": p.get("scheme"), "params": p.get("params", {})}
            for extra in ("tag", "variant"):
                if extra in p:
                    row[extra] = p[extra]
            rows.append(row)
        return json.dumps(rows, indent=1, sort_keys=False) + "\n"

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())


def insert(frontier: Frontier, p: RatePair) -> Frontier:
    """Add one point; it survives iff no incumbent dominates it."""
    return merge(frontier, Frontier(np.array([p.r1]), np.array([p.r2]), (dict(p.provenance),)))


def merge(a: Frontier, b: Frontier) -> Frontier:
    """Union of two regions; on exact ties the point from ``a`` is kept."""
    r1 = np.concatenate([a.r1, b.r1])
    r2 = np.concatenate([a.r2, b.r2])
    prov = a.provenance + b.provenance
    return Frontier._reduced(r1, r2, lambda i: prov[i])


def envelope(frontier: Frontier) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the upper concave envelope from (0, max r2) to (max r1, 0)."""
    if len(frontier) == 0:
        raise ValueError("empty frontier")
    xs = [0.0] + list(frontier.r1) + [float(frontier.r1[-1])]
    ys = [float(frontier.r2[0])] + list(frontier.r2) + [0.0]
    hull: list[tuple[float, float]] = []
    for x, y in zip(xs, ys):
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            cross = (ax - ox) * (y - oy) - (ay - oy) * (x - ox)
            if cross >= 0:
                hull.pop()
            else:
                break
        if hull and hull[-1] == (x, y):
            continue
        hull.append((x, y))
    hx = np.array([h[0] for h in hull])
    hy = np.array([h[1] for h in hull])
    return hx, hy


def convex_hull(frontier: Frontier) -> Frontier:
    """Time-sharing closure: the Pareto-reduced upper concave envelope.

    Envelope vertices that are original points keep their provenance; the
    axis projections are tagged with scheme ``"axis"``.
    """
    if len(frontier) == 0:
        raise ValueError("convex hull of an empty frontier")
    hx, hy = envelope(frontier)
    lookup = {(float(a), float(b)): p for a, b, p in zip(frontier.r1, frontier.r2, frontier.provenance)}
    prov = [lookup.get((float(a), float(b)), {"scheme": AXIS, "params": {}}) for a, b in zip(hx, hy)]
    return Frontier._reduced(hx, hy, lambda i: prov[i])


def _scale(fr: Frontier) -> float:
    return max(1.0, float(fr.r1.max()), float(fr.r2.max()))


def _upper(hx: np.ndarray, hy: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Envelope height at x (max r2 with r1 >= x); -inf beyond the last vertex."""
    x = np.asarray(x, dtype=float)
    if hx.size >= 2 and hx[-1] == hx[-2]:
        # drop the vertical edge down to the r1 axis
        hx, hy = hx[:-1], hy[:-1]
    out = np.interp(np.maximum(x, 0.0), hx, hy)
    return np.where(x > hx[-1], -np.inf, out)


def excess(a: Frontier, points: np.ndarray) -> np.ndarray:
    """Smallest s >= 0 such that each point minus (s, s) lies in a's time-sharing region."""
    hx, hy = envelope(a)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    q1, q2 = pts[:, 0], pts[:, 1]
    tol = _REL_TOL * _scale(a)

    def inside(s):
        x = q1 - s
        return (x <= hx[-1] + tol) & (q2 - s <= _upper(hx, hy, np.minimum(x, hx[-1])) + tol)

    lo = np.zeros(q1.size)
    hi = np.maximum(np.maximum(q1, q2), 0.0) + 1.0
    done = inside(lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        ok = inside(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(done, 0.0, hi)


def dominates(a: Frontier, b: Frontier, slack: float = 0.0) -> bool:
    """True iff every point of ``b`` lies within ``slack`` of the time-sharing region of ``a``."""
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    if len(a) == 0 or len(b) == 0:
        raise ValueError("dominance needs two nonempty frontiers")
    hx, hy = envelope(a)
    tol = _REL_TOL * max(_scale(a), _scale(b))
    x = b.r1 - slack
    y = b.r2 - slack
    ok = (x <= hx[-1] + tol) & (y <= _upper(hx, hy, np.minimum(x, hx[-1])) + tol)
    return bool(np.all(ok))


def max_violation(a: Frontier, b: Frontier) -> float:
    """Largest diagonal excess of b's points over a's region (0 if a dominates b)."""
    return float(excess(a, b.as_array()).max())


def corner_query(frontier: Frontier, r2_min: float) -> float:
    """Largest r1 on the piecewise-linear frontier with r2 >= r2_min (0 if none)."""
    if len(frontier) == 0:
        raise ValueError("empty frontier")
    x, y = frontier.r1, frontier.r2
    if r2_min > y[0]:
        return 0.0
    if r2_min <= y[-1]:
        return float(x[-1])
    # y is strictly decreasing; find i with y[i] >= r2_min > y[i+1]
    i = int(np.searchsorted(-y, -r2_min, side="right")) - 1
    t = (y[i] - r2_min) / (y[i] - y[i + 1])
    return float(x[i] + t * (x[i + 1] - x[i]))


def witness_margin(base: Frontier, point) -> float:
    """How far a point sticks out of base's time-sharing region along one axis.

    The larger of the vertical gap (r2 above the envelope at the point's r1)
    and the horizontal gap (r1 beyond the envelope at the point's r2);
    negative when the point is strictly inside.
    """
    hull = convex_hull(base)
    q1, q2 = float(point[0]), float(point[1])
    hx, hy = envelope(base)
    above = q2 - (float(_upper(hx, hy, q1)) if q1 <= hx[-1] else 0.0)
    right = q1 - corner_query(hull, q2)
    return max(above, right)


def read_csv(path_or_text, *, is_text: bool = False) -> Frontier:
    """Parse a ``r1,r2`` CSV into a frontier (Pareto-reduced)."""
    if is_text:
        text = path_or_text
        src = "<text>"
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
        src = str(path_or_text)
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0].replace(" ", "") != "r1,r2":
        raise ValueError(f"{src}: missing 'r1,r2' header")
    r1, r2 = [], []
    for k, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValueError(f"{src}:{k}: expected two columns")
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"{src}:{k}: not a number") from None
        if not (math.isfinite(a) and math.isfinite(b)) or a < 0 or b < 0:
            raise ValueError(f"{src}:{k}: rates must be finite and nonnegative")
        r1.append(a)
        r2.append(b)
    if not r1:
        raise ValueError(f"{src}: no data rows")
    prov = [{"scheme": "file", "params": {}}] * len(r1)
    return Frontier.from_arrays(np.array(r1), np.array(r2), prov)
