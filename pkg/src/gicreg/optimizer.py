"""Parameter-space search producing Pareto frontiers.

Two strategies:

* ``grid_search`` evaluates a full Cartesian grid (the exhaustive search
  used for the 3- to 7-parameter schemes).
* ``random_refine_search`` draws seeded uniform samples, then refines in
  shrinking boxes around the current frontier's parameter points. It is the
  default for the 11-parameter rate-splitting schemes.

Both are deterministic: batches are formed and merged in a fixed order, and
worker threads only split the numerical work inside a batch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .frontier import Frontier, merge
from .model import ChannelParams
from .quadrature import DEFAULT, QuadratureConfig
from .schemes import DERIVATION, SchemeDef, evaluate_points, get_scheme

__all__ = [
    "GridSpec",
    "SearchBudget",
    "parse_range",
    "default_values",
    "grid_search",
    "random_refine_search",
    "OPEN_CLIP",
    "UNIT_STEP",
    "OPEN_STEP",
]

OPEN_CLIP = 0.99
UNIT_STEP = 1e-2
OPEN_STEP = 2e-2
_BATCH = 32768
_SPLIT_PARAMS = ("alpha", "beta", "lambda", "xi1", "xi2")


def _clean(values: np.ndarray) -> np.ndarray:
    # strip accumulated float noise so 0.07 is stored as the double nearest 0.07
    return np.round(np.asarray(values, dtype=float), 12) + 0.0


def parse_range(text: str) -> np.ndarray:
    """Parse ``lo:hi:step`` (inclusive of ``hi`` when it falls on the grid) or a single value."""
    parts = [p.strip() for p in str(text).split(":")]
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"bad range {text!r}; expected lo:hi:step or a number") from None
    if len(nums) == 1:
        return _clean(nums)
    if len(nums) != 3:
        raise ValueError(f"bad range {text!r}; expected lo:hi:step")
    lo, hi, step = nums
    if not (step > 0) or not all(math.isfinite(x) for x in nums):
        raise ValueError(f"range {text!r} needs a positive finite step")
    if hi < lo:
        raise ValueError(f"range {text!r} has hi < lo")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return _clean(lo + step * np.arange(n))


def default_values(sd: SchemeDef, k: int, unit_step: float = UNIT_STEP, open_step: float = OPEN_STEP) -> np.ndarray:
    """Default grid for parameter ``k``.

    Closed intervals include both endpoints. Open intervals use a grid
    symmetric about 0 (so the white filter is always present) clipped at
    +-0.99.
    """
    lo, hi = sd.lower[k], sd.upper[k]
    if not sd.open_[k]:
        return parse_range(f"{lo}:{hi}:{unit_step}") if unit_step else _clean([lo])
    half = np.arange(0.0, OPEN_CLIP + 1e-12, open_step)
    half = half[half < OPEN_CLIP - 1e-12]
    vals = np.concatenate([-half[::-1], half[1:], [-OPEN_CLIP, OPEN_CLIP]])
    vals = np.unique(_clean(vals))
    return vals[(vals > lo) & (vals < hi)]


@dataclass(frozen=True)
class GridSpec:
    """Per-parameter value lists for a scheme's grid."""

    scheme: str
    values: Mapping[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        sd = get_scheme(self.scheme)
        if set(self.values) != set(sd.names):
            missing = set(sd.names) - set(self.values)
            extra = set(self.values) - set(sd.names)
            raise ValueError(f"grid dimensions do not match {self.scheme}: missing {sorted(missing)}, extra {sorted(extra)}")
        vals = {}
        for k, n in enumerate(sd.names):
            v = np.asarray(self.values[n], dtype=float).ravel()
            if v.size == 0:
                raise ValueError(f"empty grid for {n}")
            lo, hi, op = sd.lower[k], sd.upper[k], sd.open_[k]
            bad = (v < lo) | (v > hi) | (op & ((v <= lo) | (v >= hi)))
            if np.any(bad) or not np.all(np.isfinite(v)):
                raise ValueError(f"grid for {n} leaves the support")
            vals[n] = tuple(float(x) for x in np.unique(v))
        object.__setattr__(self, "values", vals)

    @classmethod
    def default(
        cls,
        scheme: str,
        unit_step: float = UNIT_STEP,
        open_step: float = OPEN_STEP,
        fixed: Mapping[str, float] | None = None,
        ranges: Mapping[str, Sequence[float]] | None = None,
    ) -> "GridSpec":
        """Default grid with optional fixed values and explicit ranges.

        Keys of ``fixed`` may name a parameter or a prefix shared by several
        (``rho`` fixes every ``rho_*``); an exact name wins over a prefix.
        """
        sd = get_scheme(scheme)
        vals = {n: default_values(sd, k, unit_step, open_step) for k, n in enumerate(sd.names)}
        for key, v in expand_names(sd, ranges or {}).items():
            vals[key] = np.asarray(v, dtype=float)
        for key, v in expand_names(sd, fixed or {}).items():
            vals[key] = np.array([float(v)])
        return cls(scheme, vals)

    @property
    def shape(self) -> tuple[int, ...]:
        sd = get_scheme(self.scheme)
        return tuple(len(self.values[n]) for n in sd.names)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def as_dict(self) -> dict:
        out = {}
        for n, v in self.values.items():
            out[n] = v[0] if len(v) == 1 else {"min": v[0], "max": v[-1], "count": len(v)}
        return out


def expand_names(sd: SchemeDef, mapping: Mapping[str, object]) -> dict[str, object]:
    """Resolve exact names first, then prefixes (``rho`` -> every ``rho*``)."""
    out: dict[str, object] = {}
    exact = {k: v for k, v in mapping.items() if k in sd.names}
    for k, v in mapping.items():
        if k in sd.names:
            continue
        hits = [n for n in sd.names if n.startswith(k)]
        if not hits:
            raise ValueError(f"{k!r} matches no parameter of {sd.name} ({', '.join(sd.names)})")
        for n in hits:
            if n not in exact:
                out[n] = v
    out.update(exact)
    return out


@dataclass(frozen=True)
class SearchBudget:
    """Evaluation budget of the random search."""

    max_evaluations: int
    seed: int = 0
    refinement_rounds: int = 3

    def __post_init__(self) -> None:
        if int(self.max_evaluations) != self.max_evaluations or self.max_evaluations <= 0:
            raise ValueError("max_evaluations must be a positive integer")
        if int(self.refinement_rounds) != self.refinement_rounds or self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be a nonnegative integer")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")


def _grid_order(sd: SchemeDef) -> list[int]:
    # filter-like dimensions vary slowest so each batch shares few distinct spectra
    slow = [k for k, n in enumerate(sd.names) if n not in _SPLIT_PARAMS]
    fast = [k for k, n in enumerate(sd.names) if n in _SPLIT_PARAMS]
    return slow + fast


def grid_search(
    ch: ChannelParams,
    scheme: str,
    grid: GridSpec,
    cfg: QuadratureConfig = DEFAULT,
    threads: int = 1,
    variant: str = DERIVATION,
    backend: str | None = None,
    batch: int = _BATCH,
) -> Frontier:
    """Pareto frontier of every rate point contributed by the grid."""
    sd = get_scheme(scheme)
    if grid.scheme != scheme:
        raise ValueError(f"grid was built for {grid.scheme}, not {scheme}")
    order = _grid_order(sd)
    axes = [np.asarray(grid.values[sd.names[k]]) for k in order]
    dims = tuple(a.size for a in axes)
    total = int(np.prod(dims, dtype=np.int64))
    if total == 0:
        raise ValueError("empty grid")
    front = Frontier.empty()
    for lo in range(0, total, batch):
        flat = np.arange(lo, min(total, lo + batch))
        sub = np.unravel_index(flat, dims)
        P = np.empty((flat.size, sd.dim))
        for j, k in enumerate(order):
            P[:, k] = axes[j][sub[j]]
        c = evaluate_points(ch, scheme, P, cfg, threads, backend, variant)
        front = merge(front, Frontier.from_contributions(c))
    return front


def _effective_support(sd: SchemeDef) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array(sd.lower, dtype=float)
    hi = np.array(sd.upper, dtype=float)
    op = np.array(sd.open_)
    lo = np.where(op, np.maximum(lo, -OPEN_CLIP), lo)
    hi = np.where(op, np.minimum(hi, OPEN_CLIP), hi)
    return lo, hi


def _snap(sd: SchemeDef, lo, hi, x, u_snap, u_pick, snap, anchor_vals):
    """Move a fraction of coordinates onto special values.

    Closed intervals snap to an endpoint, open intervals to 0, and anchored
    coordinates to the anchor value.
    """
    op = np.array(sd.open_)
    special = np.where(u_pick < 0.5, lo, hi)
    special = np.where(op, 0.0, special)
    if anchor_vals is not None:
        special = np.where(np.isnan(anchor_vals), special, anchor_vals)
    return np.where(u_snap < snap, special, x)


def random_refine_search(
    ch: ChannelParams,
    scheme: str,
    budget: SearchBudget,
    anchor: Mapping[str, float] | None = None,
    cfg: QuadratureConfig = DEFAULT,
    threads: int = 1,
    fixed: Mapping[str, float] | None = None,
    variant: str = DERIVATION,
    snap: float = 0.25,
    shrink: float = 0.5,
    max_anchors: int = 64,
    backend: str | None = None,
    batch: int = 8192,
) -> Frontier:
    """Seeded random search with frontier-anchored refinement.

    Parameters
    ----------
    budget : SearchBudget
        ``max_evaluations`` parameter points in total, split evenly over the
        initial round and ``refinement_rounds`` refinement rounds.
    anchor : mapping, optional
        Partial parameter point. Anchored coordinates are drawn from a box
        around the anchor that halves every round; the rest are drawn over
        the full support.
    fixed : mapping, optional
        Coordinates held constant (exact names or prefixes).
    snap : float
        Probability that a coordinate is replaced by a special value
        (interval endpoint, 0 for filter coefficients, or the anchor value),
        so that boundary optima are reachable.
    shrink : float
        Box half-width factor per refinement round.

    Notes
    -----
    Every round draws a single (n, d, 4) block of uniforms from one PCG64
    stream, so with ``refinement_rounds=0`` a larger budget extends the sample
    sequence of a smaller one.
    """
    sd = get_scheme(scheme)
    d = sd.dim
    lo, hi = _effective_support(sd)
    width = hi - lo
    fixed_map = expand_names(sd, fixed or {})
    anchor_map = expand_names(sd, anchor or {})
    fix_vec = np.array([fixed_map.get(n, np.nan) for n in sd.names], dtype=float)
    anc_vec = np.array([anchor_map.get(n, np.nan) for n in sd.names], dtype=float)
    has_anchor = bool(np.any(~np.isnan(anc_vec)))
    rng = np.random.Generator(np.random.PCG64(int(budget.seed)))

    rounds = int(budget.refinement_rounds) + 1
    per = budget.max_evaluations // rounds
    counts = [per] * rounds
    counts[0] += budget.max_evaluations - per * rounds

    front = Frontier.empty()
    for r, n in enumerate(counts):
        if n == 0:
            continue
        u = rng.random((n, d, 4))
        if r == 0 or len(front) == 0:
            x = lo + u[:, :, 0] * width
            if has_anchor:
                h = 0.25 * width * shrink**r
                a_lo = np.maximum(lo, anc_vec - h)
                a_hi = np.minimum(hi, anc_vec + h)
                boxed = a_lo + u[:, :, 0] * (a_hi - a_lo)
                x = np.where(np.isnan(anc_vec), x, boxed)
            x = _snap(sd, lo, hi, x, u[:, :, 1], u[:, :, 2], snap, anc_vec if has_anchor else None)
        else:
            centers = _anchor_rows(front, sd, max_anchors)
            pick = np.minimum((u[:, 0, 3] * len(centers)).astype(int), len(centers) - 1)
            c = centers[pick]
            h = 0.25 * width * shrink ** (r - 1)
            b_lo = np.maximum(lo, c - h)
            b_hi = np.minimum(hi, c + h)
            x = b_lo + u[:, :, 0] * (b_hi - b_lo)
            # keep the anchor's own value for a share of coordinates
            x = np.where(u[:, :, 1] < snap, c, x)
            x = _snap(sd, lo, hi, x, u[:, :, 3], u[:, :, 2], snap * 0.5, None)
            if has_anchor:
                h0 = 0.25 * width * shrink**r
                a_lo = np.maximum(lo, anc_vec - h0)
                a_hi = np.minimum(hi, anc_vec + h0)
                x = np.where(np.isnan(anc_vec), x, np.clip(x, a_lo, a_hi))
        x = np.where(np.isnan(fix_vec), x, fix_vec)
        x = np.clip(x, lo, hi)
        for b0 in range(0, n, batch):
            P = x[b0 : b0 + batch]
            cont = evaluate_points(ch, scheme, P, cfg, threads, backend, variant)
            front = merge(front, Frontier.from_contributions(cont))
    return front


def _anchor_rows(front: Frontier, sd: SchemeDef, max_anchors: int) -> np.ndarray:
    rows = []
    for p in front.provenance:
        params = p.get("params") if p else None
        if params and p.get("scheme") == sd.name:
            rows.append([params[n] for n in sd.names])
    rows = np.array(rows, dtype=float).reshape(-1, sd.dim)
    if len(rows) > max_anchors:
        idx = np.unique(np.round(np.linspace(0, len(rows) - 1, max_anchors)).astype(int))
        rows = rows[idx]
    return rows
