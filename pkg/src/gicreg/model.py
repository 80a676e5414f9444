"""Channel and rate types for the two-user Gaussian interference channel.

The channel is held in standard form::

    Y1 = X1 + sqrt(a12) X2 + Z1
    Y2 = sqrt(a21) X1 + X2 + Z2

with unit-variance noises, so only the two input powers and the two cross
gains are stored.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = [
    "ChannelParams",
    "RatePair",
    "validate_channel",
    "eta",
    "read_config",
    "channel_from_mapping",
]


@dataclass(frozen=True)
class ChannelParams:
    """Standard-form channel: linear powers and linear cross gains."""

    p1: float
    p2: float
    a12: float
    a21: float

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "a12", "a21"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise TypeError(f"{name} must be a real number, got {type(v).__name__}")
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.p1 <= 0 or self.p2 <= 0:
            raise ValueError(f"powers must be positive, got p1={self.p1}, p2={self.p2}")
        if self.a12 < 0 or self.a21 < 0:
            raise ValueError(f"cross gains must be nonnegative, got a12={self.a12}, a21={self.a21}")

    def swapped(self) -> "ChannelParams":
        """Relabel the users (1 <-> 2)."""
        return ChannelParams(self.p2, self.p1, self.a21, self.a12)

    def as_dict(self) -> dict[str, float]:
        return {"p1": self.p1, "p2": self.p2, "a12": self.a12, "a21": self.a21}


def validate_channel(p1: float, p2: float, a12: float, a21: float) -> ChannelParams:
    """Return a :class:`ChannelParams` or raise ``ValueError``/``TypeError``."""
    return ChannelParams(p1, p2, a12, a21)


@dataclass(frozen=True)
class RatePair:
    """An achievable pair (r1, r2) in bits per channel use.

    ``provenance`` is an opaque mapping, normally ``{"scheme": ..., "params": {...}}``.
    """

    r1: float
    r2: float
    provenance: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        r1, r2 = float(self.r1), float(self.r2)
        if not (math.isfinite(r1) and math.isfinite(r2)):
            raise ValueError(f"rates must be finite, got ({r1}, {r2})")
        if r1 < 0 or r2 < 0:
            raise ValueError(f"rates must be nonnegative, got ({r1}, {r2})")
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)

    @property
    def scheme(self) -> str | None:
        return self.provenance.get("scheme") if self.provenance else None

    @property
    def params(self) -> Mapping[str, Any]:
        return self.provenance.get("params", {}) if self.provenance else {}


def eta(x):
    """0.5*log2(1+x) for nonnegative finite ``x`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("eta argument must be finite")
    if np.any(arr < 0):
        raise ValueError("eta argument must be nonnegative")
    out = 0.5 * np.log2(np.add(1.0, arr))
    return float(out) if out.ndim == 0 else out


def read_config(path) -> dict[str, str]:
    """Read a flat ``key = value`` file into a dict of raw strings.

    Blank lines and ``#``/``;`` comments are ignored. Keys may be dotted
    (``grid.alpha``). Duplicate keys are an error.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"), interpolation=None, strict=True
    )
    parser.optionxform = str  # keep key case
    try:
        parser.read_string("[root]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"malformed config file {path}: {exc}") from exc
    return {k: v.strip() for k, v in parser["root"].items()}


def channel_from_mapping(values: Mapping[str, Any]) -> ChannelParams:
    """Build a channel from a mapping holding p1, p2, a12, a21 (strings or numbers)."""
    missing = [k for k in ("p1", "p2", "a12", "a21") if values.get(k) is None]
    if missing:
        raise ValueError(f"missing channel parameter(s): {', '.join(missing)}")
    parsed = {}
    for k in ("p1", "p2", "a12", "a21"):
        try:
            parsed[k] = float(values[k])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"channel parameter {k} is not a number: {values[k]!r}") from exc
    return ChannelParams(**parsed)
