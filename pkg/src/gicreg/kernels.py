"""Backend selection for the batch phi-term evaluator.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Setting ``GICREG_BACKEND=python`` forces the
fallback.
"""
from __future__ import annotations

import os

from . import _pykernel

__all__ = ["phi_terms", "BACKEND", "available_backends", "get_backend"]

_BACKENDS = {"python": _pykernel.phi_terms}

try:
    from . import _ckernel  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build
    _ckernel = None
else:
    _BACKENDS["compiled"] = _ckernel.phi_terms

_requested = os.environ.get("GICREG_BACKEND", "").strip().lower()
if _requested == "python" or "compiled" not in _BACKENDS:
    BACKEND = "python"
else:
    BACKEND = "compiled"

phi_terms = _BACKENDS[BACKEND]


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str):
    """Return the evaluator for ``name`` ("compiled" or "python")."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available; have {available_backends()}") from None
