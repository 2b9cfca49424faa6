"""Backend selection for the hot numeric kernels.

The compiled backend is picked when its extension imported cleanly;
``SDIRAND_BACKEND=pure`` in the environment forces the NumPy fallback,
``SDIRAND_BACKEND=cython`` fails loudly when the extension is missing.
Both backends expose ``eval_one``, ``eval_batch`` and ``oracle_search``
with identical contracts.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _fast
except ImportError:
    _fast = None

_FORCED = os.environ.get("SDIRAND_BACKEND", "").strip().lower()

if _FORCED == "pure":
    _active = pure
elif _FORCED in ("", "auto"):
    _active = _fast if _fast is not None else pure
elif _FORCED == "cython":
    if _fast is None:
        raise ImportError(
            "SDIRAND_BACKEND=cython requested but the compiled kernels are not built"
        )
    _active = _fast
else:
    raise ImportError(
        f"unknown SDIRAND_BACKEND value {_FORCED!r}; expected 'pure', 'cython' or 'auto'"
    )

#: Name of the backend serving the module-level functions.
BACKEND: str = _active.NAME

eval_one = _active.eval_one
eval_batch = _active.eval_batch
oracle_search = _active.oracle_search


def available_backends() -> tuple[str, ...]:
    """Names of importable backends, compiled one first when present."""
    return ("cython", "pure") if _fast is not None else ("pure",)


def get_backend(name: str | None = None):
    """Backend module by name; ``None`` or ``"auto"`` gives the active one."""
    if name is None or name == "auto":
        return _active
    if name == "pure":
        return pure
    if name == "cython":
        if _fast is None:
            raise RuntimeError("compiled kernels are not available in this install")
        return _fast
    raise ValueError(f"unknown backend {name!r}")
