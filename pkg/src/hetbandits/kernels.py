"""Backend selection for the hot OFUL kernels.

The compiled extension is preferred; set ``HETBANDITS_PURE_PYTHON=1`` to
force the numpy fallback. Both backends expose ``ucb_scores``,
``select_arms`` and ``rank_one_updates``.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("HETBANDITS_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
ucb_scores = _impl.ucb_scores
select_arms = _impl.select_arms
rank_one_updates = _impl.rank_one_updates


def available_backends() -> dict:
    out = {"numpy": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
