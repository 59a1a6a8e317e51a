"""Backend selection for the hot kernels.

Prefers the compiled extension; falls back to the NumPy implementation
when the extension is unavailable or ``CAMGUIDE_PURE_PYTHON`` is set in
the environment (the benchmark suite uses that switch to compare both).
"""

from __future__ import annotations

import os

if os.environ.get("CAMGUIDE_PURE_PYTHON"):
    from camguide import _kernels_py as _impl
else:
    try:
        from camguide import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from camguide import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
markov_removal_order = _impl.markov_removal_order
kendall_pairs = _impl.kendall_pairs
