"""Evaluation-backend selection.

The compiled core (``toricdist._core``, built from Cython) is preferred when
present; otherwise the NumPy implementation is used.  Override with the
environment variable ``TORICDIST_BACKEND``:

* ``auto`` (default) - compiled if importable, else NumPy;
* ``compiled``       - require the extension, raise if missing;
* ``python``         - force the NumPy fallback.

Both backends expose the same five kernels and agree to rounding error;
``tests/test_backends.py`` pins the parity.
"""

from __future__ import annotations

import os

from . import _core_py

_requested = os.environ.get("TORICDIST_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "python"):
    raise ValueError(
        f"TORICDIST_BACKEND={_requested!r}: expected auto, compiled, or python"
    )

if _requested == "python":
    kernels = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        kernels = _core_py
        BACKEND = "python"


def available_backends():
    """Names of importable backends (always contains 'python')."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
