"""Kernel backend selection.

Tries the compiled extension first and falls back to the NumPy
implementation. `ADAOR_KERNELS=py|ext|auto` forces a choice; `ext` raises
if the extension is not built. `BACKEND` names what got selected.
"""

from __future__ import annotations

import os

_choice = os.environ.get("ADAOR_KERNELS", "auto")
if _choice not in ("auto", "py", "ext"):
    raise RuntimeError(f"ADAOR_KERNELS must be auto, py or ext, got {_choice!r}")

if _choice == "py":
    from . import _kernels_py as _impl

    BACKEND = "py"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "ext"
    except ImportError:
        if _choice == "ext":
            raise
        from . import _kernels_py as _impl

        BACKEND = "py"

linear_forward = _impl.linear_forward
linear_backward = _impl.linear_backward
silu_forward = _impl.silu_forward
silu_backward = _impl.silu_backward
adam_update = _impl.adam_update
