"""Hot-loop kernels with a compiled core and a pure numpy fallback.

The compiled extension is preferred when it imported cleanly; both
implementations satisfy the same contract and agree bit for bit (enforced by
the kernel test suite).  BACKEND names the one in use.
"""

from __future__ import annotations

try:
    from ._ckern import (  # type: ignore[attr-defined]
        BACKEND,
        frac_box_count,
        orbit_deviations,
        orbit_errors,
        step_scan,
    )
except ImportError:
    from ._pykern import (
        BACKEND,
        frac_box_count,
        orbit_deviations,
        orbit_errors,
        step_scan,
    )

__all__ = [
    "BACKEND",
    "frac_box_count",
    "orbit_deviations",
    "orbit_errors",
    "step_scan",
]
