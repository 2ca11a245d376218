"""Backend selection for interval endpoint arithmetic.

The default core is gmpy2 (compiled MPFR); a pure-Python core on mpmath.libmp
is selected automatically when gmpy2 is unavailable, or explicitly via
WAVECERT_BACKEND=pure|mpfr. Both expose the same function surface; see
benchmarks/backend_bench.py for a speed comparison.
"""

import os

_choice = os.environ.get("WAVECERT_BACKEND", "")

if _choice == "pure":
    from . import pure_backend as backend
elif _choice == "mpfr":
    from . import mpfr_backend as backend
elif _choice:
    raise ImportError(f"unknown WAVECERT_BACKEND {_choice!r}")
else:
    try:
        from . import mpfr_backend as backend
    except ImportError:
        from . import pure_backend as backend

NAME = backend.NAME
