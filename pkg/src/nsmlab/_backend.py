"""Selection between the compiled iteration kernel and the pure-Python loop.

The compiled extension is optional: when it imported cleanly it becomes the
default for built-in problems, otherwise everything runs through the Python
reference loop.  ``NSMLAB_BACKEND=python`` or ``=ext`` overrides the default.
"""

import os

try:
    from . import _kernels
except ImportError:
    _kernels = None

# Integer codes shared with the compiled kernel; keep in sync with _kernels.pyx.
PROBLEM_CODES = {"toy": 0, "lsq": 1, "logistic": 2}
SET_CODES = {"ball": 0, "diagbox": 1, "unconstrained": 2}
METHOD_CODES = {"nsm": 0, "gd": 1, "nag": 2, "adam": 3, "rmsprop": 4, "amsgrad": 5}
ADVERSARY_CODES = {"worst-case": 0, "scaled-opposite": 1, "negate-iterate": 2, "fixed": 3}


def ext_available() -> bool:
    return _kernels is not None


def available_backends() -> tuple[str, ...]:
    return ("python", "ext") if ext_available() else ("python",)


def default_backend() -> str:
    env = os.environ.get("NSMLAB_BACKEND")
    if env:
        resolve_backend(env)  # validate
        return env
    return "ext" if ext_available() else "python"


def resolve_backend(name: str | None) -> str:
    """Validate an explicit backend name; ``None`` means the default."""
    if name is None:
        return default_backend()
    if name not in ("python", "ext"):
        raise ValueError(f"unknown backend {name!r}; choose 'python' or 'ext'")
    if name == "ext" and not ext_available():
        raise ValueError("compiled backend requested but the extension is not built")
    return name


def kernel_run_loop(plan: dict):
    if _kernels is None:
        raise RuntimeError("compiled backend is not available")
    return _kernels.run_loop(plan)
