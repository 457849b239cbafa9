"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when importable; setting
``LDRN_PURE_PYTHON=1`` forces the numpy fallback.
"""

import importlib
import os

BACKENDS = ("cython", "python")


def load_backend(name: str):
    if name == "cython":
        return importlib.import_module("ldrncode.gf._ckernels")
    if name == "python":
        return importlib.import_module("ldrncode.gf._kernels_py")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("LDRN_PURE_PYTHON", "") not in ("", "0"):
        return "python", load_backend("python")
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", load_backend("python")


BACKEND, kernels = _select()
