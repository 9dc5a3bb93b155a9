"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it was built and the
integers involved fit comfortably in int64; otherwise the pure-Python
``_pykernels`` module runs the same algorithm on arbitrary-precision ints.
Set ``FAIRDIV_PURE_PYTHON=1`` to force the Python path.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("FAIRDIV_PURE_PYTHON"):
        raise ImportError("pure Python forced")
    import numpy as np

    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"

EF, EF1, EFX, EFX0 = _pykernels.EF, _pykernels.EF1, _pykernels.EFX, _pykernels.EFX0
NOTION_CODES = {"ef": EF, "ef1": EF1, "efx": EFX, "efx0": EFX0}

_LIMIT = 1 << 62

decode = _pykernels.decode


def _row_sums_fit(vals) -> bool:
    return all(sum(row) < _LIMIT for row in vals)


def _products_fit(vals) -> bool:
    bound = 1
    for row in vals:
        bound *= max(1, sum(row))
        if bound >= _LIMIT:
            return False
    return True


def _as_array(vals):
    return np.ascontiguousarray(np.array(vals, dtype=np.int64))


def mnw_best(vals, lo: int, hi: int, use_compiled: bool = True):
    if use_compiled and _ckernels is not None and hi < _LIMIT and _products_fit(vals):
        return _ckernels.mnw_best(_as_array(vals), lo, hi)
    return _pykernels.mnw_best(vals, lo, hi)


def mnw_collect(vals, lo: int, hi: int, count: int, product: int, use_compiled: bool = True):
    if use_compiled and _ckernels is not None and hi < _LIMIT and _products_fit(vals):
        return _ckernels.mnw_collect(_as_array(vals), lo, hi, count, product)
    return _pykernels.mnw_collect(vals, lo, hi, count, product)


def first_violation(vals, owner, notion: int, use_compiled: bool = True):
    if use_compiled and _ckernels is not None and _row_sums_fit(vals):
        return _ckernels.first_violation(_as_array(vals), np.asarray(owner, dtype=np.int64), notion)
    return _pykernels.first_violation(vals, owner, notion)


def perturbation_counterexample(pert, orig, use_compiled: bool = True):
    n = len(orig)
    m = len(orig[0])
    if use_compiled and _ckernels is not None and n**m < _LIMIT and _row_sums_fit(pert) and _row_sums_fit(orig):
        return _ckernels.perturbation_counterexample(_as_array(pert), _as_array(orig))
    return _pykernels.perturbation_counterexample(pert, orig)
