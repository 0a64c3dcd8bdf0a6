"""Hot-kernel backend selection.

The compiled extension (``_ckernels``, built from Cython) is preferred; the
numpy implementation (``_pykernels``) is the fallback so a plain source
checkout works without a C toolchain. Set ``FAIRPATH_BACKEND=python`` to
force the fallback, e.g. for benchmarking one backend against the other.

Both backends export:

* ``partial_correlation(corr, i, j, cond) -> float``
* ``fisher_z_stat(r, n, k) -> float``
* ``normal_sf2(stat) -> float``
* ``gauss_bic_local(cov, n, node, parents) -> (float, bool)``
* ``BACKEND_NAME``
"""

import os

from . import _pykernels

if os.environ.get("FAIRPATH_BACKEND", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

BACKEND_NAME = _impl.BACKEND_NAME
partial_correlation = _impl.partial_correlation
fisher_z_stat = _impl.fisher_z_stat
normal_sf2 = _impl.normal_sf2
gauss_bic_local = _impl.gauss_bic_local


def available_backends():
    """Names of importable backends, compiled one first when present."""
    names = []
    try:
        from . import _ckernels

        names.append(_ckernels.BACKEND_NAME)
    except ImportError:
        pass
    names.append(_pykernels.BACKEND_NAME)
    return names
