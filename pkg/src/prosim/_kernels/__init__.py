"""Edit-distance kernels: compiled core with a pure-Python fallback.

The pairwise normalized Levenshtein matrix is the hot inner loop of the
control-flow similarity metric (it runs once per simulation run inside the
structure search), so it is implemented twice: a Cython extension and a
pure-Python/numpy fallback with identical semantics.  The backend is chosen
at import time; set PROSIM_PURE_PYTHON=1 to force the fallback.  Both
backends stay importable directly for the comparison benchmark.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

if os.environ.get("PROSIM_PURE_PYTHON") == "1" or _ckernels is None:
    _impl = _pykernels
    BACKEND = "python"
else:
    _impl = _ckernels
    BACKEND = "cython"


def levenshtein(a, b):
    """Edit distance between two int32 code sequences."""
    return _impl.levenshtein(np.ascontiguousarray(a, dtype=np.int32),
                             np.ascontiguousarray(b, dtype=np.int32))


def normalized_distance_matrix(bag_a, bag_b):
    """Matrix of levenshtein(a, b) / max(len(a), len(b)) for all pairs.

    Empty-vs-empty pairs get distance 0.  Inputs are lists of int32 arrays
    as produced by :func:`encode_sequences`.
    """
    return _impl.normalized_distance_matrix(bag_a, bag_b)


def encode_sequences(*bags):
    """Map label sequences to int32 code arrays over a shared vocabulary.

    Returns one list of arrays per input bag.  The vocabulary is the sorted
    union of all labels, so encoding is deterministic.
    """
    vocab = sorted({label for bag in bags for seq in bag for label in seq})
    codes = {label: i for i, label in enumerate(vocab)}
    out = []
    for bag in bags:
        out.append([np.fromiter((codes[l] for l in seq), dtype=np.int32, count=len(seq))
                    for seq in bag])
    return out


__all__ = ["BACKEND", "levenshtein", "normalized_distance_matrix", "encode_sequences"]
