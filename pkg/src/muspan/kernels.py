"""Kernel dispatch.

The compiled extension is used when it imports; set ``MUSPAN_PURE=1`` to force
the pure-Python fallback. ``BACKEND`` names the active implementation.
"""

import os
from array import array

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("MUSPAN_PURE"):
    _impl = _ckernels
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"

kmp_find = _impl.kmp_find
levenshtein = _impl.levenshtein
lcs_length = _impl.lcs_length
best_pair = _impl.best_pair


def encode(tokens, vocab):
    """Map tokens to integer ids, growing ``vocab`` as needed."""
    out = array("q")
    for tok in tokens:
        idx = vocab.get(tok)
        if idx is None:
            idx = vocab[tok] = len(vocab)
        out.append(idx)
    return out


def lookup(tokens, vocab):
    """Ids for ``tokens`` under a fixed vocabulary, or None if any is unknown."""
    out = array("q")
    for tok in tokens:
        idx = vocab.get(tok)
        if idx is None:
            return None
        out.append(idx)
    return out
