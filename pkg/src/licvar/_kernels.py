"""Select the kernel implementation at import time.

The compiled extension is used when it was built; set ``LICVAR_PURE_PYTHON=1``
to force the pure-Python fallback.
"""

from __future__ import annotations

import os

if os.environ.get("LICVAR_PURE_PYTHON"):
    from licvar._pykernels import kgram_hashes, ngram_counts, winnow

    BACKEND = "python"
else:
    try:
        from licvar._ckernels import kgram_hashes, ngram_counts, winnow

        BACKEND = "cython"
    except ImportError:
        from licvar._pykernels import kgram_hashes, ngram_counts, winnow

        BACKEND = "python"

__all__ = ["BACKEND", "kgram_hashes", "ngram_counts", "winnow"]
