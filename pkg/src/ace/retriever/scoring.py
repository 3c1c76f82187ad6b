"""Relevance-score accumulation kernels.

The postings scatter-add is the one compute-bound inner loop in this package,
so it ships in two interchangeable builds: a numba-jitted kernel and a pure
numpy fallback. The ``ACE_NUMBA`` environment variable picks one at import
time ("1" forces numba, "0" forces numpy, unset/"auto" prefers numba when
importable). Both accumulate contributions in identical order, so scores are
bit-identical across builds; ``benchmarks/bench_bm25.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np


def _env_choice() -> bool | None:
    raw = os.environ.get("ACE_NUMBA", "auto").strip().lower()
    if raw in ("1", "true", "on", "yes"):
        return True
    if raw in ("0", "false", "off", "no"):
        return False
    return None


def _accumulate_numpy(
    scores: np.ndarray,
    ordinals: np.ndarray,
    tfs: np.ndarray,
    idfs: np.ndarray,
    doc_norm: np.ndarray,
    k1: float,
) -> None:
    contrib = idfs * tfs * (k1 + 1.0) / (tfs + k1 * doc_norm[ordinals])
    np.add.at(scores, ordinals, contrib)


_forced = _env_choice()
_accumulate_numba = None
if _forced is not False:
    try:
        from numba import njit

        @njit(cache=True)
        def _accumulate_numba(scores, ordinals, tfs, idfs, doc_norm, k1):  # pragma: no cover - jitted body
            for i in range(ordinals.shape[0]):
                d = ordinals[i]
                scores[d] += idfs[i] * tfs[i] * (k1 + 1.0) / (tfs[i] + k1 * doc_norm[d])

    except ImportError:
        if _forced is True:
            raise
        _accumulate_numba = None


def active_kernel() -> str:
    """Which kernel build scoring uses by default: "numba" or "numpy"."""
    return "numpy" if _accumulate_numba is None else "numba"


def accumulate_scores(
    scores: np.ndarray,
    ordinals: np.ndarray,
    tfs: np.ndarray,
    idfs: np.ndarray,
    doc_norm: np.ndarray,
    k1: float,
    impl: str | None = None,
) -> None:
    """Scatter-add per-posting contributions into ``scores``, in place.

    ``impl`` overrides the env-selected build ("numpy"/"numba"); used by the
    equivalence tests and the benchmark.
    """
    chosen = impl or active_kernel()
    if chosen == "numba":
        if _accumulate_numba is None:
            raise RuntimeError("numba kernel unavailable (ACE_NUMBA=0 or numba missing)")
        _accumulate_numba(scores, ordinals, tfs, idfs, doc_norm, k1)
    elif chosen == "numpy":
        _accumulate_numpy(scores, ordinals, tfs, idfs, doc_norm, k1)
    else:
        raise ValueError(f"unknown kernel build {chosen!r}")
