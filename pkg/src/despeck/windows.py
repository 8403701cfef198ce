"""Sliding-window sums over rasters.

All patch operations in the package share one boundary convention:
out-of-image accesses resolve through mirror padding (numpy ``reflect``,
edge pixel not duplicated). Sums are accumulated by shifted-slice adds in
a fixed order so results are deterministic and match naive loops to a few
ulp.
"""
from __future__ import annotations

import numpy as np


def window_extent(n: int) -> tuple[int, int]:
    """Offsets (lo, hi) of an n-wide window centered on a pixel.

    The window covers pixel offsets [-lo, +hi]; lo == hi for odd n, and
    even windows lean one pixel toward the high side.
    """
    lo = (n - 1) // 2
    return lo, n - 1 - lo


def box_sum_valid(a: np.ndarray, n: int) -> np.ndarray:
    """Sum of every n-by-n window fully inside ``a`` (no padding).

    Output shape is (H - n + 1, W - n + 1).
    """
    if n == 1:
        return a.copy()
    h = a.shape[0] - n + 1
    acc = a[0:h].copy()
    for p in range(1, n):
        acc += a[p:p + h]
    w = a.shape[1] - n + 1
    out = acc[:, 0:w].copy()
    for q in range(1, n):
        out += acc[:, q:q + w]
    return out


def box_sum_same(a: np.ndarray, n: int) -> np.ndarray:
    """Centered n-by-n window sum with mirror padding; same shape as ``a``."""
    lo, hi = window_extent(n)
    if n == 1:
        return a.copy()
    return box_sum_valid(np.pad(a, ((lo, hi), (lo, hi)), mode="reflect"), n)


def box_mean_same(a: np.ndarray, n: int) -> np.ndarray:
    """Centered n-by-n window mean with mirror padding."""
    return box_sum_same(a, n) / float(n * n)
