"""No-reference denoising quality from the noisy/denoised ratio image.

A good estimate leaves a ratio R = y / u_hat of pure unit-mean speckle.
Leftover structure shows up as spatial covariance: on each N1 x N1 patch
the lag-one autocovariances (patch mean removed) are squared, summed and
normalized by the patch's speckle energy sum(R^2 - 1), giving a per-patch
score. Scores are aggregated over every patch covering a pixel into a
quality map; the global score is the mean of the defined map values. Low
values mean the residual looks like speckle.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRatioError, InvalidParameterError
from .windows import box_sum_valid, window_extent

DEFAULT_DISPLACEMENTS = ((0, 1), (1, 0))
DEFAULT_PATCH = 8
RATIO_FLOOR_SCALE = 1e-10


def ratio(noisy: np.ndarray, denoised: np.ndarray, floor: float | None = None) -> np.ndarray:
    """Element-wise noisy/denoised ratio.

    Denominator pixels at or below the floor (default 1e-10 of the mean
    denoised intensity) are clamped; a warning reports how many.
    """
    noisy = np.asarray(noisy, dtype=np.float64)
    denoised = np.asarray(denoised, dtype=np.float64)
    if noisy.shape != denoised.shape:
        raise InvalidParameterError(
            f"shape mismatch: noisy {noisy.shape} vs denoised {denoised.shape}")
    if floor is None:
        mean = float(np.abs(denoised).mean())
        if mean <= 0:
            raise InvalidParameterError("denoised image has no signal")
        floor = RATIO_FLOOR_SCALE * mean
    clamped = int(np.count_nonzero(denoised < floor))
    if clamped:
        warnings.warn(f"clamped {clamped} denoised pixels below floor {floor:g}")
    return noisy / np.maximum(denoised, floor)


def patch_autocov(r_img: np.ndarray, s, displacement, n1: int) -> float:
    """Mean-removed autocovariance of the patch at s for one displacement.

    The patch mean is subtracted from the patch and from its shifted copy;
    shifted values outside the image come from mirror padding.
    """
    r_img = np.asarray(r_img, dtype=np.float64)
    rr, cc = s
    dr, dc = displacement
    lo, hi = window_extent(n1)
    pad = max(lo, hi) + max(abs(dr), abs(dc))
    p = np.pad(r_img, pad, mode="reflect")
    r0, c0 = rr + pad - lo, cc + pad - lo
    patch = p[r0:r0 + n1, c0:c0 + n1]
    shifted = p[r0 + dr:r0 + dr + n1, c0 + dc:c0 + dc + n1]
    m = patch.mean()
    return float(((patch - m) * (shifted - m)).mean())


def _den_eps(n1: int) -> float:
    return 1e-8 * n1 * n1


def patch_score(r_img: np.ndarray, s, n1: int = DEFAULT_PATCH,
                displacements=DEFAULT_DISPLACEMENTS,
                centered_denominator: bool = False) -> float:
    """Normalized residual autocovariance of one patch; NaN when undefined.

    Numerator: sum of squared autocovariances over the displacement set
    (the zero displacement is always excluded). Denominator: sum over the
    patch of R^2 - 1 as printed, or of (R - 1)^2 with
    centered_denominator=True. |denominator| below 1e-8 * N1^2 marks the
    patch undefined.
    """
    r_img = np.asarray(r_img, dtype=np.float64)
    rr, cc = s
    lo, hi = window_extent(n1)
    pad = max(lo, hi) + 1
    p = np.pad(r_img, pad, mode="reflect")
    patch = p[rr + pad - lo:rr + pad - lo + n1, cc + pad - lo:cc + pad - lo + n1]
    if centered_denominator:
        den = float(((patch - 1.0) ** 2).sum())
    else:
        den = float((patch ** 2 - 1.0).sum())
    if abs(den) < _den_eps(n1):
        return float("nan")
    num = 0.0
    for d in displacements:
        if d == (0, 0):
            continue
        num += patch_autocov(r_img, s, d, n1) ** 2
    n1sq = n1 * n1
    return float(n1sq / (n1sq - 1.0) * num / den)


@dataclass
class QualityMap:
    """Per-pixel aggregated residual score plus its global mean.

    values is H x W with NaN where no covering patch was defined; score is
    the mean of the defined values.
    """

    values: np.ndarray
    score: float
    n_defined_patches: int


def quality_map(r_img: np.ndarray, n1: int = DEFAULT_PATCH,
                displacements=DEFAULT_DISPLACEMENTS,
                centered_denominator: bool = False) -> QualityMap:
    """Dense sliding-patch evaluation of the whole ratio image."""
    r_img = np.asarray(r_img, dtype=np.float64)
    if r_img.ndim != 2:
        raise InvalidParameterError("ratio image must be 2-D")
    if n1 < 2:
        raise InvalidParameterError(f"patch size must be >= 2, got {n1}")
    disps = [tuple(d) for d in displacements if tuple(d) != (0, 0)]
    if not disps:
        raise InvalidParameterError("displacement set is empty")
    h, w = r_img.shape
    lo, hi = window_extent(n1)
    before_r = lo + max(0, *(max(0, -d[0]) for d in disps))
    after_r = hi + max(0, *(max(0, d[0]) for d in disps))
    before_c = lo + max(0, *(max(0, -d[1]) for d in disps))
    after_c = hi + max(0, *(max(0, d[1]) for d in disps))
    p = np.pad(r_img, ((before_r, after_r), (before_c, after_c)), mode="reflect")
    n1sq = float(n1 * n1)

    # block whose valid n1-windows are the patches centered on the image grid
    a0 = p[before_r - lo:before_r - lo + h + n1 - 1, before_c - lo:before_c - lo + w + n1 - 1]
    m = box_sum_valid(a0, n1) / n1sq
    if centered_denominator:
        den = box_sum_valid((a0 - 1.0) ** 2, n1)
    else:
        den = box_sum_valid(a0 * a0, n1) - n1sq
    num = np.zeros((h, w))
    for dr, dc in disps:
        a1 = p[before_r - lo + dr:before_r - lo + dr + h + n1 - 1,
               before_c - lo + dc:before_c - lo + dc + w + n1 - 1]
        sxy = box_sum_valid(a0 * a1, n1) / n1sq
        msh = box_sum_valid(a1, n1) / n1sq
        cov = sxy - m * msh
        num += cov * cov
    defined = np.abs(den) >= _den_eps(n1)
    if not defined.any():
        raise DegenerateRatioError("degenerate ratio: every patch is undefined")
    cnorm = np.full((h, w), np.nan)
    cnorm[defined] = (n1sq / (n1sq - 1.0)) * num[defined] / den[defined]

    # aggregate: pixel s' is covered by patch centers in [s'-hi, s'+lo]
    vals = np.where(defined, cnorm, 0.0)
    cnt = defined.astype(np.float64)
    vals = np.pad(vals, ((hi, lo), (hi, lo)), mode="constant")
    cnt = np.pad(cnt, ((hi, lo), (hi, lo)), mode="constant")
    cover_sum = box_sum_valid(vals, n1)
    cover_cnt = box_sum_valid(cnt, n1)
    wmap = np.full((h, w), np.nan)
    covered = cover_cnt > 0
    wmap[covered] = cover_sum[covered] / cover_cnt[covered]
    score = float(np.nanmean(wmap))
    return QualityMap(values=wmap, score=score, n_defined_patches=int(defined.sum()))


def classify_quality(values: np.ndarray, edges=(1.0, 2.0, 3.0)) -> np.ndarray:
    """Quantize a quality map into the four display classes over [0, 4].

    For visualization only; NaNs map to class 0.
    """
    v = np.nan_to_num(np.clip(values, 0.0, 4.0), nan=0.0)
    return np.digitize(v, edges).astype(np.uint8)
