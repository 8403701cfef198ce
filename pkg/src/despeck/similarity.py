"""Likelihood-ratio similarity between dates and its Monte-Carlo calibration.

Two intensity observations of the same resolution cell are compared with a
generalized likelihood ratio test under the gamma speckle model. Patch
dissimilarity sums the per-pixel log statistic over an N1 x N1 window:

    d1 = (2L - 1) * sum_k log( sqrt(r_k) + sqrt(1/r_k) ),   r_k = y_t / y_t'

which is minimal, (2L - 1) * N1^2 * log 2, for identical patches. The
no-change distribution of d1 depends only on (L, N1), so decision
thresholds tau1/tau2 and the weight-kernel smoothing h are calibrated once
per (L, N1) by simulating speckle patch pairs.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import CalibrationError, InvalidParameterError
from .speckle import ImageStack
from .windows import box_sum_same, window_extent

INTENSITY_FLOOR_SCALE = 1e-10  # zero clamp, relative to the image mean


def _validate_positive(*arrays):
    for a in arrays:
        if np.any(np.asarray(a) <= 0):
            raise InvalidParameterError("intensities must be > 0")


def glrt(y1, y2, looks1: float, looks2: float):
    """Generalized likelihood ratio for one observation pair; in (0, 1]."""
    _validate_positive(y1, y2)
    if looks1 <= 0 or looks2 <= 0:
        raise InvalidParameterError("looks must be > 0")
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    ls = looks1 + looks2
    out = ls ** ls * y1 ** looks1 * y2 ** looks2 / (looks1 * y1 + looks2 * y2) ** ls
    return out if out.ndim else float(out)

def s_glr(y1, y2, looks1: float, looks2: float):
    """Log-domain GLRT dissimilarity; >= 0, equal to -log(glrt)."""
    _validate_positive(y1, y2)
    if looks1 <= 0 or looks2 <= 0:
        raise InvalidParameterError("looks must be > 0")
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    mix = looks1 * y1 + looks2 * y2
    ls = looks1 + looks2
    out = looks1 * np.log(mix / (y1 * ls)) + looks2 * np.log(mix / (y2 * ls))
    return out if out.ndim else float(out)


def s_glr_equal_looks(y1, y2, looks: float):
    """Equal-ENL form 2L*log(sqrt(y1/y2) + sqrt(y2/y1)) - 2L*log(2).

    Depends on the intensity ratio only; agrees with s_glr(y1, y2, L, L).
    """
    _validate_positive(y1, y2)
    if looks <= 0:
        raise InvalidParameterError("looks must be > 0")
    r = np.sqrt(np.asarray(y1, dtype=np.float64) / np.asarray(y2, dtype=np.float64))
    out = 2.0 * looks * (np.log(r + 1.0 / r) - np.log(2.0))
    return out if out.ndim else float(out)


@dataclass
class SimilarityParams:
    """Patch comparison settings plus calibrated decision constants.

    tau1/tau2 split dissimilarities into unchanged / uncertain / changed
    bands; h scales the exponential dissimilarity-to-weight kernel. All
    three come from ``calibrate`` (or are set explicitly).
    """

    patch_half: int = 3
    looks: float = 1.0
    h: float | None = None
    tau1: float | None = None
    tau2: float | None = None
    alpha_low: float = 0.08
    alpha_high: float = 0.92
    alpha_h: float = 0.92

    def __post_init__(self):
        if self.patch_half < 0:
            raise InvalidParameterError(f"patch_half must be >= 0, got {self.patch_half}")
        if not self.looks > 0:
            raise InvalidParameterError(f"looks must be > 0, got {self.looks}")
        if not 0.0 < self.alpha_low < self.alpha_high < 1.0:
            raise InvalidParameterError(
                f"need 0 < alpha_low < alpha_high < 1, got {self.alpha_low}, {self.alpha_high}")
        if not 0.0 < self.alpha_h < 1.0:
            raise InvalidParameterError(f"alpha_h must be in (0, 1), got {self.alpha_h}")
        if self.h is not None and not self.h > 0:
            raise InvalidParameterError(f"h must be > 0, got {self.h}")
        if self.tau1 is not None and self.tau2 is not None and not self.tau1 < self.tau2:
            raise InvalidParameterError(f"need tau1 < tau2, got {self.tau1}, {self.tau2}")

    @property
    def patch_size(self) -> int:
        return 2 * self.patch_half + 1

    @property
    def calibrated(self) -> bool:
        return self.h is not None and self.tau1 is not None and self.tau2 is not None

    def require_calibrated(self) -> "SimilarityParams":
        if not self.calibrated:
            raise InvalidParameterError(
                "similarity params lack h/tau1/tau2; run calibrate() first")
        return self

    def min_d1(self) -> float:
        """Smallest attainable patch dissimilarity (identical patches)."""
        return (2.0 * self.looks - 1.0) * self.patch_size ** 2 * np.log(2.0)


def floor_intensity(image: np.ndarray) -> np.ndarray:
    """Clamp non-positive intensities to a small floor before ratioing."""
    image = np.asarray(image, dtype=np.float64)
    lo = float(image.min(initial=np.inf))
    if lo > 0:
        return image
    mean = float(image.mean())
    if mean <= 0:
        raise InvalidParameterError("image has no positive intensities")
    return np.maximum(image, INTENSITY_FLOOR_SCALE * mean)


def _log_ratio_term(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # log(sqrt(a/b) + sqrt(b/a)) == log(a + b) - 0.5*log(a*b)
    return np.log(a + b) - 0.5 * np.log(a * b)


def patch_dissimilarity(stack: ImageStack, t: int, t2: int, s, params: SimilarityParams) -> float:
    """d1 between the patches of dates t and t2 centered at pixel s."""
    r, c = s
    n1 = params.patch_size
    lo, hi = window_extent(n1)
    a = floor_intensity(stack.data[t])
    b = floor_intensity(stack.data[t2])
    pa = np.pad(a, ((lo, hi), (lo, hi)), mode="reflect")[r:r + n1, c:c + n1]
    pb = np.pad(b, ((lo, hi), (lo, hi)), mode="reflect")[r:r + n1, c:c + n1]
    terms = _log_ratio_term(pa, pb)
    return float((2.0 * params.looks - 1.0) * terms.sum())


def dissimilarity_plane(stack: ImageStack, t: int, t2: int, params: SimilarityParams) -> np.ndarray:
    """d1 at every pixel for the date pair (t, t2), mirror-padded."""
    a = floor_intensity(stack.data[t])
    b = floor_intensity(stack.data[t2])
    g = _log_ratio_term(a, b)
    return (2.0 * params.looks - 1.0) * box_sum_same(g, params.patch_size)


def h0_sample(patch_half: int, looks: float, n: int, rng_seed=None, u: float = 1.0,
              batch: int = 65536) -> np.ndarray:
    """Draw n no-change patch dissimilarities (same reflectivity u, ENL looks).

    Batches come from generators spawned off one seed sequence, so the
    stream can be split across workers without overlap.
    """
    if not looks > 0 or patch_half < 0 or not u > 0:
        raise InvalidParameterError("need looks > 0, patch_half >= 0, u > 0")
    n1sq = (2 * patch_half + 1) ** 2
    pref = 2.0 * looks - 1.0
    n = int(n)
    seq = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    n_batches = (n + batch - 1) // batch
    children = seq.spawn(n_batches)
    out = np.empty(n, dtype=np.float64)
    pos = 0
    for child in children:
        m = min(batch, n - pos)
        rng = np.random.default_rng(child)
        a = rng.gamma(shape=looks, scale=u / looks, size=(m, n1sq))
        b = rng.gamma(shape=looks, scale=u / looks, size=(m, n1sq))
        out[pos:pos + m] = pref * _log_ratio_term(a, b).sum(axis=1)
        pos += m
    return out


MIN_CALIBRATION_DRAWS = 100_000


def calibrate(params: SimilarityParams, n_mc: int, rng_seed=None) -> SimilarityParams:
    """Fill tau1/tau2/h from the Monte-Carlo no-change d1 distribution.

    tau1 and tau2 are the alpha_low / alpha_high empirical quantiles; h is
    the alpha_h quantile minus the distribution mean. The distribution
    depends only on (looks, patch size), never on the common reflectivity.
    """
    if n_mc < MIN_CALIBRATION_DRAWS:
        raise CalibrationError(
            f"n_mc={n_mc} is below the minimum {MIN_CALIBRATION_DRAWS} for stable quantiles")
    d1 = h0_sample(params.patch_half, params.looks, n_mc, rng_seed)
    tau1 = float(np.quantile(d1, params.alpha_low))
    tau2 = float(np.quantile(d1, params.alpha_high))
    h = float(np.quantile(d1, params.alpha_h) - d1.mean())
    return replace(params, tau1=tau1, tau2=tau2, h=h)


# --- calibration cache -----------------------------------------------------

def cache_key(params: SimilarityParams, n_mc: int) -> str:
    return (f"L={params.looks:g},N1={params.patch_size},"
            f"alow={params.alpha_low:g},ahigh={params.alpha_high:g},"
            f"ah={params.alpha_h:g},nmc={int(n_mc)}")


def load_calibration(path, params: SimilarityParams, n_mc: int) -> SimilarityParams | None:
    """Return calibrated params from a JSON cache file, or None on miss."""
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as f:
        table = json.load(f)
    entry = table.get(cache_key(params, n_mc))
    if entry is None:
        return None
    return replace(params, tau1=entry["tau1"], tau2=entry["tau2"], h=entry["h"])


def store_calibration(path, params: SimilarityParams, n_mc: int) -> None:
    params.require_calibrated()
    table = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as f:
            table = json.load(f)
    table[cache_key(params, n_mc)] = {"tau1": params.tau1, "tau2": params.tau2, "h": params.h}
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(table, f, indent=1, sort_keys=True)


def calibrate_cached(params: SimilarityParams, n_mc: int, rng_seed=None,
                     cache_path=None) -> SimilarityParams:
    """calibrate() with a read-through JSON cache keyed by (L, N1, alphas, n_mc)."""
    if cache_path is not None:
        hit = load_calibration(cache_path, params, n_mc)
        if hit is not None:
            return hit
    out = calibrate(params, n_mc, rng_seed)
    if cache_path is not None:
        store_calibration(cache_path, out, n_mc)
    return out
