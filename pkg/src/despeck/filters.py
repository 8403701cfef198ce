"""Temporal despeckling filters for co-registered intensity stacks.

The adaptive temporal filter (patf) averages each pixel across dates with
weights derived from patch dissimilarities: dates whose surrounding patch
looks changed are excluded, statistically identical dates get the largest
weight seen in the uncertain band, and in-between dates decay
exponentially. Three baselines share a common temporal combination and
differ only in how the per-date reflectivity mu is estimated:

    uta    boxcar window mean
    nltf   unweighted mean over the n_similar closest patches in a search
           window (closeness by patch dissimilarity, self included)
    anltf  dissimilarity-weighted mean over a search window

For uta/nltf/anltf the per-date estimates are blended across dates with
the classic ratio combination u_t = (mu_t / M) * sum_t' y_t' / mu_t'; a
single-date stack degenerates to the spatial estimate itself.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import warnings

import numpy as np

from .errors import InvalidParameterError
from .similarity import SimilarityParams, floor_intensity
from .speckle import ImageStack
from .windows import box_mean_same, box_sum_same, box_sum_valid

METHODS = ("patf", "uta", "nltf", "anltf", "arithmetic_mean")


@dataclass
class WeightVector:
    """Per-date temporal weights for one reference pixel/date."""

    w: np.ndarray

    @property
    def total(self) -> float:
        return float(self.w.sum())

    def normalized(self) -> np.ndarray:
        return self.w / self.w.sum()


@dataclass
class FilterConfig:
    """Method selection plus the knobs each estimator needs."""

    method: str = "patf"
    sim: SimilarityParams = field(default_factory=SimilarityParams)
    window_half: int = 2      # uta/anltf spatial window half-width (5x5 default)
    search_half: int = 10     # nltf candidate search half-width (21x21 default)
    n_similar: int = 16       # nltf patch count
    temporal_combine: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameterError(
                f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.method in ("uta", "anltf") and self.window_half < 1:
            raise InvalidParameterError("window_half must be >= 1 for uta/anltf")
        if self.method == "nltf" and (self.search_half < 0 or self.n_similar < 1):
            raise InvalidParameterError("nltf needs search_half >= 0 and n_similar >= 1")
        if self.threads < 1:
            raise InvalidParameterError("threads must be >= 1")


def weights_from_dissimilarity(d1, params: SimilarityParams, self_index: int | None = None) -> np.ndarray:
    """Piecewise dissimilarity-to-weight rule for one reference date.

    d1 >= tau2 -> 0; tau1 < d1 < tau2 -> exp(-d1/h); d1 <= tau1 -> the
    maximum weight of the middle band. When no date falls in the middle
    band the d1 <= tau1 dates get weight 1. The reference date itself
    (self_index) always receives that maximum.
    """
    params.require_calibrated()
    d1 = np.asarray(d1, dtype=np.float64)
    mid = (d1 > params.tau1) & (d1 < params.tau2)
    w = np.where(mid, np.exp(-d1 / params.h), 0.0)
    fill = float(w.max())
    if fill == 0.0:  # middle band empty (or fully underflowed)
        fill = 1.0
    w = np.where(d1 <= params.tau1, fill, w)
    if self_index is not None:
        w[self_index] = fill
    return w


def patf_weights(stack: ImageStack, t: int, s, params: SimilarityParams) -> WeightVector:
    """Temporal weights of reference date t at pixel s."""
    from .similarity import patch_dissimilarity
    d1 = np.array([patch_dissimilarity(stack, t, t2, s, params)
                   for t2 in range(stack.n_dates)])
    return WeightVector(weights_from_dissimilarity(d1, params, self_index=t))


def _resolve_dates(stack, dates):
    if dates is None:
        return list(range(stack.n_dates))
    dates = [int(t) for t in dates]
    for t in dates:
        if not 0 <= t < stack.n_dates:
            raise InvalidParameterError(f"date {t} outside stack of {stack.n_dates}")
    return dates


def _map_dates(fn, dates, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, dates))
    return [fn(t) for t in dates]


def patf_denoise(stack: ImageStack, params: SimilarityParams, dates=None, threads: int = 1) -> ImageStack:
    """Adaptive temporal weighted average of the whole stack.

    Returns the despeckled dates (all by default). The looks metadata of
    the result carries the input ENL, not the higher effective ENL of the
    estimates.
    """
    params.require_calibrated()
    dates = _resolve_dates(stack, dates)
    data = np.stack([floor_intensity(stack.data[t]) for t in range(stack.n_dates)])
    logs = np.log(data)
    n1 = params.patch_size
    pref = 2.0 * params.looks - 1.0
    m = stack.n_dates

    def one_date(t):
        d1 = np.empty_like(data)
        for t2 in range(m):
            g = np.log(data[t] + data[t2]) - 0.5 * (logs[t] + logs[t2])
            d1[t2] = pref * box_sum_same(g, n1)
        mid = (d1 > params.tau1) & (d1 < params.tau2)
        w = np.where(mid, np.exp(-d1 / params.h), 0.0)
        wmax = w.max(axis=0)
        fill = np.where(wmax > 0.0, wmax, 1.0)
        w = np.where(d1 <= params.tau1, fill[None], w)
        w[t] = fill
        return (w * data).sum(axis=0) / w.sum(axis=0)

    out = _map_dates(one_date, dates, threads)
    return ImageStack(np.stack(out), stack.looks[dates])


def arithmetic_mean(stack: ImageStack) -> np.ndarray:
    """Per-pixel temporal mean of the stack (single image)."""
    return stack.data.mean(axis=0)


def _temporal_combine(data: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Ratio-based combination u_t = (mu_t / M) * sum_t' y_t'/mu_t'."""
    m = data.shape[0]
    if m == 1:
        return mu.copy()
    ratio_sum = (data / mu).sum(axis=0)
    return mu * (ratio_sum / m)


def uta_denoise(stack: ImageStack, config: FilterConfig, dates=None) -> ImageStack:
    """Boxcar per-date estimate plus temporal ratio combination."""
    if config.window_half < 1:
        raise InvalidParameterError("window_half must be >= 1 for uta")
    dates = _resolve_dates(stack, dates)
    data = np.stack([floor_intensity(stack.data[t]) for t in range(stack.n_dates)])
    nw = 2 * config.window_half + 1
    mu = np.stack([box_mean_same(data[t], nw) for t in range(stack.n_dates)])
    if not config.temporal_combine:
        return ImageStack(mu[dates], stack.looks[dates])
    out = _temporal_combine(data, mu)
    return ImageStack(out[dates], stack.looks[dates])


def _search_offsets(search_half: int):
    offs = [(dr, dc)
            for dr in range(-search_half, search_half + 1)
            for dc in range(-search_half, search_half + 1)]
    return offs


def nltf_denoise(stack: ImageStack, config: FilterConfig, dates=None) -> ImageStack:
    """Non-local per-date estimate: mean over the n_similar closest patches."""
    params = config.sim
    dates = _resolve_dates(stack, dates)
    data = np.stack([floor_intensity(stack.data[t]) for t in range(stack.n_dates)])
    sh, ph = config.search_half, params.patch_half
    n1 = params.patch_size
    pref = 2.0 * params.looks - 1.0
    offsets = _search_offsets(sh)
    n2 = config.n_similar
    if n2 > len(offsets):
        warnings.warn(f"search window holds {len(offsets)} candidates; "
                      f"reducing n_similar from {n2}")
        n2 = len(offsets)
    pad = sh + ph
    h, w = data.shape[1:]
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    drs = np.array([o[0] for o in offsets])
    dcs = np.array([o[1] for o in offsets])

    def mu_one(t):
        ypad = np.pad(data[t], pad, mode="reflect")
        lpad = np.log(ypad)
        a = ypad[pad - ph:pad + ph + h, pad - ph:pad + ph + w]
        la = lpad[pad - ph:pad + ph + h, pad - ph:pad + ph + w]
        # patch means at every padded center (offset grid is sh-wide)
        bpad = box_sum_valid(ypad, n1) / float(n1 * n1)
        d1 = np.empty((len(offsets), h, w))
        for k, (dr, dc) in enumerate(offsets):
            ao = ypad[pad - ph + dr:pad - ph + dr + h + 2 * ph,
                      pad - ph + dc:pad - ph + dc + w + 2 * ph]
            lao = lpad[pad - ph + dr:pad - ph + dr + h + 2 * ph,
                       pad - ph + dc:pad - ph + dc + w + 2 * ph]
            g = np.log(a + ao) - 0.5 * (la + lao)
            d1[k] = pref * box_sum_valid(g, n1)
        if n2 < len(offsets):
            sel = np.argpartition(d1, n2 - 1, axis=0)[:n2]
        else:
            sel = np.arange(len(offsets))[:, None, None] * np.ones((1, h, w), dtype=np.intp)
        rr = rows[None] + drs[sel] + sh
        cc = cols[None] + dcs[sel] + sh
        return bpad[rr, cc].mean(axis=0)

    mu = np.stack(_map_dates(mu_one, range(stack.n_dates), config.threads))
    if not config.temporal_combine:
        return ImageStack(mu[dates], stack.looks[dates])
    return ImageStack(_temporal_combine(data, mu)[dates], stack.looks[dates])


def anltf_denoise(stack: ImageStack, config: FilterConfig, dates=None) -> ImageStack:
    """Adaptive non-local per-date estimate: exp(-d1/h)-weighted window mean.

    Weights are computed as exp(-(d1 - d1_min)/h) with the constant
    minimum-attainable d1 subtracted; normalization cancels the shift, it
    only keeps the exponentials in floating range for small h.
    """
    params = config.sim.require_calibrated()
    if config.window_half < 1:
        raise InvalidParameterError("window_half must be >= 1 for anltf")
    dates = _resolve_dates(stack, dates)
    data = np.stack([floor_intensity(stack.data[t]) for t in range(stack.n_dates)])
    sh, ph = config.window_half, params.patch_half
    n1 = params.patch_size
    pref = 2.0 * params.looks - 1.0
    d_min = params.min_d1()
    pad = sh + ph
    h, w = data.shape[1:]

    def mu_one(t):
        ypad = np.pad(data[t], pad, mode="reflect")
        lpad = np.log(ypad)
        a = ypad[pad - ph:pad + ph + h, pad - ph:pad + ph + w]
        la = lpad[pad - ph:pad + ph + h, pad - ph:pad + ph + w]
        num = np.zeros((h, w))
        den = np.zeros((h, w))
        for dr, dc in _search_offsets(sh):
            ao = ypad[pad - ph + dr:pad - ph + dr + h + 2 * ph,
                      pad - ph + dc:pad - ph + dc + w + 2 * ph]
            lao = lpad[pad - ph + dr:pad - ph + dr + h + 2 * ph,
                       pad - ph + dc:pad - ph + dc + w + 2 * ph]
            g = np.log(a + ao) - 0.5 * (la + lao)
            d1 = pref * box_sum_valid(g, n1)
            wgt = np.exp(-(d1 - d_min) / params.h)
            centers = ypad[pad + dr:pad + dr + h, pad + dc:pad + dc + w]
            num += wgt * centers
            den += wgt
        return num / den

    mu = np.stack(_map_dates(mu_one, range(stack.n_dates), config.threads))
    if not config.temporal_combine:
        return ImageStack(mu[dates], stack.looks[dates])
    return ImageStack(_temporal_combine(data, mu)[dates], stack.looks[dates])


def despeckle(stack: ImageStack, config: FilterConfig, dates=None) -> ImageStack:
    """Run the configured method over the stack."""
    if config.method == "patf":
        return patf_denoise(stack, config.sim, dates=dates, threads=config.threads)
    if config.method == "uta":
        return uta_denoise(stack, config, dates=dates)
    if config.method == "nltf":
        return nltf_denoise(stack, config, dates=dates)
    if config.method == "anltf":
        return anltf_denoise(stack, config, dates=dates)
    mean = arithmetic_mean(stack)
    dates = _resolve_dates(stack, dates)
    return ImageStack(np.stack([mean] * len(dates)), stack.looks[dates])
