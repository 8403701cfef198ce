"""Full-reference and region quality metrics: PSNR, mean SSIM, ENL.

All metrics operate on linear intensity images (not log/dB displays).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .windows import box_mean_same


def psnr(reference: np.ndarray, estimate: np.ndarray, peak: float | None = None) -> float:
    """Peak signal-to-noise ratio in dB; inf when the images are identical.

    peak defaults to the maximum of the reference.
    """
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise InvalidParameterError(
            f"shape mismatch: {reference.shape} vs {estimate.shape}")
    if peak is None:
        peak = float(reference.max())
    if not peak > 0:
        raise InvalidParameterError(f"peak must be > 0, got {peak}")
    mse = float(((reference - estimate) ** 2).mean())
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def mssim(reference: np.ndarray, estimate: np.ndarray, window: int = 11,
          peak: float | None = None) -> float:
    """Mean structural similarity with a uniform window.

    Stabilizing constants use the usual k1=0.01 / k2=0.03 scaled by the
    peak, which defaults to the larger maximum of the two images so the
    metric is symmetric in its arguments.
    """
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise InvalidParameterError(
            f"shape mismatch: {reference.shape} vs {estimate.shape}")
    if window < 2 or window > min(reference.shape):
        raise InvalidParameterError(f"bad ssim window {window} for shape {reference.shape}")
    if peak is None:
        peak = max(float(reference.max()), float(estimate.max()))
    if not peak > 0:
        raise InvalidParameterError(f"peak must be > 0, got {peak}")
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    mu1 = box_mean_same(reference, window)
    mu2 = box_mean_same(estimate, window)
    s11 = box_mean_same(reference * reference, window) - mu1 * mu1
    s22 = box_mean_same(estimate * estimate, window) - mu2 * mu2
    s12 = box_mean_same(reference * estimate, window) - mu1 * mu2
    ssim_map = ((2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)
                / ((mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)))
    return float(ssim_map.mean())


def enl(image: np.ndarray, region=None) -> float:
    """Equivalent number of looks mean^2/variance over a homogeneous region.

    region is an optional boolean mask (default: whole image). A constant
    region is flagged as infinite.
    """
    image = np.asarray(image, dtype=np.float64)
    values = image[region] if region is not None else image
    values = values.ravel()
    if values.size < 2:
        raise InvalidParameterError("ENL needs at least 2 pixels")
    var = float(values.var(ddof=1))
    mean = float(values.mean())
    if var == 0.0:
        return math.inf
    return mean * mean / var


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.6g}"


@dataclass
class MetricReport:
    """Flat key/value metric bundle, serializable as plain text."""

    psnr: float | None = None
    mssim: float | None = None
    enl: float | None = None
    regions: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = []
        for name in ("psnr", "mssim", "enl"):
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name} {_fmt(v)}")
        for key in sorted(self.regions):
            lines.append(f"enl_{key} {_fmt(self.regions[key])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MetricReport":
        rep = cls()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(" ")
            v = float(value)
            if key.startswith("enl_"):
                rep.regions[key[4:]] = v
            elif key in ("psnr", "mssim", "enl"):
                setattr(rep, key, v)
            else:
                raise InvalidParameterError(f"unknown metric key {key!r}")
        return rep


def metric_report(reference: np.ndarray, estimate: np.ndarray,
                  peak: float | None = None, ssim_window: int = 11,
                  enl_region=None) -> MetricReport:
    """PSNR/MSSIM of estimate vs reference, plus ENL of the estimate."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.ndim == 3:
        p = psnr(reference, estimate, peak)
        ms = float(np.mean([mssim(reference[t], estimate[t], ssim_window, peak)
                            for t in range(reference.shape[0])]))
        e = float(np.mean([enl(estimate[t], enl_region) for t in range(estimate.shape[0])]))
    else:
        p = psnr(reference, estimate, peak)
        ms = mssim(reference, estimate, ssim_window, peak)
        e = enl(estimate, enl_region)
    return MetricReport(psnr=p, mssim=ms, enl=e)
