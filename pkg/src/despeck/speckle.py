"""Multiplicative gamma speckle simulation and multitemporal scene synthesis.

Single-look SAR intensity under fully developed speckle follows a gamma
law with unit-mean multiplicative noise: y = u * v with v ~ Gamma(shape=L,
scale=1/L), so E[y] = u and Var[y] = u**2 / L. Stacks are built from a
noise-free reflectivity movie (background plus rectangular change regions)
multiplied by speckle drawn independently per pixel and per date.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

PROFILE_KINDS = ("constant", "step", "impulse", "cycle", "complex")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_speckle(u: float, looks: float, n: int, rng_seed=None) -> np.ndarray:
    """Draw n i.i.d. intensity samples with mean reflectivity u and ENL looks.

    Samples follow Gamma(shape=looks, scale=u/looks): mean u, variance
    u**2/looks.
    """
    if not u > 0:
        raise InvalidParameterError(f"reflectivity must be > 0, got {u}")
    if not looks > 0:
        raise InvalidParameterError(f"looks must be > 0, got {looks}")
    if n < 1:
        raise InvalidParameterError(f"sample count must be >= 1, got {n}")
    return _rng(rng_seed).gamma(shape=looks, scale=u / looks, size=int(n))


def speckle_field(shape, looks: float, rng_seed=None) -> np.ndarray:
    """Unit-mean multiplicative speckle field ~ Gamma(looks, 1/looks)."""
    if not looks > 0:
        raise InvalidParameterError(f"looks must be > 0, got {looks}")
    return _rng(rng_seed).gamma(shape=looks, scale=1.0 / looks, size=shape)


@dataclass
class ImageStack:
    """M co-registered intensity rasters with per-date equivalent looks.

    data has shape (M, H, W), finite and >= 0; looks has length M, > 0.
    """

    data: np.ndarray
    looks: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 2:
            self.data = self.data[None]
        if self.data.ndim != 3 or self.data.shape[0] < 1:
            raise InvalidParameterError(
                f"stack data must be (M, H, W) with M >= 1, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise InvalidParameterError("stack contains non-finite values")
        if np.any(self.data < 0):
            raise InvalidParameterError("stack contains negative intensities")
        looks = np.asarray(self.looks, dtype=np.float64)
        if looks.ndim == 0:
            looks = np.full(self.data.shape[0], float(looks))
        if looks.shape != (self.data.shape[0],):
            raise InvalidParameterError(
                f"looks must be scalar or length {self.data.shape[0]}, got shape {looks.shape}")
        if np.any(looks <= 0):
            raise InvalidParameterError("looks must be > 0")
        self.looks = looks

    @property
    def n_dates(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def date(self, t: int) -> np.ndarray:
        return self.data[t]


def multilook(stack_or_image, factor: int):
    """Average non-overlapping factor-by-factor blocks.

    ENL multiplies by factor**2. Trailing rows/columns that do not fill a
    whole block are cropped. Accepts a 2-D image, a 3-D (M, H, W) array or
    an ImageStack; returns the same kind.
    """
    if int(factor) != factor or factor < 1:
        raise InvalidParameterError(f"multilook factor must be an integer >= 1, got {factor}")
    factor = int(factor)
    if isinstance(stack_or_image, ImageStack):
        out = multilook(stack_or_image.data, factor)
        return ImageStack(out, stack_or_image.looks * factor * factor)
    a = np.asarray(stack_or_image, dtype=np.float64)
    if factor == 1:
        return a.copy()
    h = (a.shape[-2] // factor) * factor
    w = (a.shape[-1] // factor) * factor
    a = a[..., :h, :w]
    blocks = a.reshape(a.shape[:-2] + (h // factor, factor, w // factor, factor))
    return blocks.mean(axis=(-3, -1))


@dataclass
class ChangeProfile:
    """Parametric temporal reflectivity trajectory for one scene region."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidParameterError(
                f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")

    @classmethod
    def constant(cls, level: float) -> "ChangeProfile":
        return cls("constant", {"level": float(level)})

    @classmethod
    def step(cls, before: float, after: float, onset: int) -> "ChangeProfile":
        return cls("step", {"before": float(before), "after": float(after), "onset": int(onset)})

    @classmethod
    def impulse(cls, base: float, peak: float, start: int, stop: int) -> "ChangeProfile":
        return cls("impulse", {"base": float(base), "peak": float(peak),
                               "start": int(start), "stop": int(stop)})

    @classmethod
    def cycle(cls, base: float, amplitude: float, period: float, phase: float = 0.0) -> "ChangeProfile":
        return cls("cycle", {"base": float(base), "amplitude": float(amplitude),
                             "period": float(period), "phase": float(phase)})

    @classmethod
    def composite(cls, segments) -> "ChangeProfile":
        """Piecewise concatenation: segments is a list of (profile, n_dates)."""
        return cls("complex", {"segments": [(p, int(n)) for p, n in segments]})


def render_profile(profile: ChangeProfile, n_dates: int) -> np.ndarray:
    """Evaluate a change profile over dates 0..n_dates-1 (all values > 0)."""
    if n_dates < 1:
        raise InvalidParameterError(f"n_dates must be >= 1, got {n_dates}")
    p = profile.params
    if profile.kind == "constant":
        _require_positive(p["level"], "constant level")
        return np.full(n_dates, p["level"], dtype=np.float64)
    if profile.kind == "step":
        _require_positive(p["before"], "step level")
        _require_positive(p["after"], "step level")
        t = np.arange(n_dates)
        return np.where(t < p["onset"], p["before"], p["after"]).astype(np.float64)
    if profile.kind == "impulse":
        _require_positive(p["base"], "impulse level")
        _require_positive(p["peak"], "impulse level")
        t = np.arange(n_dates)
        on = (t >= p["start"]) & (t < p["stop"])
        return np.where(on, p["peak"], p["base"]).astype(np.float64)
    if profile.kind == "cycle":
        base, amp, period, phase = p["base"], p["amplitude"], p["period"], p["phase"]
        _require_positive(base, "cycle base")
        if not period > 0:
            raise InvalidParameterError(f"cycle period must be > 0, got {period}")
        if abs(amp) >= 1.0:
            raise InvalidParameterError(
                f"cycle amplitude {amp} would produce non-positive reflectivity")
        t = np.arange(n_dates)
        return base * (1.0 + amp * np.sin(2.0 * np.pi * t / period + phase))
    # complex: concatenated segments must cover the n_dates exactly
    segments = p["segments"]
    total = sum(n for _, n in segments)
    if total != n_dates:
        raise InvalidParameterError(
            f"complex profile covers {total} dates, stack has {n_dates}")
    parts = [render_profile(seg, n) for seg, n in segments]
    return np.concatenate(parts)


def _require_positive(v, what):
    if not v > 0:
        raise InvalidParameterError(f"{what} must be > 0, got {v}")


@dataclass
class Region:
    """Rectangle (row, col, height, width) animated by a change profile."""

    row: int
    col: int
    height: int
    width: int
    profile: ChangeProfile


@dataclass
class SceneSpec:
    """Noise-free scene: background reflectivity map plus change regions."""

    background: np.ndarray
    regions: list

    def __post_init__(self):
        self.background = np.asarray(self.background, dtype=np.float64)
        if self.background.ndim != 2:
            raise InvalidParameterError("background must be a 2-D reflectivity map")
        if np.any(self.background <= 0) or not np.all(np.isfinite(self.background)):
            raise InvalidParameterError("background reflectivities must be finite and > 0")
        h, w = self.background.shape
        occupied = np.zeros((h, w), dtype=bool)
        for r in self.regions:
            if r.height < 1 or r.width < 1:
                raise InvalidParameterError("region size must be >= 1x1")
            if r.row < 0 or r.col < 0 or r.row + r.height > h or r.col + r.width > w:
                raise InvalidParameterError(
                    f"region ({r.row},{r.col},{r.height},{r.width}) outside {h}x{w} raster")
            sub = occupied[r.row:r.row + r.height, r.col:r.col + r.width]
            if sub.any():
                raise InvalidParameterError("scene regions may not overlap")
            sub[:] = True


def render_scene(spec: SceneSpec, n_dates: int) -> np.ndarray:
    """Noise-free reflectivity movie (M, H, W) for a scene."""
    clean = np.broadcast_to(spec.background, (n_dates,) + spec.background.shape).copy()
    for r in spec.regions:
        traj = render_profile(r.profile, n_dates)
        clean[:, r.row:r.row + r.height, r.col:r.col + r.width] = traj[:, None, None]
    return clean


def simulate_stack(spec: SceneSpec, n_dates: int, looks: float, rng_seed=None):
    """Simulate a multitemporal stack: returns (noise_free, noisy ImageStack).

    Speckle is drawn independently per pixel and per date; the same seed
    reproduces the stack bit for bit.
    """
    if not looks > 0:
        raise InvalidParameterError(f"looks must be > 0, got {looks}")
    clean = render_scene(spec, n_dates)
    rng = _rng(rng_seed)
    noisy = np.empty_like(clean)
    for t in range(n_dates):
        noisy[t] = clean[t] * rng.gamma(shape=looks, scale=1.0 / looks, size=clean.shape[1:])
    return clean, ImageStack(noisy, looks)
