"""Stack persistence, visualization export, and scene-description parsing.

Stack format: a raw payload file of little-endian float32 intensities,
date-major then row-major, with a plain-text sidecar header at
``<payload path>.hdr``::

    DESPECK-STACK 1
    width 256
    height 256
    dates 64
    looks 1 1 ... (one value per date)
    endian little
    dtype float32

Scene description format (plain text, ``#`` comments)::

    height 192
    width 192
    background 1.0
    block  ROW COL HEIGHT WIDTH LEVEL          # paint background rectangle
    region ROW COL HEIGHT WIDTH constant LEVEL
    region ROW COL HEIGHT WIDTH step BEFORE AFTER ONSET
    region ROW COL HEIGHT WIDTH impulse BASE PEAK START STOP
    region ROW COL HEIGHT WIDTH cycle BASE AMPLITUDE PERIOD [PHASE]
    region ROW COL HEIGHT WIDTH complex step:1:4:8/16,cycle:4:0.25:12:0/48

A ``complex`` region concatenates segments written ``kind:args/length``;
the lengths must add up to the number of simulated dates.
"""
from __future__ import annotations

import numpy as np

from .errors import (BadMagicError, DimensionMismatchError, HeaderFormatError,
                     InvalidParameterError, TruncatedPayloadError)
from .speckle import ChangeProfile, ImageStack, Region, SceneSpec

MAGIC = "DESPECK-STACK"
FORMAT_VERSION = 1


def header_path(path) -> str:
    return str(path) + ".hdr"


def write_stack(stack: ImageStack, path) -> None:
    """Write payload (float32 little-endian) and text header sidecar."""
    m, h, w = stack.shape
    payload = np.ascontiguousarray(stack.data, dtype="<f4")
    with open(path, "wb") as f:
        f.write(payload.tobytes())
    looks = " ".join(f"{v:g}" for v in stack.looks)
    header = (f"{MAGIC} {FORMAT_VERSION}\n"
              f"width {w}\nheight {h}\ndates {m}\n"
              f"looks {looks}\nendian little\ndtype float32\n")
    with open(header_path(path), "w", encoding="utf-8") as f:
        f.write(header)


def _parse_header(text: str, path) -> dict:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise BadMagicError(f"{path}: not a {MAGIC} header")
    fields = {}
    for ln in lines[1:]:
        key, _, value = ln.partition(" ")
        fields[key] = value
    try:
        width = int(fields["width"])
        height = int(fields["height"])
        dates = int(fields["dates"])
        looks = np.array([float(v) for v in fields["looks"].split()])
    except (KeyError, ValueError) as exc:
        raise HeaderFormatError(f"{path}: malformed header field ({exc})") from exc
    if width < 1 or height < 1 or dates < 1 or np.any(looks <= 0):
        raise HeaderFormatError(f"{path}: header dimensions/looks must be positive")
    if looks.size != dates:
        raise HeaderFormatError(
            f"{path}: header lists {looks.size} looks for {dates} dates")
    if fields.get("endian", "little") != "little":
        raise HeaderFormatError(f"{path}: unsupported endianness {fields.get('endian')!r}")
    if fields.get("dtype", "float32") != "float32":
        raise HeaderFormatError(f"{path}: unsupported dtype {fields.get('dtype')!r}")
    return {"width": width, "height": height, "dates": dates, "looks": looks}


def read_stack(path) -> ImageStack:
    """Read a stack written by write_stack; errors carry distinct codes."""
    with open(header_path(path), "r", encoding="utf-8") as f:
        hdr = _parse_header(f.read(), path)
    with open(path, "rb") as f:
        raw = f.read()
    m, h, w = hdr["dates"], hdr["height"], hdr["width"]
    expected = 4 * m * h * w
    if len(raw) != expected:
        per_date = 4 * h * w
        if len(raw) % per_date == 0:
            raise DimensionMismatchError(
                f"{path}: header declares {m} dates, payload holds {len(raw) // per_date}")
        raise TruncatedPayloadError(
            f"{path}: expected {expected} payload bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4").reshape(m, h, w)
    return ImageStack(data.astype(np.float64), hdr["looks"])


# --- visualization ----------------------------------------------------------

SCALINGS = ("linear", "log", "quantile")


def export_pgm(image: np.ndarray, path, scaling: str = "linear") -> None:
    """8-bit grayscale PGM; the scaling used is recorded in a comment line.

    linear maps [min, max] onto [0, 255]; log does the same on the log10
    image; quantile clips at the 1st/99th percentiles first. Constant
    images map to mid-gray 128.
    """
    image = np.asarray(image, dtype=np.float64)
    if not np.all(np.isfinite(image)):
        raise InvalidParameterError("image must be finite for export")
    if scaling not in SCALINGS:
        raise InvalidParameterError(f"unknown scaling {scaling!r}; expected one of {SCALINGS}")
    v = image
    if scaling == "log":
        positive = v[v > 0]
        floor = positive.min() if positive.size else 1.0
        v = np.log10(np.maximum(v, floor))
    elif scaling == "quantile":
        lo, hi = np.percentile(v, [1.0, 99.0])
        v = np.clip(v, lo, hi)
    vmin, vmax = float(v.min()), float(v.max())
    if vmax > vmin:
        gray = np.rint((v - vmin) / (vmax - vmin) * 255.0)
    else:
        gray = np.full(v.shape, 128.0)
    gray = gray.astype(np.uint8)
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(f"P5\n# scaling: {scaling}\n{w} {h}\n255\n".encode("ascii"))
        f.write(gray.tobytes())


CLASS_COLORS = ((40, 60, 180), (60, 180, 90), (240, 200, 40), (210, 40, 40))


def export_class_ppm(classes: np.ndarray, path) -> None:
    """Color PPM for the 4-class quality display (blue -> red = bad)."""
    classes = np.asarray(classes)
    rgb = np.array(CLASS_COLORS, dtype=np.uint8)[np.clip(classes, 0, 3)]
    h, w = classes.shape
    with open(path, "wb") as f:
        f.write(f"P6\n# quality classes 0-3 over [0, 4]\n{w} {h}\n255\n".encode("ascii"))
        f.write(rgb.tobytes())


# --- scene parsing ----------------------------------------------------------

def _profile_from_tokens(kind: str, args: list, where: str) -> ChangeProfile:
    try:
        if kind == "constant":
            (level,) = map(float, args)
            return ChangeProfile.constant(level)
        if kind == "step":
            before, after, onset = args
            return ChangeProfile.step(float(before), float(after), int(onset))
        if kind == "impulse":
            base, peak, start, stop = args
            return ChangeProfile.impulse(float(base), float(peak), int(start), int(stop))
        if kind == "cycle":
            if len(args) == 3:
                args = list(args) + ["0"]
            base, amp, period, phase = args
            return ChangeProfile.cycle(float(base), float(amp), float(period), float(phase))
        if kind == "complex":
            (segspec,) = args
            segments = []
            for part in segspec.split(","):
                body, _, length = part.partition("/")
                if not length:
                    raise ValueError(f"segment {part!r} lacks /length")
                toks = body.split(":")
                segments.append((_profile_from_tokens(toks[0], toks[1:], where), int(length)))
            return ChangeProfile.composite(segments)
    except (ValueError, TypeError) as exc:
        raise InvalidParameterError(f"{where}: bad {kind} profile arguments ({exc})") from exc
    raise InvalidParameterError(f"{where}: unknown profile kind {kind!r}")


def parse_scene(text: str) -> SceneSpec:
    """Parse the scene description format; unknown keys are rejected."""
    height = width = None
    background_level = None
    blocks = []
    regions = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"scene line {ln}"
        key, *tokens = line.split()
        try:
            if key == "height":
                (height,) = map(int, tokens)
            elif key == "width":
                (width,) = map(int, tokens)
            elif key == "background":
                (background_level,) = map(float, tokens)
            elif key == "block":
                r, c, bh, bw = map(int, tokens[:4])
                (level,) = map(float, tokens[4:])
                blocks.append((r, c, bh, bw, level))
            elif key == "region":
                r, c, rh, rw = map(int, tokens[:4])
                profile = _profile_from_tokens(tokens[4], tokens[5:], where)
                regions.append(Region(r, c, rh, rw, profile))
            else:
                raise InvalidParameterError(f"{where}: unknown key {key!r}")
        except (ValueError, IndexError) as exc:
            raise InvalidParameterError(f"{where}: malformed values ({exc})") from exc
    if height is None or width is None or background_level is None:
        raise InvalidParameterError("scene needs height, width and background keys")
    background = np.full((height, width), background_level, dtype=np.float64)
    for r, c, bh, bw, level in blocks:
        if r < 0 or c < 0 or r + bh > height or c + bw > width:
            raise InvalidParameterError(f"block ({r},{c},{bh},{bw}) outside raster")
        background[r:r + bh, c:c + bw] = level
    return SceneSpec(background=background, regions=regions)


def load_scene(path) -> SceneSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_scene(f.read())
