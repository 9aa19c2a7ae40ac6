"""Frame loading: ordered grayscale frame sequences from disk.

Supported inputs are binary PGM (P5, 8-bit) and PNG files. Color inputs
are reduced to grayscale with fixed BT.601 weights before storage, so a
sequence is always a stack of 8-bit single-channel rasters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, FrameLoadError, NoFramesError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_SUFFIXES = {".pgm", ".png"}


@dataclass(frozen=True)
class Frame:
    """One 8-bit grayscale raster with its position in the sequence."""

    data: np.ndarray  # uint8, shape (height, width), row-major
    index: int

    def __post_init__(self):
        if self.data.ndim != 2:
            raise FrameLoadError("frame data must be a 2-D raster")
        if self.data.dtype != np.uint8:
            raise FrameLoadError("frame data must be 8-bit")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass
class FrameSequence:
    """Ordered frames from one video, all sharing the same dimensions."""

    frames: list[Frame]
    source_id: str
    object_tag: str | None = None

    def __post_init__(self):
        if len(self.frames) < 2:
            raise NoFramesError(
                f"sequence '{self.source_id}' has {len(self.frames)} frame(s); need at least 2"
            )
        w, h = self.frames[0].width, self.frames[0].height
        for f in self.frames:
            if (f.width, f.height) != (w, h):
                raise DimensionMismatchError(
                    f"dimension mismatch in '{self.source_id}': "
                    f"{w}x{h} vs {f.width}x{f.height} at frame {f.index}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height


def to_grayscale(r, g, b):
    """BT.601 luma: round(0.299 r + 0.587 g + 0.114 b), clamped to [0, 255].

    Accepts scalars or arrays; rounding is half-up.
    """
    wr, wg, wb = GRAY_WEIGHTS
    v = wr * np.asarray(r, dtype=np.float64) + wg * np.asarray(g, dtype=np.float64) \
        + wb * np.asarray(b, dtype=np.float64)
    out = np.clip(np.floor(v + 0.5), 0, 255).astype(np.uint8)
    return out if out.ndim else int(out)


def read_pgm(path: Path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM file into a uint8 raster."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FrameLoadError(f"cannot read frame file '{path}': {exc}") from exc

    if not blob.startswith(b"P5"):
        raise FrameLoadError(f"'{path}': not a binary PGM (P5) file")

    # Header tokens may be separated by whitespace and '#' comments.
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            eol = blob.find(b"\n", pos)
            pos = len(blob) if eol < 0 else eol + 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FrameLoadError(f"'{path}': truncated PGM header")
        try:
            tokens.append(int(blob[start:pos]))
        except ValueError:
            raise FrameLoadError(f"'{path}': malformed PGM header") from None
    pos += 1  # single whitespace byte after maxval

    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise FrameLoadError(f"'{path}': invalid PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise FrameLoadError(f"'{path}': PGM maxval {maxval} is not 8-bit")
    pixels = blob[pos : pos + width * height]
    if len(pixels) != width * height:
        raise FrameLoadError(f"'{path}': PGM pixel data truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path: Path, raster: np.ndarray) -> None:
    """Write a uint8 raster as binary (P5) PGM."""
    raster = np.ascontiguousarray(raster, dtype=np.uint8)
    h, w = raster.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.tobytes())


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as img:
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8).copy()
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise FrameLoadError(f"cannot read frame file '{path}': {exc}") from exc
    return to_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])


def read_frame_file(path: Path) -> np.ndarray:
    """Load one frame file (PGM or PNG) as a grayscale uint8 raster."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".png":
        return _read_png(path)
    raise FrameLoadError(f"unsupported frame format '{path.suffix}' for '{path}'")


def _filename_index(path: Path) -> int:
    m = re.search(r"\d+", path.name)
    if m is None:
        raise FrameLoadError(f"no numeric index in frame filename '{path.name}'")
    return int(m.group())


def default_object_tag(directory: Path) -> str:
    """Derive a category tag from a directory name, e.g. 'person-14' -> 'person'."""
    name = Path(directory).name
    return re.sub(r"[-_]\d+$", "", name) or name


def load_frame_sequence(
    directory,
    pattern: str | None = None,
    source_id: str | None = None,
    object_tag: str | None = None,
) -> FrameSequence:
    """Load an ordered frame sequence from a directory.

    Frames are ordered by the first integer run in each filename; duplicate
    indices are an error. If the directory contains a ``frames.txt``
    manifest (one path per line, relative to the directory), its order is
    used verbatim and ``pattern`` is ignored.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameLoadError(f"frame directory '{directory}' does not exist")

    manifest = directory / "frames.txt"
    if manifest.is_file():
        paths = []
        for line in manifest.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            p = Path(line)
            paths.append(p if p.is_absolute() else directory / p)
    else:
        if pattern is None:
            candidates = [p for p in directory.iterdir() if p.suffix.lower() in _SUPPORTED_SUFFIXES]
        else:
            candidates = list(directory.glob(pattern))
        indexed = sorted((_filename_index(p), p) for p in candidates)
        for (i1, p1), (i2, p2) in zip(indexed, indexed[1:]):
            if i1 == i2:
                raise FrameLoadError(
                    f"ambiguous frame order: '{p1.name}' and '{p2.name}' share index {i1}"
                )
        paths = [p for _, p in indexed]

    if len(paths) < 2:
        raise NoFramesError(
            f"no frames: matched {len(paths)} file(s) in '{directory}' (need at least 2)"
        )

    frames = [Frame(data=read_frame_file(p), index=i) for i, p in enumerate(paths)]
    return FrameSequence(
        frames=frames,
        source_id=source_id if source_id is not None else directory.name,
        object_tag=object_tag if object_tag is not None else default_object_tag(directory),
    )
