"""
Orthographic multi-view rendering of scenes.

project() drops one world axis per view and orders silhouettes back to
front; rasterize() fills them in that painter's order onto a white canvas
with hard edges (pixel centres sampled, no anti-aliasing); emit_image()
writes binary PPM (P6) or 8-bit RGB PNG.

Output is byte-deterministic: identical inputs give identical bytes.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from PIL import Image

from .errors import ErrorCode, RenderError, StorageError
from .geometry import Outline, View, grid_centers, view_extent
from .logging import get_logger
from .scene import PALETTE, Scene

RGB = Tuple[int, int, int]

DEFAULT_SIZE = 512
DEFAULT_MARGIN = 0.05
BACKGROUND: RGB = (255, 255, 255)


class ImageFormat(str, Enum):
    PPM = "ppm"
    PNG = "png"


@dataclass(frozen=True)
class ProjectedShape:
    primitive_id: str
    outline: Outline
    depth: float
    color: RGB

    def to_dict(self) -> Dict[str, Any]:
        return {
            "primitive_id": self.primitive_id,
            "outline": self.outline.to_dict(),
            "depth": self.depth,
            "color": list(self.color),
        }


@dataclass(frozen=True)
class ViewProjection:
    """Silhouettes of one view, farthest first."""

    view: View
    shapes: Tuple[ProjectedShape, ...]

    def shape_for(self, primitive_id: str) -> ProjectedShape:
        for s in self.shapes:
            if s.primitive_id == primitive_id:
                return s
        raise KeyError(primitive_id)


@dataclass(frozen=True)
class Window:
    """World-space rectangle mapped onto the raster: (u0, v0) bottom-left, (u1, v1) top-right."""

    u0: float
    v0: float
    u1: float
    v1: float

    @property
    def width(self) -> float:
        return self.u1 - self.u0

    @property
    def height(self) -> float:
        return self.v1 - self.v0

    def to_list(self) -> List[float]:
        return [self.u0, self.v0, self.u1, self.v1]


@dataclass(frozen=True)
class RasterImage:
    """Row-major RGB pixels, row 0 at the top."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise RenderError(ErrorCode.RENDER_INVALID_IMAGE, "width and height must be positive")
        if len(self.pixels) != 3 * self.width * self.height:
            raise RenderError(
                ErrorCode.RENDER_INVALID_IMAGE,
                f"expected {3 * self.width * self.height} bytes, got {len(self.pixels)}",
            )

    def as_array(self) -> np.ndarray:
        """(height, width, 3) uint8 view of the pixels."""
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)

    def pixel(self, x: int, y: int) -> RGB:
        i = 3 * (y * self.width + x)
        return (self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])


def project(scene: Scene, view: Union[View, str]) -> ViewProjection:
    """
    Orthographic projection of a scene into one view.

    Shapes are sorted by descending depth (back to front); ties keep
    scene order so the result is deterministic.
    """
    view = View(view)
    shapes = [
        ProjectedShape(
            primitive_id=p.id,
            outline=p.silhouette(view),
            depth=p.depth(view),
            color=PALETTE[p.color],
        )
        for p in scene.primitives
    ]
    order = sorted(range(len(shapes)), key=lambda i: (-shapes[i].depth, i))
    return ViewProjection(view=view, shapes=tuple(shapes[i] for i in order))


def scene_window(scene: Scene, view: Union[View, str], margin: float = DEFAULT_MARGIN) -> Window:
    """Scene bounds seen from `view`, padded by `margin` of each extent."""
    return Window(*view_extent(scene.bounds.lo, scene.bounds.hi, View(view), margin))


def fit_window(outlines: List[Outline], margin: float = 0.15, square: bool = True) -> Window:
    """Smallest window (optionally square) around outlines, padded by `margin`."""
    bounds = np.array([o.bounds() for o in outlines], dtype=float)
    u0, v0 = bounds[:, 0].min(), bounds[:, 1].min()
    u1, v1 = bounds[:, 2].max(), bounds[:, 3].max()
    w, h = u1 - u0, v1 - v0
    if square:
        side = max(w, h)
        cu, cv = (u0 + u1) / 2, (v0 + v1) / 2
        u0, u1 = cu - side / 2, cu + side / 2
        v0, v1 = cv - side / 2, cv + side / 2
        w = h = side
    return Window(float(u0 - w * margin), float(v0 - h * margin), float(u1 + w * margin), float(v1 + h * margin))


def pixel_centers(width: int, height: int, window: Window) -> Tuple[np.ndarray, np.ndarray]:
    """World (u, v) coordinates of every pixel centre, shaped (height, width)."""
    return grid_centers((window.u0, window.v0, window.u1, window.v1), width, height)


def rasterize(projection: ViewProjection, width: int, height: int, window: Window) -> RasterImage:
    """
    Fill silhouettes in painter's order on a white background.

    Raises:
        RenderError(RENDER_DEGENERATE_WINDOW): window has zero area.
    """
    if not (window.width > 0 and window.height > 0):
        raise RenderError(ErrorCode.RENDER_DEGENERATE_WINDOW)
    if width <= 0 or height <= 0:
        raise RenderError(ErrorCode.RENDER_INVALID_IMAGE, "width and height must be positive")

    canvas = np.empty((height, width, 3), dtype=np.uint8)
    canvas[:] = BACKGROUND
    u, v = pixel_centers(width, height, window)
    for shape in projection.shapes:
        canvas[shape.outline.contains(u, v)] = shape.color
    return RasterImage(width=width, height=height, pixels=canvas.tobytes())


def encode_ppm(img: RasterImage) -> bytes:
    """Binary PPM: "P6\\n<w> <h>\\n255\\n" then raw RGB."""
    return f"P6\n{img.width} {img.height}\n255\n".encode("ascii") + img.pixels


def decode_ppm(data: bytes) -> RasterImage:
    """Parse binary PPM as written by encode_ppm."""
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P6" or parts[2] != b"255":
        raise RenderError(ErrorCode.RENDER_INVALID_IMAGE, "not a P6 image with maxval 255")
    try:
        width, height = (int(x) for x in parts[1].split())
    except ValueError:
        raise RenderError(ErrorCode.RENDER_INVALID_IMAGE, "bad PPM dimensions")
    return RasterImage(width=width, height=height, pixels=parts[3])


def emit_image(img: RasterImage, fmt: Union[ImageFormat, str], path: Union[str, Path]) -> Path:
    """
    Write an image to disk.

    Raises:
        RenderError(RENDER_UNSUPPORTED_FORMAT): unknown format
        StorageError(IO_WRITE_FAILED): path not writable
    """
    try:
        fmt = ImageFormat(str(getattr(fmt, "value", fmt)).lower())
    except ValueError:
        raise RenderError(ErrorCode.RENDER_UNSUPPORTED_FORMAT, f"unsupported format: {fmt}")

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == ImageFormat.PPM:
            path.write_bytes(encode_ppm(img))
        else:
            Image.frombytes("RGB", (img.width, img.height), img.pixels).save(path, format="PNG", optimize=False)
    except OSError as e:
        raise StorageError(ErrorCode.IO_WRITE_FAILED, f"{path}: {e}")

    get_logger("render").debug("Wrote %s (%dx%d)", path, img.width, img.height)
    return path


def load_image(path: Union[str, Path]) -> RasterImage:
    """Read a PPM or PNG written by emit_image back into a RasterImage."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".ppm":
            return decode_ppm(path.read_bytes())
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            return RasterImage(width=rgb.width, height=rgb.height, pixels=rgb.tobytes())
    except OSError as e:
        raise StorageError(ErrorCode.IO_READ_FAILED, f"{path}: {e}")


def image_filename(instance_id: str, index: int, fmt: Union[ImageFormat, str]) -> str:
    """`<instance_id>_img<k>.<ext>` with 1-based k."""
    ext = str(getattr(fmt, "value", fmt)).lower()
    return f"{instance_id}_img{index}.{ext}"
