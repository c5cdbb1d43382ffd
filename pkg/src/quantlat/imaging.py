"""Membership maps of planar fragments rendered as ASCII portable greymaps.

ASCII (P2) rather than binary keeps golden files byte-identical across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import Fragment, fragment_grid

GREY = 170
WHITE = 255


@dataclass(frozen=True)
class PixelImage:
    """8-bit grey image; row 0 is the top row."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width):
            raise ValueError("pixel grid does not match the declared dimensions")


def render_fragment(pred: Callable, frag: Fragment, *, batch: bool = False) -> PixelImage:
    """Grey pixel where the predicate holds, white elsewhere.

    Column i holds first coordinate a1+i; row 0 is the top of the image and
    carries the maximal second coordinate, so the picture is in the usual
    mathematical orientation."""
    if frag.dim != 2:
        raise ValueError("fragment images are two-dimensional")
    pts = fragment_grid(frag)
    if batch:
        mask = np.asarray(pred(pts), dtype=bool)
    else:
        mask = np.fromiter((bool(pred(tuple(p))) for p in pts), dtype=bool, count=len(pts))
    w, h = frag.ell
    grid = mask.reshape(w, h)  # [i, j] with j indexing the second coordinate
    pixels = np.where(grid.T[::-1, :], GREY, WHITE).astype(np.uint8)
    return PixelImage(w, h, pixels)


def pgm_bytes(img: PixelImage) -> bytes:
    """Plain (P2) greymap with a fixed header layout."""
    lines = [f"P2", f"{img.width} {img.height}", "255"]
    for row in img.pixels:
        lines.append(" ".join(str(int(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def write_pgm(img: PixelImage, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img))
