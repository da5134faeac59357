"""Discretized rotating-ball images and grid Lp distances.

The raster path is an independent numerical oracle for the closed-form
rotating-ball distances: a disk indicator of height 1/(4r) is sampled on a
square grid by a cell-center membership test, and Lp distances are cell-area
weighted sums. Images are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracles import _require_radius


@dataclass(frozen=True)
class RasterImage:
    """A nonnegative density sampled on the square [-extent, extent]^2.

    values[i, j] is the density at the center of the cell in row i (y index)
    and column j (x index); cell_area converts sums into integrals.
    """

    values: np.ndarray
    grid_size: int
    extent: float

    def __post_init__(self):
        if self.values.shape != (self.grid_size, self.grid_size):
            raise ValueError("values shape does not match grid_size")
        if np.any(self.values < 0):
            raise ValueError("raster densities must be nonnegative")
        self.values.setflags(write=False)

    @property
    def cell_size(self) -> float:
        return 2.0 * self.extent / self.grid_size

    @property
    def cell_area(self) -> float:
        return self.cell_size**2

    def mass(self) -> float:
        """cell_area * sum(values), the discrete L1 mass."""
        return float(self.cell_area * self.values.sum())


def cell_centers(grid_size: int, extent: float) -> np.ndarray:
    """1-D coordinates of cell centers along one axis."""
    step = 2.0 * extent / grid_size
    return -extent + step * (np.arange(grid_size) + 0.5)


def rasterize_ball(theta, r, grid_size: int = 128, extent: float = 2.0) -> RasterImage:
    """Rasterize the height-1/(4r) indicator of B_r((cos theta, sin theta)).

    Parameters
    ----------
    theta : float
        Angle of the disk center on the unit circle.
    r : float
        Disk radius in (0, 1]; the disk must fit inside the extent.
    grid_size : int
        Cells per side (default 128).
    extent : float
        Half-width of the square domain [-extent, extent]^2 (default 2).

    Returns
    -------
    RasterImage
        Cell value is 1/(4r) when the cell center lies strictly inside the
        disk, 0 otherwise (no anti-aliasing).
    """
    _require_radius(r)
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    if 1.0 + r > extent:
        raise ValueError(f"ball of radius {r} on the unit circle exceeds extent {extent}")
    cx, cy = np.cos(theta), np.sin(theta)
    coords = cell_centers(grid_size, extent)
    dx2 = (coords[None, :] - cx) ** 2
    dy2 = (coords[:, None] - cy) ** 2
    inside = dx2 + dy2 < r * r
    values = np.where(inside, 1.0 / (4.0 * r), 0.0)
    return RasterImage(values=values, grid_size=grid_size, extent=extent)


def image_lp_distance(a: RasterImage, b: RasterImage, p: int) -> float:
    """Grid Lp distance (cell_area * sum |a - b|^p)^(1/p) for p in {1, 2}."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if a.grid_size != b.grid_size or a.extent != b.extent:
        raise ValueError("grid mismatch between raster images")
    diff = np.abs(a.values - b.values)
    total = a.cell_area * np.sum(diff**p)
    return float(total ** (1.0 / p))


def write_image_grid(img: RasterImage, path) -> None:
    """Dump as a portable float grid: one header line, then row-major values."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{img.grid_size} {img.extent!r}\n")
        for row in img.values:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_image_grid(path) -> RasterImage:
    """Inverse of write_image_grid."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        grid_size, extent = int(header[0]), float(header[1])
        values = np.loadtxt(fh, ndmin=2)
    return RasterImage(values=values, grid_size=grid_size, extent=extent)
