"""PGM rasters of cells, per-target mass shares, and pointwise maps.

Binary 8-bit PGM (P5) keeps the outputs dependency-free and diffable in
tests. Image rows run top to bottom, so the grid row with the largest y
coordinate becomes the first image row. Independent panels may be rendered
concurrently; output depends only on the plan and decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import CellDecomposition, mask_name


class RasterError(ValueError):
    """Raster output requested for data it cannot represent."""


@dataclass
class RenderTarget:
    kind: str           # "cell-mask" | "mu_i" | "map"
    name: str           # output file stem
    image: np.ndarray   # uint8, shape (ny, nx)


def write_pgm(path, image) -> None:
    img = np.asarray(image)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise RasterError(f"expected a 2D uint8 image, got {img.dtype}{img.shape}")
    height, width = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise RasterError(f"{path}: not a binary PGM")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise RasterError(f"{path}: unsupported maxval {maxval}")
    pos += 1
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width).copy()


def _require_grid(decomp: CellDecomposition):
    src = decomp.source
    if getattr(src, "kind", None) != "grid":
        raise RasterError(
            "raster output needs a grid source; use the point-list export instead")
    return src


def _grid_image(flat_values: np.ndarray, nx: int, ny: int) -> np.ndarray:
    """Row-major samples (x fastest, y upward) to image rows top-down."""
    return flat_values.reshape(ny, nx)[::-1].copy()


def render_mu_i(plan, decomp: CellDecomposition, i: int) -> np.ndarray:
    """Grayscale share image for target i: each pixel shows the fraction of
    its mass sent to target i, 0..1 scaled linearly to 0..255. Zero-mass
    cells render as 0."""
    src = _require_grid(decomp)
    values = np.zeros(src.n_samples, dtype=np.uint8)
    for mask, fracs in plan.rows.items():
        f = fracs[i]
        if f:
            values[decomp.labels == mask] = int(round(float(f) * 255))
    return _grid_image(values, src.nx, src.ny)


def render_cells(decomp: CellDecomposition) -> list[tuple[int, np.ndarray]]:
    """One binary image per nonempty cell; white where the label matches.

    The images partition the white pixels: every pixel is white in exactly
    one of them.
    """
    src = _require_grid(decomp)
    out = []
    for mask in decomp.nonempty_masks():
        img = np.where(decomp.labels == mask, 255, 0).astype(np.uint8)
        out.append((mask, _grid_image(img, src.nx, src.ny)))
    return out


def render_map(tmap, decomp: CellDecomposition) -> np.ndarray:
    """Assigned target per pixel as evenly spaced gray levels; 0 = unassigned."""
    src = _require_grid(decomp)
    n = decomp.targets.n
    arr = np.asarray(tmap.assignments, dtype=np.int64)
    levels = np.round((arr + 1) * 255.0 / n)
    values = np.where(arr >= 0, levels, 0).astype(np.uint8)
    return _grid_image(values, src.nx, src.ny)


def mu_point_list(plan, decomp: CellDecomposition, i: int) -> list[dict]:
    """Atomic-source replacement for render_mu_i: per-atom shares as JSON rows."""
    src = decomp.source
    out = []
    for k in range(src.n_samples):
        mask = int(decomp.labels[k])
        fracs = plan.rows.get(mask)
        share = fracs[i] if fracs else 0
        if share:
            out.append({"point": list(src.points[k]), "share": str(share)})
    return out


def render_all(plan, decomp: CellDecomposition, tmap=None) -> list[RenderTarget]:
    """Share panels for every target plus the cell partition (plus the map
    image when a pointwise map is supplied)."""
    n = decomp.targets.n
    targets = [RenderTarget("mu_i", f"mu_{i + 1}", render_mu_i(plan, decomp, i))
               for i in range(n)]
    targets += [RenderTarget("cell-mask", f"cell_{mask_name(mask, n)}", img)
                for mask, img in render_cells(decomp)]
    if tmap is not None:
        targets.append(RenderTarget("map", "map", render_map(tmap, decomp)))
    return targets
