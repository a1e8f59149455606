"""Plain-array image composition for PGM/PPM panels (no plotting library)."""

from __future__ import annotations

import numpy as np

RED = (255, 0, 0)
BLUE = (0, 96, 255)
GREEN = (0, 255, 0)


def to_u8(frame) -> np.ndarray:
    """Linear peak normalization to 0..255."""
    a = np.asarray(frame, dtype=float)
    peak = a.max() if a.size else 0.0
    if peak <= 0:
        return np.zeros(a.shape, dtype=np.uint8)
    return np.floor(np.clip(a / peak, 0, 1) * 255 + 0.5).astype(np.uint8)


def grid(tiles, cols: int, gap: int = 2, fill: int = 128) -> np.ndarray:
    """Tile equally-shaped 2-D (gray) or 3-D (RGB) arrays row-major with ``gap``-pixel separators."""
    tiles = [np.asarray(t) for t in tiles]
    h, w = tiles[0].shape[:2]
    extra = tiles[0].shape[2:]
    rows = -(-len(tiles) // cols)
    out = np.full((rows * h + (rows - 1) * gap, cols * w + (cols - 1) * gap) + extra, fill, dtype=np.uint8)
    for k, t in enumerate(tiles):
        r, c = divmod(k, cols)
        out[r * (h + gap) : r * (h + gap) + h, c * (w + gap) : c * (w + gap) + w] = t
    return out


def lump_outline(shape, pixels) -> np.ndarray:
    """Boolean mask of lump pixels that touch a non-lump 4-neighbour or the frame edge."""
    m = np.zeros(shape, dtype=bool)
    m[pixels[:, 0], pixels[:, 1]] = True
    p = np.pad(m, 1)
    interior = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return m & ~interior


def overlay_lumps(frame, lumps, chosen=None) -> np.ndarray:
    """RGB view of ``frame`` with the chosen lump outlined red and the others blue."""
    g = to_u8(frame)
    rgb = np.repeat(g[:, :, None], 3, axis=2)
    for L in lumps:
        if L is chosen:
            continue
        rgb[lump_outline(g.shape, L.pixels)] = BLUE
    if chosen is not None:
        rgb[lump_outline(g.shape, chosen.pixels)] = RED
    return rgb


def draw_bbox(img: np.ndarray, bbox, value=255) -> np.ndarray:
    out = img.copy()
    r0, c0, r1, c1 = bbox
    out[r0, c0 : c1 + 1] = value
    out[r1, c0 : c1 + 1] = value
    out[r0 : r1 + 1, c0] = value
    out[r0 : r1 + 1, c1] = value
    return out
