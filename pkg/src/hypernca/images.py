"""Binary PGM export for weight matrices.

Each matrix is min-max normalized to 0..255 on its own; a constant
matrix (zero range) renders as uniform mid-gray 128. The normalization
bounds are returned so callers can record them in a sidecar CSV.
"""

from __future__ import annotations

import numpy as np


def normalize_to_gray(matrix: np.ndarray) -> tuple[np.ndarray, float, float]:
    m = np.asarray(matrix, dtype=np.float64)
    lo, hi = float(m.min()), float(m.max())
    if hi == lo:
        return np.full(m.shape, 128, dtype=np.uint8), lo, hi
    pixels = np.rint(255.0 * (m - lo) / (hi - lo)).clip(0, 255).astype(np.uint8)
    return pixels, lo, hi


def write_pgm(path, matrix: np.ndarray) -> tuple[float, float]:
    """Write an 8-bit binary PGM (P5); returns the (min, max) used."""
    pixels, lo, hi = normalize_to_gray(matrix)
    height, width = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
    return lo, hi


def read_pgm(path) -> np.ndarray:
    """Read back a binary PGM written by write_pgm (for tests/tools)."""
    with open(path, "rb") as f:
        data = f.read()
    header, _, rest = data.partition(b"255\n")
    fields = header.split()
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM")
    width, height = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(rest[:width * height], dtype=np.uint8)
    return pixels.reshape(height, width)
