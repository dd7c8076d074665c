"""Plain-text (P2) portable graymap I/O for masks and reconstructions.

Gray values scale linearly to [0, 1]: value = gray / maxval.  Writing clips
to [0, 1] and rounds to the nearest gray level.
"""

from __future__ import annotations

import numpy as np


def read_pgm(path) -> np.ndarray:
    """Read a P2 PGM into a float array in [0, 1], shape (height, width)."""
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain (P2) PGM file")
    if len(tokens) < 4:
        raise ValueError(f"{path}: truncated PGM header")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if width < 1 or height < 1 or maxval < 1:
        raise ValueError(f"{path}: bad PGM dimensions {width}x{height}, maxval {maxval}")
    data = tokens[4:]
    if len(data) != width * height:
        raise ValueError(f"{path}: expected {width * height} pixels, found {len(data)}")
    grid = np.array([int(t) for t in data], dtype=float).reshape(height, width)
    if grid.min() < 0 or grid.max() > maxval:
        raise ValueError(f"{path}: pixel values outside [0, {maxval}]")
    return grid / maxval


def write_pgm(path, values: np.ndarray, maxval: int = 255) -> None:
    """Write a float array (interpreted in [0, 1]; clipped) as a P2 PGM."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {values.shape}")
    gray = np.rint(np.clip(values, 0.0, 1.0) * maxval).astype(int)
    height, width = gray.shape
    with open(path, "w") as fh:
        fh.write(f"P2\n{width} {height}\n{maxval}\n")
        for row in gray:
            fh.write(" ".join(str(v) for v in row) + "\n")
