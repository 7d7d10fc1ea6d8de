"""Space-time diagrams and their PGM / ASCII renderings."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Automaton, CAError, PeriodicConfig, step_words

GLYPHS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


@dataclass
class Diagram:
    """Row 0 is the initial configuration; row ``t + 1`` is one step after row ``t``."""

    states: int
    cells: np.ndarray

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def palette(self) -> list:
        """Grey levels, state 0 black and the last state white."""
        top = max(self.states - 1, 1)
        return [(v, v, v) for v in (round(255 * s / top) for s in range(self.states))]


def run(a: Automaton, c: PeriodicConfig, steps: int, replicate: int = 1) -> Diagram:
    if steps < 0:
        raise CAError("steps must be non-negative")
    if replicate < 1:
        raise CAError("replicate must be positive")
    if c.states != a.states:
        raise CAError(f"configuration over {c.states} states given to a {a.states}-state automaton")
    row = np.tile(c.array(), replicate)[None, :]
    rows = [row[0]]
    for _ in range(steps):
        row = step_words(a, row)
        rows.append(row[0])
    return Diagram(a.states, np.array(rows, dtype=np.int64))


def _oriented(d: Diagram, time_up: bool) -> np.ndarray:
    return d.cells[::-1] if time_up else d.cells


def pgm_bytes(d: Diagram, time_up: bool = False) -> bytes:
    """Binary graymap (P5), one pixel per cell."""
    top = max(d.states - 1, 1)
    pix = np.rint(_oriented(d, time_up) * 255 / top).astype(np.uint8)
    header = f"P5\n{d.width} {d.height}\n255\n".encode("ascii")
    return header + pix.tobytes()


def render_pgm(d: Diagram, path, time_up: bool = False) -> None:
    Path(path).write_bytes(pgm_bytes(d, time_up))


def render_ascii(d: Diagram, time_up: bool = False) -> str:
    if d.states > len(GLYPHS):
        raise CAError(f"{d.states} states exceed the {len(GLYPHS)} ASCII glyphs; render a PGM instead")
    glyphs = ".#" if d.states <= 2 else GLYPHS
    lines = ["".join(glyphs[x] for x in row) for row in _oriented(d, time_up).tolist()]
    return "\n".join(lines) + "\n"


def render_png(d: Diagram, path, time_up: bool = False, scale: int = 4) -> None:
    """Raster image through matplotlib (imported lazily, optional)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = _oriented(d, time_up)
    fig, ax = plt.subplots(figsize=(max(1, d.width * scale / 100), max(1, d.height * scale / 100)), dpi=100)
    ax.imshow(grid, cmap="gray", vmin=0, vmax=max(d.states - 1, 1), interpolation="nearest", aspect="auto")
    ax.set_axis_off()
    fig.subplots_adjust(0, 0, 1, 1)
    fig.savefig(path)
    plt.close(fig)
