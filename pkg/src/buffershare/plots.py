"""Figure rendering for report tables: heatmaps in the style of the sweep's
throughput-share and packet-drop analyses."""

from __future__ import annotations


def render_heatmap(table: list[dict], x: str, y: str, z: str, path: str) -> None:
    """Render a long-format (x, y, z) table as a labeled heatmap image."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    xs = sorted({row[x] for row in table})
    ys = sorted({row[y] for row in table})
    grid = np.full((len(ys), len(xs)), np.nan)
    for row in table:
        grid[ys.index(row[y]), xs.index(row[x])] = row[z]

    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * len(xs), 1.0 + 0.5 * len(ys)))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(xs)), [_fmt(v) for v in xs], rotation=45, ha="right")
    ax.set_yticks(range(len(ys)), [_fmt(v) for v in ys])
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    fig.colorbar(im, ax=ax, label=z)
    for i in range(len(ys)):
        for j in range(len(xs)):
            if not np.isnan(grid[i, j]):
                ax.text(j, i, _fmt_cell(grid[i, j]), ha="center", va="center",
                        fontsize=7, color="white")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _fmt(v) -> str:
    if isinstance(v, (int, float)) and v >= 1_000_000:
        return f"{v/1e6:g}M"
    if isinstance(v, (int, float)) and v >= 1_000:
        return f"{v/1e3:g}K"
    return f"{v:g}" if isinstance(v, float) else str(v)


def _fmt_cell(v: float) -> str:
    return f"{v:.2f}" if abs(v) < 100 else f"{v:.3g}"
