"""Static SVG quiver-over-heatmap writer (no plotting dependency)."""

from __future__ import annotations

import numpy as np

CELL = 36
PAD = 30


def _heat_color(v: float) -> str:
    """Two-sided blue/white/red map for v in [0, 1]."""
    lo = np.array([33, 102, 172])
    mid = np.array([247, 247, 247])
    hi = np.array([178, 24, 43])
    if v < 0.5:
        c = lo + (mid - lo) * (2 * v)
    else:
        c = mid + (hi - mid) * (2 * v - 1)
    r, g, b = (int(max(0, min(255, round(x)))) for x in c)
    return f"#{r:02x}{g:02x}{b:02x}"


def render_field_svg(entropy: np.ndarray, v_t: np.ndarray, v_x: np.ndarray) -> tuple[str, float]:
    """Render the entropy heatmap with arrows; returns (svg text, arrow scale).

    Rows index time (increasing upward in the figure), columns index sites.
    The arrow scale maps field units to pixels so the longest arrow spans
    0.45 of a cell; raw magnitudes stay in the JSON output.
    """
    n_t, n_x = entropy.shape
    width = 2 * PAD + n_x * CELL
    height = 2 * PAD + n_t * CELL
    smax = float(entropy.max()) or 1.0
    vmax = float(np.hypot(v_t, v_x).max())
    scale = (0.45 * CELL / vmax) if vmax > 0 else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for k in range(n_t):
        for x in range(n_x):
            px = PAD + x * CELL
            py = PAD + (n_t - 1 - k) * CELL
            parts.append(
                f'<rect x="{px}" y="{py}" width="{CELL}" height="{CELL}" '
                f'fill="{_heat_color(entropy[k, x] / smax)}"/>'
            )
    for k in range(n_t):
        for x in range(n_x):
            dx = v_x[k, x] * scale
            dy = -v_t[k, x] * scale  # SVG y grows downward
            if abs(dx) < 1e-3 and abs(dy) < 1e-3:
                continue
            cx = PAD + x * CELL + CELL / 2
            cy = PAD + (n_t - 1 - k) * CELL + CELL / 2
            x2, y2 = cx + dx, cy + dy
            parts.append(
                f'<line x1="{cx:.2f}" y1="{cy:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                f'stroke="black" stroke-width="1.4"/>'
            )
            # arrowhead: two short back-strokes
            ang = np.arctan2(y2 - cy, x2 - cx)
            for da in (2.65, -2.65):
                hx = x2 + 5.0 * np.cos(ang + da)
                hy = y2 + 5.0 * np.sin(ang + da)
                parts.append(
                    f'<line x1="{x2:.2f}" y1="{y2:.2f}" x2="{hx:.2f}" y2="{hy:.2f}" '
                    f'stroke="black" stroke-width="1.4"/>'
                )
    parts.append("</svg>")
    return "\n".join(parts), scale
