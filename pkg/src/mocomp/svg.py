"""Dependency-free SVG line plots (joint trajectories, ablation curves)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .motion import DEFAULT_SKELETON, Motion, Skeleton

_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _scaled(values: np.ndarray, lo: float, hi: float, out_lo: float, out_hi: float) -> np.ndarray:
    if hi - lo < 1e-12:
        return np.full_like(values, (out_lo + out_hi) / 2.0)
    return out_lo + (values - lo) / (hi - lo) * (out_hi - out_lo)


def line_plot_svg(
    series: dict[str, tuple[np.ndarray, np.ndarray]],
    path: str | Path,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    width: int = 640,
    height: int = 400,
) -> None:
    """Write a multi-series line plot. series maps name -> (xs, ys)."""
    margin = 56
    xs_all = np.concatenate([np.asarray(xs, dtype=float) for xs, _ in series.values()])
    ys_all = np.concatenate([np.asarray(ys, dtype=float) for _, ys in series.values()])
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    y_lo, y_hi = float(ys_all.min()), float(ys_all.max())
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">{x_label}</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {height / 2})">{y_label}</text>',
        f'<rect x="{margin}" y="{margin / 2}" width="{width - 1.5 * margin}" '
        f'height="{height - 1.5 * margin}" fill="none" stroke="#888"/>',
    ]
    plot_x = (margin, width - margin / 2)
    plot_y = (height - margin, margin / 2)
    for tick in np.linspace(y_lo, y_hi, 5):
        py = _scaled(np.array([tick]), y_lo, y_hi, *plot_y)[0]
        parts.append(f'<text x="{margin - 6}" y="{py + 4}" text-anchor="end">{tick:.3g}</text>')
    for tick in np.linspace(x_lo, x_hi, 5):
        px = _scaled(np.array([tick]), x_lo, x_hi, *plot_x)[0]
        parts.append(
            f'<text x="{px}" y="{height - margin + 16}" text-anchor="middle">{tick:.3g}</text>'
        )
    for i, (name, (xs, ys)) in enumerate(series.items()):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        px = _scaled(xs, x_lo, x_hi, *plot_x)
        py = _scaled(ys, y_lo, y_hi, *plot_y)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = margin / 2 + 14 + 14 * i
        parts.append(f'<rect x="{width - margin * 2.4}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{width - margin * 2.4 + 14}" y="{ly}">{name}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def trajectory_svg(motion: Motion, path: str | Path, skeleton: Skeleton = DEFAULT_SKELETON) -> None:
    """Per-joint height (y coordinate, cm) over time."""
    joints = motion.joints()
    times = np.arange(motion.n_frames) / motion.fps
    series = {
        name: (times, joints[:, j, 1]) for j, name in enumerate(skeleton.joint_names)
    }
    line_plot_svg(series, path, title="joint heights", x_label="time (s)", y_label="height (cm)")
