"""File output: atomic writes, round-trip CSV and a static SVG plot."""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from html import escape
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.17g"
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to a temporary sibling of ``path``, then rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(columns, data) -> str:
    """CSV with a header row and every value printed with 17 significant digits."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise ValueError("data must be (rows, len(columns))")
    buf = io.StringIO()
    np.savetxt(buf, data, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(columns), comments="")
    return buf.getvalue()


def write_csv(path, columns, data) -> Path:
    return atomic_write_text(path, csv_text(columns, data))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, payload) -> Path:
    return atomic_write_text(path, json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")


# --- SVG ---------------------------------------------------------------------------


def _polyline(points, color, width=1.5):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    return f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>'


def _segments(t, th):
    """Split a wrapped angle series wherever it jumps across the branch cut."""
    breaks = np.flatnonzero(np.abs(np.diff(th)) > math.pi) + 1
    return zip(np.split(t, breaks), np.split(th, breaks))


def trajectory_svg(times, theta, title="") -> str:
    """Two panels: wrapped angles against time, and the trace on the unit circle."""
    times = np.asarray(times, dtype=float)
    theta = np.asarray(theta, dtype=float)
    wrapped = np.angle(np.exp(1j * theta))
    w, h, pad = 420.0, 360.0, 40.0
    t0, t1 = float(times[0]), float(times[-1])
    if t1 <= t0:
        t1 = t0 + 1.0

    def ax(t, a):
        x = pad + (t - t0) / (t1 - t0) * (w - 2 * pad)
        y = h / 2 - a / math.pi * (h / 2 - pad)
        return x, y

    cx, cy, rad = w + w / 2, h / 2, h / 2 - pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {2 * w:.0f} {h:.0f}" font-family="sans-serif" font-size="12">',
        f'<rect width="{2 * w:.0f}" height="{h:.0f}" fill="white"/>',
        f'<text x="{w:.0f}" y="16" text-anchor="middle">{escape(title)}</text>',
        f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" height="{h - 2 * pad}" fill="none" stroke="#888"/>',
        f'<text x="{w / 2:.0f}" y="{h - 8:.0f}" text-anchor="middle">t</text>',
        f'<text x="12" y="{h / 2:.0f}" text-anchor="middle">theta</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end">pi</text>',
        f'<text x="{pad - 4}" y="{h - pad + 4}" text-anchor="end">-pi</text>',
        f'<text x="{pad}" y="{h - pad + 16}" text-anchor="middle">{t0:g}</text>',
        f'<text x="{w - pad}" y="{h - pad + 16}" text-anchor="middle">{t1:g}</text>',
        f'<circle cx="{cx}" cy="{cy}" r="{rad}" fill="none" stroke="#888"/>',
    ]
    for n in range(theta.shape[1]):
        color = PALETTE[n % len(PALETTE)]
        for ts, ths in _segments(times, wrapped[:, n]):
            if ts.size:
                parts.append(_polyline([ax(a, b) for a, b in zip(ts, ths)], color))
        ring = [(cx + rad * math.cos(a), cy - rad * math.sin(a)) for a in theta[:, n]]
        parts.append(_polyline(ring, color, width=1.0))
        x0, y0 = ring[0]
        parts.append(f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="4" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, times, theta, title="") -> Path:
    return atomic_write_text(path, trajectory_svg(times, theta, title))
