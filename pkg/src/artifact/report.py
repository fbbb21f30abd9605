"""CSV and SVG reports: before/after correlation sums and signal excerpts.

SVGs are written by hand so they are plain, self-contained text that diffs
cleanly and does not depend on a plotting backend.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .recording import Recording

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

CORRELATION_COLUMNS = ("component", "abs_sum_before", "abs_sum_after", "selected")


def correlation_rows(result) -> list[tuple[int, float, float, int]]:
    """One row per component of the original decomposition.

    ``abs_sum_after`` comes from a fresh decomposition of the cleaned data,
    which has fewer components when some were removed outright; missing
    entries are NaN.
    """
    before = result.report_before.abs_sums
    after = result.report_after.abs_sums
    rows = []
    for j, b in enumerate(before):
        a = float(after[j]) if j < len(after) else float("nan")
        rows.append((j, float(b), a, int(j in result.report_before.selected)))
    return rows


def write_correlation_csv(result, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CORRELATION_COLUMNS)
        for j, b, a, s in correlation_rows(result):
            w.writerow([j, repr(b), repr(a), s])
    return path


def _svg(width: int, height: int, body: list[str]) -> str:
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
        + "\n".join(body) + "\n</svg>\n"
    )


def _text(x, y, s, anchor="start", size=11, rotate=None) -> str:
    rot = f' transform="rotate({rotate} {x:.1f} {y:.1f})"' if rotate is not None else ""
    return f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="{anchor}" font-size="{size}"{rot}>{escape(s)}</text>'


def _bars(values: np.ndarray, selected, x0, y0, w, h, title, ymax) -> list[str]:
    out = [f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444"/>',
           _text(x0 + w / 2, y0 - 8, title, "middle", 12)]
    k = max(len(values), 1)
    bw = w / k
    for j, v in enumerate(values):
        if not np.isfinite(v):
            continue
        bh = h * v / ymax if ymax > 0 else 0.0
        color = COLORS[1] if j in selected else COLORS[0]
        out.append(f'<rect x="{x0 + j * bw + bw * 0.1:.2f}" y="{y0 + h - bh:.2f}" '
                   f'width="{bw * 0.8:.2f}" height="{bh:.2f}" fill="{color}"/>')
        if k <= 40:
            out.append(_text(x0 + (j + 0.5) * bw, y0 + h + 12, str(j), "middle", 9))
    out.append(_text(x0 - 6, y0 + 4, f"{ymax:.2f}", "end", 9))
    out.append(_text(x0 - 6, y0 + h, "0", "end", 9))
    return out


def correlation_svg(before, after, selected=(), title: str = "") -> str:
    """Paired bar charts of per-component |corr| sums before and after cleaning."""
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    finite = np.concatenate([before[np.isfinite(before)], after[np.isfinite(after)]])
    ymax = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    W, H, pw, ph = 760, 300, 320, 200
    heading = "Sum of |corr(IC, EOG)| per component" + (f" ({title})" if title else "")
    body = [_text(W / 2, 20, heading, "middle", 13)]
    body += _bars(before, set(selected), 60, 60, pw, ph, "(a) before", ymax)
    body += _bars(after, (), 60 + pw + 60, 60, pw, ph, "(b) after", ymax)
    body.append(_text(W / 2, H - 10, "independent component", "middle"))
    body.append(_text(18, 60 + ph / 2, "sum |r|", "middle", 11, rotate=-90))
    return _svg(W, H, body)


def read_correlation_csv(path: str | Path):
    """Inverse of :func:`write_correlation_csv`: ``(before, after, selected)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CORRELATION_COLUMNS:
        raise ValueError(f"{path}: not a correlation report (expected header {','.join(CORRELATION_COLUMNS)})")
    body = [r for r in rows[1:] if r]
    before = np.array([float(r[1]) for r in body])
    after = np.array([float(r[2]) for r in body])
    selected = frozenset(int(r[0]) for r in body if int(r[3]))
    return before, after, selected


def emit_correlation_report(result, out_dir: str | Path) -> list[Path]:
    """Write ``correlation.csv`` and ``correlation.svg`` into ``out_dir``."""
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise NotADirectoryError(f"output directory does not exist: {out_dir}")
    csv_path = write_correlation_csv(result, out_dir / "correlation.csv")
    svg_path = out_dir / "correlation.svg"
    svg = correlation_svg(result.report_before.abs_sums, result.report_after.abs_sums,
                          result.report_before.selected, result.method)
    svg_path.write_text(svg, encoding="utf-8")
    return [csv_path, svg_path]


def _polyline(t, y, x0, y0, w, h, t0, t1, lo, hi, color) -> str:
    xs = x0 + (t - t0) / (t1 - t0) * w
    span = hi - lo if hi > lo else 1.0
    ys = y0 + h - (y - lo) / span * h
    # thin long traces to at most ~2 points per pixel column
    step = max(1, len(xs) // (2 * int(w)))
    pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(xs[::step], ys[::step]))
    return f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>'


def signal_svg(before: Recording, after: Recording, channels: Sequence[str], window: tuple[float, float],
               eog_channels: Sequence[str] | None = None, msf=None) -> str:
    """Three stacked panels: EOG, original channels, cleaned channels.

    ``window`` is in seconds on the concatenated time axis.  With ``msf``,
    samples whose weight is positive are shaded in the EOG panel.
    """
    t0, t1 = float(window[0]), float(window[1])
    duration = before.n_samples / before.fs
    if not t1 > t0:
        raise ValueError(f"empty window ({t0}, {t1})")
    if t0 < 0 or t1 > duration:
        raise ValueError(f"window ({t0}, {t1}) s outside data span (0, {duration}) s")
    if before.trial_lengths != after.trial_lengths:
        raise ValueError("before and after recordings differ in trial structure")
    before.indices(channels)
    after.indices(channels)
    eog_channels = tuple(eog_channels if eog_channels is not None else before.eog_labels)
    a, b = int(np.floor(t0 * before.fs)), int(np.ceil(t1 * before.fs))
    t = np.arange(a, b) / before.fs

    W, ph, gap, x0, pw = 820, 150, 50, 70, 720
    panels = [("(a) EOG", before, eog_channels), ("(b) original", before, tuple(channels)),
              ("(c) cleaned", after, tuple(channels))]
    data = [before.channel(c)[a:b] for c in channels] + [after.channel(c)[a:b] for c in channels]
    lo, hi = float(np.min(data)), float(np.max(data))
    H = 40 + len(panels) * (ph + gap)
    body = []
    for p, (title, rec, chans) in enumerate(panels):
        y0 = 40 + p * (ph + gap)
        body.append(f'<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
        body.append(_text(x0, y0 - 8, title, "start", 12))
        traces = [rec.channel(c)[a:b] for c in chans]
        if p == 0:
            if msf is not None:
                w = msf.concatenated()[a:b]
                on = w > 0
                edges = np.flatnonzero(np.diff(np.concatenate([[0], on.astype(int), [0]])))
                for s, e in zip(edges[::2], edges[1::2]):
                    xa = x0 + (t[s] - t0) / (t1 - t0) * pw
                    xb = x0 + (t[e - 1] - t0) / (t1 - t0) * pw
                    op = float(w[s:e].max())
                    body.append(f'<rect x="{xa:.1f}" y="{y0}" width="{max(xb - xa, 0.5):.1f}" '
                                f'height="{ph}" fill="#ff0000" fill-opacity="{0.25 * op:.2f}"/>')
            plo = min((float(tr.min()) for tr in traces), default=0.0)
            phi = max((float(tr.max()) for tr in traces), default=1.0)
        else:
            plo, phi = lo, hi
        for i, (c, tr) in enumerate(zip(chans, traces)):
            color = COLORS[i % len(COLORS)]
            body.append(_polyline(t, tr, x0, y0, pw, ph, t0, t1, plo, phi, color))
            body.append(_text(x0 + pw + 6, y0 + 14 + 14 * i, c, "start", 10).replace(
                "<text ", f'<text fill="{color}" ', 1))
        body.append(_text(x0 - 6, y0 + 10, f"{phi:.0f} µV", "end", 9))
        body.append(_text(x0 - 6, y0 + ph, f"{plo:.0f} µV", "end", 9))
    body.append(_text(x0, H - 12, f"{t0:.2f} s", "start", 10))
    body.append(_text(x0 + pw, H - 12, f"{t1:.2f} s", "end", 10))
    return _svg(W, H, body)


def emit_signal_plot(before: Recording, after: Recording, channels: Sequence[str],
                     window: tuple[float, float], out_dir: str | Path, msf=None,
                     name: str = "signals.svg") -> Path:
    path = Path(out_dir) / name
    path.write_text(signal_svg(before, after, channels, window, msf=msf), encoding="utf-8")
    return path
