"""CSV, snapshot and SVG artifacts.

Floats are written in their shortest round-trip form (``repr``), so every file
parses back losslessly.
"""
from __future__ import annotations

import csv
import math
import os

import numpy as np

from .errors import IoError
from .grid import GridSpec, SpectralField
from .simulator import NormRecord

FLOAT_FMT = "%.17g"
SNAPSHOT_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows) -> str:
    """Write ``rows`` under ``header``; floats at full precision, strings verbatim."""
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    """``(header, rows)`` with every cell as a string."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise IoError(f"{path} is empty")
    return rows[0], rows[1:]


def write_trajectory(path, records) -> str:
    return write_csv(path, NormRecord.COLUMNS, (r.as_tuple() for r in records))


def read_trajectory(path) -> list:
    header, rows = read_csv(path)
    if tuple(header) != NormRecord.COLUMNS:
        raise IoError(f"unexpected trajectory header {header}")
    return [NormRecord(*(float(c) for c in row)) for row in rows]


def write_snapshot(path, field: SpectralField, t: float = 0.0) -> str:
    """Snapshot CSV.

    Layout: one header line ``# vkg-snapshot v1 L=<L> N=<N> t=<t>``, a column
    line ``k,re_u1,im_u1,re_u2,im_u2`` and one row per mode in FFT order.
    """
    g = field.grid
    v = field.values
    try:
        with open(path, "w") as fh:
            fh.write(
                f"# vkg-snapshot v{SNAPSHOT_VERSION} L={fmt(g.half_length)} N={g.n_modes} t={fmt(t)}\n"
            )
            fh.write("k,re_u1,im_u1,re_u2,im_u2\n")
            cols = np.column_stack([g.k, v[:, 0].real, v[:, 0].imag, v[:, 1].real, v[:, 1].imag])
            np.savetxt(fh, cols, fmt=FLOAT_FMT, delimiter=",")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def read_snapshot(path):
    """``(field, t)`` from :func:`write_snapshot` output."""
    try:
        with open(path) as fh:
            first = fh.readline().split()
            fh.readline()
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if first[:2] != ["#", "vkg-snapshot"] or first[2] != f"v{SNAPSHOT_VERSION}":
        raise IoError(f"{path}: not a v{SNAPSHOT_VERSION} snapshot")
    meta = dict(item.split("=", 1) for item in first[3:])
    grid = GridSpec(float(meta["L"]), int(meta["N"]))
    if data.shape != (grid.n_modes, 5):
        raise IoError(f"{path}: expected {grid.n_modes} rows of 5 columns")
    values = np.stack([data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4]], axis=1)
    return SpectralField(grid, values), float(meta["t"])


# plotting ------------------------------------------------------------------

_W, _H, _PAD = 640, 440, 60


def _ticks(lo, hi):
    return list(range(int(math.floor(lo)), int(math.ceil(hi)) + 1))


def render_plot(records) -> str:
    """SVG text of ``u_linf_proxy`` against ``1 + t`` on log-log axes, with a
    slope ``-1/2`` reference line through the first point."""
    pts = [(1.0 + r.t, r.u_linf_proxy) for r in records if r.u_linf_proxy > 0]
    if len(pts) < 10:
        raise IoError(f"need at least 10 records with positive norm, got {len(pts)}")
    lx = np.log10([p[0] for p in pts])
    ly = np.log10([p[1] for p in pts])
    ref = ly[0] - 0.5 * (lx - lx[0])
    x0, x1 = float(lx.min()), float(lx.max())
    y0, y1 = float(min(ly.min(), ref.min())), float(max(ly.max(), ref.max()))
    if x1 - x0 < 1e-12:
        x1 = x0 + 1.0
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0

    def sx(v):
        return _PAD + (v - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def sy(v):
        return _H - _PAD - (v - y0) / (y1 - y0) * (_H - 2 * _PAD)

    def poly(xs, ys, style):
        p = " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(xs, ys))
        return f'<polyline fill="none" {style} points="{p}"/>'

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="black"/>',
    ]
    for e in _ticks(x0, x1):
        if x0 <= e <= x1:
            out.append(f'<text x="{sx(e):.3f}" y="{_H - _PAD + 18}" font-size="12" text-anchor="middle">1e{e}</text>')
    for e in _ticks(y0, y1):
        if y0 <= e <= y1:
            out.append(f'<text x="{_PAD - 6}" y="{sy(e):.3f}" font-size="12" text-anchor="end">1e{e}</text>')
    out.append(poly(lx, ref, 'stroke="gray" stroke-dasharray="6,4"'))
    out.append(poly(lx, ly, 'stroke="steelblue" stroke-width="2"'))
    out.append(f'<text x="{_W / 2}" y="{_H - 15}" font-size="13" text-anchor="middle">1 + t</text>')
    out.append(f'<text x="{_PAD}" y="{_PAD - 20}" font-size="13">sup |u| proxy (solid), slope -1/2 (dashed)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(records, path) -> str:
    """Write :func:`render_plot` to ``path``; nothing is written on error."""
    text = render_plot(list(records))
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path
