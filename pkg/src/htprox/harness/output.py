"""Result rows, CSV persistence and a minimal SVG line plot."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable, List, Optional

HEADER = ("experiment,sampler,d,nu,alpha,eta,k,wall_ms,rejections_mean,"
          "div_kind,div_value,div_se,bound_value,seed")
COLUMNS = tuple(HEADER.split(","))


@dataclass
class ResultRow:
    experiment: str
    sampler: str
    d: int
    nu: float
    alpha: float
    eta: float
    k: int
    wall_ms: float
    rejections_mean: float
    div_kind: str
    div_value: Optional[float]
    div_se: Optional[float]
    bound_value: Optional[float]
    seed: int

    def key(self):
        return (self.experiment, self.sampler, self.k, self.div_kind)


assert tuple(f.name for f in fields(ResultRow)) == COLUMNS


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in result row: {v}")
        return repr(v)
    return str(v)


def write_csv(path: str, rows: Iterable[ResultRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in astuple(r)])


def _opt(s: str):
    return None if s == "" else float(s)


def read_csv(path: str) -> List[ResultRow]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        head = next(rd)
        if tuple(head) != COLUMNS:
            raise ValueError(f"unexpected CSV header: {','.join(head)}")
        out = []
        for row in rd:
            e, s, d, nu, a, eta, k, wall, rej, kind, val, se, bnd, seed = row
            out.append(ResultRow(e, s, int(d), float(nu), float(a), float(eta), int(k),
                                 float(wall), float(rej), kind, _opt(val), _opt(se),
                                 _opt(bnd), int(seed)))
    return out


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_svg(path: str, series: dict, title: str = "",
              xlabel: str = "k", ylabel: str = "radial TV") -> None:
    """Log-log line plot. ``series`` maps label -> list of (x, y); points with
    x <= 0 or y <= 0 are dropped since they have no place on log axes."""
    clean = {lab: [(x, y) for x, y in pts if x > 0 and y > 0] for lab, pts in series.items()}
    clean = {lab: pts for lab, pts in clean.items() if pts}
    W, H, M = 640, 420, 60
    if not clean:
        xs, ys = [1.0, 10.0], [0.01, 1.0]
    else:
        xs = [x for pts in clean.values() for x, _ in pts]
        ys = [y for pts in clean.values() for _, y in pts]
    lx0, lx1 = math.floor(math.log10(min(xs))), math.ceil(math.log10(max(xs)))
    ly0, ly1 = math.floor(math.log10(min(ys))), math.ceil(math.log10(max(ys)))
    lx1, ly1 = max(lx1, lx0 + 1), max(ly1, ly0 + 1)

    def px(x):
        return M + (math.log10(x) - lx0) / (lx1 - lx0) * (W - 2 * M)

    def py(y):
        return H - M - (math.log10(y) - ly0) / (ly1 - ly0) * (H - 2 * M)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'font-family="sans-serif" font-size="12">',
             f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<text x="{W / 2}" y="20" text-anchor="middle">{title}</text>',
             f'<line x1="{M}" y1="{H - M}" x2="{W - M}" y2="{H - M}" stroke="black"/>',
             f'<line x1="{M}" y1="{M}" x2="{M}" y2="{H - M}" stroke="black"/>']
    for e in range(lx0, lx1 + 1):
        x = px(10.0**e)
        parts.append(f'<line x1="{x:.1f}" y1="{H - M}" x2="{x:.1f}" y2="{H - M + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{H - M + 18}" text-anchor="middle">1e{e}</text>')
    for e in range(ly0, ly1 + 1):
        y = py(10.0**e)
        parts.append(f'<line x1="{M - 5}" y1="{y:.1f}" x2="{M}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{M - 8}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    parts.append(f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle">{xlabel} (log)</text>')
    parts.append(f'<text x="15" y="{H / 2}" transform="rotate(-90 15 {H / 2})" '
                 f'text-anchor="middle">{ylabel} (log)</text>')
    for i, (lab, pts) in enumerate(sorted(clean.items())):
        col = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in sorted(pts))
        parts.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{coords}"/>')
        parts.append(f'<text x="{W - M + 4}" y="{M + 16 * i}" fill="{col}">{lab}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
