"""Turn solver trace CSVs into semilog convergence figures.

Input is a JSON figure spec listing panels; each panel names a CSV file, the
x column, and the series columns to draw. The y axis is log base 10, the x
axis stays linear in the iteration index. Values are plotted exactly as they
appear in the CSV, except that nonpositive entries (possible after exact
convergence) are clipped to 1e-300 and the affected series is drawn dashed.
A sidecar JSON records one checksum per plotted series so re-renders can be
compared independently of raster details.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CLIP_FLOOR = 1e-300


class RenderError(RuntimeError):
    """A spec or CSV problem that prevents rendering."""


@dataclass
class PanelSpec:
    csv: str
    x: str = "k"
    series: Optional[List[str]] = None      # None -> every non-x column
    labels: Dict[str, str] = field(default_factory=dict)
    title: str = ""
    ylabel: str = ""


@dataclass
class FigureSpec:
    panels: List[PanelSpec]
    output: str
    ncols: int = 2
    yscale: str = "log"
    xscale: str = "linear"


def load_spec(path: str) -> FigureSpec:
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if "panels" not in raw or not raw["panels"]:
        raise RenderError(f"{path}: spec needs a non-empty 'panels' list")
    if "output" not in raw:
        raise RenderError(f"{path}: spec needs an 'output' image path")
    panels = [PanelSpec(**p) for p in raw["panels"]]
    return FigureSpec(panels=panels,
                      output=raw["output"],
                      ncols=int(raw.get("ncols", 2)),
                      yscale=raw.get("yscale", "log"),
                      xscale=raw.get("xscale", "linear"))


def _read_csv_columns(path: str) -> Dict[str, np.ndarray]:
    if not os.path.exists(path):
        raise RenderError(f"missing CSV file {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"{path}: empty CSV") from None
        rows = [row for row in reader if row]
    if not rows:
        raise RenderError(f"{path}: CSV has a header but no data rows")
    data = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            data[i, j] = float(cell)
    return {name: data[:, j] for j, name in enumerate(header)}


def _series_checksum(values: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(values, dtype=np.float64)
                          .tobytes()).hexdigest()


def render(spec: FigureSpec) -> str:
    """Render all panels into one image; returns the sidecar path.

    The sidecar (output path + ".series.json") holds a sha256 checksum of
    every plotted series after clipping, making the data layer comparable
    across renders.
    """
    n = len(spec.panels)
    ncols = max(1, min(spec.ncols, n))
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(6.0 * ncols, 4.0 * nrows),
                             squeeze=False)
    checksums: Dict[str, Dict[str, str]] = {}
    for idx, panel in enumerate(spec.panels):
        ax = axes[idx // ncols][idx % ncols]
        cols = _read_csv_columns(panel.csv)
        if panel.x not in cols:
            raise RenderError(f"{panel.csv}: missing x column {panel.x!r}")
        x = cols[panel.x]
        names = panel.series if panel.series is not None else \
            [c for c in cols if c != panel.x]
        if not names:
            raise RenderError(f"{panel.csv}: no series to plot")
        panel_sums = {}
        for name in names:
            if name not in cols:
                raise RenderError(f"{panel.csv}: missing column {name!r}")
            y = cols[name].copy()
            finite = np.isfinite(y)
            clipped = bool(np.any(y[finite] <= 0.0))
            y[finite & (y <= 0.0)] = CLIP_FLOOR
            style = "--" if clipped else "-"
            ax.plot(x[finite], y[finite], style,
                    label=panel.labels.get(name, name), linewidth=1.2)
            panel_sums[name] = _series_checksum(y[finite])
        ax.set_yscale(spec.yscale)
        ax.set_xscale(spec.xscale)
        ax.set_xlabel(panel.x)
        if panel.ylabel:
            ax.set_ylabel(panel.ylabel)
        if panel.title:
            ax.set_title(panel.title)
        ax.legend(fontsize=7)
        ax.grid(True, which="both", alpha=0.25)
        checksums[f"panel{idx}:{os.path.basename(panel.csv)}"] = panel_sums
    for idx in range(n, nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")
    fig.tight_layout()
    outdir = os.path.dirname(os.path.abspath(spec.output))
    os.makedirs(outdir, exist_ok=True)
    fig.savefig(spec.output, dpi=130)
    plt.close(fig)
    sidecar = spec.output + ".series.json"
    with open(sidecar, "w", encoding="utf-8") as f:
        json.dump(checksums, f, indent=1, sort_keys=True)
    return sidecar


def render_bundle(csv_paths: Sequence[str], output: str, ncols: int = 2) -> str:
    """Convenience wrapper: one panel per CSV, all columns plotted."""
    titles = [os.path.splitext(os.path.basename(p))[0] for p in csv_paths]
    spec = FigureSpec(panels=[PanelSpec(csv=p, title=t)
                              for p, t in zip(csv_paths, titles)],
                      output=output, ncols=ncols)
    return render(spec)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="monosplit-figures",
        description="Render semilog convergence figures from trace CSVs.")
    parser.add_argument("spec", nargs="?", help="figure spec JSON path")
    parser.add_argument("--csv", nargs="+",
                        help="render these CSVs directly, one panel each")
    parser.add_argument("--out", default="figure.png",
                        help="output image for --csv mode")
    args = parser.parse_args(argv)
    try:
        if args.csv:
            sidecar = render_bundle(args.csv, args.out)
            print(f"wrote {args.out} and {sidecar}")
        elif args.spec:
            spec = load_spec(args.spec)
            sidecar = render(spec)
            print(f"wrote {spec.output} and {sidecar}")
        else:
            parser.error("need a spec file or --csv list")
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
