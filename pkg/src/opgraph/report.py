"""Output files of an analysis run: delimited tables and matplotlib figures.

Every table starts with a ``# opgraph manifest_sha256=...`` comment line;
PNG figures carry the same string in a text chunk. Nothing time- or
host-dependent is written, so equal manifests give equal files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Callable, IO, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from opgraph.metrics import SegmentMetrics  # noqa: E402
from opgraph.stats import CorrelationRow  # noqa: E402

METRIC_COLUMNS = (
    "segment", "phase", "n_encounters", "n_nodes", "n_edges", "lcc_nodes", "lcc_edges",
    "largest_component_proportion", "cc", "apl", "density", "triangle_ratio",
    "constraint_overall", "cc_rnd_er", "pl_rnd_er", "cc_rnd_cfg", "pl_rnd_cfg",
    "sw_er", "sw_config", "outcome_ratio",
)

PHASE_STYLE = {"intra": dict(color="tab:blue", ls="-"), "post": dict(color="tab:red", ls="--")}

_RC = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "svg.hashsalt": "opgraph",
}


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def header_line(digest: str) -> str:
    return f"# opgraph manifest_sha256={digest}\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


class OutputDir:
    """Writes named artifacts under one directory, prefixing the manifest header.

    Names are plain file names; anything that would resolve outside the
    directory is refused.
    """

    def __init__(self, root: str | Path, digest: str):
        self.root = Path(root)
        self.digest = digest
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        target = (self.root / name).resolve()
        if self.root.resolve() not in target.parents:
            raise ValueError(f"refusing to write {name!r} outside {self.root}")
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def text(self, name: str, body: Callable[[IO[str]], None], header: bool = True) -> Path:
        p = self.path(name)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            if header:
                fh.write(header_line(self.digest))
            body(fh)
        self.written.append(name)
        return p

    def figure(self, name: str, fig) -> Path:
        p = self.path(name)
        fig.savefig(p, format="png",
                    metadata={"Software": None, "Comment": f"opgraph manifest_sha256={self.digest}"})
        plt.close(fig)
        self.written.append(name)
        return p


def write_metrics(rows: Sequence[SegmentMetrics], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for m in rows:
        w.writerow([_fmt(getattr(m, c)) for c in METRIC_COLUMNS])


def write_constraint_means(rows: Sequence[SegmentMetrics], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("segment", "role", "mean_constraint"))
    for m in rows:
        if m.constraint_overall is None:
            continue
        w.writerow((m.segment, "overall", repr(m.constraint_overall)))
        for role in sorted(m.constraint_by_role):
            w.writerow((m.segment, role, repr(m.constraint_by_role[role])))


# --- figures ---------------------------------------------------------------

def _series(rows: Sequence[SegmentMetrics], attr: str):
    pts = [(m.segment, getattr(m, attr)) for m in rows if getattr(m, attr) is not None]
    return [p[0] for p in pts], [p[1] for p in pts]


def _finish(ax, ylabel: str, n_segments: int):
    ax.set_xlabel("time segment")
    ax.set_ylabel(ylabel)
    ax.set_xticks(range(n_segments))
    ax.legend()


def plot_metric(by_phase: dict[str, list[SegmentMetrics]], attr: str, ylabel: str,
                null_attrs: Sequence[tuple[str, str]] = ()):
    """One line per phase; optional dotted lines for null-model baselines."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        n = 0
        for phase, rows in by_phase.items():
            style = PHASE_STYLE.get(phase, {})
            x, y = _series(rows, attr)
            ax.plot(x, y, marker="o", ms=3, label=f"{phase}", **style)
            for null_attr, label in null_attrs:
                x, y = _series(rows, null_attr)
                ax.plot(x, y, color=style.get("color"), ls=":", marker="x", ms=3,
                        label=f"{phase} {label}")
            n = max(n, len(rows))
        _finish(ax, ylabel, n)
        fig.tight_layout()
    return fig


def plot_small_world(by_phase: dict[str, list[SegmentMetrics]]):
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 2, figsize=(9.6, 3.6), sharex=True)
        n = max((len(r) for r in by_phase.values()), default=0)
        for ax, attr, title in ((axes[0], "sw_er", "Erdos-Renyi null"),
                                (axes[1], "sw_config", "configuration null")):
            for phase, rows in by_phase.items():
                x, y = _series(rows, attr)
                ax.plot(x, y, marker="o", ms=3, label=phase, **PHASE_STYLE.get(phase, {}))
            ax.axhline(1.0, color="0.5", lw=0.8)
            ax.set_title(title)
            _finish(ax, "small-world indicator", n)
        fig.tight_layout()
    return fig


def plot_constraint(rows: Sequence[SegmentMetrics], phase: str):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        x, y = _series(rows, "constraint_overall")
        ax.plot(x, y, color="black", lw=2, marker="o", ms=3, label="overall")
        roles = sorted({r for m in rows for r in m.constraint_by_role})
        for role in roles:
            pts = [(m.segment, m.constraint_by_role[role]) for m in rows if role in m.constraint_by_role]
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=role)
        ax.set_title(f"{phase}: average aggregate constraint")
        _finish(ax, "mean constraint", len(rows))
        fig.tight_layout()
    return fig


def plot_correlations(rows: Sequence[SegmentMetrics], table: Sequence[CorrelationRow], phase: str):
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, max(len(table), 1), figsize=(3.4 * max(len(table), 1), 3.2),
                                 squeeze=False)
        for ax, row in zip(axes[0], table):
            pts = [(getattr(m, row.var_x), getattr(m, row.var_y)) for m in rows]
            pts = [p for p in pts if None not in p]
            ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=12, color="tab:blue")
            ax.set_xlabel(row.var_x)
            ax.set_ylabel(row.var_y)
            ax.set_title(f"r={row.pearson_r:.2f}  robust={row.robust_r:.2f}", fontsize=8)
        fig.suptitle(phase)
        fig.tight_layout()
    return fig


def write_figures(out: OutputDir, by_phase: dict[str, list[SegmentMetrics]],
                  tables: dict[str, list[CorrelationRow]]) -> None:
    out.figure("figures/network_size.png", plot_metric(by_phase, "n_nodes", "providers (nodes)"))
    out.figure("figures/largest_component.png",
               plot_metric(by_phase, "largest_component_proportion", "largest component share"))
    out.figure("figures/clustering.png",
               plot_metric(by_phase, "cc", "clustering coefficient",
                           [("cc_rnd_er", "ER null"), ("cc_rnd_cfg", "config null")]))
    out.figure("figures/path_length.png",
               plot_metric(by_phase, "apl", "average path length",
                           [("pl_rnd_er", "ER null"), ("pl_rnd_cfg", "config null")]))
    out.figure("figures/small_world.png", plot_small_world(by_phase))
    out.figure("figures/triangle_ratio.png", plot_metric(by_phase, "triangle_ratio", "triangle ratio"))
    out.figure("figures/density.png", plot_metric(by_phase, "density", "density"))
    for phase, rows in by_phase.items():
        out.figure(f"figures/constraint_{phase}.png", plot_constraint(rows, phase))
        if tables.get(phase):
            out.figure(f"figures/correlations_{phase}.png",
                       plot_correlations(rows, tables[phase], phase))

