"""Run artifacts: diagnostics CSV, curve snapshots (JSON, optional SVG), final report."""

import csv
import os

import numpy as np

from .curve import save_snapshot

CSV_COLUMNS = ("t", "dt", "energy_bending", "energy_total", "length", "area", "area_drift",
               "rotation_index", "dissipation", "residual", "c1_estimate", "c1_std", "max_abs_k",
               "embedded", "metric_flatness")


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_svg(curve, path, stroke="black", pad=0.05, width=480):
    """Closed polyline of the nodes, stroke only, viewBox fitted to the curve."""
    pts = np.asarray(curve.points)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = hi - lo
    margin = pad * max(span.max(), 1e-12)
    x0, y0 = lo - margin
    w, h = span + 2 * margin
    # flip y so the picture has the usual orientation
    coords = " ".join(f"{x:.6g},{-y:.6g}" for x, y in pts)
    height = width * h / w
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0f}" '
           f'viewBox="{x0:.6g} {-(y0 + h):.6g} {w:.6g} {h:.6g}">\n'
           f'<polygon points="{coords}" fill="none" stroke="{stroke}" '
           f'stroke-width="{0.004 * max(w, h):.4g}"/>\n</svg>\n')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def run_directory(outputs, name):
    root = os.environ.get("APEF_OUT_DIR") or outputs.root
    return os.path.join(root, name)


class RunWriter:
    """Streams one run's outputs; a no-op when ``outputs.write`` is false."""

    def __init__(self, config, trajectory):
        self.config = config
        self.outputs = config.outputs
        self.traj = trajectory
        self._fh = None
        self._csv = None
        if not self.outputs.write:
            return
        self.dir = run_directory(self.outputs, config.name)
        os.makedirs(self.dir, exist_ok=True)
        trajectory.out_dir = self.dir
        trajectory.csv_path = os.path.join(self.dir, self.outputs.csv)
        self._fh = open(trajectory.csv_path, "w", encoding="utf-8", newline="")
        self._csv = csv.writer(self._fh, lineterminator="\n")
        self._csv.writerow(CSV_COLUMNS)
        config.save(os.path.join(self.dir, "config.json"))

    def _snapshot(self, state, tag):
        from .flow import translation_normalized

        curve = state.curve
        if self.outputs.normalize_translation:
            curve = translation_normalized(curve)
        path = os.path.join(self.dir, f"snapshot_{tag}.json")
        d = state.diagnostics
        save_snapshot(curve, path, t=state.t, step=state.step_index, area=d.area, length=d.length,
                      energy_total=d.energy.total, rotation_index=d.rotation)
        if self.outputs.svg:
            write_svg(curve, path[:-5] + ".svg")
        self.traj.snapshots.append(path)
        return path

    def record(self, state):
        if self._csv is None:
            return
        self._csv.writerow([_fmt(v) for v in state.diagnostics.row()])
        stride = self.outputs.snapshot_stride
        if state.step_index == 0 or (stride and state.step_index % stride == 0):
            self._snapshot(state, f"{state.step_index:07d}")

    def finish(self, state, report):
        if self._fh is None:
            return
        self._fh.close()
        self._snapshot(state, "final")
        if report is not None:
            report.save(os.path.join(self.dir, "report.json"))
