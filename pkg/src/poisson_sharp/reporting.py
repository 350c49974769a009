"""File outputs: CSV curves, JSON-lines reports, PGM heatmaps.

Every CSV and JSONL file starts with one timestamped header line; the body
below it is byte-deterministic for a fixed seed and configuration.  PGM
files carry no timestamp and are fully deterministic.  Floats are written
with repr-exact %.17g formatting.
"""

from __future__ import annotations

import datetime
import json
import os

import numpy as np

from .bathtub import SigmaCurve, SigmaPoint
from .bounds import BoundReport
from .grid import GridDomain, ScalarField
from .rearrange import RadialProfile


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def csv_header_line(tool: str) -> str:
    return f"# poisson-sharp {tool} generated {_timestamp()}\n"


def write_field_csv(path, f: ScalarField, tool: str = "field") -> None:
    centers = f.domain.cell_centers()
    axes = "xyz"[: f.domain.dim]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(csv_header_line(tool))
        fh.write("index," + ",".join(axes) + ",value\n")
        for i in range(f.domain.n_cells):
            coords = ",".join(_fmt(c) for c in centers[i])
            fh.write(f"{i},{coords},{_fmt(f.values[i])}\n")


def write_field_pgm(path, f: ScalarField, z_index: int | None = None) -> None:
    """Grayscale P5 heatmap of a field (2D, or a fixed-z slice of 3D)."""
    full = f.embed()
    if f.domain.dim == 3:
        if z_index is None:
            z_index = full.shape[2] // 2
        full = full[:, :, z_index]
    vmax = float(full.max())
    vmin = min(0.0, float(full.min()))
    if vmax > vmin:
        scaled = np.round((full - vmin) / (vmax - vmin) * 255.0)
    else:
        scaled = np.zeros_like(full)
    img = scaled.astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def sigma_point_row(domain: GridDomain, sp: SigmaPoint) -> dict:
    center = domain.center_of(sp.argmax_cell)
    row = {"beta": sp.beta, "sigma": sp.sigma}
    for ax, label in zip(range(domain.dim), "xyz"):
        row[f"argmax_{label}"] = float(center[ax])
    row["alpha"] = sp.level_alpha
    row["iterations"] = sp.iterations
    return row


def write_sigma_curve_csv(path, curve: SigmaCurve) -> None:
    rows = [sigma_point_row(curve.domain, sp) for sp in curve.points]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(csv_header_line("sigma"))
        if not rows:
            return
        fh.write(",".join(rows[0].keys()) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    str(v) if isinstance(v, int) else _fmt(v) for v in row.values()
                )
                + "\n"
            )


def write_sigma_curve_json(path, curve: SigmaCurve) -> None:
    points = []
    for sp in curve.points:
        row = sigma_point_row(curve.domain, sp)
        row.update(
            argmax_cell=sp.argmax_cell,
            objective_history=list(sp.objective_history),
            tie_cells=sp.tie_cells,
            start_summaries=sp.start_summaries,
            extremal_mass=sp.extremal.mass,
        )
        points.append(row)
    doc = {
        "meta": {
            "domain": curve.domain.name,
            "h": curve.domain.spacing,
            "measure": curve.domain.measure,
            "generated": _timestamp(),
        },
        "points": points,
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def report_obj(report: BoundReport) -> dict:
    return {
        "id": report.inequality_id,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "margin": report.margin,
        "tol": report.tol,
        "pass": report.passed,
        "gating": report.gating,
        "context": report.context,
    }


def write_reports_jsonl(path, reports, meta: dict | None = None) -> None:
    head = dict(meta or {})
    head["generated"] = _timestamp()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(json.dumps({"meta": head}, sort_keys=True) + "\n")
        for report in reports:
            fh.write(json.dumps(report_obj(report), sort_keys=True) + "\n")


def write_reports_summary_csv(path, reports) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(csv_header_line("verify"))
        fh.write("id,lhs,rhs,margin,pass\n")
        for r in reports:
            fh.write(
                f"{r.inequality_id},{_fmt(r.lhs)},{_fmt(r.rhs)},{_fmt(r.margin)},"
                f"{'true' if r.passed else 'false'}\n"
            )


def write_radial_profile_csv(path, profile: RadialProfile) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(csv_header_line("profile"))
        fh.write("rank,radius,value\n")
        for i, (radius, value) in enumerate(zip(profile.radii, profile.values)):
            fh.write(f"{i},{_fmt(radius)},{_fmt(value)}\n")


def write_eigen_csv(path, pairs, reports_by_k) -> None:
    """k, lambda, norms and the peak-bound outcome per eigenpair."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(csv_header_line("eigen"))
        fh.write("k,lambda,linf,l1,rhs_peak_bound,margin,pass\n")
        for ep in pairs:
            rep = reports_by_k[ep.k]
            fh.write(
                f"{ep.k},{_fmt(ep.lam)},{_fmt(ep.u.norm_linf)},{_fmt(ep.u.norm_l1)},"
                f"{_fmt(rep.rhs)},{_fmt(rep.margin)},{'true' if rep.passed else 'false'}\n"
            )


def strip_header(path) -> bytes:
    """File bytes with the single timestamped header line removed."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(b"#") or data.startswith(b'{"meta"'):
        _, _, body = data.partition(b"\n")
        return body
    return data


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
