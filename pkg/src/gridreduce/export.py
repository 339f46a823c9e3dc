"""File writers and readers for reduced datasets, provenance and reports.

Representatives travel as CSV with the dataset schema ``i,j,k,<attr>`` plus
optional trailing ``cluster,role`` columns (present for the shared-neighbor
method). Provenance goes into a key=value sidecar next to the CSV. Point
clouds for external viewers are written as ascii PLY or legacy ascii VTK
POLYDATA with the attribute and cluster id attached per vertex; numeric
fields carry 9 significant digits, enough to round-trip float32 data.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError
from .evaluate import REPORT_FIELDS, ReductionReport
from .grid import ReducedDataset

__all__ = [
    "write_reduced_rows",
    "write_reduced_csv",
    "read_reduced_csv",
    "provenance_sidecar_path",
    "write_provenance",
    "read_provenance",
    "write_ply",
    "write_vtk",
    "write_report_csv",
]


def write_reduced_rows(path, attr_names, idx, attrs, labels=None, roles=None) -> None:
    idx = np.asarray(idx)
    attrs = np.asarray(attrs)
    if attrs.ndim == 1:
        attrs = attrs.reshape(-1, 1)
    header = ["i", "j", "k", *attr_names]
    if roles is not None:
        header += ["cluster", "role"]
    with Path(path).open("w", newline="\n", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for pos in range(idx.shape[0]):
            row = [str(int(v)) for v in idx[pos]]
            row += [repr(float(v)) for v in attrs[pos]]
            if roles is not None:
                row.append(str(int(labels[pos])))
                row.append(str(roles[pos]))
            f.write(",".join(row) + "\n")


def write_reduced_csv(r: ReducedDataset, path) -> None:
    write_reduced_rows(path, r.spec.attr_names, r.idx, r.attrs, r.labels, r.roles)


def read_reduced_csv(path):
    """Parse a representatives CSV.

    Returns (idx, attrs, attr_names, labels, roles); labels/roles are None
    when the file has no cluster/role columns.
    """
    path = Path(path)
    try:
        f = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header[:3] != ["i", "j", "k"]:
            raise DataError(f"{path}: header must start with i,j,k")
        has_roles = header[-2:] == ["cluster", "role"]
        attr_names = tuple(header[3:-2] if has_roles else header[3:])
        if not attr_names:
            raise DataError(f"{path}: no attribute columns")
        idx, attrs, labels, roles = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {lineno}: expected {len(header)} fields")
            try:
                idx.append([int(row[0]), int(row[1]), int(row[2])])
                stop = len(header) - 2 if has_roles else len(header)
                attrs.append([float(v) for v in row[3:stop]])
                if has_roles:
                    labels.append(int(row[-2]))
                    roles.append(row[-1])
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    idx = np.asarray(idx, dtype=np.int64).reshape(-1, 3)
    attrs = np.asarray(attrs, dtype=np.float64).reshape(-1, len(attr_names))
    return (
        idx,
        attrs,
        attr_names,
        np.asarray(labels, dtype=np.int64) if has_roles else None,
        np.asarray(roles) if has_roles else None,
    )


def provenance_sidecar_path(csv_path) -> Path:
    return Path(str(csv_path) + ".prov")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(_format_value(v) for v in value)
    return str(value)


def write_provenance(r: ReducedDataset, path) -> None:
    prov = r.provenance
    lines = [
        f"method={prov.method}",
        f"source_count={prov.source_count}",
        f"nonnull_count={prov.nonnull_count}",
        f"partition_count={prov.partition_count}",
        f"representative_count={r.n_representatives}",
    ]
    for key in sorted(prov.params):
        lines.append(f"param.{key}={_format_value(prov.params[key])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_provenance(path) -> dict[str, str]:
    """Sidecar as a flat str->str mapping (params under ``param.`` keys)."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _g9(value: float) -> str:
    return f"{float(value):.9g}"


def write_ply(path, idx, attrs, attr_name="value", labels=None) -> None:
    """Ascii PLY point cloud: grid coordinates, first attribute, cluster id."""
    idx = np.asarray(idx)
    attrs = np.asarray(attrs)
    if attrs.ndim == 1:
        attrs = attrs.reshape(-1, 1)
    n = idx.shape[0]
    if labels is None:
        labels = np.full(n, -1, dtype=np.int64)
    with Path(path).open("w", newline="\n", encoding="utf-8") as f:
        f.write("ply\n")
        f.write("format ascii 1.0\n")
        f.write(f"element vertex {n}\n")
        f.write("property float x\n")
        f.write("property float y\n")
        f.write("property float z\n")
        f.write(f"property float {attr_name}\n")
        f.write("property int cluster\n")
        f.write("end_header\n")
        for pos in range(n):
            f.write(
                f"{_g9(idx[pos, 0])} {_g9(idx[pos, 1])} {_g9(idx[pos, 2])} "
                f"{_g9(attrs[pos, 0])} {int(labels[pos])}\n"
            )


def write_vtk(path, idx, attrs, attr_name="value", labels=None) -> None:
    """Legacy ascii VTK POLYDATA point cloud with per-point scalars."""
    idx = np.asarray(idx)
    attrs = np.asarray(attrs)
    if attrs.ndim == 1:
        attrs = attrs.reshape(-1, 1)
    n = idx.shape[0]
    if labels is None:
        labels = np.full(n, -1, dtype=np.int64)
    with Path(path).open("w", newline="\n", encoding="utf-8") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write("reduced point cloud\n")
        f.write("ASCII\n")
        f.write("DATASET POLYDATA\n")
        f.write(f"POINTS {n} float\n")
        for pos in range(n):
            f.write(f"{_g9(idx[pos, 0])} {_g9(idx[pos, 1])} {_g9(idx[pos, 2])}\n")
        f.write(f"VERTICES {n} {2 * n}\n")
        for pos in range(n):
            f.write(f"1 {pos}\n")
        f.write(f"POINT_DATA {n}\n")
        f.write(f"SCALARS {attr_name} float 1\n")
        f.write("LOOKUP_TABLE default\n")
        for pos in range(n):
            f.write(f"{_g9(attrs[pos, 0])}\n")
        f.write("SCALARS cluster int 1\n")
        f.write("LOOKUP_TABLE default\n")
        for pos in range(n):
            f.write(f"{int(labels[pos])}\n")


def write_report_csv(reports, path) -> None:
    """Fixed-header report CSV; the trailing error column is empty on success."""
    with Path(path).open("w", newline="\n", encoding="utf-8") as f:
        f.write(",".join(REPORT_FIELDS) + ",error\n")
        for report in reports:
            f.write(format_report_row(report) + "\n")


def format_report_row(report: ReductionReport) -> str:
    if report.error is not None:
        cells = [report.method] + ["" for _ in REPORT_FIELDS[1:]]
        cells.append(report.error.replace("\n", " ").replace(",", ";"))
        return ",".join(cells)
    cells = []
    for name in REPORT_FIELDS:
        value = getattr(report, name)
        cells.append(repr(float(value)) if isinstance(value, float) else str(value))
    cells.append("")
    return ",".join(cells)
