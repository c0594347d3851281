"""Text formats: measurement records, reconstructions, matrix plot data, metric tables.

Floats are written with ``repr`` so every file round-trips bit-exactly.
Lines starting with ``#`` in CSV files carry basis conventions and are
skipped on read.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .linalg import DensityMatrix
from .measurement import ALPHABETS, MeasurementRecord, ProjectorSetting

RECORD_COLUMNS = (
    "protocol", "dof", "s1", "s2", "duration_s", "value",
    "singles_rate_hz", "accidental_rate_hz", "gate_window_s",
    "relative_intensity_noise", "background",
)
_META_KEYS = RECORD_COLUMNS[6:]

BASIS_LABELS = {
    "polarization": ("HH", "HV", "VH", "VV"),
    "path": ("AA", "AB", "BA", "BB"),
}


def _num(x) -> str:
    return repr(int(x)) if isinstance(x, (int, np.integer)) else repr(float(x))


def _parse_num(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


def _comment_lines() -> list[str]:
    return [f"# {dof} labels: {','.join(labels)}" for dof, labels in ALPHABETS.items()]


def _open_text(target, mode):
    if hasattr(target, "write" if "w" in mode else "read"):
        return target, False
    return open(target, mode, newline="", encoding="utf-8"), True


def _data_lines(fh):
    return (line for line in fh if not line.startswith("#"))


# -- measurement records ---------------------------------------------------

def records_to_csv(records, target) -> None:
    fh, close = _open_text(target, "w")
    try:
        for line in _comment_lines():
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            meta = [_num(r.noise_meta[k]) if k in r.noise_meta else "" for k in _META_KEYS]
            w.writerow([r.protocol, r.setting.dof, r.setting.s1, r.setting.s2,
                        _num(r.duration), _num(r.value), *meta])
    finally:
        if close:
            fh.close()


def records_from_csv(source) -> list[MeasurementRecord]:
    fh, close = _open_text(source, "r")
    try:
        rows = list(csv.DictReader(_data_lines(fh)))
    finally:
        if close:
            fh.close()
    out = []
    for row in rows:
        meta = {k: _parse_num(row[k]) for k in _META_KEYS if row.get(k, "") != ""}
        out.append(MeasurementRecord(
            ProjectorSetting(row["dof"], row["s1"], row["s2"]),
            row["protocol"], _parse_num(row["value"]), _parse_num(row["duration_s"]), meta,
        ))
    return out


def _record_dict(r: MeasurementRecord) -> dict:
    return {
        "protocol": r.protocol, "dof": r.setting.dof, "s1": r.setting.s1, "s2": r.setting.s2,
        "duration_s": r.duration, "value": r.value, "noise_meta": dict(sorted(r.noise_meta.items())),
    }


def records_to_json(records) -> str:
    return json.dumps([_record_dict(r) for r in records], indent=1)


def records_from_json(text: str) -> list[MeasurementRecord]:
    return [
        MeasurementRecord(ProjectorSetting(d["dof"], d["s1"], d["s2"]), d["protocol"],
                          d["value"], d["duration_s"], dict(d.get("noise_meta", {})))
        for d in json.loads(text)
    ]


# -- reconstructions ---------------------------------------------------------

def matrix_to_pairs(m) -> list:
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def pairs_to_matrix(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def result_to_dict(result) -> dict:
    return {
        "method": result.method,
        "iterations": result.iterations,
        "converged": result.converged,
        "log_likelihood": result.log_likelihood,
        "seed": result.seed,
        "dims": list(result.rho.dims),
        "rho": matrix_to_pairs(result.rho.matrix),
    }


def result_from_dict(d: dict):
    from .tomography import ReconstructionResult

    return ReconstructionResult(
        rho=DensityMatrix(pairs_to_matrix(d["rho"]), tuple(d["dims"])),
        log_likelihood=d["log_likelihood"],
        iterations=d["iterations"],
        converged=d["converged"],
        method=d["method"],
        seed=d.get("seed"),
    )


# -- plot data ---------------------------------------------------------------

def export_matrix_plotdata(rho, path, dof: str = "polarization") -> None:
    """Bar-chart data for a 4x4 matrix: ``row_label, col_label, re, im``."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    labels = BASIS_LABELS[dof]
    if m.shape != (len(labels), len(labels)):
        raise ValueError(f"expected a {len(labels)}x{len(labels)} matrix")
    buf = io.StringIO()
    buf.write(f"# basis order: {','.join(labels)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row_label", "col_label", "re", "im"])
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            w.writerow([a, b, repr(float(m[i, j].real)), repr(float(m[i, j].imag))])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_matrix_plotdata(path) -> DensityMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(_data_lines(fh)))
    labels = list(dict.fromkeys(r["row_label"] for r in rows))
    index = {lab: i for i, lab in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=complex)
    for r in rows:
        m[index[r["row_label"]], index[r["col_label"]]] = float(r["re"]) + 1j * float(r["im"])
    return DensityMatrix(m, (2, 2))


# -- metric tables -----------------------------------------------------------

def metrics_table(columns: dict) -> dict:
    """Table layout: ``{row: {column: {"value", "std"}}}`` for rows F, Tr(rho^2), tau, C.

    ``columns`` maps a column name such as ``"Path QST"`` to StateMetrics.
    """
    table = {}
    for name, m in columns.items():
        for label, value, std in m.rows():
            table.setdefault(label, {})[name] = {"value": value, "std": std}
    return table


def metrics_table_csv(table: dict) -> str:
    cols = list(next(iter(table.values())).keys()) if table else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parameter"] + [c for col in cols for c in (col, f"{col} std")])
    for label, row in table.items():
        cells = []
        for col in cols:
            v, s = row[col]["value"], row[col]["std"]
            cells += [repr(float(v)), "" if s is None else repr(float(s))]
        w.writerow([label] + cells)
    return buf.getvalue()
