"""CSV and JSON persistence for traffic matrices and decompositions.

Input CSVs carry a header row of OD labels followed by one row per time
interval.  Floats are written with ``repr`` so a write/read round trip
is exact and repeated runs are byte identical.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from .matrix import Decomposition, TrafficMatrix

__all__ = [
    "read_traffic_csv",
    "read_matrix_csv",
    "write_matrix_csv",
    "write_decomposition",
    "read_decomposition",
]


def read_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    """Read a labeled matrix CSV; entries may have either sign."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            labels = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        p = len(labels)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != p:
                raise ValueError(f"{path}:{lineno}: expected {p} fields, got {len(row)}")
            try:
                parsed = [float(field) for field in row]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in parsed):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.array(rows, dtype=float), labels


def read_traffic_csv(path, interval_minutes: float, origin_label: str = "") -> TrafficMatrix:
    """Read a traffic matrix CSV; negative entries are rejected."""
    values, labels = read_matrix_csv(path)
    if (values < 0).any():
        raise ValueError(f"{path}: negative traffic values are not allowed")
    return TrafficMatrix(
        values=values,
        interval_minutes=interval_minutes,
        od_labels=labels,
        origin_label=origin_label or os.path.basename(str(path)),
    )


def write_matrix_csv(path, values: np.ndarray, labels: list[str]) -> None:
    values = np.asarray(values, dtype=float)
    if values.shape[1] != len(labels):
        raise ValueError(f"{values.shape[1]} columns but {len(labels)} labels")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(labels)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def write_decomposition(out_dir, decomposition: Decomposition, labels: list[str]) -> None:
    """Persist A.csv, E.csv, N.csv and meta.json into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    write_matrix_csv(os.path.join(out_dir, "A.csv"), decomposition.A, labels)
    write_matrix_csv(os.path.join(out_dir, "E.csv"), decomposition.E, labels)
    write_matrix_csv(os.path.join(out_dir, "N.csv"), decomposition.N, labels)
    meta = {
        "lambda": decomposition.lam,
        "mu": decomposition.mu,
        "sigmas": np.asarray(decomposition.sigmas, dtype=float).tolist(),
        "iterations": decomposition.iterations,
        "elapsed_seconds": decomposition.elapsed_seconds,
        "converged": decomposition.converged,
        "rank_A": decomposition.rank_A,
        "l0_E": decomposition.l0_E,
    }
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_decomposition(in_dir) -> tuple[Decomposition, list[str]]:
    """Load a decomposition directory written by :func:`write_decomposition`."""
    a, labels = read_matrix_csv(os.path.join(in_dir, "A.csv"))
    e, _ = read_matrix_csv(os.path.join(in_dir, "E.csv"))
    n, _ = read_matrix_csv(os.path.join(in_dir, "N.csv"))
    if a.shape != e.shape or a.shape != n.shape:
        raise ValueError(f"{in_dir}: A, E, N shapes disagree")
    with open(os.path.join(in_dir, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    decomposition = Decomposition(
        A=a,
        E=e,
        N=n,
        lam=meta["lambda"],
        mu=meta["mu"],
        sigmas=np.array(meta["sigmas"], dtype=float),
        iterations=meta["iterations"],
        objective_trace=[0.0] * meta["iterations"],  # trace is not persisted
        elapsed_seconds=meta["elapsed_seconds"],
        converged=meta["converged"],
        rank_A=meta["rank_A"],
    )
    return decomposition, labels
