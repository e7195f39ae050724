"""Readers and writers for the CSV/JSON files emitted by the command line.

CSV floats are printed with 17 significant digits, which round-trips every
IEEE double exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bands import BandSpectrum, EssentialSpectrum
from .errors import FormatError
from .potentials import AsymptoticPotential

FLOAT_FMT = "%.17g"
CONSTRUCTION_COLUMNS = ("z", "v_star", "S", "A0", "A_per")
CONSTRUCTION_CSV = "construction.csv"
DIAGNOSTICS_JSON = "diagnostics.json"


def write_csv(path, columns, arrays) -> None:
    data = np.column_stack([np.asarray(a, dtype=float) for a in arrays])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(columns), comments="")


def read_csv(path, columns) -> dict:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    if header != ",".join(columns):
        raise FormatError(f"{path}: expected header {','.join(columns)!r}, found {header!r}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if data.shape[1] != len(columns):
        raise FormatError(f"{path}: rows must have {len(columns)} fields")
    return {c: data[:, i] for i, c in enumerate(columns)}


def _json_safe(obj):
    # JSON has no inf/nan; spell them as strings like the band tables do
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_json_safe(obj), indent=2) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# construction ---------------------------------------------------------------

def diagnostics_record(construction, potential_spec: str) -> dict:
    c, d = construction, construction.diagnostics
    rec = {
        "lambda0": c.lambda0, "m": c.m, "beta": c.beta, "alpha": c.alpha,
        "residual_sup": d.residual_sup, "decay_rate_fit": d.decay_rate_fit,
        "min_radicand": d.min_radicand,
        "potential": potential_spec, "Z": c.Z, "h": c.h,
        "residual_rel": d.residual_rel, "s_decay_rate_fit": d.s_decay_rate_fit,
        "eigenfn_positive": d.eigenfn_positive, "s_form_discrepancy": d.s_form_discrepancy,
        "tail_mismatch": d.tail_mismatch, "a2_integral": d.a2_integral,
    }
    if c.threshold is not None:
        t = c.threshold
        rec["threshold"] = {"embedded": t.embedded, "on_threshold": t.on_threshold,
                            "distance_to_nearest_edge": t.distance_to_nearest_edge}
    return rec


def write_construction(directory, construction, potential_spec: str, prefix: str = ""):
    """Write ``construction.csv`` and ``diagnostics.json``; returns both paths."""
    directory = Path(directory)
    c = construction
    csv_path = directory / (prefix + CONSTRUCTION_CSV)
    json_path = directory / (prefix + DIAGNOSTICS_JSON)
    write_csv(csv_path, CONSTRUCTION_COLUMNS, (c.z_grid, c.v_star, c.S, c.A0, c.A_per))
    write_json(json_path, diagnostics_record(c, potential_spec))
    return csv_path, json_path


def read_construction(directory, prefix: str = ""):
    """Return ``(columns, diagnostics)`` for a written construction."""
    directory = Path(directory)
    cols = read_csv(directory / (prefix + CONSTRUCTION_CSV), CONSTRUCTION_COLUMNS)
    diag = read_json(directory / (prefix + DIAGNOSTICS_JSON))
    missing = {"lambda0", "m", "beta", "alpha", "potential", "Z", "h"} - diag.keys()
    if missing:
        raise FormatError(f"diagnostics sidecar lacks {sorted(missing)}")
    return cols, diag


@dataclass(frozen=True)
class LoadedConstruction:
    """A construction read back from disk.

    Carries the attributes the verifier uses (``z_grid``, ``v_star``,
    ``A0``, ``potential``, ...) so it can stand in for the in-memory result.
    """

    lambda0: float
    m: int
    beta: float
    alpha: float
    Z: float
    h: float
    z_grid: np.ndarray
    v_star: np.ndarray
    S: np.ndarray
    A0: np.ndarray
    A_per: np.ndarray
    potential: object = field(repr=False)
    diagnostics: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_files(cls, cols: dict, diag: dict, tail) -> "LoadedConstruction":
        return cls(float(diag["lambda0"]), int(diag["m"]), float(diag["beta"]), float(diag["alpha"]),
                   float(diag["Z"]), float(diag["h"]), cols["z"], cols["v_star"], cols["S"],
                   cols["A0"], cols["A_per"], tail, diag)

    def asymptotic_potential(self) -> AsymptoticPotential:
        return AsymptoticPotential(self.z_grid, self.A0, self.potential)


# spectra and matching -------------------------------------------------------

def read_bands(path):
    obj = read_json(path)
    if "spectra" in obj:
        return EssentialSpectrum.from_json(obj)
    if "mode" in obj:
        return BandSpectrum.from_json(obj)
    raise FormatError(f"{path}: not a band table")


def write_iota(path, matching) -> None:
    write_csv(path, ("lambda", "iota"), (matching.lambda_grid, matching.iota_values))


def read_iota(path) -> dict:
    return read_csv(path, ("lambda", "iota"))


def read_roots(path) -> dict:
    obj = read_json(path)
    if not {"roots", "window", "Z_match"} <= obj.keys():
        raise FormatError(f"{path}: roots report needs roots, window and Z_match")
    return obj
