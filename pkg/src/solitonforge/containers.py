"""Binary field/profile containers and deterministic CSV/JSON writers.

Both binary formats are a little-endian framed container:

    magic 'SFRG' | uint32 header length | UTF-8 JSON header | payload

`.prof` payload is a float64 array of profile samples; `.fld` payload is the
complex field as interleaved float64 (re, im).  CSV floats are written with
17 significant digits so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .grid import ComplexField, Grid1D, Grid2D

_MAGIC = b"SFRG"

__all__ = [
    "write_prof",
    "read_prof",
    "write_fld",
    "read_fld",
    "write_csv",
    "write_manifest",
]


def _write_container(path, header: dict, payload: bytes):
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)


def _read_container(path):
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a solitonforge container")
        (n,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(n).decode("utf-8"))
        payload = fh.read()
    return header, payload


def write_prof(path, profile, kind: str, extra: dict | None = None):
    """Profile container: JSON header (omega, dx, X, kind, ...) + samples."""
    is_kink = hasattr(profile, "zeta1")
    header = {
        "format": "prof",
        "version": 1,
        "kind": kind,
        "profile_type": "kink" if is_kink else "bound_state",
        "omega": profile.omega1 if is_kink else profile.omega,
        "dx": profile.dx,
        "X": profile.extent,
        "n": int(len(profile.samples)),
    }
    if is_kink:
        header.update(
            zeta1=profile.zeta1,
            orientation=profile.orientation,
            first_integral_constant=profile.first_integral_constant,
            fitted_decay_left=profile.fitted_decay_left,
            fitted_decay_right=profile.fitted_decay_right,
            is_gp=profile.is_gp,
        )
    else:
        header.update(
            fitted_decay=profile.fitted_decay,
            residual=profile.residual,
            method=profile.method,
        )
    if extra:
        header.update(extra)
    payload = np.asarray(profile.samples, dtype="<f8").tobytes()
    _write_container(path, header, payload)


def read_prof(path):
    """Returns (header dict, samples array)."""
    header, payload = _read_container(path)
    if header.get("format") != "prof":
        raise ValueError(f"{path}: not a profile container")
    samples = np.frombuffer(payload, dtype="<f8").copy()
    if len(samples) != header["n"]:
        raise ValueError(f"{path}: truncated payload")
    return header, samples


def write_fld(path, field: ComplexField, extra: dict | None = None):
    grid = field.grid
    header = {
        "format": "fld",
        "version": 1,
        "t": field.t,
        "L": grid.L,
        "N": grid.N,
        "d": grid.d,
    }
    if extra:
        header.update(extra)
    flat = np.asarray(field.values, dtype=np.complex128).ravel()
    inter = np.empty(2 * flat.size, dtype="<f8")
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    _write_container(path, header, inter.tobytes())


def read_fld(path) -> ComplexField:
    header, payload = _read_container(path)
    if header.get("format") != "fld":
        raise ValueError(f"{path}: not a field container")
    inter = np.frombuffer(payload, dtype="<f8")
    vals = inter[0::2] + 1j * inter[1::2]
    if header["d"] == 1:
        grid = Grid1D(header["L"], header["N"])
    else:
        grid = Grid2D(header["L"], header["N"])
        vals = vals.reshape(header["N"], header["N"])
    return ComplexField(header["t"], vals, grid)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, columns, rows):
    """Deterministic CSV: floats at 17 significant digits, LF endings."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
