"""File formats: MPS JSON, ``.msv`` state vectors and report serialization."""

from __future__ import annotations

import csv
import io as _io
import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import InvalidInput
from .mps import MPSChain, StateVector, TIMPS
from .validation import check_amplitude_count

MSV_MAGIC = b"MPSUP1\0"


def encode_complex(x):
    """Nested lists of ``[re, im]`` pairs."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex(v) for v in arr]


def decode_complex(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise InvalidInput("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# MPS JSON


def mps_to_dict(mps, N: int | None = None) -> dict:
    if isinstance(mps, TIMPS):
        out = {"kind": "ti", "d": mps.d, "tensors": [encode_complex(mps.A)], "boundary": "trace"}
        if N is not None:
            out["N"] = int(N)
        return out
    if isinstance(mps, MPSChain):
        boundary = "trace" if mps.boundary is None else {"matrix": encode_complex(mps.boundary)}
        return {
            "kind": "chain",
            "d": mps.d,
            "tensors": [encode_complex(s) for s in mps.sites],
            "boundary": boundary,
            "N": mps.N,
        }
    raise InvalidInput(f"cannot serialize {type(mps).__name__}")


def mps_from_dict(obj: dict):
    """Return a :class:`TIMPS` or :class:`MPSChain`, plus the stored ``N`` if any."""
    try:
        kind = obj["kind"]
        d = int(obj["d"])
        raw = obj["tensors"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed MPS file: {exc}") from exc
    N = obj.get("N")
    try:
        tensors = [decode_complex(t) for t in raw]
    except ValueError as exc:
        raise InvalidInput(f"malformed tensor entries: {exc}") from exc
    for n, t in enumerate(tensors):
        if t.ndim != 3 or t.shape[0] != d:
            raise InvalidInput(f"site {n + 1} has shape {t.shape}, expected ({d}, Dl, Dr)")
    boundary = obj.get("boundary", "trace")
    X = None
    if boundary != "trace":
        if not isinstance(boundary, dict) or "matrix" not in boundary:
            raise InvalidInput("boundary must be 'trace' or {'matrix': ...}")
        X = decode_complex(boundary["matrix"])
    if kind == "ti":
        if len(tensors) != 1 or X is not None:
            raise InvalidInput("a 'ti' file holds one tensor with trace boundary")
        return TIMPS(tensors[0]), N
    if kind == "chain":
        if N is not None and int(N) != len(tensors):
            raise InvalidInput(f"N={N} but {len(tensors)} tensors given")
        return MPSChain(tensors, X), len(tensors)
    raise InvalidInput(f"unknown kind {kind!r}")


def save_mps(path, mps, N: int | None = None) -> None:
    Path(path).write_text(json.dumps(mps_to_dict(mps, N), sort_keys=True))


def load_mps(path):
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    return mps_from_dict(obj)


# ---------------------------------------------------------------------------
# .msv state vectors


def save_msv(path, psi: StateVector) -> None:
    body = np.empty(2 * psi.amplitudes.size, dtype="<f8")
    body[0::2] = psi.amplitudes.real
    body[1::2] = psi.amplitudes.imag
    with open(path, "wb") as fh:
        fh.write(MSV_MAGIC)
        fh.write(struct.pack("<II", psi.d, psi.N))
        fh.write(body.tobytes())


def load_msv(path) -> StateVector:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    head = len(MSV_MAGIC) + 8
    if len(data) < head or not data.startswith(MSV_MAGIC):
        raise InvalidInput(f"{path} is not an .msv file")
    d, N = struct.unpack("<II", data[len(MSV_MAGIC) : head])
    size = check_amplitude_count(d, N)
    body = np.frombuffer(data[head:], dtype="<f8")
    if body.size != 2 * size:
        raise InvalidInput(f"expected {size} amplitudes, found {body.size / 2:g}")
    return StateVector(d, N, body[0::2] + 1j * body[1::2])


def load_state(path) -> StateVector:
    """Read an ``.msv`` file, or materialize an MPS JSON file."""
    from .mps import materialize

    if str(path).endswith(".msv"):
        return load_msv(path)
    mps, N = load_mps(path)
    if isinstance(mps, TIMPS) and N is None:
        raise InvalidInput("a TI MPS file needs N to define a state")
    return materialize(mps, N)


# ---------------------------------------------------------------------------
# reports


def canonical_form_to_dict(cf) -> dict:
    return {
        "p": cf.p,
        "blocks": [
            {"D": b.D, "r": b.r, "mu": encode_complex(b.mu), "tensor": encode_complex(b.tensor)}
            for b in cf.blocks
        ],
        "gauge": encode_complex(cf.gauge),
    }


def canonical_form_from_dict(obj: dict):
    from .structure import BNTBlock, CanonicalForm

    blocks = [BNTBlock(decode_complex(b["tensor"]), decode_complex(b["mu"])) for b in obj["blocks"]]
    return CanonicalForm(int(obj["p"]), decode_complex(obj["gauge"]), blocks)


def schmidt_csv(reports) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cut", "sigma_index", "sigma_value"])
    for rep in reports:
        for cut, k, s in rep.to_rows():
            writer.writerow([cut, k, repr(s)])
    return buf.getvalue()


def rows_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    """Long-format CSV from a list of flat dicts."""
    buf = _io.StringIO()
    if not rows:
        return ""
    columns = columns or list(rows[0])
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in columns})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            return str(x)
        return x
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)


__all__ = [
    "canonical_form_from_dict",
    "canonical_form_to_dict",
    "decode_complex",
    "dumps",
    "encode_complex",
    "load_mps",
    "load_msv",
    "load_state",
    "mps_from_dict",
    "mps_to_dict",
    "rows_csv",
    "save_mps",
    "save_msv",
    "schmidt_csv",
    "to_jsonable",
]
