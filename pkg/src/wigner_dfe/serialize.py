"""File formats: the JSON operator container and Wigner CSV dumps.

Operator JSON: {"d": int, "n": int, "kind": "state_vector"|"density"|"kraus",
"data": nested arrays of [re, im] pairs, row-major}.  Wigner dumps are CSV
with header `flat_index,coords,value`; coordinates are ':'-joined residues,
channel rows use "<v coords>|<u coords>".
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .phase_space import ChannelWigner, QuantumChannel, WignerFunction
from .system import SystemSpec

OPERATOR_KINDS = ("state_vector", "density", "kraus")


def fmt_float(x: float) -> str:
    """Fixed 12-significant-digit rendering used by every emitter."""
    return format(float(x), ".12g")


def complex_to_pairs(arr: np.ndarray) -> list:
    stacked = np.stack([np.asarray(arr).real, np.asarray(arr).imag], axis=-1)
    return stacked.tolist()


def pairs_to_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ValidationError("operator data must be nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def save_operator_json(path, spec: SystemSpec, kind: str, data) -> None:
    if kind not in OPERATOR_KINDS:
        raise ValidationError(f"unknown operator kind {kind!r}")
    if kind == "kraus":
        payload = [complex_to_pairs(K) for K in data]
    else:
        payload = complex_to_pairs(np.asarray(data))
    doc = {"d": spec.d, "n": spec.n, "kind": kind, "data": payload}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_operator_json(path):
    """Return (spec, kind, payload); payload is an ndarray, or a list of
    ndarrays for kind == 'kraus'."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read operator file {path}: {exc}") from exc
    for key in ("d", "n", "kind", "data"):
        if key not in doc:
            raise ValidationError(f"operator file {path} missing key {key!r}")
    spec = SystemSpec(int(doc["d"]), int(doc["n"]))
    kind = doc["kind"]
    if kind not in OPERATOR_KINDS:
        raise ValidationError(f"operator file {path} has unknown kind {kind!r}")
    if kind == "kraus":
        payload = [pairs_to_complex(K) for K in doc["data"]]
    else:
        payload = pairs_to_complex(doc["data"])
    return spec, kind, payload


def channel_from_file(path) -> QuantumChannel:
    spec, kind, payload = load_operator_json(path)
    if kind == "kraus":
        return QuantumChannel(spec, tuple(payload))
    raise ValidationError(f"operator file {path} holds a {kind}, not a channel")


def _coord_str(coords) -> str:
    return ":".join(str(int(c)) for c in coords)


def dump_wigner_csv(path, w: WignerFunction) -> None:
    spec = w.system
    lines = ["flat_index,coords,value"]
    for idx in range(spec.P):
        lines.append(f"{idx},{_coord_str(spec.index_to_point(idx))},{fmt_float(w.values[idx])}")
    _write_text(path, "\n".join(lines) + "\n")


def dump_channel_wigner_csv(path, cw: ChannelWigner) -> None:
    spec = cw.system
    lines = ["flat_index,coords,value"]
    for vi in range(spec.P):
        vstr = _coord_str(spec.index_to_point(vi))
        for ui in range(spec.P):
            flat = vi * spec.P + ui
            coords = f"{vstr}|{_coord_str(spec.index_to_point(ui))}"
            lines.append(f"{flat},{coords},{fmt_float(cw.values[vi, ui])}")
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc
