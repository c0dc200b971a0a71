"""JSON round-tripping for grid fields and small report/CSV helpers.

File layout: one JSON object with a chart descriptor and flattened
arrays.  Grid points are flattened with the first coordinate varying
fastest; complex entries are stored as [re, im] pairs.  Everything is
plain JSON so files are diffable and readable from any language.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import InputError
from .geometry import FrameField, PrincipalSymbolField
from .operators import FirstOrderOperator

_FORMAT_VERSION = 1


def _flatten_grid(arr: np.ndarray) -> np.ndarray:
    """(n, n, n, *comp) -> (n^3, *comp) with the x^1 index fastest."""
    n = arr.shape[0]
    comp = arr.shape[3:]
    swapped = np.transpose(arr, (2, 1, 0) + tuple(range(3, arr.ndim)))
    return swapped.reshape((n**3,) + comp)


def _unflatten_grid(flat: np.ndarray, n: int) -> np.ndarray:
    comp = flat.shape[1:]
    arr = flat.reshape((n, n, n) + comp)
    return np.transpose(arr, (2, 1, 0) + tuple(range(3, arr.ndim)))


def _encode_complex(arr: np.ndarray) -> list:
    stacked = np.stack([np.real(arr), np.imag(arr)], axis=-1)
    return stacked.tolist()


def _decode_complex(data) -> np.ndarray:
    stacked = np.asarray(data, dtype=float)
    return stacked[..., 0] + 1j * stacked[..., 1]


def _header(kind: str, n: int) -> dict:
    return {
        "format_version": _FORMAT_VERSION,
        "kind": kind,
        "chart": {"grid": n, "domain": "[0, 2*pi)^3", "point_order": "x1-fastest"},
    }


def save_symbol(sym: PrincipalSymbolField, path: str) -> None:
    n = sym.sigma.shape[0]
    doc = _header("principal-symbol", n)
    doc["sigma"] = _encode_complex(_flatten_grid(sym.sigma))
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_symbol(path: str) -> PrincipalSymbolField:
    doc = _load_document(path, "principal-symbol")
    n = doc["chart"]["grid"]
    sigma = _unflatten_grid(_decode_complex(doc["sigma"]), n)
    return PrincipalSymbolField(sigma)


def save_frame(frame: FrameField, path: str) -> None:
    n = frame.e.shape[0]
    doc = _header("frame", n)
    doc["frame"] = _flatten_grid(frame.e).tolist()
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_frame(path: str) -> FrameField:
    doc = _load_document(path, "frame")
    n = doc["chart"]["grid"]
    e = _unflatten_grid(np.asarray(doc["frame"], dtype=float), n)
    return FrameField(e)


def save_operator(op: FirstOrderOperator, path: str) -> None:
    n = op.sigma.sigma.shape[0]
    doc = _header("operator", n)
    doc["sigma"] = _encode_complex(_flatten_grid(op.sigma.sigma))
    doc["a0"] = _encode_complex(_flatten_grid(op.a0))
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_operator(path: str) -> FirstOrderOperator:
    doc = _load_document(path, "operator")
    n = doc["chart"]["grid"]
    sigma = _unflatten_grid(_decode_complex(doc["sigma"]), n)
    a0 = _unflatten_grid(_decode_complex(doc["a0"]), n)
    return FirstOrderOperator(PrincipalSymbolField(sigma), a0)


def _load_document(path: str, kind: str) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if doc.get("kind") != kind:
        raise InputError(f"{path} holds {doc.get('kind')!r}, expected {kind!r}")
    if doc.get("format_version") != _FORMAT_VERSION:
        raise InputError(f"unsupported format version {doc.get('format_version')}")
    return doc


def write_json_report(report: dict, path: str | None) -> str:
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def write_spectrum_csv(table, path: str) -> None:
    """Eigenvalue table as CSV: value, multiplicity."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eigenvalue", "multiplicity"])
        for v, m in zip(table.values, table.multiplicities):
            writer.writerow([f"{v:.15g}", int(m)])
