"""JSON file formats for matrices, states, channels and distortion observables.

Matrix format: {"labels": [...], "dims": [...], "re": [row-major], "im": [row-major]}.
Channel format: {"kind": "kraus"|"choi", "input_labels", "input_dims",
"output_labels", "output_dims", "kraus": [matrix]|"choi": matrix}.
Floats are emitted by Python's shortest-round-trip repr, which guarantees
bit-exact decimal round trips (>= 17 significant digits where needed).
"""

from __future__ import annotations

import json

import numpy as np

from .states import DensityOperator, QuantumChannel, SystemDims


def matrix_to_dict(m: np.ndarray, labels, dims) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "labels": list(labels),
        "dims": [int(d) for d in dims],
        "re": [float(x) for x in m.real.reshape(-1)],
        "im": [float(x) for x in m.imag.reshape(-1)],
    }


def matrix_from_dict(obj: dict) -> tuple[np.ndarray, SystemDims]:
    dims = SystemDims(tuple(obj["labels"]), tuple(int(d) for d in obj["dims"]))
    d = dims.dim
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.size != d * d or im.size != d * d:
        raise ValueError(f"matrix entries ({re.size}) do not match dims {dims.dims} (need {d*d})")
    return (re + 1j * im).reshape(d, d), dims


def density_to_dict(rho: DensityOperator) -> dict:
    return matrix_to_dict(rho.matrix, rho.dims.labels, rho.dims.dims)


def density_from_dict(obj: dict) -> DensityOperator:
    m, dims = matrix_from_dict(obj)
    return DensityOperator(m, dims)


def channel_to_dict(n: QuantumChannel, kind: str = "kraus") -> dict:
    base = {
        "kind": kind,
        "input_labels": list(n.input_dims.labels),
        "input_dims": [int(d) for d in n.input_dims.dims],
        "output_labels": list(n.output_dims.labels),
        "output_dims": [int(d) for d in n.output_dims.dims],
    }
    if kind == "kraus":
        base["kraus"] = [
            {"re": [float(x) for x in k.real.reshape(-1)],
             "im": [float(x) for x in k.imag.reshape(-1)]}
            for k in n.kraus
        ]
    elif kind == "choi":
        base["choi"] = {"re": [float(x) for x in n.choi.real.reshape(-1)],
                        "im": [float(x) for x in n.choi.imag.reshape(-1)]}
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    return base


def channel_from_dict(obj: dict) -> QuantumChannel:
    input_dims = SystemDims(tuple(obj["input_labels"]), tuple(int(d) for d in obj["input_dims"]))
    output_dims = SystemDims(tuple(obj["output_labels"]), tuple(int(d) for d in obj["output_dims"]))
    din, dout = input_dims.dim, output_dims.dim
    kind = obj["kind"]
    if kind == "kraus":
        kraus = []
        for entry in obj["kraus"]:
            re = np.asarray(entry["re"], dtype=float).reshape(dout, din)
            im = np.asarray(entry["im"], dtype=float).reshape(dout, din)
            kraus.append(re + 1j * im)
        return QuantumChannel(kraus=kraus, input_dims=input_dims, output_dims=output_dims)
    if kind == "choi":
        re = np.asarray(obj["choi"]["re"], dtype=float).reshape(din * dout, din * dout)
        im = np.asarray(obj["choi"]["im"], dtype=float).reshape(din * dout, din * dout)
        return QuantumChannel(choi=re + 1j * im, input_dims=input_dims, output_dims=output_dims)
    raise ValueError(f"unknown channel kind {kind!r}")


def save_json(obj: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
