"""Binary field checkpoints.

A checkpoint is one line of JSON (the header) followed by the raw samples
as little-endian float64 in row-major order. Vector fields store their
components one after another. State checkpoints append the velocity
components and then phi, with the model time and constants in the header.
"""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from .model import ModelParams, State
from .spectral import Field, Grid, VectorField

LAYOUT = "row-major"
SCALAR = "float64-little-endian"
_DTYPE = np.dtype("<f8")


def _header(grid: Grid, components: int, **extra):
    head = {
        "dim": grid.dim,
        "n": grid.n,
        "box_length": grid.box_length,
        "layout": LAYOUT,
        "scalar": SCALAR,
        "kind": "physical",
        "components": components,
    }
    head.update(extra)
    return head


def _write(path, head, values):
    with open(path, "wb") as fh:
        fh.write(json.dumps(head, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(values, dtype=_DTYPE).tobytes(order="C"))


def _read(path):
    with open(path, "rb") as fh:
        head = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    if head.get("layout") != LAYOUT or head.get("scalar") != SCALAR or head.get("kind") != "physical":
        raise ValueError(f"{path}: unsupported checkpoint encoding")
    grid = Grid(int(head["dim"]), int(head["n"]), float(head["box_length"]))
    comps = int(head.get("components", 1))
    expected = comps * grid.n**grid.dim * _DTYPE.itemsize
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} data bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype=_DTYPE).astype(float).reshape((comps,) + grid.shape)
    return head, grid, data


def save_field(path, f):
    """Write a :class:`Field` or :class:`VectorField`."""
    if isinstance(f, VectorField):
        _write(path, _header(f.grid, f.dim), f.values)
    else:
        _write(path, _header(f.grid, 1), f.values)


def load_field(path):
    """Read a field written by :func:`save_field` (vector if components > 1)."""
    _, grid, data = _read(path)
    if data.shape[0] == 1:
        return Field(grid, data[0])
    return VectorField.from_values(grid, data)


def save_state(path, state: State):
    grid = state.grid
    head = _header(
        grid,
        grid.dim + 1,
        time=state.time,
        params=dataclasses.asdict(state.params),
        fields=["u"] * grid.dim + ["phi"],
    )
    _write(path, head, np.concatenate([state.u.values, state.phi.values[np.newaxis]]))


def load_state(path) -> State:
    head, grid, data = _read(path)
    if data.shape[0] != grid.dim + 1:
        raise ValueError(f"{path}: not a state checkpoint")
    params = ModelParams(**head.get("params", {}))
    return State(
        VectorField.from_values(grid, data[: grid.dim]),
        Field(grid, data[grid.dim]),
        params,
        float(head.get("time", 0.0)),
    )
