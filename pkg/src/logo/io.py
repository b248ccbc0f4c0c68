"""Binary matrix/label files, JSON configs, and model persistence.

Both binary formats have a fixed little-endian 12-byte header (4 ASCII magic
bytes plus two u32 dimensions) followed by the payload, so they can be read
from any language without a dependency. Matrices store IEEE-754 float32
row-major; labels store u32 with 0xFFFFFFFF as the IGNORE encoding.
Values are widened back to float64 on read.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

import numpy as np

from .core import IGNORE, LabelVector, LogoError
from .ensemble import EnsembleConfig
from .prototype import AnchorConfig
from .synth import ScenarioConfig
from .trainer import AdapterModel, TrainConfig
from .transport import SinkhornConfig

MATRIX_MAGIC = b"LGF1"
LABEL_MAGIC = b"LGL1"
IGNORE_ENCODING = 0xFFFFFFFF
_U32_MAX = 0xFFFFFFFF


class BadMagic(LogoError):
    pass


class TruncatedPayload(LogoError):
    def __init__(self, expected, actual):
        super().__init__(f"expected {expected} payload bytes, found {actual}")
        self.expected = expected
        self.actual = actual


class DimensionOverflow(LogoError):
    pass


class ValueExceedsK(LogoError):
    pass


class UnknownField(LogoError):
    pass


def _read_header(raw: bytes, magic: bytes, path):
    if len(raw) < 12 or raw[:4] != magic:
        raise BadMagic(f"{path}: expected magic {magic.decode()!r}")
    dims = np.frombuffer(raw[4:12], dtype="<u4")
    return int(dims[0]), int(dims[1])


def _check_payload(raw: bytes, expected: int):
    actual = len(raw) - 12
    if actual != expected:
        raise TruncatedPayload(expected, actual)


def write_matrix(path, matrix) -> None:
    """Write a 2-D array (or Feature/Prob matrix) as float32."""
    data = np.asarray(getattr(matrix, "data", matrix), dtype=np.float64)
    if data.ndim != 2:
        raise DimensionOverflow(f"matrix must be 2-D, got shape {data.shape}")
    rows, cols = data.shape
    if rows > _U32_MAX or cols > _U32_MAX:
        raise DimensionOverflow(f"dimensions {rows} x {cols} exceed u32")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(np.array([rows, cols], dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


def read_matrix(path) -> np.ndarray:
    """Read a matrix file back as a float64 array."""
    raw = Path(path).read_bytes()
    rows, cols = _read_header(raw, MATRIX_MAGIC, path)
    _check_payload(raw, rows * cols * 4)
    flat = np.frombuffer(raw, dtype="<f4", offset=12)
    return flat.astype(np.float64).reshape(rows, cols)


def write_labels(path, labels: LabelVector) -> None:
    """Write labels as u32 with IGNORE mapped to 0xFFFFFFFF."""
    arr = labels.labels
    if labels.k > _U32_MAX:
        raise DimensionOverflow(f"k={labels.k} exceeds u32")
    encoded = np.where(arr == IGNORE, _U32_MAX, arr).astype("<u4")
    with open(path, "wb") as fh:
        fh.write(LABEL_MAGIC)
        fh.write(np.array([arr.shape[0], labels.k], dtype="<u4").tobytes())
        fh.write(encoded.tobytes())


def read_labels(path) -> LabelVector:
    """Read a label file; raises ValueExceedsK on out-of-range entries."""
    raw = Path(path).read_bytes()
    n, k = _read_header(raw, LABEL_MAGIC, path)
    _check_payload(raw, n * 4)
    encoded = np.frombuffer(raw, dtype="<u4", offset=12)
    labels = encoded.astype(np.int64)
    ignore = encoded == IGNORE_ENCODING
    labels[ignore] = IGNORE
    bad = labels[~ignore]
    if bad.size and bad.max() >= k:
        raise ValueExceedsK(f"{path}: label {bad.max()} >= k={k}")
    return LabelVector(labels, k)


# --- JSON configs -----------------------------------------------------------

_NESTED = {
    "ensemble": EnsembleConfig,
    "anchor": AnchorConfig,
    "sinkhorn": SinkhornConfig,
}


def config_to_dict(cfg) -> dict:
    """Dataclass config to a plain dict with explicit field names."""
    return dataclasses.asdict(cfg)


def _dataclass_from_dict(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise UnknownField(f"{cls.__name__} does not accept {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        nested = _NESTED.get(key)
        if nested is not None and isinstance(value, dict):
            value = _dataclass_from_dict(nested, value)
        kwargs[key] = value
    return cls(**kwargs)


def train_config_from_dict(data: dict) -> TrainConfig:
    return _dataclass_from_dict(TrainConfig, data)


def scenario_config_from_dict(data: dict) -> ScenarioConfig:
    return _dataclass_from_dict(ScenarioConfig, data)


def write_json(path, payload: dict) -> None:
    """Canonical JSON text: sorted keys, trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# --- model persistence ------------------------------------------------------

_MODEL_PARTS = ("weight", "bias", "scale", "shift")


def save_model(directory, model: AdapterModel) -> None:
    """Write one matrix file per parameter into ``directory``."""
    directory = Path(directory)
    os.makedirs(directory, exist_ok=True)
    write_matrix(directory / "weight.lgf", model.weight)
    write_matrix(directory / "bias.lgf", model.bias[None, :])
    write_matrix(directory / "scale.lgf", model.scale[None, :])
    write_matrix(directory / "shift.lgf", model.shift[None, :])


def load_model(directory) -> AdapterModel:
    """Load a model written by save_model (float32 precision)."""
    directory = Path(directory)
    weight = read_matrix(directory / "weight.lgf")
    bias = read_matrix(directory / "bias.lgf")[0]
    scale = read_matrix(directory / "scale.lgf")[0]
    shift = read_matrix(directory / "shift.lgf")[0]
    return AdapterModel(weight, bias, scale, shift)
