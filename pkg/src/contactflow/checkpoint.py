"""Bit-exact binary checkpoints of a phase field.

Layout: the 8 magic bytes ``ACFLOW1\\0``, an unsigned 64-bit little-endian
header length, a canonical UTF-8 JSON header, then the cell values as
row-major little-endian float64.
"""
from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .energetics import EnergyModel
from .errors import ConfigError
from .geometry import DomainGeometry
from .solver import PhaseField

MAGIC = b"ACFLOW1\0"


def canonical_json(obj) -> str:
    """Sorted keys, compact separators, ASCII only."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False)


def checkpoint_header(field: PhaseField, base_dt: float, config_hash: str = "") -> dict:
    return {
        "domain": field.domain.describe(),
        "grid_shape": list(field.domain.shape),
        "epsilon": field.epsilon,
        "time": field.time,
        "step_index": field.step_index,
        "base_dt": base_dt,
        "boundary": field.boundary,
        "model": field.model.describe(),
        "config_hash": config_hash,
    }


def encode_checkpoint(field: PhaseField, base_dt: float, config_hash: str = "") -> bytes:
    header = canonical_json(checkpoint_header(field, base_dt, config_hash)).encode("utf-8")
    values = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    return MAGIC + struct.pack("<Q", len(header)) + header + values


def write_checkpoint(path, field: PhaseField, base_dt: float, config_hash: str = "") -> Path:
    """Write atomically (temporary file then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode_checkpoint(field, base_dt, config_hash))
    os.replace(tmp, path)
    return path


def read_checkpoint(path) -> tuple[dict, np.ndarray]:
    """Header mapping and values of a checkpoint file."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ConfigError(f"{path}: not a contactflow checkpoint (bad magic)")
    (n,) = struct.unpack("<Q", data[8:16])
    header = json.loads(data[16:16 + n].decode("utf-8"))
    body = data[16 + n:]
    if len(body) % 8:
        raise ConfigError(f"{path}: truncated value block")
    values = np.frombuffer(body, dtype="<f8").astype(float)
    return header, values


def field_from_checkpoint(path, domain: DomainGeometry, model: EnergyModel) -> tuple[PhaseField, dict]:
    """Rebuild a field on ``domain``; the header must match the domain and model."""
    header, values = read_checkpoint(path)
    if header["domain"] != json.loads(canonical_json(domain.describe())):
        raise ConfigError(f"{path}: checkpoint domain {header['domain']} does not match {domain.describe()}")
    if header["model"] != json.loads(canonical_json(model.describe())):
        raise ConfigError(f"{path}: checkpoint model does not match the configured model")
    if values.size != domain.n_cells:
        raise ConfigError(f"{path}: {values.size} values for {domain.n_cells} cells")
    fld = PhaseField(domain, model, header["epsilon"], values, header["time"], header["step_index"],
                     header.get("boundary", "adjacent"))
    return fld, header
