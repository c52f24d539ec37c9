"""Versioned binary checkpoints.

Layout (all integers little-endian)::

    magic      8 bytes  b"OVTKCKPT"
    version    uint32
    meta_len   uint64
    meta       meta_len bytes of UTF-8 JSON: config echo, array table, counters, RNG states
    step       uint64   training step counter
    arrays     float64 little-endian payloads in the order of the meta array table
    checksum   32 bytes SHA-256 over everything above
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptCheckpoint, IncompatibleCheckpoint
from ..lidar import OBS_DIM
from .agent import Td3Agent, Td3Config
from .mlp import Mlp

MAGIC = b"OVTKCKPT"
VERSION = 1
_HEADER = struct.Struct("<8sIQ")
_STEP = struct.Struct("<Q")
_DIGEST = 32


def save_checkpoint(path, arrays, meta=None, step=0, config=None):
    """Write ``arrays`` (name -> float64 array) plus JSON metadata atomically."""
    names = list(arrays)
    table = [{"name": n, "shape": list(np.shape(arrays[n]))} for n in names]
    meta_blob = json.dumps({"config": config or {}, "arrays": table, "meta": meta or {}},
                           sort_keys=True).encode("utf-8")
    parts = [_HEADER.pack(MAGIC, VERSION, len(meta_blob)), meta_blob, _STEP.pack(int(step))]
    for n in names:
        parts.append(np.ascontiguousarray(arrays[n], dtype="<f8").tobytes())
    body = b"".join(parts)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(body)
        fh.write(hashlib.sha256(body).digest())
    os.replace(tmp, path)
    return path


def load_checkpoint(path):
    """Returns ``(arrays, meta, step, config)``; raises CorruptCheckpoint on any damage."""
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError:
        raise
    if len(blob) < _HEADER.size + _STEP.size + _DIGEST:
        raise CorruptCheckpoint(f"{path}: truncated ({len(blob)} bytes)")
    body, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    magic, version, meta_len = _HEADER.unpack_from(body, 0)
    if magic != MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CorruptCheckpoint(f"{path}: unsupported version {version}")
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCheckpoint(f"{path}: checksum mismatch")
    off = _HEADER.size
    try:
        head = json.loads(body[off:off + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"{path}: unreadable metadata") from exc
    off += meta_len
    (step,) = _STEP.unpack_from(body, off)
    off += _STEP.size
    arrays = {}
    for entry in head["arrays"]:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        nbytes = 8 * count
        if off + nbytes > len(body):
            raise CorruptCheckpoint(f"{path}: payload shorter than array table")
        arrays[entry["name"]] = np.frombuffer(body, dtype="<f8", count=count, offset=off).reshape(
            entry["shape"]).astype(np.float64)
        off += nbytes
    if off != len(body):
        raise CorruptCheckpoint(f"{path}: {len(body) - off} unexpected trailing bytes")
    return arrays, head["meta"], int(step), head["config"]


def save_agent(path, agent, step=0, extra_arrays=None, extra_meta=None, config=None):
    arrays = dict(agent.state_arrays())
    if extra_arrays:
        arrays.update(extra_arrays)
    meta = {"agent": agent.state_meta(), **(extra_meta or {})}
    cfg = {"td3": agent.config.to_dict(), **(config or {})}
    return save_checkpoint(path, arrays, meta, step, cfg)


def load_agent(path, seed=0):
    arrays, meta, step, config = load_checkpoint(path)
    td3 = dict(config["td3"])
    agent = Td3Agent(Td3Config(**td3), seed=seed, obs_dim=meta["agent"]["obs_dim"])
    agent.load_state(arrays, meta["agent"])
    return agent, arrays, meta, step, config


def load_actor(path, expected_obs_dim=OBS_DIM):
    """Frozen actor network from a training checkpoint."""
    arrays, meta, _, config = load_checkpoint(path)
    obs_dim = meta.get("agent", {}).get("obs_dim")
    if obs_dim != expected_obs_dim:
        raise IncompatibleCheckpoint(f"{path}: observation size {obs_dim}, expected {expected_obs_dim}")
    hidden = config["td3"]["hidden_sizes"]
    actor = Mlp([obs_dim, *hidden, 2], output="tanh", rng=np.random.default_rng(0))
    for k in range(len(actor.params)):
        actor.params[k] = arrays[f"actor.{k}"].copy()
    return actor
