#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Versioned binary checkpoints.

Byte layout (little-endian):

    "BZSG"                     magic
    u16                        format version (1)
    u8                         model kind (1 logreg, 2 forest, 3 unet)
    u32 + bytes                cfg block, UTF-8 JSON
    u32                        number of parameter blocks
    per block:
      u16 + bytes              name, UTF-8
      u8                       dtype code (see DTYPES)
      u8 + u32 * ndim          shape
      bytes                    C-ordered little-endian payload
    u32                        CRC32 of every preceding byte
"""

import json
import struct
import zlib
import logging
from dataclasses import asdict

import numpy as np

from buzzscope.errors import CheckpointError
from buzzscope.nn import Conv1dParams
from buzzscope.models.logreg import LogisticModel
from buzzscope.models.forest import ForestModel, FlatTree
from buzzscope.models.unet import UNetModel, UNetConfig

logger = logging.getLogger(__name__)

MAGIC   = b"BZSG"
VERSION = 1
KINDS   = {1: "logreg", 2: "forest", 3: "unet"}
DTYPES  = {1: "<f8", 2: "<f4", 3: "<i8", 4: "<i4", 5: "<i1"}

# Model <-> blocks ---------------------------------------------------------------------------------

def _to_blocks(model):
    if isinstance(model, LogisticModel):
        cfg    = {"n_features": len(model.weights), "n_iter": int(model.n_iter)}
        blocks = {"weights": model.weights, "intercept": np.array([model.intercept])}
        return 1, cfg, blocks
    if isinstance(model, ForestModel):
        cfg    = {"n_features": int(model.n_features), "seed": int(model.seed),
                  "class_weight": model.class_weight, "n_trees": model.n_trees}
        blocks = {}
        for i, t in enumerate(model.trees):
            for field in ["feature", "threshold", "left", "right", "value"]:
                blocks[f"tree{i}/{field}"] = getattr(t, field)
        return 2, cfg, blocks
    if isinstance(model, UNetModel):
        blocks = {"norm_mean": model.norm_mean, "norm_std": model.norm_std}
        for name, p in model.params.items():
            blocks[f"{name}/weight"] = p.weight
            blocks[f"{name}/bias"]   = p.bias
        return 3, asdict(model.cfg), blocks
    raise NotImplementedError(f"cannot checkpoint a {type(model).__name__}")

def _from_blocks(kind, cfg, blocks):
    if KINDS[kind] == "logreg":
        return LogisticModel(blocks["weights"], float(blocks["intercept"][0]), cfg.get("n_iter", 0))
    if KINDS[kind] == "forest":
        trees = [FlatTree(**{f: blocks[f"tree{i}/{f}"] for f in ["feature", "threshold", "left", "right", "value"]})
                 for i in range(cfg["n_trees"])]
        return ForestModel(trees, cfg["n_features"], cfg["seed"], cfg["class_weight"])
    ucfg   = UNetConfig(**cfg)
    names  = [k[:-len("/weight")] for k in blocks if k.endswith("/weight")]
    params = {n: Conv1dParams(blocks[f"{n}/weight"], blocks[f"{n}/bias"]) for n in names}
    return UNetModel(ucfg, params, blocks["norm_mean"], blocks["norm_std"])

# Save/Load ----------------------------------------------------------------------------------------

def checkpoint_bytes(model):
    kind, cfg, blocks = _to_blocks(model)
    codes = {np.dtype(v): k for k, v in DTYPES.items()}
    cfg_b = json.dumps(cfg, sort_keys=True).encode("utf-8")
    out   = [MAGIC, struct.pack("<HB", VERSION, kind), struct.pack("<I", len(cfg_b)), cfg_b,
             struct.pack("<I", len(blocks))]
    for name, array in blocks.items():
        array = np.ascontiguousarray(array)
        dtype = array.dtype.newbyteorder("<")
        if dtype not in codes:
            raise CheckpointError(f"unsupported dtype {array.dtype} for block {name}")
        name_b = name.encode("utf-8")
        out += [struct.pack("<H", len(name_b)), name_b,
                struct.pack("<BB", codes[dtype], array.ndim),
                struct.pack(f"<{array.ndim}I", *array.shape),
                array.astype(dtype, copy=False).tobytes()]
    body = b"".join(out)
    return body + struct.pack("<I", zlib.crc32(body))

def checkpoint_save(model, filename):
    data = checkpoint_bytes(model)
    logger.info(f"[writing to {filename}]...")
    with open(filename, "wb") as f:
        f.write(data)

class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos  = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise CheckpointError("checkpoint is truncated")
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return b

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

def checkpoint_parse(data):
    if len(data) < len(MAGIC) + 4 or data[:len(MAGIC)] != MAGIC:
        raise CheckpointError("not a BuzzScope checkpoint (bad magic)")
    body, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    r = _Reader(body)
    r.take(len(MAGIC))
    version, kind = r.unpack("<HB")
    if version != VERSION:
        raise CheckpointError(f"checkpoint version {version} is not supported (expected {VERSION})")
    if zlib.crc32(body) != crc:
        raise CheckpointError("checkpoint is truncated or corrupted (CRC mismatch)")
    if kind not in KINDS:
        raise CheckpointError(f"unknown model kind {kind}")
    cfg    = json.loads(r.take(r.unpack("<I")[0]).decode("utf-8"))
    blocks = {}
    for _ in range(r.unpack("<I")[0]):
        name        = r.take(r.unpack("<H")[0]).decode("utf-8")
        code, ndim  = r.unpack("<BB")
        if code not in DTYPES:
            raise CheckpointError(f"unknown dtype code {code} in block {name}")
        shape = r.unpack(f"<{ndim}I")
        dtype = np.dtype(DTYPES[code])
        count = int(np.prod(shape, dtype=np.int64))
        blocks[name] = np.frombuffer(r.take(count*dtype.itemsize), dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
    if r.pos != len(body):
        raise CheckpointError("trailing bytes after the last block")
    try:
        return _from_blocks(kind, cfg, blocks)
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"checkpoint blocks do not describe a {KINDS[kind]} model: {e}") from e

def checkpoint_load(filename):
    with open(filename, "rb") as f:
        return checkpoint_parse(f.read())
