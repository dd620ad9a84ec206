"""
Checkpoint and result-table persistence.

Checkpoint layout (all integers little-endian):

    magic        8 bytes  b"MITASCK1"
    manifest_len u32
    manifest     UTF-8 JSON (format version, config echo, sharing code, seed, step, extras)
    tensor_count u32
    per tensor:  u16 key length, key (UTF-8), u8 dtype code, u8 ndim,
                 ndim x u32 dims, raw row-major values

Model tensors are stored under their canonical key strings; optimizer
moments are stored as ``adam.m/<key>`` and ``adam.v/<key>``.
"""

import datetime
import json
import os
import struct
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from models import ModelConfig, ParameterStore, SeparationModel, canonicalize
from models.parameter_store import parameter_specs
from numeric import Tensor

MAGIC = b"MITASCK1"
FORMAT_VERSION = 1
DTYPE_CODES = {np.dtype("<f4"): 1, np.dtype("<f8"): 2}
CODE_DTYPES = {code: dtype for dtype, code in DTYPE_CODES.items()}
OPTIMIZER_PREFIX = "adam."


# --- GENERAL HANDLERS (JSON & CSV) ---

def json_converter(o):
    """Helper to convert datetime/numpy types when saving JSON."""
    if isinstance(o, (datetime.date, datetime.datetime)):
        return o.isoformat()
    if hasattr(o, 'item'):  # Numpy scalar
        return o.item()
    return str(o)


def save_table(df: pd.DataFrame, path: str, verbose: bool = True) -> str:
    """Write a CSV with a header row and a fixed float format (byte-stable across runs)."""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    if verbose:
        print(f"Result saved to: {path}")
    return path


# --- CHECKPOINTS ---

@dataclass
class Checkpoint:
    config: ModelConfig
    tensors: Dict[str, np.ndarray]
    manifest: Dict
    optimizer_state: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def step(self) -> int:
        return int(self.manifest.get("step", 0))

    @property
    def seed(self) -> int:
        return int(self.manifest.get("seed", 0))


def _write_tensor(f, name: str, values: np.ndarray):
    values = np.asarray(values)
    dtype = values.dtype.newbyteorder("<")
    if dtype not in DTYPE_CODES:
        raise ValueError(f"Tensor {name} has unsupported dtype {values.dtype}.")
    key = name.encode("utf-8")
    f.write(struct.pack("<H", len(key)))
    f.write(key)
    f.write(struct.pack("<BB", DTYPE_CODES[dtype], values.ndim))
    f.write(struct.pack(f"<{values.ndim}I", *values.shape))
    f.write(np.ascontiguousarray(values, dtype=dtype).tobytes())


def _read_exact(f, n: int, path: str) -> bytes:
    chunk = f.read(n)
    if len(chunk) != n:
        raise ValueError(f"Checkpoint {path} is truncated.")
    return chunk


def _read_tensor(f, path: str):
    (key_len,) = struct.unpack("<H", _read_exact(f, 2, path))
    name = _read_exact(f, key_len, path).decode("utf-8")
    code, ndim = struct.unpack("<BB", _read_exact(f, 2, path))
    if code not in CODE_DTYPES:
        raise ValueError(f"Checkpoint {path}: tensor {name} has unknown dtype code {code}.")
    dims = struct.unpack(f"<{ndim}I", _read_exact(f, 4 * ndim, path)) if ndim else ()
    dtype = CODE_DTYPES[code]
    count = int(np.prod(dims)) if dims else 1
    raw = _read_exact(f, count * dtype.itemsize, path)
    return name, np.frombuffer(raw, dtype=dtype).reshape(dims).copy()


def save_checkpoint(
    path: str,
    config: ModelConfig,
    store: ParameterStore,
    seed: int = 0,
    step: int = 0,
    optimizer_state: Optional[Dict[str, np.ndarray]] = None,
    extra: Optional[Dict] = None,
    verbose: bool = False,
) -> str:
    """Write ``store`` (and optional optimizer moments) to ``path`` atomically."""
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict(),
        "sharing": config.sharing.code,
        "seed": int(seed),
        "step": int(step),
        "extra": extra or {},
    }
    blobs = [(str(key), tensor.data) for key, tensor in store.items()]
    for name, values in (optimizer_state or {}).items():
        blobs.append((OPTIMIZER_PREFIX + name, values))

    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    tmp_path = path + ".tmp"
    payload = json.dumps(manifest, sort_keys=True, default=json_converter).encode("utf-8")
    with open(tmp_path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(payload)))
        f.write(payload)
        f.write(struct.pack("<I", len(blobs)))
        for name, values in blobs:
            _write_tensor(f, name, values)
    os.replace(tmp_path, path)
    if verbose:
        print(f"   -> [Checkpoint] step {step} saved to {path} ({len(store)} tensors)")
    return path


def load_checkpoint(path: str) -> Checkpoint:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Checkpoint {path} does not exist.")
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not a checkpoint (bad magic bytes).")
        (manifest_len,) = struct.unpack("<I", _read_exact(f, 4, path))
        manifest = json.loads(_read_exact(f, manifest_len, path).decode("utf-8"))
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"Checkpoint {path} has format version {manifest.get('format_version')}, expected {FORMAT_VERSION}.")
        (count,) = struct.unpack("<I", _read_exact(f, 4, path))
        tensors, optimizer_state = {}, {}
        for _ in range(count):
            name, values = _read_tensor(f, path)
            if name.startswith(OPTIMIZER_PREFIX):
                optimizer_state[name[len(OPTIMIZER_PREFIX):]] = values
            else:
                tensors[name] = values
    return Checkpoint(
        config=ModelConfig.from_dict(manifest["config"]),
        tensors=tensors,
        manifest=manifest,
        optimizer_state=optimizer_state,
    )


def restore_store(checkpoint: Checkpoint, config: Optional[ModelConfig] = None, dtype=None) -> ParameterStore:
    """
    Build a store for ``config`` (default: the checkpoint's own) from a checkpoint.

    Every site of the target network is resolved through the checkpoint's
    sharing scheme, so a checkpoint can be loaded under another scheme of the
    same architecture. Sites that the target ties together must hold equal
    values in the checkpoint.

    Raises
    ------
    KeyError
        Listing every canonical key the checkpoint lacks.
    ValueError
        On a shape mismatch or when tied sites hold different values.
    """
    target = (config or checkpoint.config).validate()
    source_sharing = checkpoint.config.sharing
    if dtype is None:
        dtype = next(iter(checkpoint.tensors.values())).dtype if checkpoint.tensors else np.float32
    store = ParameterStore(target.sharing, dtype)
    missing = []
    for spec in parameter_specs(target):
        source_key = str(canonicalize(spec.key, source_sharing))
        if source_key not in checkpoint.tensors:
            missing.append(source_key)
            continue
        values = checkpoint.tensors[source_key]
        if values.shape != spec.shape:
            raise ValueError(f"Checkpoint tensor {source_key} has shape {values.shape}, target site expects {spec.shape}.")
        ckey = store.canonical(spec.key)
        if ckey in store.tensors:
            if not np.array_equal(store.tensors[ckey].data, values.astype(store.dtype)):
                raise ValueError(
                    f"Cannot load under sharing '{target.sharing}': sites tied at {ckey} differ in the checkpoint ({spec.key})."
                )
        else:
            store.tensors[ckey] = Tensor(values.astype(store.dtype, copy=True), requires_grad=True, dtype=store.dtype)
        store.site_refs[ckey] += 1
    if missing:
        raise KeyError(f"Checkpoint lacks {len(set(missing))} canonical parameter(s): {', '.join(sorted(set(missing)))}")
    return store


def load_model(path: str, config: Optional[ModelConfig] = None, dtype=None, verbose: bool = False):
    """Checkpoint -> (SeparationModel, Checkpoint)."""
    checkpoint = load_checkpoint(path)
    store = restore_store(checkpoint, config, dtype)
    model = SeparationModel(config or checkpoint.config, store)
    if verbose:
        print(f"   -> [Checkpoint] loaded {path} (scheme {model.config.sharing}, step {checkpoint.step}, "
              f"{store.num_parameters():,d} params)")
    return model, checkpoint
