"""Versioned binary container for fitted models.

Layout (all integers little-endian)::

    magic      8 bytes   b"RVRTCKPT"
    version    u16
    meta_len   u32, then meta_len bytes of UTF-8 JSON (sorted keys)
    n_tensors  u32, then per tensor:
        name_len u16, name (UTF-8)
        ndim     u8, then ndim x u64 dims
        data     prod(dims) x float64 (little-endian, row-major)
"""

import json
import struct
from typing import BinaryIO

import numpy as np

from .baselines import LogRegModel, NbModel
from .dnn import DnnArch, DnnModel

MAGIC = b"RVRTCKPT"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def write_container(fh: BinaryIO, meta: dict, tensors: dict) -> None:
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    fh.write(MAGIC)
    fh.write(struct.pack("<HI", FORMAT_VERSION, len(meta_bytes)))
    fh.write(meta_bytes)
    fh.write(struct.pack("<I", len(tensors)))
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f8")
        nb = name.encode("utf-8")
        fh.write(struct.pack("<H", len(nb)))
        fh.write(nb)
        fh.write(struct.pack("<B", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError("truncated checkpoint")
    return data


def read_container(fh: BinaryIO):
    if _read_exact(fh, len(MAGIC)) != MAGIC:
        raise CheckpointError("not a revrate checkpoint (bad magic bytes)")
    version, meta_len = struct.unpack("<HI", _read_exact(fh, 6))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version}")
    meta = json.loads(_read_exact(fh, meta_len).decode("utf-8"))
    (n_tensors,) = struct.unpack("<I", _read_exact(fh, 4))
    tensors = {}
    for _ in range(n_tensors):
        (name_len,) = struct.unpack("<H", _read_exact(fh, 2))
        name = _read_exact(fh, name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", _read_exact(fh, 1))
        shape = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim))
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        data = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8")
        tensors[name] = data.astype(np.float64).reshape(shape)
    if fh.read(1):
        raise CheckpointError("trailing bytes after last tensor")
    return meta, tensors


def model_tensors(kind: str, model) -> tuple:
    """Split a fitted model into (model-meta, tensors)."""
    if kind == "mnb":
        return ({"smoothing_alpha": model.smoothing_alpha},
                {"class_log_priors": model.class_log_priors,
                 "class_token_log_likelihoods": model.class_token_log_likelihoods})
    if kind == "logreg":
        return ({"l2_lambda": model.l2_lambda},
                {"weights": model.weights, "bias": model.bias,
                 "loss_history": np.asarray(model.loss_history, dtype=np.float64)})
    if kind == "dnn":
        arch = model.arch
        arch_meta = {
            "vocab_size": arch.vocab_size, "n_reviewers": arch.n_reviewers, "n_items": arch.n_items,
            "embed_dim": arch.embed_dim, "hidden": arch.hidden, "id_embed_dim": arch.id_embed_dim,
            "count_scale": list(arch.count_scale) if arch.count_scale else None,
        }
        return {"arch": arch_meta}, dict(model.parameters())
    raise CheckpointError(f"unknown model kind {kind!r}")


def model_from_tensors(kind: str, model_meta: dict, tensors: dict):
    try:
        if kind == "mnb":
            return NbModel(tensors["class_log_priors"], tensors["class_token_log_likelihoods"],
                           model_meta["smoothing_alpha"])
        if kind == "logreg":
            return LogRegModel(tensors["weights"], tensors["bias"], model_meta["l2_lambda"],
                               list(tensors["loss_history"]))
        if kind == "dnn":
            a = dict(model_meta["arch"])
            a["count_scale"] = tuple(a["count_scale"]) if a["count_scale"] else None
            return DnnModel.from_parameters(DnnArch(**a), tensors)
    except KeyError as exc:
        raise CheckpointError(f"checkpoint is missing {exc.args[0]!r}") from None
    raise CheckpointError(f"unknown model kind {kind!r}")


def save_model(path, kind: str, model, meta: dict) -> None:
    model_meta, tensors = model_tensors(kind, model)
    full = dict(meta, kind=kind, model=model_meta)
    with open(path, "wb") as fh:
        write_container(fh, full, tensors)


def load_model(path):
    """Return ``(kind, model, meta)``."""
    with open(path, "rb") as fh:
        meta, tensors = read_container(fh)
    kind = meta.get("kind")
    return kind, model_from_tensors(kind, meta.get("model", {}), tensors), meta
