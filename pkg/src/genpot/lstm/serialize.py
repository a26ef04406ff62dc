"""``EDL1`` binary model files.

Layout, all little-endian::

    b"EDL1"
    uint32 d, h, L, H, target
    float64 arrays, row-major, in this order:
        encoder W (4h x d), encoder R (4h x h), encoder b (4h)
        decoder W (4h x 1), decoder R (4h x h), decoder b (4h)
        projection weights (h), projection bias (1)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import BadMagicError, ShapeHeaderMismatchError, TruncatedFileError
from .cell import LstmCellWeights
from .model import PARAM_NAMES, EncoderDecoderModel

MAGIC = b"EDL1"
_HEADER = struct.Struct("<5I")


def _shapes(d: int, h: int) -> dict[str, tuple[int, ...]]:
    return {
        "enc_W": (4 * h, d),
        "enc_R": (4 * h, h),
        "enc_b": (4 * h,),
        "dec_W": (4 * h, 1),
        "dec_R": (4 * h, h),
        "dec_b": (4 * h,),
        "proj_w": (h,),
        "proj_b": (1,),
    }


def model_to_bytes(model: EncoderDecoderModel) -> bytes:
    d, h = model.input_size, model.hidden_size
    parts = [MAGIC, _HEADER.pack(d, h, model.L, model.H, model.target)]
    params = model.params()
    for name in PARAM_NAMES:
        parts.append(np.ascontiguousarray(params[name], dtype="<f8").tobytes())
    return b"".join(parts)


def model_from_bytes(buf: bytes) -> EncoderDecoderModel:
    if len(buf) < len(MAGIC):
        raise TruncatedFileError("file shorter than the magic number")
    if buf[:4] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}, found {bytes(buf[:4])!r}")
    if len(buf) < 4 + _HEADER.size:
        raise TruncatedFileError("file ends inside the header")
    d, h, L, H, target = _HEADER.unpack_from(buf, 4)
    if min(d, h, L, H) < 1 or target >= d:
        raise ShapeHeaderMismatchError(f"invalid header d={d} h={h} L={L} H={H} target={target}")
    shapes = _shapes(d, h)
    expected = 4 + _HEADER.size + 8 * sum(int(np.prod(s)) for s in shapes.values())
    if len(buf) < expected:
        raise TruncatedFileError(f"expected {expected} bytes, file has {len(buf)}")
    if len(buf) > expected:
        raise ShapeHeaderMismatchError(f"{len(buf) - expected} bytes beyond what the header declares")
    offset = 4 + _HEADER.size
    arrays = {}
    for name, shape in shapes.items():
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(buf, dtype="<f8", count=count, offset=offset).reshape(shape).astype(np.float64)
        offset += 8 * count
    return EncoderDecoderModel(
        LstmCellWeights(arrays["enc_W"], arrays["enc_R"], arrays["enc_b"]),
        LstmCellWeights(arrays["dec_W"], arrays["dec_R"], arrays["dec_b"]),
        arrays["proj_w"],
        arrays["proj_b"],
        L,
        H,
        target,
    )


def save_model(model: EncoderDecoderModel, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> EncoderDecoderModel:
    return model_from_bytes(Path(path).read_bytes())
