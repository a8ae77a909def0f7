"""Image file I/O: PNG (8- and 16-bit) plus binary PPM/PGM.

Files decode to normalized float64 samples in [0, 1]; color files yield
(H, W, 3) RGB arrays, grayscale files yield (H, W). Encoding quantizes by
round-to-nearest at the requested bit depth. PNG goes through OpenCV
(channel order converted to/from BGR); the Netpbm formats are written
directly (binary P5/P6, big-endian for 16-bit samples).
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from .errors import ParameterError, ShapeError
from .imaging import srgb_to_linear

__all__ = ["read_image", "write_image"]

_PNM_EXTS = {".ppm", ".pgm"}


def read_image(path, linearize: bool = False) -> np.ndarray:
    """Load a PNG/PPM/PGM file as float64 in [0, 1].

    Returns (H, W, 3) for color images and (H, W) for grayscale. An alpha
    channel, if present, is dropped. With ``linearize`` the standard sRGB
    decode is applied to the normalized samples.
    """
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext in _PNM_EXTS:
        data, maxval = _read_pnm(path)
    else:
        raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
        if raw is None:
            if not os.path.exists(path):
                raise FileNotFoundError(path)
            raise IOError(f"could not decode image file: {path}")
        if raw.ndim == 3:
            if raw.shape[2] == 4:
                raw = raw[:, :, :3]
            raw = raw[:, :, ::-1]  # BGR -> RGB
        data = raw
        maxval = 65535 if data.dtype == np.uint16 else 255
    out = data.astype(np.float64) / maxval
    if linearize:
        out = srgb_to_linear(out)
    return out


def write_image(path, image, bitdepth: int = 8) -> None:
    """Write a [0, 1] float array as PNG/PPM/PGM, quantized round-to-nearest.

    2-D arrays are written grayscale, (H, W, 3) arrays as color. PGM only
    accepts grayscale and PPM only color; PNG accepts both.
    """
    if bitdepth not in (8, 16):
        raise ParameterError(f"bitdepth must be 8 or 16, got {bitdepth}")
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ShapeError(f"expected (H, W) or (H, W, 3), got {arr.shape}")
    maxval = (1 << bitdepth) - 1
    dtype = np.uint8 if bitdepth == 8 else np.uint16
    quant = np.rint(np.clip(arr, 0.0, 1.0) * maxval).astype(dtype)

    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        if quant.ndim != 2:
            raise ShapeError("PGM holds grayscale images only")
        _write_pnm(path, quant, maxval)
    elif ext == ".ppm":
        if quant.ndim != 3:
            raise ShapeError("PPM holds color images only")
        _write_pnm(path, quant, maxval)
    else:
        bgr = quant[:, :, ::-1] if quant.ndim == 3 else quant
        if not cv2.imwrite(path, bgr):
            raise IOError(f"could not write image file: {path}")


def _read_pnm(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    magic, fields, offset = blob[:2], [], 2
    if magic not in (b"P5", b"P6"):
        raise IOError(f"unsupported PNM magic {magic!r} in {path}")
    # header: width, height, maxval separated by whitespace, '#' comments allowed
    while len(fields) < 3:
        while offset < len(blob) and blob[offset : offset + 1].isspace():
            offset += 1
        if blob[offset : offset + 1] == b"#":
            offset = blob.index(b"\n", offset) + 1
            continue
        end = offset
        while end < len(blob) and not blob[end : end + 1].isspace():
            end += 1
        fields.append(int(blob[offset:end]))
        offset = end
    offset += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if maxval not in (255, 65535):
        raise IOError(f"unsupported PNM maxval {maxval} in {path}")
    channels = 3 if magic == b"P6" else 1
    dtype = ">u2" if maxval == 65535 else np.uint8
    count = width * height * channels
    data = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return data.reshape(shape), maxval


def _write_pnm(path, quant: np.ndarray, maxval: int) -> None:
    magic = b"P6" if quant.ndim == 3 else b"P5"
    h, w = quant.shape[:2]
    payload = quant.astype(">u2").tobytes() if maxval == 65535 else quant.tobytes()
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n%d\n" % (w, h, maxval))
        fh.write(payload)
