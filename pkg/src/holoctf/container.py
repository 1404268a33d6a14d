"""Raw binary array containers, PGM previews and CSV line profiles.

A container is a directory holding ``meta.json`` and ``data.raw``; the raw
file is little-endian float64 in row-major order.  Shapes are ``[H, W]`` for
one image or ``[J, H, W]`` for a stack.
"""

import csv
import json
import os

import jsonschema
import numpy as np
from scipy.ndimage import map_coordinates

__all__ = [
    "META_SCHEMA",
    "write_array",
    "read_array",
    "read_meta",
    "write_pgm",
    "read_pgm",
    "line_profile",
    "write_profile_csv",
]

META_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dtype", "byte_order", "layout", "shape"],
    "properties": {
        "dtype": {"const": "f64"},
        "byte_order": {"const": "little"},
        "layout": {"const": "row-major"},
        "shape": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 2,
            "maxItems": 3,
        },
        "fresnel_numbers": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "pixel_size_m": {"type": "number", "exclusiveMinimum": 0},
        "energy_keV": {"type": "number", "exclusiveMinimum": 0},
        "preview": {"type": "object"},
    },
}

_DTYPE = np.dtype("<f8")


def write_array(path, array, **meta):
    """Write ``array`` as a container directory at ``path``; extra keywords go into the metadata."""
    array = np.ascontiguousarray(array, dtype=_DTYPE)
    os.makedirs(path, exist_ok=True)
    doc = {"dtype": "f64", "byte_order": "little", "layout": "row-major", "shape": list(array.shape)}
    doc.update({k: v for k, v in meta.items() if v is not None})
    jsonschema.validate(doc, META_SCHEMA)
    with open(os.path.join(path, "data.raw"), "wb") as fh:
        fh.write(array.tobytes(order="C"))
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_meta(path):
    with open(os.path.join(path, "meta.json")) as fh:
        meta = json.load(fh)
    jsonschema.validate(meta, META_SCHEMA)
    return meta


def read_array(path):
    """Read a container; returns ``(array, meta)``."""
    meta = read_meta(path)
    shape = tuple(meta["shape"])
    with open(os.path.join(path, "data.raw"), "rb") as fh:
        data = fh.read()
    need = int(np.prod(shape)) * 8
    if len(data) != need:
        raise ValueError(f"{path}: data.raw has {len(data)} bytes, shape {shape} needs {need}")
    return np.frombuffer(data, dtype=_DTYPE).astype(float).reshape(shape), meta


def write_pgm(path, image):
    """16-bit binary PGM preview with linear min-max scaling; returns ``(lo, hi)``."""
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    span = hi - lo if hi > lo else 1.0
    levels = np.rint((image - lo) / span * 65535).astype(">u2")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(levels.tobytes())
    return lo, hi


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    magic, w, h, maxval = data.split(maxsplit=4)[:4]
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(w), int(h), int(maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    n = w * h * np.dtype(dtype).itemsize
    return np.frombuffer(data[-n:], dtype=dtype).reshape(h, w)


def line_profile(images, x0, y0, x1, y1):
    """Bilinear samples of each image along a segment, one per pixel of length.

    Returns ``(arc_length, x, y, values)`` where ``values`` has one row per image.
    """
    length = float(np.hypot(x1 - x0, y1 - y0))
    n = max(int(np.ceil(length)) + 1, 2)
    t = np.linspace(0.0, 1.0, n)
    x = x0 + t * (x1 - x0)
    y = y0 + t * (y1 - y0)
    values = [map_coordinates(np.asarray(im, dtype=float), [y, x], order=1, mode="nearest") for im in images]
    return t * length, x, y, np.array(values)


def write_profile_csv(path, names, arc, x, y, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["s", "x", "y", *names])
        for i in range(arc.size):
            writer.writerow([repr(float(arc[i])), repr(float(x[i])), repr(float(y[i]))] + [repr(float(v[i])) for v in values])
