"""MRC2014 reader/writer for mode-2 (float32) volumes and image stacks.

Only the fields needed here are interpreted. Extended headers are skipped on
read and never written. Files are written little-endian with machine stamp
``0x44 0x44 0x00 0x00``. Image stacks carry ``ispg = 0``; volumes ``ispg = 1``.
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .containers import ImageStack, Volume

HEADER_BYTES = 1024

HEADER_DTYPE = np.dtype(
    [
        ("nx", "i4"), ("ny", "i4"), ("nz", "i4"),
        ("mode", "i4"),
        ("nxstart", "i4"), ("nystart", "i4"), ("nzstart", "i4"),
        ("mx", "i4"), ("my", "i4"), ("mz", "i4"),
        ("cella", "f4", 3),
        ("cellb", "f4", 3),
        ("mapc", "i4"), ("mapr", "i4"), ("maps", "i4"),
        ("dmin", "f4"), ("dmax", "f4"), ("dmean", "f4"),
        ("ispg", "i4"),
        ("nsymbt", "i4"),
        ("extra1", "V8"),
        ("exttyp", "S4"),
        ("nversion", "i4"),
        ("extra2", "V84"),
        ("origin", "f4", 3),
        ("map", "S4"),
        ("machst", "u1", 4),
        ("rms", "f4"),
        ("nlabl", "i4"),
        ("label", "S80", 10),
    ]
)
assert HEADER_DTYPE.itemsize == HEADER_BYTES

_LABEL = b"hetbench"


class MrcError(ValueError):
    pass


def _byte_order(raw: bytes) -> str:
    if len(raw) < HEADER_BYTES:
        raise MrcError(f"truncated MRC file: {len(raw)} bytes, header needs {HEADER_BYTES}")
    stamp = raw[212]
    if stamp == 0x11:
        return ">"
    if stamp in (0x44, 0x41):
        return "<"
    # no usable stamp: pick the order that gives a sane mode/dimensions
    for order in ("<", ">"):
        h = np.frombuffer(raw[:HEADER_BYTES], dtype=HEADER_DTYPE.newbyteorder(order))[0]
        if 0 <= int(h["mode"]) <= 12 and 0 < int(h["nx"]) < 1 << 20:
            return order
    raise MrcError("cannot determine byte order of MRC header")


def read_header(raw: bytes) -> np.void:
    if len(raw) < HEADER_BYTES:
        raise MrcError(f"truncated MRC file: {len(raw)} bytes, header needs {HEADER_BYTES}")
    order = _byte_order(raw)
    return np.frombuffer(raw[:HEADER_BYTES], dtype=HEADER_DTYPE.newbyteorder(order))[0]


def read_mrc(raw: bytes) -> Volume | ImageStack:
    """Parse MRC bytes into a :class:`Volume` (ispg != 0) or :class:`ImageStack`."""
    h = read_header(raw)
    order = _byte_order(raw)
    mode = int(h["mode"])
    if mode != 2:
        raise MrcError(f"unsupported MRC mode {mode}; only mode 2 (float32) is read")
    nx, ny, nz = int(h["nx"]), int(h["ny"]), int(h["nz"])
    if min(nx, ny, nz) <= 0:
        raise MrcError(f"invalid dimensions {nx} x {ny} x {nz}")
    nsymbt = int(h["nsymbt"])
    if nsymbt < 0:
        raise MrcError(f"invalid extended header size {nsymbt}")
    start = HEADER_BYTES + nsymbt
    nbytes = nx * ny * nz * 4
    if len(raw) < start + nbytes:
        raise MrcError(f"truncated MRC file: expected {start + nbytes} bytes, got {len(raw)}")
    if len(raw) > start + nbytes:
        raise MrcError(f"MRC size mismatch: header declares {start + nbytes} bytes, file has {len(raw)}")
    data = np.frombuffer(raw, dtype=np.dtype("f4").newbyteorder(order), count=nx * ny * nz, offset=start)
    data = data.reshape(nz, ny, nx).astype(np.float64)

    mx = int(h["mx"]) or nx
    pixel_size = float(h["cella"][0]) / mx if h["cella"][0] > 0 else 1.0
    if int(h["ispg"]) == 0:
        if nx != ny:
            raise MrcError(f"image stack must have square images, got {nx} x {ny}")
        return ImageStack(data, pixel_size)
    if not nx == ny == nz:
        raise MrcError(f"volume must be cubic, got {nx} x {ny} x {nz}")
    return Volume(data, pixel_size)


def write_mrc(v: Volume | ImageStack) -> bytes:
    """Serialize to little-endian mode-2 MRC2014 bytes."""
    data = np.ascontiguousarray(v.data, dtype="<f4")
    nz, ny, nx = data.shape
    stack = isinstance(v, ImageStack)
    h = np.zeros((), dtype=HEADER_DTYPE.newbyteorder("<"))
    h["nx"], h["ny"], h["nz"] = nx, ny, nz
    h["mode"] = 2
    h["mx"], h["my"] = nx, ny
    h["mz"] = 1 if stack else nz
    h["cella"] = (nx * v.pixel_size, ny * v.pixel_size, (1 if stack else nz) * v.pixel_size)
    h["cellb"] = (90.0, 90.0, 90.0)
    h["mapc"], h["mapr"], h["maps"] = 1, 2, 3
    h["dmin"], h["dmax"], h["dmean"] = data.min(), data.max(), data.mean(dtype=np.float64)
    h["ispg"] = 0 if stack else 1
    h["exttyp"] = b"MRCO"
    h["nversion"] = 20140
    h["map"] = b"MAP "
    h["machst"] = (0x44, 0x44, 0, 0)
    h["rms"] = data.std(dtype=np.float64)
    h["nlabl"] = 1
    labels = np.zeros(10, dtype="S80")
    labels[0] = _LABEL
    h["label"] = labels
    return h.tobytes() + data.tobytes()


def atomic_write_bytes(path: str | os.PathLike, payload: bytes) -> None:
    """Write via a temp file in the target directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_mrc(path: str | os.PathLike) -> Volume | ImageStack:
    return read_mrc(Path(path).read_bytes())


def save_mrc(path: str | os.PathLike, v: Volume | ImageStack) -> None:
    atomic_write_bytes(path, write_mrc(v))
