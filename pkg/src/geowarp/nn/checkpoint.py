"""Parameter checkpoint file format.

Little-endian binary: magic "GWCK", u32 format version, u32 parameter
count, then per parameter: u16 name length, utf-8 name bytes, u8 rank,
u32 dims (rank of them), f32 data in C order.  Round trips are bit-exact
for float32 parameters.
"""

import struct

import numpy as np

MAGIC = b"GWCK"
FORMAT_VERSION = 1


def save_checkpoint(path, params):
    """Write a name -> array mapping (insertion order preserved)."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(params)))
        for name, arr in params.items():
            data = np.ascontiguousarray(arr, dtype="<f4")
            nb = name.encode("utf-8")
            if len(nb) > 0xFFFF:
                raise ValueError("parameter name too long")
            if data.ndim > 0xFF:
                raise ValueError("parameter rank too large")
            fh.write(struct.pack("<H", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<B", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
            fh.write(data.tobytes())


def load_checkpoint(path):
    """Read a checkpoint back into an ordered name -> float32 array dict."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError("not a checkpoint file (bad magic)")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    off = 12
    params = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off:off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<B", blob, off)
        off += 1
        dims = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        n_items = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(blob, dtype="<f4", count=n_items, offset=off)
        off += 4 * n_items
        params[name] = arr.reshape(dims).copy()
    if off != len(blob):
        raise ValueError("trailing bytes in checkpoint file")
    return params
