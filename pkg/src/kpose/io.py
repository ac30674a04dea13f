"""File formats: binary PGM/PPM images, KPH1 heatmap stacks, pose JSON."""
import json

import numpy as np

from .camera import CameraPose
from .errors import ParseError


def _read_netpbm(path, magic):
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: truncated header")
        tokens.append(data[start:pos])
    if tokens[0] != magic:
        raise ParseError(f"{path}: expected {magic.decode()}, got {tokens[0]!r}")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 is supported")
    pos += 1  # single whitespace byte after maxval
    channels = 3 if magic == b"P6" else 1
    raw = np.frombuffer(data, dtype=np.uint8, count=w * h * channels, offset=pos)
    return raw.reshape((h, w, 3) if channels == 3 else (h, w))


def read_pgm(path):
    """Binary PGM to a bool mask (any nonzero byte is foreground)."""
    return _read_netpbm(path, b"P5") > 0


def write_pgm(path, mask):
    mask = np.asarray(mask)
    h, w = mask.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(np.where(mask > 0, 255, 0).astype(np.uint8).tobytes())


def read_ppm(path):
    return _read_netpbm(path, b"P6").astype(float) / 255.0


def write_ppm(path, image):
    image = np.asarray(image, dtype=float)
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8).tobytes())


def write_kph(path, stack):
    """``KPH1 <N> <w> <h>`` header line, then little-endian float32, channel-major."""
    stack = np.asarray(stack)
    n, h, w = stack.shape
    with open(path, "wb") as fh:
        fh.write(f"KPH1 {n} {w} {h}\n".encode())
        fh.write(stack.astype("<f4").tobytes())


def read_kph(path):
    with open(path, "rb") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != b"KPH1":
            raise ParseError(f"{path}: not a KPH1 file")
        n, w, h = (int(t) for t in header[1:])
        body = fh.read()
    if len(body) != 4 * n * w * h:
        raise ParseError(f"{path}: expected {n * w * h} floats, found {len(body) // 4}")
    return np.frombuffer(body, dtype="<f4").reshape(n, h, w).astype(float)


def save_poses(path, poses):
    with open(path, "w") as fh:
        json.dump([None if p is None else p.to_dict() for p in poses], fh, indent=1)


def load_poses(path):
    with open(path) as fh:
        return [None if d is None else CameraPose.from_dict(d) for d in json.load(fh)]
