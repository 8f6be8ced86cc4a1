"""Persistence: native scaffold format, splat PLY export, PFM, PNG, trajectories.

Everything multi-byte is little-endian regardless of platform, and every
writer is deterministic: identical values produce identical bytes.

Native scaffold layout (all little-endian):
    magic       4 bytes  b"O2SC"
    version     uint16   == 1
    count       uint64   number of Gaussians
    flags       uint16   bit 0: source-layout block present
    [layout]    uint32 face_size, float64 fov_deg, 6 x uint8 face indices
    payload     count x 14 float32:
                [center xyz | quaternion wxyz | scale xyz | opacity | color rgb]
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image

from .errors import (
    InvalidArgumentError,
    PfmParseError,
    PlyParseError,
    ScaffoldInvariantError,
    ScaffoldMagicError,
    ScaffoldTruncationError,
    ScaffoldVersionError,
)
from .geometry import FACE_IDS
from .metrics import Trajectory
from .scaffold import GaussianScaffold, SourceLayout

SCAFFOLD_MAGIC = b"O2SC"
SCAFFOLD_VERSION = 1
_HEADER = struct.Struct("<4sHQH")
_LAYOUT = struct.Struct("<Id6B")
_FLOATS_PER_GAUSSIAN = 14

SH_C0 = 0.28209479177387814
_OPACITY_CLAMP = 1e-6

_PLY_FIELDS = (
    "x", "y", "z",
    "f_dc_0", "f_dc_1", "f_dc_2",
    "opacity",
    "scale_0", "scale_1", "scale_2",
    "rot_0", "rot_1", "rot_2", "rot_3",
)


def _write_bytes(sink, payload: bytes) -> int:
    if isinstance(sink, (str, Path)):
        return Path(sink).write_bytes(payload)
    sink.write(payload)
    return len(payload)


def _read_bytes(source) -> bytes:
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _pack_records(s: GaussianScaffold) -> np.ndarray:
    rec = np.empty((len(s), _FLOATS_PER_GAUSSIAN), dtype="<f4")
    rec[:, 0:3] = s.centers
    rec[:, 3:7] = s.rotations
    rec[:, 7:10] = s.scales
    rec[:, 10] = s.opacities
    rec[:, 11:14] = s.colors
    return rec


def write_scaffold(s: GaussianScaffold, sink) -> int:
    """Serialize a scaffold to the native format; returns bytes written."""
    flags = 0 if s.source_layout is None else 1
    parts = [_HEADER.pack(SCAFFOLD_MAGIC, SCAFFOLD_VERSION, len(s), flags)]
    if s.source_layout is not None:
        layout = s.source_layout
        order = [FACE_IDS.index(f) for f in layout.face_order]
        parts.append(_LAYOUT.pack(layout.face_size, layout.fov_deg, *order))
    parts.append(_pack_records(s).tobytes())
    return _write_bytes(sink, b"".join(parts))


def read_scaffold(source) -> GaussianScaffold:
    """Decode a native scaffold stream; inverse of write_scaffold.

    Quaternions are renormalized in float64 after decoding (float32
    storage cannot hold an exactly unit norm for arbitrary axes); all
    other fields are the upcast stored values. Invariants are enforced.
    """
    blob = _read_bytes(source)
    if len(blob) < _HEADER.size:
        raise ScaffoldTruncationError(_HEADER.size, len(blob), "header")
    magic, version, count, flags = _HEADER.unpack_from(blob, 0)
    if magic != SCAFFOLD_MAGIC:
        raise ScaffoldMagicError(f"bad magic {magic!r}, expected {SCAFFOLD_MAGIC!r}")
    if version != SCAFFOLD_VERSION:
        raise ScaffoldVersionError(f"unsupported version {version}")
    offset = _HEADER.size

    layout = None
    if flags & 1:
        if len(blob) < offset + _LAYOUT.size:
            raise ScaffoldTruncationError(offset + _LAYOUT.size, len(blob), "layout block")
        face_size, fov_deg, *order = _LAYOUT.unpack_from(blob, offset)
        offset += _LAYOUT.size
        if sorted(order) != list(range(6)):
            raise ScaffoldInvariantError(f"layout face order {order} is not a permutation")
        layout = SourceLayout(
            face_size=face_size,
            fov_deg=fov_deg,
            face_order=tuple(FACE_IDS[i] for i in order),
        )

    expected = offset + count * _FLOATS_PER_GAUSSIAN * 4
    if len(blob) != expected:
        raise ScaffoldTruncationError(expected, len(blob), "payload")
    rec = (
        np.frombuffer(blob, dtype="<f4", count=count * _FLOATS_PER_GAUSSIAN, offset=offset)
        .reshape(count, _FLOATS_PER_GAUSSIAN)
        .astype(np.float64)
    )
    quats = rec[:, 3:7]
    norms = np.linalg.norm(quats, axis=1)
    if np.any(norms == 0):
        raise ScaffoldInvariantError("zero quaternion in payload")
    try:
        return GaussianScaffold(
            centers=rec[:, 0:3],
            opacities=rec[:, 10],
            scales=rec[:, 7:10],
            rotations=quats / norms[:, None],
            colors=rec[:, 11:14],
            source_layout=layout,
        )
    except InvalidArgumentError as exc:
        raise ScaffoldInvariantError(str(exc)) from exc


class PlyExportResult(NamedTuple):
    byte_count: int
    clamped_opacities: int


def export_splat_ply(s: GaussianScaffold, sink) -> PlyExportResult:
    """Write the interchange splat PLY (binary little-endian).

    Color is stored as the zeroth-order SH coefficient (c - 0.5)/SH_C0,
    opacity as its logit, scale as its log. Opacities of exactly 0 or 1
    are clamped to [1e-6, 1 - 1e-6]; the count of clamped values is
    returned alongside the byte count.
    """
    header_lines = [
        "ply",
        "format binary_little_endian 1.0",
        f"element vertex {len(s)}",
        *[f"property float {name}" for name in _PLY_FIELDS],
        "end_header",
    ]
    header = ("\n".join(header_lines) + "\n").encode("ascii")

    opacity = s.opacities
    clamped = int(np.count_nonzero((opacity < _OPACITY_CLAMP) | (opacity > 1 - _OPACITY_CLAMP)))
    opacity = np.clip(opacity, _OPACITY_CLAMP, 1 - _OPACITY_CLAMP)

    rec = np.empty((len(s), _FLOATS_PER_GAUSSIAN), dtype="<f4")
    rec[:, 0:3] = s.centers
    rec[:, 3:6] = (s.colors - 0.5) / SH_C0
    rec[:, 6] = np.log(opacity / (1.0 - opacity))
    rec[:, 7:10] = np.log(s.scales)
    rec[:, 10:14] = s.rotations
    n = _write_bytes(sink, header + rec.tobytes())
    return PlyExportResult(byte_count=n, clamped_opacities=clamped)


def import_splat_ply(source) -> GaussianScaffold:
    """Parse a splat PLY back into a scaffold (inverse transforms applied).

    Accepts extra float properties (e.g. normals) and any property order;
    colors are clipped to [0, 1] and quaternions renormalized, since the
    stored encodings cannot represent the invariants exactly.
    """
    blob = _read_bytes(source)
    end = blob.find(b"end_header\n")
    if end < 0:
        raise PlyParseError("missing end_header")
    header = blob[:end].decode("ascii", errors="replace").splitlines()
    body = blob[end + len(b"end_header\n"):]

    if not header or header[0].strip() != "ply":
        raise PlyParseError("not a PLY stream")
    count = None
    names = []
    for line in header[1:]:
        tok = line.split()
        if not tok or tok[0] == "comment":
            continue
        if tok[0] == "format":
            if tok[1] != "binary_little_endian":
                raise PlyParseError(f"unsupported PLY format {tok[1]!r}")
        elif tok[0] == "element":
            if tok[1] != "vertex":
                raise PlyParseError(f"unexpected element {tok[1]!r}")
            count = int(tok[2])
        elif tok[0] == "property":
            if tok[1] != "float":
                raise PlyParseError(f"unsupported property type {tok[1]!r}")
            names.append(tok[2])
    if count is None:
        raise PlyParseError("missing vertex element")
    missing = [f for f in _PLY_FIELDS if f not in names]
    if missing:
        raise PlyParseError(f"missing splat properties: {missing}")
    stride = len(names)
    if len(body) < count * stride * 4:
        raise PlyParseError(
            f"payload holds {len(body)} bytes, need {count * stride * 4}"
        )
    rec = (
        np.frombuffer(body, dtype="<f4", count=count * stride)
        .reshape(count, stride)
        .astype(np.float64)
    )
    col = {name: rec[:, i] for i, name in enumerate(names)}

    quats = np.stack([col[f"rot_{i}"] for i in range(4)], axis=1)
    norms = np.linalg.norm(quats, axis=1)
    if np.any(norms == 0):
        raise PlyParseError("zero quaternion in payload")
    logits = col["opacity"]
    # Branch-stable sigmoid: only ever exponentiates non-positive values.
    pos = logits >= 0
    expl = np.exp(np.where(pos, -logits, logits))
    sigmoid = np.where(pos, 1.0 / (1.0 + expl), expl / (1.0 + expl))
    return GaussianScaffold(
        centers=np.stack([col["x"], col["y"], col["z"]], axis=1),
        opacities=sigmoid,
        scales=np.exp(np.stack([col[f"scale_{i}"] for i in range(3)], axis=1)),
        rotations=quats / norms[:, None],
        colors=np.clip(
            np.stack([col[f"f_dc_{i}"] for i in range(3)], axis=1) * SH_C0 + 0.5, 0.0, 1.0
        ),
    )


def write_pfm(sink, data: np.ndarray) -> int:
    """Write a float raster as PFM (negative scale: little-endian, bottom-up rows)."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim == 2:
        tag = "Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        tag = "PF"
    else:
        raise InvalidArgumentError(f"PFM supports (H, W) or (H, W, 3), got {arr.shape}")
    header = f"{tag}\n{arr.shape[1]} {arr.shape[0]}\n-1.0\n".encode("ascii")
    payload = np.flipud(arr).astype("<f4").tobytes()
    return _write_bytes(sink, header + payload)


def read_pfm(source) -> np.ndarray:
    """Read a PFM raster back as float64, top-down rows."""
    blob = _read_bytes(source)
    parts = blob.split(b"\n", 3)
    if len(parts) < 4:
        raise PfmParseError("incomplete PFM header")
    tag, dims, scale_text, body = parts
    if tag not in (b"Pf", b"PF"):
        raise PfmParseError(f"bad PFM tag {tag!r}")
    channels = 3 if tag == b"PF" else 1
    try:
        width, height = (int(v) for v in dims.split())
        scale = float(scale_text)
    except ValueError as exc:
        raise PfmParseError(f"bad PFM header: {exc}") from exc
    if scale == 0:
        raise PfmParseError("PFM scale must be nonzero")
    dtype = "<f4" if scale < 0 else ">f4"
    n = width * height * channels
    if len(body) < n * 4:
        raise PfmParseError(f"payload holds {len(body)} bytes, need {n * 4}")
    arr = np.frombuffer(body, dtype=dtype, count=n).astype(np.float64)
    arr = arr.reshape(height, width) if channels == 1 else arr.reshape(height, width, 3)
    arr = np.flipud(arr).copy()
    if abs(scale) != 1.0:
        arr *= abs(scale)
    return arr


def save_png(path, data: np.ndarray, bits: int = 8) -> None:
    """Save a [0,1] float raster as PNG; values outside [0,1] are clipped.

    3-channel rasters are 8-bit RGB; 1-channel rasters may be 8- or
    16-bit grayscale.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    arr = np.clip(arr, 0.0, 1.0)
    if arr.ndim == 3 and arr.shape[2] == 3:
        if bits != 8:
            raise InvalidArgumentError("color PNGs are 8-bit")
        img = Image.fromarray(np.round(arr * 255.0).astype(np.uint8))
    elif arr.ndim == 2:
        if bits == 8:
            img = Image.fromarray(np.round(arr * 255.0).astype(np.uint8))
        elif bits == 16:
            img = Image.fromarray(np.round(arr * 65535.0).astype(np.uint16))
        else:
            raise InvalidArgumentError(f"bits must be 8 or 16, got {bits}")
    else:
        raise InvalidArgumentError(f"PNG supports (H, W) or (H, W, 3), got {arr.shape}")
    img.save(path, format="PNG")


def load_png(path) -> np.ndarray:
    """Load a PNG as float64 in [0,1]; RGB stays 3-channel, grayscale 2D."""
    with Image.open(path) as img:
        mode = img.mode
        if mode in ("RGB", "L"):
            return np.asarray(img, dtype=np.float64) / 255.0
        if mode in ("I;16", "I"):
            return np.asarray(img, dtype=np.float64) / 65535.0
        if mode == "RGBA":
            return np.asarray(img, dtype=np.float64)[:, :, :3] / 255.0
        raise InvalidArgumentError(f"unsupported PNG mode {mode!r}")


def save_trajectory(path, traj: Trajectory) -> None:
    Path(path).write_text(traj.to_json() + "\n", encoding="ascii")


def load_trajectory(path) -> Trajectory:
    return Trajectory.from_json(Path(path).read_text(encoding="ascii"))
