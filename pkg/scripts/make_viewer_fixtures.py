#!/usr/bin/env python3
"""Regenerate frontend/test/fixtures: a small cube-room scaffold exported
in both on-disk formats, plus its expected field values as JSON so the
browser-side parsers can be checked against ground truth.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from panoscaffold import lift_to_scaffold, room_faces
from panoscaffold.io import export_splat_ply, import_splat_ply, read_scaffold, write_scaffold

FACE_SIZE = 8


def probe_fields(s, indices):
    return [
        {
            "index": i,
            "center": [float(v) for v in s.centers[i]],
            "opacity": float(s.opacities[i]),
            "scale": [float(v) for v in s.scales[i]],
            "rotation": [float(v) for v in s.rotations[i]],
            "color": [float(v) for v in s.colors[i]],
        }
        for i in indices
    ]


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "frontend", "test", "fixtures")
    os.makedirs(out_dir, exist_ok=True)

    rgb, depth = room_faces(FACE_SIZE)
    scaffold = lift_to_scaffold(rgb, depth)

    native_path = os.path.join(out_dir, "room8.o2sc")
    ply_path = os.path.join(out_dir, "room8.ply")
    write_scaffold(scaffold, native_path)
    export_splat_ply(scaffold, ply_path)

    # Probe values are what a reader of each file should decode (the files
    # quantize to float32 and the PLY stores transformed encodings), so
    # they come from re-reading the bytes, not from the in-memory source.
    probe = [0, 1, 37, 191, len(scaffold) - 1]
    from_native = read_scaffold(native_path)
    from_ply = import_splat_ply(ply_path)
    meta = {
        "count": len(scaffold),
        "face_size": FACE_SIZE,
        "fov_deg": scaffold.source_layout.fov_deg,
        "face_order": list(scaffold.source_layout.face_order),
        "native_probes": probe_fields(from_native, probe),
        "ply_probes": probe_fields(from_ply, probe),
    }
    with open(os.path.join(out_dir, "room8_meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(f"wrote room8 fixtures ({len(scaffold)} gaussians) to {out_dir}")


if __name__ == "__main__":
    main()
