#!/usr/bin/env python3
"""Regenerate shared/project_gaussian_vectors.json.

The file freezes projection cases (gaussian + pose + intrinsics -> mean2d,
cov2d, z, or culled) that every renderer implementation must reproduce.
Values are written with full float64 round-trip precision.
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from panoscaffold import CameraPose, Gaussian, face_intrinsics, project_gaussian
from panoscaffold.rotation import quat_to_rotmat
from panoscaffold.synthetic import simple_intrinsics


def gaussian_case(name, g, pose, K):
    out = project_gaussian(g, pose, K)
    expected = None
    if out is not None:
        mean2d, cov2d, z = out
        expected = {
            "mean2d": [float(v) for v in mean2d],
            "cov2d": [[float(v) for v in row] for row in cov2d],
            "z": float(z),
        }
    return {
        "name": name,
        "gaussian": {
            "center": [float(v) for v in g.center],
            "opacity": float(g.opacity),
            "scale": [float(v) for v in g.scale],
            "rotation": [float(v) for v in g.rotation],
            "color": [float(v) for v in g.color],
        },
        "pose": {
            "rotation": [[float(v) for v in row] for row in pose.rotation],
            "translation": [float(v) for v in pose.translation],
        },
        "intrinsics": {
            "focal": float(K.focal),
            "cx": float(K.cx),
            "cy": float(K.cy),
            "width": int(K.width),
            "height": int(K.height),
        },
        "expected": expected,
    }


def main():
    rng = np.random.default_rng(2024)
    K = simple_intrinsics(640, 480, 72.0)
    K_face = face_intrinsics(512, 95.0)
    identity = CameraPose.identity()

    cases = []

    # closed form: on-axis isotropic gaussian, identity pose
    cases.append(gaussian_case(
        "on-axis-isotropic",
        Gaussian(center=[0.0, 0.0, 2.0], opacity=0.8, scale=[0.1, 0.1, 0.1],
                 rotation=[1.0, 0.0, 0.0, 0.0], color=[0.5, 0.5, 0.5]),
        identity, K,
    ))

    # culling: behind the camera and just inside the near clip
    cases.append(gaussian_case(
        "behind-camera",
        Gaussian(center=[0.0, 0.0, -1.0], opacity=0.5, scale=[0.1, 0.1, 0.1],
                 rotation=[1.0, 0.0, 0.0, 0.0], color=[0.1, 0.2, 0.3]),
        identity, K,
    ))
    cases.append(gaussian_case(
        "at-near-clip",
        Gaussian(center=[0.0, 0.0, 0.05], opacity=0.5, scale=[0.01, 0.01, 0.01],
                 rotation=[1.0, 0.0, 0.0, 0.0], color=[0.1, 0.2, 0.3]),
        identity, K,
    ))

    # off-center anisotropic, axis-aligned
    cases.append(gaussian_case(
        "anisotropic-off-center",
        Gaussian(center=[0.4, -0.3, 3.0], opacity=0.6, scale=[0.02, 0.3, 0.08],
                 rotation=[1.0, 0.0, 0.0, 0.0], color=[0.9, 0.1, 0.4]),
        identity, K,
    ))

    # rotated gaussian under a rotated+translated camera
    q = np.array([0.9, 0.1, -0.3, 0.2])
    q = q / np.linalg.norm(q)
    R_cam = quat_to_rotmat(np.array([[0.8, -0.2, 0.5, 0.1]])
                           / np.linalg.norm([0.8, -0.2, 0.5, 0.1]))[0]
    center_world = R_cam.T @ (np.array([0.3, -0.2, 2.5]) - np.array([0.2, 0.4, -0.1]))
    cases.append(gaussian_case(
        "rotated-gaussian-rotated-camera",
        Gaussian(center=center_world, opacity=0.7, scale=[0.05, 0.15, 0.02],
                 rotation=q, color=[0.2, 0.8, 0.6]),
        CameraPose(rotation=R_cam, translation=np.array([0.2, 0.4, -0.1])), K,
    ))

    # grazing direction: far off-axis, exercises the jacobian frustum clamp
    cases.append(gaussian_case(
        "grazing-frustum-clamp",
        Gaussian(center=[1.9, 0.3, 0.4], opacity=0.9, scale=[0.2, 0.2, 0.2],
                 rotation=[1.0, 0.0, 0.0, 0.0], color=[0.3, 0.3, 0.9]),
        identity, K_face,
    ))

    # seeded random in-frustum cases on both intrinsics
    for i in range(8):
        intr = K if i % 2 == 0 else K_face
        half = 0.5 * (intr.width / 2) / intr.focal
        xy = rng.uniform(-half, half, size=2)
        z = rng.uniform(0.5, 6.0)
        qr = rng.normal(size=4)
        qr /= np.linalg.norm(qr)
        g = Gaussian(
            center=[xy[0] * z, xy[1] * z, z],
            opacity=float(rng.uniform(0.1, 1.0)),
            scale=rng.uniform(0.01, 0.25, size=3),
            rotation=qr,
            color=rng.uniform(size=3),
        )
        cases.append(gaussian_case(f"random-{i}", g, identity, intr))

    doc = {
        "format": "project-gaussian-vectors/1",
        "tolerance": 1e-9,
        "cases": cases,
    }
    out_path = os.path.join(os.path.dirname(__file__), "..", "shared",
                            "project_gaussian_vectors.json")
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(cases)} cases to {out_path}")


if __name__ == "__main__":
    main()
