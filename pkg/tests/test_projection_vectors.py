"""The frozen projection vectors in shared/ must match project_gaussian.

shared/project_gaussian_vectors.json is the cross-implementation contract
for splat projection: any renderer (this package's, or an external one)
must reproduce every case. This test pins the Python side to the file.
"""

import json
from pathlib import Path

import numpy as np

from panoscaffold import CameraIntrinsics, CameraPose, Gaussian, project_gaussian

VECTORS = Path(__file__).resolve().parent.parent / "shared" / "project_gaussian_vectors.json"


def load_doc():
    with open(VECTORS, encoding="utf-8") as fh:
        return json.load(fh)


def close(got, want, tol):
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    return np.all(np.abs(got - want) <= tol * np.maximum(1.0, np.abs(want)))


def test_vector_file_shape():
    doc = load_doc()
    assert doc["format"] == "project-gaussian-vectors/1"
    assert doc["tolerance"] <= 1e-9
    culled = [c for c in doc["cases"] if c["expected"] is None]
    projected = [c for c in doc["cases"] if c["expected"] is not None]
    assert len(culled) >= 2
    assert len(projected) >= 10


def test_every_case_reproduces():
    doc = load_doc()
    tol = doc["tolerance"]
    for case in doc["cases"]:
        g = Gaussian(**case["gaussian"])
        pose = CameraPose(**case["pose"])
        K = CameraIntrinsics(**case["intrinsics"])
        out = project_gaussian(g, pose, K)
        want = case["expected"]
        if want is None:
            assert out is None, f"{case['name']}: expected culled, got {out}"
            continue
        assert out is not None, f"{case['name']}: unexpectedly culled"
        mean2d, cov2d, z = out
        assert close(mean2d, want["mean2d"], tol), f"{case['name']}: mean2d"
        assert close(cov2d, want["cov2d"], tol), f"{case['name']}: cov2d"
        assert close(z, want["z"], tol), f"{case['name']}: z"
        assert cov2d[0, 1] == cov2d[1, 0]
        assert np.linalg.eigvalsh(cov2d).min() > 0


def test_covariance_symmetry_in_file():
    for case in load_doc()["cases"]:
        want = case["expected"]
        if want is None:
            continue
        c = want["cov2d"]
        assert c[0][1] == c[1][0]
