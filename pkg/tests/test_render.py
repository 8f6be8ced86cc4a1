"""Splat renderer tests.

Projection is checked against a finite-difference Jacobian oracle and
closed-form on-axis cases; compositing against hand-computed two-splat
blends; and the image-level properties (order invariance, rigid
invariance, energy bound, depth consistency) directly.
"""

import numpy as np
import pytest

from panoscaffold import (
    FACE_IDS,
    CameraPose,
    Gaussian,
    GaussianScaffold,
    InvalidArgumentError,
    face_intrinsics,
    face_rotations,
    lift_to_scaffold,
    project_gaussian,
    render,
    room_faces,
)
from panoscaffold.render import LOWPASS_PX2, NEAR_CLIP
from panoscaffold.rotation import quat_to_rotmat

from helpers import psnr, random_rotation


def single(center, scale=0.2, opacity=0.99, color=(1.0, 0.0, 0.0), quat=(1, 0, 0, 0)):
    return GaussianScaffold(
        centers=[center],
        opacities=[opacity],
        scales=[[scale] * 3 if np.isscalar(scale) else scale],
        rotations=[quat],
        colors=[list(color)],
    )


def random_scaffold(rng, n, z_range=(0.5, 6.0)):
    centers = rng.normal(size=(n, 3)) * 0.8
    centers[:, 2] = rng.uniform(*z_range, size=n)
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    return GaussianScaffold(
        centers=centers,
        opacities=rng.uniform(0.2, 0.95, size=n),
        scales=rng.uniform(0.02, 0.3, size=(n, 3)),
        rotations=quats,
        colors=rng.uniform(0.0, 1.0, size=(n, 3)),
    )


class TestCameraPose:
    def test_identity(self):
        pose = CameraPose.identity()
        assert np.array_equal(pose.rotation, np.eye(3))
        assert np.array_equal(pose.camera_center, np.zeros(3))

    def test_camera_center_inverts_translation(self):
        rng = np.random.default_rng(0)
        R = random_rotation(rng)
        C = rng.normal(size=3)
        pose = CameraPose(rotation=R, translation=-(R @ C))
        assert np.abs(pose.camera_center - C).max() < 1e-12

    def test_rejects_non_rotation(self):
        with pytest.raises(InvalidArgumentError):
            CameraPose(rotation=np.eye(3) * 1.01, translation=np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            CameraPose(rotation=np.diag([1.0, 1.0, -1.0]), translation=np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            CameraPose(rotation=np.eye(3), translation=[np.nan, 0, 0])


class TestProjectGaussian:
    def test_on_axis_closed_form(self):
        K = face_intrinsics(64, 90.0)
        s = 0.05
        g = Gaussian(
            center=[0, 0, 2.0], opacity=0.9, scale=[s] * 3, rotation=[1, 0, 0, 0],
            color=[0.5, 0.5, 0.5],
        )
        mean2d, cov2d, z = project_gaussian(g, CameraPose.identity(), K)
        assert np.array_equal(mean2d, [K.cx, K.cy])
        assert z == 2.0
        want = (K.focal * s / 2.0) ** 2 + LOWPASS_PX2
        assert np.abs(cov2d - np.diag([want, want])).max() < 1e-12

    def test_behind_camera_is_culled(self):
        K = face_intrinsics(64, 90.0)
        g = Gaussian(
            center=[0, 0, -1.0], opacity=0.9, scale=[0.1] * 3, rotation=[1, 0, 0, 0],
            color=[0.5, 0.5, 0.5],
        )
        assert project_gaussian(g, CameraPose.identity(), K) is None

    def test_near_clip_boundary(self):
        K = face_intrinsics(64, 90.0)
        make = lambda z: Gaussian(
            center=[0, 0, z], opacity=0.9, scale=[0.01] * 3, rotation=[1, 0, 0, 0],
            color=[0.5, 0.5, 0.5],
        )
        assert project_gaussian(make(NEAR_CLIP), CameraPose.identity(), K) is None
        assert project_gaussian(make(NEAR_CLIP + 0.01), CameraPose.identity(), K) is not None

    def test_covariance_matches_finite_difference_jacobian(self):
        """Closed-form cov2d == J_fd Sigma_cam J_fd^T + blur, J_fd by central differences."""
        rng = np.random.default_rng(3)
        K = face_intrinsics(128, 90.0)
        pose = CameraPose(rotation=random_rotation(rng), translation=rng.normal(size=3) * 0.1)
        eps = 1e-6
        for _ in range(20):
            center_cam = np.array(
                [rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(1.0, 5.0)]
            )
            center_cam[0] *= center_cam[2]
            center_cam[1] *= center_cam[2]
            center = pose.rotation.T @ (center_cam - pose.translation)
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            s = rng.uniform(0.01, 0.2, size=3)
            g = Gaussian(
                center=center, opacity=0.5, scale=s, rotation=q, color=[0.5, 0.5, 0.5]
            )
            _, cov2d, _ = project_gaussian(g, pose, K)

            def pi(x):
                return np.array(
                    [K.focal * x[0] / x[2] + K.cx, K.focal * x[1] / x[2] + K.cy]
                )

            J = np.empty((2, 3))
            for a in range(3):
                d = np.zeros(3)
                d[a] = eps
                J[:, a] = (pi(center_cam + d) - pi(center_cam - d)) / (2 * eps)
            rq = quat_to_rotmat(q)
            sigma_cam = pose.rotation @ (rq @ np.diag(s**2) @ rq.T) @ pose.rotation.T
            want = J @ sigma_cam @ J.T + LOWPASS_PX2 * np.eye(2)
            assert np.abs(cov2d - want).max() / np.abs(want).max() < 1e-4

    def test_eigenvalues_at_least_blur(self):
        rng = np.random.default_rng(4)
        K = face_intrinsics(64, 90.0)
        for _ in range(50):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            g = Gaussian(
                center=[rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 4)],
                opacity=0.5,
                scale=rng.uniform(1e-4, 0.2, size=3),
                rotation=q,
                color=[0.5, 0.5, 0.5],
            )
            out = project_gaussian(g, CameraPose.identity(), K)
            evals = np.linalg.eigvalsh(out[1])
            assert evals.min() >= LOWPASS_PX2 - 1e-12


class TestRenderBasics:
    def test_empty_scaffold_renders_nothing(self):
        K = face_intrinsics(32, 90.0)
        sc = GaussianScaffold(
            centers=np.zeros((0, 3)), opacities=np.zeros(0), scales=np.zeros((0, 3)),
            rotations=np.zeros((0, 4)), colors=np.zeros((0, 3)),
        )
        v = render(sc, CameraPose.identity(), K)
        assert not v.color.any() and not v.alpha.any() and not v.depth.any()

    def test_all_behind_camera_renders_nothing(self):
        K = face_intrinsics(32, 90.0)
        v = render(single([0, 0, -2.0]), CameraPose.identity(), K)
        assert not v.alpha.any()

    def test_single_opaque_red_gaussian(self):
        K = face_intrinsics(64, 90.0)
        v = render(single([0, 0, 2.0], scale=0.2, opacity=0.99), CameraPose.identity(), K)
        cy, cx = 32, 32
        assert v.alpha[cy, cx] >= 0.9
        assert v.color[cy, cx, 0] > 0.9 * v.alpha[cy, cx]
        assert v.color[cy, cx, 1] == 0 and v.color[cy, cx, 2] == 0
        assert abs(v.depth[cy, cx] - 2.0) <= 0.01

    def test_output_shapes_follow_explicit_size(self):
        K = face_intrinsics(64, 90.0)
        v = render(single([0, 0, 2.0]), CameraPose.identity(), K, width=48, height=24)
        assert v.color.shape == (24, 48, 3)
        assert v.alpha.shape == (24, 48)

    def test_rejects_empty_image(self):
        K = face_intrinsics(64, 90.0)
        with pytest.raises(InvalidArgumentError):
            render(single([0, 0, 2.0]), CameraPose.identity(), K, width=0, height=4)

    def test_two_splat_compositing_closed_form(self):
        """Means placed exactly on a pixel center make exp(0)=1, so the
        composite reduces to a1*c1 + (1-a1)*a2*c2 in closed form."""
        K = face_intrinsics(64, 90.0)
        # pixel (32,32) has center (32.5, 32.5); mean2d = f*x/z + 32
        z1, z2 = 2.0, 4.0
        x1 = 0.5 * z1 / K.focal
        x2 = 0.5 * z2 / K.focal
        sc = GaussianScaffold(
            centers=[[x1, x1, z1], [x2, x2, z2]],
            opacities=[0.6, 0.5],
            scales=[[0.5] * 3, [1.0] * 3],
            rotations=[[1, 0, 0, 0]] * 2,
            colors=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        )
        v = render(sc, CameraPose.identity(), K)
        a1, a2 = 0.6, 0.5
        assert abs(v.color[32, 32, 0] - a1) < 1e-12
        assert abs(v.color[32, 32, 1] - (1 - a1) * a2) < 1e-12
        assert abs(v.alpha[32, 32] - (a1 + (1 - a1) * a2)) < 1e-12
        want_depth = (a1 * z1 + (1 - a1) * a2 * z2) / (a1 + (1 - a1) * a2)
        assert abs(v.depth[32, 32] - want_depth) < 1e-12

    def test_contribution_clamp(self):
        K = face_intrinsics(64, 90.0)
        z = 2.0
        x = 0.5 * z / K.focal
        sc = GaussianScaffold(
            centers=[[x, x, z]], opacities=[1.0], scales=[[1.0] * 3],
            rotations=[[1, 0, 0, 0]], colors=[[1.0, 1.0, 1.0]],
        )
        v = render(sc, CameraPose.identity(), K)
        assert v.alpha[32, 32] == 0.99

    def test_depth_zero_where_uncovered(self):
        K = face_intrinsics(64, 90.0)
        v = render(single([0, 0, 2.0], scale=0.05), CameraPose.identity(), K)
        assert v.depth[v.alpha == 0].max(initial=0.0) == 0.0


class TestRenderProperties:
    def test_energy_bound_under_heavy_stacking(self):
        K = face_intrinsics(32, 90.0)
        n = 120
        rng = np.random.default_rng(5)
        sc = GaussianScaffold(
            centers=[[0, 0, 1.0 + 0.001 * i] for i in range(n)],
            opacities=np.full(n, 0.35),
            scales=np.full((n, 3), 0.5),
            rotations=np.tile([1.0, 0, 0, 0], (n, 1)),
            colors=rng.uniform(0, 1, size=(n, 3)),
        )
        v = render(sc, CameraPose.identity(), K)
        assert v.alpha.max() <= 1.0
        assert np.all(v.color <= v.alpha[:, :, None])

    def test_order_invariance(self):
        rng = np.random.default_rng(6)
        K = face_intrinsics(64, 90.0)
        sc = random_scaffold(rng, 400)
        perm = rng.permutation(len(sc))
        shuffled = GaussianScaffold(
            centers=sc.centers[perm], opacities=sc.opacities[perm], scales=sc.scales[perm],
            rotations=sc.rotations[perm], colors=sc.colors[perm],
        )
        a = render(sc, CameraPose.identity(), K)
        b = render(shuffled, CameraPose.identity(), K)
        assert np.abs(a.color - b.color).max() < 1e-6
        assert np.abs(a.alpha - b.alpha).max() < 1e-6
        assert np.abs(a.depth - b.depth).max() < 1e-6

    def test_determinism_across_runs(self):
        rng = np.random.default_rng(7)
        K = face_intrinsics(64, 90.0)
        sc = random_scaffold(rng, 300)
        pose = CameraPose(rotation=random_rotation(rng), translation=rng.normal(size=3) * 0.1)
        a = render(sc, pose, K)
        b = render(sc, pose, K)
        assert np.array_equal(a.color, b.color)
        assert np.array_equal(a.alpha, b.alpha)
        assert np.array_equal(a.depth, b.depth)

    def test_rigid_invariance(self):
        """Moving the world and compensating the camera changes nothing."""
        from panoscaffold import transform_rigid

        rng = np.random.default_rng(8)
        K = face_intrinsics(64, 90.0)
        rgb, depth = room_faces(32, 95.0)
        sc = lift_to_scaffold(rgb, depth)
        pose = CameraPose(rotation=random_rotation(rng), translation=rng.normal(size=3) * 0.3)
        G = random_rotation(rng)
        t = rng.normal(size=3) * 2.0
        moved = transform_rigid(sc, G, t)
        R2 = pose.rotation @ G.T
        pose2 = CameraPose(rotation=R2, translation=pose.translation - R2 @ t)
        a = render(sc, pose, K)
        b = render(moved, pose2, K)
        assert np.abs(a.color - b.color).max() < 1e-6
        assert np.abs(a.alpha - b.alpha).max() < 1e-6
        assert np.abs(a.depth - b.depth).max() < 1e-6

    @pytest.mark.parametrize("z", [0.5, 2.0, 20.0, 100.0])
    def test_depth_consistency_at_peak(self, z):
        K = face_intrinsics(64, 90.0)
        v = render(single([0, 0, z], scale=0.01 * z), CameraPose.identity(), K)
        peak = np.unravel_index(np.argmax(v.alpha), v.alpha.shape)
        assert abs(v.depth[peak] - z) / z < 0.01

    def test_identity_rerender_of_room(self):
        """Each 90-degree anchor face is ground truth for its own camera."""
        rgb, depth = room_faces(128, 90.0)
        sc = lift_to_scaffold(rgb, depth)
        for idx, fr in enumerate(face_rotations()):
            pose = CameraPose(rotation=fr.rotation.T, translation=np.zeros(3))
            v = render(sc, pose, rgb.intrinsics)
            m = v.alpha > 0.5
            assert m.mean() > 0.99, FACE_IDS[idx]
            assert psnr(v.color[m], rgb.faces[idx][m]) >= 30.0, FACE_IDS[idx]

    def test_camera_behind_scaffold_sees_nothing(self):
        K = face_intrinsics(32, 90.0)
        pose = CameraPose(
            rotation=np.diag([-1.0, 1.0, -1.0]), translation=np.zeros(3)
        )  # turned 180 degrees
        v = render(single([0, 0, 2.0], scale=0.05), pose, K)
        assert not v.alpha.any()


class TestThreadEnvironment:
    def test_invalid_thread_spec_rejected(self, monkeypatch):
        monkeypatch.setenv("O2S_THREADS", "lots")
        K = face_intrinsics(16, 90.0)
        with pytest.raises(InvalidArgumentError):
            render(single([0, 0, 2.0]), CameraPose.identity(), K)
        monkeypatch.setenv("O2S_THREADS", "-2")
        with pytest.raises(InvalidArgumentError):
            render(single([0, 0, 2.0]), CameraPose.identity(), K)

    def test_explicit_thread_count_runs(self, monkeypatch):
        monkeypatch.setenv("O2S_THREADS", "1")
        K = face_intrinsics(16, 90.0)
        v = render(single([0, 0, 2.0]), CameraPose.identity(), K)
        assert v.alpha.any()

    def test_all_cores_request_runs(self, monkeypatch):
        monkeypatch.setenv("O2S_THREADS", "0")
        K = face_intrinsics(16, 90.0)
        v = render(single([0, 0, 2.0]), CameraPose.identity(), K)
        assert v.alpha.any()
