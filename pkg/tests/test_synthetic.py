"""Tests for the analytic scenes and canonical camera paths.

The fixtures are closed-form, so most checks here are algebraic identities
(points land on walls, curves satisfy their implicit equation) rather than
frozen arrays.
"""

import numpy as np
import pytest

from panoscaffold import (
    MOTIONS,
    InvalidArgumentError,
    dir_from_equirect,
    e2c,
    face_rotations,
    gradient_pano,
    make_trajectory,
    room_faces,
    room_pano,
    room_ray_depth,
    simple_intrinsics,
    sphere_pano,
)


class TestRoomRayDepth:
    def test_axis_directions_hit_wall_at_half_size(self):
        axes = np.array(
            [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
            dtype=np.float64,
        )
        assert np.array_equal(room_ray_depth(axes, 2.0), np.full(6, 2.0))
        assert np.array_equal(room_ray_depth(axes, 0.75), np.full(6, 0.75))

    def test_corner_direction(self):
        d = room_ray_depth(np.array([1.0, 1.0, 1.0]), 2.0)
        assert d == pytest.approx(2.0 * np.sqrt(3.0), rel=1e-15)

    def test_input_need_not_be_normalized(self):
        a = room_ray_depth(np.array([0.0, 0.0, 7.0]))
        b = room_ray_depth(np.array([0.0, 0.0, 1.0]))
        assert a == b == 2.0

    def test_rejects_nonpositive_half_size(self):
        with pytest.raises(InvalidArgumentError):
            room_ray_depth(np.array([1.0, 0.0, 0.0]), 0.0)


class TestRoomPano:
    def test_shapes(self):
        rgb, depth = room_pano(64)
        assert rgb.data.shape == (32, 64, 3)
        assert depth.data.shape == (32, 64, 1)

    def test_depth_times_max_component_is_half_size(self):
        """Every stored ray distance satisfies t * max|dir| == half_size."""
        _, depth = room_pano(128, half_size=1.5)
        xs = np.arange(128, dtype=np.float64) + 0.5
        ys = np.arange(64, dtype=np.float64) + 0.5
        gx, gy = np.meshgrid(xs, ys)
        theta = (gx / 128) * 2 * np.pi - np.pi
        phi = np.pi / 2 - (gy / 64) * np.pi
        dirs = dir_from_equirect(theta, phi)
        recovered = depth.data[:, :, 0] * np.max(np.abs(dirs), axis=-1)
        assert np.abs(recovered - 1.5).max() < 1e-12

    def test_colors_stay_inside_unit_interval(self):
        rgb, _ = room_pano(256)
        assert rgb.data.min() > 0.0
        assert rgb.data.max() < 1.0

    def test_depth_range(self):
        _, depth = room_pano(128)
        assert depth.data.min() >= 2.0 - 1e-12
        assert depth.data.max() <= 2.0 * np.sqrt(3.0) + 1e-12

    def test_rejects_odd_or_tiny_width(self):
        with pytest.raises(InvalidArgumentError):
            room_pano(63)
        with pytest.raises(InvalidArgumentError):
            room_pano(2)


class TestRoomFaces:
    def test_facing_wall_depth_is_exactly_constant(self):
        """Wherever a pixel ray still hits the wall the face looks at, the
        z-depth equals half_size exactly (the wall is axis-perpendicular)."""
        _, depth = room_faces(16, 95.0)
        K = depth.intrinsics
        xs = (np.arange(16) + 0.5 - K.cx) / K.focal
        gx, gy = np.meshgrid(xs, xs)
        facing = (np.abs(gx) < 1.0) & (np.abs(gy) < 1.0)
        assert facing.sum() > 100  # most of the face at 95 degrees
        for idx in range(6):
            assert np.array_equal(
                depth.faces[idx, :, :, 0][facing], np.full(facing.sum(), 2.0)
            )

    def test_depth_points_land_on_cube_surface(self):
        """Unprojecting every stored z-depth must reach a wall: max|p| == half."""
        _, depth = room_faces(16, 95.0, half_size=2.0)
        K = depth.intrinsics
        xs = (np.arange(16) + 0.5 - K.cx) / K.focal
        ys = (np.arange(16) + 0.5 - K.cy) / K.focal
        gx, gy = np.meshgrid(xs, ys)
        rays = np.stack([gx, gy, np.ones_like(gx)], axis=-1)
        for idx, fr in enumerate(face_rotations()):
            pts = (rays * depth.faces[idx]) @ fr.rotation.T
            wall = np.max(np.abs(pts), axis=-1)
            assert np.abs(wall - 2.0).max() < 1e-12

    def test_matches_resampled_pano(self):
        """Face colors rendered directly agree with resampling the equirect
        scene, and the gap shrinks as the pano gets finer."""
        direct, _ = room_faces(64, 95.0)
        errs = {}
        for width in (512, 1024):
            pano_rgb, _ = room_pano(width)
            resampled = e2c(pano_rgb, 64, 95.0)
            errs[width] = np.abs(resampled.faces - direct.faces).max()
        assert errs[1024] < 1e-3
        assert errs[1024] < 0.7 * errs[512]

    def test_shared_geometry_metadata(self):
        rgb, depth = room_faces(8, 95.0)
        assert rgb.fov_deg == depth.fov_deg == 95.0
        assert rgb.intrinsics == depth.intrinsics
        assert rgb.faces.shape == (6, 8, 8, 3)
        assert depth.faces.shape == (6, 8, 8, 1)


class TestSpherePano:
    def test_depth_is_exactly_constant(self):
        _, depth = sphere_pano(64, radius=3.25)
        assert np.array_equal(depth.data, np.full((32, 64, 1), 3.25))

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(InvalidArgumentError):
            sphere_pano(64, radius=-1.0)


class TestGradientPano:
    def test_same_seed_is_byte_identical(self):
        a_rgb, a_d = gradient_pano(64, seed=5)
        b_rgb, b_d = gradient_pano(64, seed=5)
        assert np.array_equal(a_rgb.data, b_rgb.data)
        assert np.array_equal(a_d.data, b_d.data)

    def test_different_seed_differs(self):
        a_rgb, _ = gradient_pano(64, seed=5)
        b_rgb, _ = gradient_pano(64, seed=6)
        assert not np.array_equal(a_rgb.data, b_rgb.data)

    def test_ranges(self):
        rgb, depth = gradient_pano(128, seed=0)
        assert rgb.data.min() >= 0.15 - 1e-12
        assert rgb.data.max() <= 0.85 + 1e-12
        assert depth.data.min() >= 1.4 - 1e-12
        assert depth.data.max() <= 2.6 + 1e-12


class TestSimpleIntrinsics:
    def test_focal_exact_at_90_degrees(self):
        K = simple_intrinsics(640, 480, 90.0)
        assert K.focal == 320.0
        assert (K.cx, K.cy) == (320.0, 240.0)
        assert (K.width, K.height) == (640, 480)

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidArgumentError):
            simple_intrinsics(0, 480)
        with pytest.raises(InvalidArgumentError):
            simple_intrinsics(640, 480, 180.0)


class TestMakeTrajectory:
    K = simple_intrinsics(64, 64, 90.0)

    def test_linear_motions_translate_along_axis(self):
        expect = {
            "forward": [0.0, 0.0, 1.0],
            "backward": [0.0, 0.0, -1.0],
            "left": [-1.0, 0.0, 0.0],
            "right": [1.0, 0.0, 0.0],
        }
        for motion, axis in expect.items():
            traj = make_trajectory(motion, 5, self.K, extent=2.0)
            assert traj.frames == (0, 1, 2, 3, 4)
            for k, pose in enumerate(traj.poses):
                assert np.array_equal(pose.rotation, np.eye(3))
                want = np.asarray(axis) * (2.0 * k / 4)
                assert np.array_equal(pose.camera_center, want)

    def test_single_frame_sits_at_origin(self):
        traj = make_trajectory("forward", 1, self.K)
        assert np.array_equal(traj.poses[0].translation, np.zeros(3))

    def test_orbit_radius_and_aim(self):
        traj = make_trajectory("orbit", 8, self.K, extent=3.0)
        for pose in traj.poses:
            center = pose.camera_center
            assert center[1] == 0.0
            assert np.linalg.norm(center) == pytest.approx(3.0, rel=1e-15)
            # the world origin must sit on the optical axis at range 3
            origin_in_cam = pose.rotation @ -center
            assert np.abs(origin_in_cam - [0.0, 0.0, 3.0]).max() < 1e-12

    def test_orbit_first_frame_is_identity(self):
        traj = make_trajectory("orbit", 4, self.K, extent=3.0)
        assert np.array_equal(traj.poses[0].rotation, np.eye(3))
        assert np.array_equal(traj.poses[0].camera_center, [0.0, 0.0, -3.0])

    def test_lemniscate_satisfies_curve_equation(self):
        """Centers obey (x^2+z^2)^2 == a^2 (x^2 - z^2) with y == 0."""
        a = 1.6
        traj = make_trajectory("lemniscate", 24, self.K, extent=a)
        for pose in traj.poses:
            x, y, z = pose.camera_center
            assert y == 0.0
            lhs = (x * x + z * z) ** 2
            rhs = a * a * (x * x - z * z)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_lemniscate_heading_matches_numeric_tangent(self):
        """The analytic heading is checked against central differences of the
        curve parameterization itself."""
        a, n = 1.0, 12

        def curve(psi):
            s, c = np.sin(psi), np.cos(psi)
            den = 1.0 + s * s
            return np.array([a * c / den, 0.0, a * s * c / den])

        traj = make_trajectory("lemniscate", n, self.K, extent=a)
        h = 1e-6
        for k, pose in enumerate(traj.poses):
            psi = 2 * np.pi * k / n
            tangent = curve(psi + h) - curve(psi - h)
            tangent /= np.linalg.norm(tangent)
            forward = pose.rotation[2]  # camera +z expressed in world axes
            assert np.abs(forward - tangent).max() < 1e-9

    def test_closed_paths_do_not_repeat_the_start(self):
        for motion in ("orbit", "lemniscate"):
            traj = make_trajectory(motion, 6, self.K)
            first = traj.poses[0].camera_center
            last = traj.poses[-1].camera_center
            assert np.linalg.norm(first - last) > 0.1

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            make_trajectory("spiral", 5, self.K)
        with pytest.raises(InvalidArgumentError):
            make_trajectory("orbit", 0, self.K)
        with pytest.raises(InvalidArgumentError):
            make_trajectory("orbit", 5, self.K, extent=0.0)

    def test_motion_catalog(self):
        assert set(MOTIONS) == {"forward", "backward", "left", "right", "orbit", "lemniscate"}
