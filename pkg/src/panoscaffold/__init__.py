"""Panoramic 3D scaffolding toolkit.

Equirectangular/cubemap projection with expanded-FoV anchors, bidirectional
cross-face fusion, depth-to-Gaussian scaffold lifting, a deterministic CPU
splat renderer, depth and trajectory metrics, and bit-exact file formats.
"""

from .errors import (
    GeometryMismatchError,
    InvalidArgumentError,
    InvalidDepthError,
    PfmParseError,
    PlyParseError,
    ScaffoldFormatError,
    ScaffoldInvariantError,
    ScaffoldMagicError,
    ScaffoldTruncationError,
    ScaffoldVersionError,
    UncoveredDirectionError,
)
from .fusion import FusionKernel, bidirectional_fuse, convolve_equirect, fusion_residual
from .geometry import (
    FACE_IDS,
    CameraIntrinsics,
    CubemapFaceSet,
    DepthFaceSet,
    EquirectRaster,
    FaceRotation,
    c2e,
    dir_from_equirect,
    e2c,
    equirect_from_dir,
    face_intrinsics,
    face_rotations,
)
from .io import (
    PlyExportResult,
    export_splat_ply,
    import_splat_ply,
    load_png,
    load_trajectory,
    read_pfm,
    read_scaffold,
    save_png,
    save_trajectory,
    write_pfm,
    write_scaffold,
)
from .metrics import (
    DepthEvalMask,
    Trajectory,
    abs_rel,
    align_sim3,
    cam_mc,
    delta_acc,
    rot_err,
    select_memory_frame,
    silog,
    subsample_every,
    trans_err,
)
from .render import CameraPose, RenderedView, project_gaussian, render
from .rotation import quat_multiply, quat_to_rotmat, rotmat_to_quat
from .scaffold import (
    Gaussian,
    GaussianScaffold,
    LiftParams,
    SourceLayout,
    lift_to_scaffold,
    ray_to_z_depth,
    scaffold_from_pano,
    transform_rigid,
    unproject_pixel,
)
from .synthetic import (
    MOTIONS,
    gradient_pano,
    make_trajectory,
    room_faces,
    room_pano,
    room_ray_depth,
    simple_intrinsics,
    sphere_pano,
)

__version__ = "0.1.0"

__all__ = [
    "FACE_IDS",
    "MOTIONS",
    "CameraIntrinsics",
    "CameraPose",
    "CubemapFaceSet",
    "DepthEvalMask",
    "DepthFaceSet",
    "EquirectRaster",
    "FaceRotation",
    "FusionKernel",
    "Gaussian",
    "GaussianScaffold",
    "GeometryMismatchError",
    "InvalidArgumentError",
    "InvalidDepthError",
    "LiftParams",
    "PfmParseError",
    "PlyExportResult",
    "PlyParseError",
    "RenderedView",
    "ScaffoldFormatError",
    "ScaffoldInvariantError",
    "ScaffoldMagicError",
    "ScaffoldTruncationError",
    "ScaffoldVersionError",
    "SourceLayout",
    "Trajectory",
    "UncoveredDirectionError",
    "abs_rel",
    "align_sim3",
    "bidirectional_fuse",
    "c2e",
    "cam_mc",
    "convolve_equirect",
    "delta_acc",
    "dir_from_equirect",
    "e2c",
    "equirect_from_dir",
    "export_splat_ply",
    "face_intrinsics",
    "face_rotations",
    "fusion_residual",
    "gradient_pano",
    "import_splat_ply",
    "lift_to_scaffold",
    "load_png",
    "load_trajectory",
    "make_trajectory",
    "project_gaussian",
    "quat_multiply",
    "quat_to_rotmat",
    "ray_to_z_depth",
    "read_pfm",
    "read_scaffold",
    "render",
    "room_faces",
    "room_pano",
    "room_ray_depth",
    "rot_err",
    "rotmat_to_quat",
    "save_png",
    "save_trajectory",
    "scaffold_from_pano",
    "select_memory_frame",
    "silog",
    "simple_intrinsics",
    "sphere_pano",
    "subsample_every",
    "trans_err",
    "transform_rigid",
    "unproject_pixel",
    "write_pfm",
    "write_scaffold",
]
