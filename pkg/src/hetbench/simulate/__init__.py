"""Forward model: pose sampling, projection, CTF, noise and metadata I/O."""
from .ctf import CtfParams, apply_ctf, ctf_evaluate, electron_wavelength
from .dataset import (
    ParticleStack,
    SimulationError,
    add_noise_to_snr,
    assign_ctfs,
    dataset_labels,
    replay_image,
    simulate_dataset,
)
from .pose import (
    Pose,
    PoseError,
    euler_to_matrix,
    geodesic_distance_deg,
    matrix_to_euler,
    quaternion_to_matrix,
    sample_pose_uniform,
)
from .project import DEFAULT_OVERSAMPLE, Projector, project
from .star import ParticleMetadata, StarError, parse_star, read_star, write_star
from .tables import format_ctf_table, format_pose_table, read_ctf_table, read_pose_table

__all__ = [
    "CtfParams", "apply_ctf", "ctf_evaluate", "electron_wavelength", "ParticleStack", "SimulationError",
    "add_noise_to_snr", "assign_ctfs", "dataset_labels", "replay_image", "simulate_dataset", "Pose", "PoseError",
    "euler_to_matrix", "geodesic_distance_deg", "matrix_to_euler", "quaternion_to_matrix",
    "sample_pose_uniform", "DEFAULT_OVERSAMPLE", "Projector", "project", "ParticleMetadata", "StarError",
    "parse_star", "read_star", "write_star", "format_ctf_table", "format_pose_table", "read_ctf_table",
    "read_pose_table",
]
