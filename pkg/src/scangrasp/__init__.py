"""Object shape reconstruction from four laser scan lines, with aiming cues and grasp control."""

from scangrasp.control import (
    ControlState,
    ProportionalCommand,
    ProsthesisConfig,
    TrialConfig,
    TrialTrace,
    UserEvent,
    grasp_config,
    run_trial,
    transition,
)
from scangrasp.ellipse import distance_to_ellipse, fit_conic_direct
from scangrasp.errors import (
    AmbiguousShapeError,
    DegenerateInputError,
    FitFailure,
    InsufficientInputError,
    NoPrincipalDirectionError,
    ScanGraspError,
)
from scangrasp.feedback import (
    Directional,
    Locked,
    NoObject,
    feedback_step,
    project_xy,
    quickhull,
    shortest_vector_to_hull,
    tactor_amplitudes,
)
from scangrasp.geometry import Cuboid, Cylinder, Ellipse3, Sphere, scan_planes
from scangrasp.harness import ExperimentSpec, MetricsReport, run_experiment, run_trajectory_suite
from scangrasp.reconstruct import ReconConfig, classify, principal_direction, reconstruct
from scangrasp.sac import SacConfig, fit_all_kinds, ransac_fit
from scangrasp.scan_sim import Scene, SceneObject, SensorPose, load_scene, simulate_scans

__version__ = "0.1.0"

__all__ = [
    "AmbiguousShapeError",
    "ControlState",
    "Cuboid",
    "Cylinder",
    "DegenerateInputError",
    "Directional",
    "Ellipse3",
    "ExperimentSpec",
    "FitFailure",
    "InsufficientInputError",
    "Locked",
    "MetricsReport",
    "NoObject",
    "NoPrincipalDirectionError",
    "ProportionalCommand",
    "ProsthesisConfig",
    "ReconConfig",
    "SacConfig",
    "ScanGraspError",
    "Scene",
    "SceneObject",
    "SensorPose",
    "Sphere",
    "TrialConfig",
    "TrialTrace",
    "UserEvent",
    "__version__",
    "classify",
    "distance_to_ellipse",
    "feedback_step",
    "fit_all_kinds",
    "fit_conic_direct",
    "grasp_config",
    "load_scene",
    "principal_direction",
    "project_xy",
    "quickhull",
    "ransac_fit",
    "reconstruct",
    "run_experiment",
    "run_trajectory_suite",
    "scan_planes",
    "shortest_vector_to_hull",
    "simulate_scans",
    "tactor_amplitudes",
    "transition",
]
