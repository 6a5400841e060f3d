# Algorithm systems package
from systems.geometry import (
    build_rotation, compose_projection, projection_coefficients, project, project_points,
    backproject_to_plane, backproject_points, camera_center, decompose_projection,
    ground_homography, horizon_line, vertical_vanishing_point, focal_from_fov,
)
from systems.calibration import (
    Formulation, CalibrationSolution, filter_detections, build_system_literal,
    build_system_vertical, assemble_system, solve_system, calibrate,
)
from systems.ransac import RansacConfig, RansacResult, reprojection_error, ransac_calibrate
from systems.alignment import (
    RigidTransform, SimilarityTransform, CorrespondenceReport,
    fit_rigid, fit_similarity, correspondence_errors, match_positions,
)
from systems.proximity import (
    NearPredicate, ProximityObservation, erf, ground_distance, p_near, log_p_near, composite_probability,
    observe, near_events, locate_records, proximity_pairs, truth_distances,
)
from systems.evaluation import LabeledPair, LabeledSet, RocCurve, label_pairs, roc_auc
from systems.simulate import SceneSpec, SyntheticScene, SceneTruth, generate, export_scene, load_truth
from systems.pose_prior import PosePrediction, parameter_mode, pose_mode
from systems.height_sweep import HeightSweepEntry, run_height_sweep, evaluate_projection
