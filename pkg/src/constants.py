"""
Constants for Vantage.
All configurable defaults in one place for easy tuning.
"""

VERSION = "1.0.0"
TITLE = "Vantage"

# =============================================================================
# NUMERICAL TOLERANCES
# =============================================================================
# Relative singular-value cutoff for rank decisions
RANK_RTOL = 1e-10

# |lambda| below this is a projection through the camera center
PROJECTION_EPS = 1e-12

# Ray/plane denominator below this (relative to ray length) is parallel
HORIZON_EPS = 1e-12

# Systems with a condition number above this get a warning
CONDITION_WARN = 1e8

# Singular-value ratio below which a point set is treated as collinear
COLLINEAR_RTOL = 1e-9

# =============================================================================
# CAMERA
# =============================================================================
# Tilt is measured from nadir, so valid values lie strictly inside (0, 180)
TILT_MIN_DEG = 0.0
TILT_MAX_DEG = 180.0

# Principal point sanity band, as a multiple of the image dimension
PRINCIPAL_POINT_BAND = 4.0

# Base orientation: optical axis along world +Y, image u along +X, image v along -Z
R_OVERHEAD = (
    (1.0, 0.0, 0.0),
    (0.0, 0.0, -1.0),
    (0.0, 1.0, 0.0),
)

# =============================================================================
# PERSON HEIGHTS
# =============================================================================
DEFAULT_AVG_HEIGHT_M = 1.7018
DEFAULT_FOOT_PLANE_M = 0.0

# Average heights swept when judging the height prior
HEIGHT_SWEEP_M = (1.5748, 1.7018, 1.8288)

# Detections with a shorter box are dropped before system assembly
MIN_BOX_HEIGHT_PX = 8.0

# Bin widths for the mode of per-frame pose predictions
POSE_FOCAL_BIN_PX = 10.0
POSE_ANGLE_BIN_DEG = 0.5

# =============================================================================
# CALIBRATION
# =============================================================================
FORMULATION_PAPER_LITERAL = 'paper_literal'
FORMULATION_VERTICAL = 'vertical_constrained'
ALL_FORMULATIONS = [FORMULATION_PAPER_LITERAL, FORMULATION_VERTICAL]
DEFAULT_FORMULATION = FORMULATION_VERTICAL

# =============================================================================
# RANSAC
# =============================================================================
RANSAC_THRESHOLD_PX = 5.0
RANSAC_ITERATIONS = 500
RANSAC_SAMPLE_SIZE = 2
RANSAC_MIN_INLIERS = 4
RANSAC_SEED = 0
RANSAC_CONFIDENCE = 0.99
RANSAC_MAX_REFIT_ROUNDS = 10

# =============================================================================
# PROXIMITY
# =============================================================================
NEAR_THRESHOLD_M = 4.0
NEAR_SHARPNESS_M = 1.0

# =============================================================================
# EVALUATION
# =============================================================================
GT_THRESHOLD_M = 4.0
ROC_CSV_HEADER = ('fpr', 'tpr')

# =============================================================================
# SIMULATION
# =============================================================================
BOX_MODEL_CENTERS = 'centers'
BOX_MODEL_HULL = 'hull'
ALL_BOX_MODELS = [BOX_MODEL_CENTERS, BOX_MODEL_HULL]

# Box width as a fraction of its pixel height (cosmetic)
BOX_WIDTH_RATIO = 0.4

# Outlier model: implausible heights or feet off the ground plane
OUTLIER_HEIGHT_RANGE_M = (0.5, 3.0)
OUTLIER_FOOT_OFFSET_M = 0.5

# Vehicle boxes are drawn around their ground centroid with this size
VEHICLE_LENGTH_M = 4.5
VEHICLE_HEIGHT_M = 1.5

DEFAULT_IMAGE_SIZE = (1920, 1080)

# =============================================================================
# FILES AND COMMAND LINE
# =============================================================================
OBJECT_CLASS_PERSON = 'person'
OBJECT_CLASS_VEHICLE = 'vehicle'
ALL_OBJECT_CLASSES = [OBJECT_CLASS_PERSON, OBJECT_CLASS_VEHICLE]

STATUS_OK = 'ok'
STATUS_DEGENERATE = 'degenerate'

DETECTIONS_SUFFIX = '.detections.jsonl'
TRUTH_SUFFIX = '.truth.json'
TRUTH_POSITIONS_SUFFIX = '.truth_positions.jsonl'

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_ALGORITHM_ERROR = 3

# Default config merged under every loaded file (camera has no defaults)
DEFAULT_SETTINGS = {
    'heights': {
        'avg_m': DEFAULT_AVG_HEIGHT_M,
        'foot_plane_m': DEFAULT_FOOT_PLANE_M,
    },
    'calibration': {
        'formulation': DEFAULT_FORMULATION,
        'min_box_height_px': MIN_BOX_HEIGHT_PX,
    },
    'ransac': {
        'threshold_px': RANSAC_THRESHOLD_PX,
        'iterations': RANSAC_ITERATIONS,
        'seed': RANSAC_SEED,
        'sample_size': RANSAC_SAMPLE_SIZE,
        'min_inliers': RANSAC_MIN_INLIERS,
        'adaptive': False,
        'confidence': RANSAC_CONFIDENCE,
    },
    'proximity': {
        'tau_m': NEAR_THRESHOLD_M,
        'sharpness_m': NEAR_SHARPNESS_M,
    },
    'eval': {
        'gt_threshold_m': GT_THRESHOLD_M,
    },
}
