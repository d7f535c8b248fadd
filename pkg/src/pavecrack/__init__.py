"""Pavement crack detection toolkit.

Detects cracks in grayscale road-surface images through a four-stage
pipeline (median filtering, bottom-hat illumination equalization,
local-adaptive binarization, multi-scale sparse tensor voting) and scores
detections against reference masks with Hausdorff-distance metrics.
"""

from .config import ConfigError, PipelineConfig, format_config, load_config, parse_config
from .evaluation import EvalReport, EvaluationError, directed_hausdorff, evaluate, hausdorff, sm_score
from .filtering import Neighborhood, median_filter
from .morphology import (
    StructuringElement,
    binary_spur_prune,
    bottom_hat,
    gray_close,
    gray_dilate,
    gray_erode,
    gray_open,
    remove_small_components,
)
from .pipeline import DetectionResult, run_detect
from .raster import (
    IntegralImage,
    PgmDataError,
    PgmError,
    PgmHeaderError,
    PgmMaxvalError,
    build_integral,
    invert,
    load_mask,
    load_pgm,
    save_pgm,
    window_mean,
    window_mean_map,
)
from .synth import CrackSpec, SceneData, StripeSpec, SyntheticSceneSpec, generate_scene
from .thresholding import SinghParams, otsu_threshold, singh_threshold
from .voting import (
    MultiScaleParams,
    SaliencyMaps,
    TokenField,
    VoteGeometry,
    VotingField,
    build_ball_field,
    build_stick_field,
    decay,
    eigen_decompose,
    multiscale_enhance,
    sparse_vote,
    stick_vote,
)

__version__ = "0.1.0"
