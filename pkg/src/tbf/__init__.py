"""Triple-beam fingerprint engine for massive MIMO-OFDM localization.

Synthesizes multipath channels, projects them into the angle-delay-
Doppler beam domain, computes power-tensor fingerprints, verifies the
concentration and collinearity properties numerically, builds
persistent fingerprint datasets, and evaluates a WKNN baseline.
"""

from .analysis import (
    CollinearityReport,
    ConcentrationReport,
    Theorem1Prediction,
    collinearity,
    concentration_sweep,
    dirichlet,
    grid_coords,
    lemma4_check,
    lemma5_check,
    path_from_grid_coords,
    theorem1_check,
    theorem1_indices,
    theorem2_check,
)
from .baseline import (
    EvalReport,
    FingerprintDatabase,
    OrientationReport,
    eval_localization,
    eval_orientation,
    wknn_locate,
)
from .beamspace import (
    ExtensionPair,
    TransformSet,
    extensions,
    mode_product,
    rank1_to_tb,
    sft_to_tb,
    steering_to_tb_factors,
    tb_to_sft,
    transform_matrices,
)
from .channel import (
    ArrayGeometry,
    MultipathSet,
    OfdmConfig,
    PathParams,
    Rank1Sft,
    SteeringSet,
    assemble_sft,
    draw_gains,
    path_tensor,
    steering_vectors,
)
from .fingerprint import (
    Tbf,
    add_awgn,
    sftf_inner_closed,
    sftf_small,
    sftf_trace,
    tbf_exact,
    tbf_monte_carlo,
)
from .preprocess import PreprocessedInputs, angle_delay, doppler, mask, preprocess
from .scene import (
    FingerprintRecord,
    Scene,
    UtState,
    build_dataset,
    build_scene,
    direction_class,
    grid_positions,
    multipath_for,
    paired_positions,
    snap_multipath,
)
from .store import read_manifest, read_tensor, write_manifest, write_tensor

__version__ = "0.1.0"
