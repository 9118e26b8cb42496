"""Zero-shot single-image denoising via cross-frequency consistency.

The package trains a sub-2k-parameter convolutional texture extractor on
the one noisy image it is given: the image is split into frequency
shells, the network is asked to produce mutually consistent texture
estimates across those shells, and the denoised image is reassembled
from the smooth base plus the extracted textures.
"""

from .denoiser import DenoiseResult, TrainConfig, ablate, denoise
from .errors import (
    CfcError,
    ContractError,
    DimensionError,
    DivergenceError,
    FormatError,
    ParameterError,
)
from .freq import (
    DEFAULT_CUTOFFS,
    DEFAULT_REFERENCE_CUTOFFS,
    FrequencyDecomposition,
    GaussianKernel,
    band_pass_ref,
    blur,
    build_kernel,
    decompose,
    gaussian_sigma,
)
from .image import (
    Image,
    image_add,
    image_sub,
    load_image,
    load_raw,
    png_has_alpha,
    save_image,
    save_raw,
)
from .losses import LossBreakdown, LossWeights, cons1_loss, cons2_loss, total_loss, tv_loss
from .metrics import QualityScore, psnr, score, ssim
from .micronet import (
    NetworkParams,
    OptimizerState,
    adam_step,
    backward,
    forward,
    init_optimizer,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .noiselab import (
    DEFAULT_BAND_A,
    DEFAULT_BAND_B,
    NoiseSpec,
    TheoryReport,
    add_noise,
    cross_band_correlation,
    envelope_correlation,
    lfs_residual_curve,
    make_test_chart,
    measure_noise_std,
    theory_report,
)

__version__ = "0.1.0"

__all__ = [
    "CfcError",
    "ContractError",
    "DEFAULT_BAND_A",
    "DEFAULT_BAND_B",
    "DEFAULT_CUTOFFS",
    "DEFAULT_REFERENCE_CUTOFFS",
    "DenoiseResult",
    "DimensionError",
    "DivergenceError",
    "FormatError",
    "FrequencyDecomposition",
    "GaussianKernel",
    "Image",
    "LossBreakdown",
    "LossWeights",
    "NetworkParams",
    "NoiseSpec",
    "OptimizerState",
    "ParameterError",
    "QualityScore",
    "TheoryReport",
    "TrainConfig",
    "ablate",
    "adam_step",
    "add_noise",
    "backward",
    "band_pass_ref",
    "blur",
    "build_kernel",
    "cons1_loss",
    "cons2_loss",
    "cross_band_correlation",
    "decompose",
    "denoise",
    "envelope_correlation",
    "forward",
    "gaussian_sigma",
    "image_add",
    "image_sub",
    "init_optimizer",
    "init_params",
    "lfs_residual_curve",
    "load_checkpoint",
    "load_image",
    "load_raw",
    "make_test_chart",
    "measure_noise_std",
    "png_has_alpha",
    "psnr",
    "score",
    "save_checkpoint",
    "save_image",
    "save_raw",
    "ssim",
    "theory_report",
    "total_loss",
    "tv_loss",
]
