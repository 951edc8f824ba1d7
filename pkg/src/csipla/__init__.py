"""CSI-based physical-layer authentication with adaptive robust PCA and polar-code reconciliation."""
from .channel import RicianParams, evolve_markov, gen_rician, observe, pearson, to_real
from .harness import ExperimentConfig, MetricsRow, emit_csv, ingest_csi, load_config, run_experiment
from .preprocess import (AdaptiveRobustPCA, AdmmOptions, Decomposition, PCADenoiser, RobustPCA,
                         arpca, enrollment_decompose, pca_denoise, rpca_pcp)
from .quantizer import LloydMaxQuantizer, QuantizerSpec, bmr, gray_encode, lloyd_max_design, quantize_to_blocks
from .polar import PolarSpec, construct, scl_decode
from .reconcile import SideInfo, authenticate, enroll, estimate_crossover

__version__ = "0.1.0"
