"""Weakly supervised segmentation numerics.

Thin Python layer over the C++ core: bilateral kernel filtering (exact and
permutohedral-lattice), neighborhood-consensus distributions and losses, the
entropy-maximizing label prior, mean-field inference on pairwise CRFs, a
small hand-backpropagated FCN, synthetic scenes and PPM/PGM I/O.

Conventions: images are (height, width, 3) uint8 arrays, masks are
(height, width) uint8 arrays with 0 = background, and per-pixel fields
(logits, distributions) are (height, width, channels) float64 arrays.
"""

from ._weakseg import (
    KernelParams,
    TinyFcn,
    apply_prior,
    default_config_toml,
    entropy,
    exponentiated_weighted_mean,
    filter_exact,
    filter_fast,
    generate_dataset,
    generate_scene,
    kernel_value,
    kl_divergence,
    meanfield_fixed_point,
    meanfield_step,
    miou,
    neighborhood_loss,
    potential_equivalence_check,
    read_dataset,
    read_pgm,
    read_ppm,
    run_verify_suite,
    softmax,
    solve_prior,
    total_loss,
    weighted_mean,
    write_pgm,
    write_ppm,
)

__all__ = [
    "KernelParams",
    "TinyFcn",
    "apply_prior",
    "default_config_toml",
    "entropy",
    "exponentiated_weighted_mean",
    "filter_exact",
    "filter_fast",
    "generate_dataset",
    "generate_scene",
    "kernel_value",
    "kl_divergence",
    "meanfield_fixed_point",
    "meanfield_step",
    "miou",
    "neighborhood_loss",
    "potential_equivalence_check",
    "read_dataset",
    "read_pgm",
    "read_ppm",
    "run_verify_suite",
    "softmax",
    "solve_prior",
    "total_loss",
    "weighted_mean",
    "write_pgm",
    "write_ppm",
]

__version__ = "0.1.0"
