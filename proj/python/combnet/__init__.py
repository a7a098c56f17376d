"""Learned-delay feedback comb filter bank with fused envelope detection."""

from ._combnet import (
    comb_layer_forward,
    continuous_delay,
    count_costs,
    discretize_for_inference,
    evaluate_f1,
    generate_dataset,
    iir_comb,
    init_w,
    interp_comb_wholekernel,
    magnitude_response,
    scale_to_f0,
    scale_to_f0_gradient,
    sparse_comb,
    train,
)

__all__ = [
    "comb_layer_forward",
    "continuous_delay",
    "count_costs",
    "discretize_for_inference",
    "evaluate_f1",
    "generate_dataset",
    "iir_comb",
    "init_w",
    "interp_comb_wholekernel",
    "magnitude_response",
    "scale_to_f0",
    "scale_to_f0_gradient",
    "sparse_comb",
    "train",
]
