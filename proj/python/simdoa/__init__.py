# SPDX-License-Identifier: Apache-2.0
# Copyright (C) 2026 The simdoa authors
"""Wave-domain 2-D DOA estimation with stacked intelligent metasurfaces."""

from ._core import (
    ArgumentError,
    ConfigError,
    DegenerateInputError,
    IoError,
    PlanarGrid,
    PropagationSet,
    SimdoaError,
    SimGeometry,
    StructuralError,
    UnrealizableAngleError,
    angular_spectrum,
    build_propagation_matrices,
    detection_prob_bound,
    dft_matrix,
    energy_map,
    estimate_doa,
    forward_response,
    gradcheck,
    gradient,
    monte_carlo,
    mse_bound,
    normalized_loss_db,
    optimal_scale,
    physical_angles,
    q_function,
    quantization_floor,
    read_stack,
    steering_vector,
    train,
    write_stack,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
