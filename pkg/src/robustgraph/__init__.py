"""Robust graph learning from noisy data.

Jointly decomposes a data matrix into low-rank and sparse parts while
learning an adaptive-neighbor affinity graph over the samples, then feeds
the graph (or the recovered low-rank data) into spectral clustering,
semisupervised label propagation, and matrix-recovery pipelines.
"""

import os

# Internal parallelism is BLAS-level only; cap it before numpy loads.
if os.environ.get("RGC_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["RGC_THREADS"])

__version__ = "0.1.0"

from .errors import InvalidInputError, NumericalError
from .prox import soft_threshold, solve_spd, svt
from .graph import (
    AffinityGraph,
    DistanceProfile,
    GraphLaplacian,
    average_gamma,
    build_graph,
    laplacian,
    pairwise_sq_dists,
    update_row,
)
from .solver import (
    ConvergenceRecord,
    Mode,
    RgcResult,
    RgcState,
    SolverConfig,
    init_state,
    make_record,
    solve,
    step,
)
from .learning import (
    PartialLabels,
    accuracy,
    hard_labels,
    kmeans,
    lgc_propagate,
    nmi,
    purity,
    spectral_cluster,
)
from .data_io import (
    ImageStack,
    load_graph,
    load_image_stack,
    load_matrix,
    make_synthetic,
    reconstruct_image,
    save_graph,
    save_history,
    save_labels,
    save_matrix,
)

__all__ = [
    "AffinityGraph",
    "ConvergenceRecord",
    "DistanceProfile",
    "GraphLaplacian",
    "ImageStack",
    "InvalidInputError",
    "Mode",
    "NumericalError",
    "PartialLabels",
    "RgcResult",
    "RgcState",
    "SolverConfig",
    "accuracy",
    "average_gamma",
    "build_graph",
    "hard_labels",
    "init_state",
    "kmeans",
    "laplacian",
    "lgc_propagate",
    "load_graph",
    "load_image_stack",
    "load_matrix",
    "make_record",
    "make_synthetic",
    "nmi",
    "pairwise_sq_dists",
    "purity",
    "reconstruct_image",
    "save_graph",
    "save_history",
    "save_labels",
    "save_matrix",
    "soft_threshold",
    "solve",
    "solve_spd",
    "spectral_cluster",
    "step",
    "svt",
    "update_row",
]
