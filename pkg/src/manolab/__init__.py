"""manolab: a desk-scale lab for manifold-normalized optimizers.

The package splits into small layers: ``tensor`` (float64 primitives
and a Jacobi SVD), ``manifold`` (unit-slice geometry), ``optimizers``
(Mano, Muon, AdamW, SGD-M, Riemannian SGD-M as pure step functions),
``convergence`` (rate experiments for the momentum-free update),
``training`` (a small MLP harness), ``diagnostics`` (spectra and
geodesic trails), and ``bench`` (FLOP models and timings).
"""

from .bench import (
    BenchResult,
    FlopModel,
    bench_kernels,
    flops_baseline,
    flops_mano,
    flops_newton_schulz,
    overhead_ratio,
)
from .convergence import (
    ConvergenceRun,
    SmoothObjective,
    alignment_check,
    mano_simple_step,
    min_grad_bound,
    quadratic_objective,
    run_convergence_experiment,
    softmax_objective,
)
from .diagnostics import (
    GeodesicTrail,
    SpectrumReport,
    match_singular_vectors,
    spearman_rho,
    spectrum_report,
    trajectory_geodesics,
)
from .manifold import (
    DegenerateSliceError,
    ManifoldSchedule,
    geodesic_oblique,
    geodesic_sphere,
    geodesic_stiefel_approx,
    oblique_normalize,
    rotation_axis,
    sinkhorn_normalize,
    tangent_project,
)
from .optimizers import (
    AdamWConfig,
    ManoConfig,
    MuonConfig,
    OptimizerState,
    adamw_step,
    clip_global_grad_norm,
    cosine_warmup_lr,
    mano_step,
    mano_tensor_step,
    mano_transform,
    muon_step,
    newton_schulz,
    rsgdm_step,
    sgdm_step,
)
from .tensor import (
    AxisVector,
    ShapeMismatchError,
    as_tensor,
    dim_inner,
    dim_norm,
    eltwise_div,
    hadamard,
    jacobi_svd,
    matmul,
    rms,
    svd_values,
)
from .training import (
    Dataset,
    MlpModel,
    TrainConfig,
    Trainer,
    TrainingDiverged,
    TrajectoryRecord,
    grad_stats,
    load_config,
    make_dataset,
    mlp_forward_backward,
    train_run,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AdamWConfig",
    "AxisVector",
    "BenchResult",
    "ConvergenceRun",
    "Dataset",
    "DegenerateSliceError",
    "FlopModel",
    "GeodesicTrail",
    "ManifoldSchedule",
    "ManoConfig",
    "MlpModel",
    "MuonConfig",
    "OptimizerState",
    "ShapeMismatchError",
    "SmoothObjective",
    "SpectrumReport",
    "TrainConfig",
    "Trainer",
    "TrainingDiverged",
    "TrajectoryRecord",
    "adamw_step",
    "alignment_check",
    "as_tensor",
    "bench_kernels",
    "clip_global_grad_norm",
    "cosine_warmup_lr",
    "dim_inner",
    "dim_norm",
    "eltwise_div",
    "flops_baseline",
    "flops_mano",
    "flops_newton_schulz",
    "geodesic_oblique",
    "geodesic_sphere",
    "geodesic_stiefel_approx",
    "grad_stats",
    "hadamard",
    "jacobi_svd",
    "load_config",
    "make_dataset",
    "mano_simple_step",
    "mano_step",
    "mano_tensor_step",
    "mano_transform",
    "matmul",
    "match_singular_vectors",
    "min_grad_bound",
    "mlp_forward_backward",
    "muon_step",
    "newton_schulz",
    "oblique_normalize",
    "overhead_ratio",
    "quadratic_objective",
    "rms",
    "rotation_axis",
    "rsgdm_step",
    "run_convergence_experiment",
    "sgdm_step",
    "sinkhorn_normalize",
    "softmax_objective",
    "spearman_rho",
    "spectrum_report",
    "svd_values",
    "tangent_project",
    "train_run",
    "trajectory_geodesics",
    "write_trajectory_csv",
]
