"""SPD-manifold alignment for cross-subject multichannel trials.

Covariance geometry (geodesic distance, tangent-space maps, Log-Euclidean
means), domain whitening and per-class label alignment, CSP and
tangent-space feature pipelines, medoid-based trial selection, and a
reproducible leave-one-subject-out experiment harness.
"""

from .alignment import (
    AlignmentTransform,
    AlignResult,
    ClassMeans,
    LabelMapping,
    align,
    ea_align,
    ea_reference,
    estimate_means_from_medoids,
    la_align,
    la_fit,
    match_labels,
    relabel,
    select_and_estimate_target_means,
)
from .classifiers import (
    LdaModel,
    LinearSvmModel,
    MdmModel,
    lda_fit,
    lda_predict,
    mdm_fit,
    mdm_predict,
    svm_fit,
    svm_predict,
)
from .dataio import (
    DatasetManifest,
    load_manifest,
    read_labels,
    read_trials,
    with_labels,
    write_labels,
    write_manifest,
    write_trials,
)
from .experiment import (
    ExperimentReport,
    ScenarioSpec,
    auc_over_k,
    emit_report,
    fit_predict,
    load_scenario,
    paired_t_test,
    read_report,
    run_scenario,
)
from .features import (
    CspModel,
    FeatureVector,
    csp_features,
    csp_fit,
    trial_covariance,
    ts_features,
)
from .selection import k_medoids, pairwise_distances
from .signal import (
    ContinuousRecording,
    Trial,
    design_fir_bandpass,
    downsample,
    epoch,
    filter_causal,
    resample_linear,
)
from .spd import (
    TangentVector,
    arithmetic_mean_cov,
    log_euclidean_mean,
    riemannian_distance,
    spd_exp,
    spd_from_matrix,
    spd_inv_sqrt,
    spd_log,
    spd_sqrt,
    tangent_map,
    tangent_unmap,
)
from .synth import SynthConfig, SynthDataset, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AlignmentTransform",
    "AlignResult",
    "ClassMeans",
    "ContinuousRecording",
    "CspModel",
    "DatasetManifest",
    "ExperimentReport",
    "FeatureVector",
    "LabelMapping",
    "LdaModel",
    "LinearSvmModel",
    "MdmModel",
    "ScenarioSpec",
    "SynthConfig",
    "SynthDataset",
    "TangentVector",
    "Trial",
    "align",
    "arithmetic_mean_cov",
    "auc_over_k",
    "csp_features",
    "csp_fit",
    "design_fir_bandpass",
    "downsample",
    "ea_align",
    "ea_reference",
    "emit_report",
    "epoch",
    "estimate_means_from_medoids",
    "filter_causal",
    "fit_predict",
    "generate_synthetic",
    "k_medoids",
    "la_align",
    "la_fit",
    "lda_fit",
    "lda_predict",
    "load_manifest",
    "load_scenario",
    "log_euclidean_mean",
    "match_labels",
    "mdm_fit",
    "mdm_predict",
    "paired_t_test",
    "pairwise_distances",
    "read_labels",
    "read_report",
    "read_trials",
    "relabel",
    "resample_linear",
    "riemannian_distance",
    "run_scenario",
    "select_and_estimate_target_means",
    "spd_exp",
    "spd_from_matrix",
    "spd_inv_sqrt",
    "spd_log",
    "spd_sqrt",
    "svm_fit",
    "svm_predict",
    "tangent_map",
    "tangent_unmap",
    "trial_covariance",
    "ts_features",
    "with_labels",
    "write_labels",
    "write_manifest",
    "write_trials",
]
