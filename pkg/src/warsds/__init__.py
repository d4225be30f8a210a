"""Weighted adaptation regularization with source domain selection.

Closed-form kernel classifiers that transfer labeled data from auxiliary
domains to a new domain with few labels, offline (with an unlabeled pool)
or online (labeled samples only).
"""

from .dataset import (
    NON_TARGET,
    TARGET,
    ClassLabel,
    SourceDomain,
    TargetState,
    WeightAssignment,
    balance_weights,
    build_E,
    source_sample_weights,
    target_sample_weights,
)
from .ensemble import (
    FusedClassifier,
    Mode,
    baseline_arrls,
    baseline_target_only,
    baseline_tl,
    fit_owarsds,
    fit_warsds,
    fuse_predict,
)
from .estimators import FeatureMapTransformer, WARSDSClassifier
from .exceptions import *  # noqa: F401,F403
from .features import (
    FeatureMap,
    PcaBasis,
    SynthConfig,
    minmax_normalize,
    pca_fit,
    pca_transform,
    synth_generate,
)
from .kernel import KernelSpec, cross_kernel, gram_matrix, kernel_row
from .offline import (
    WarHyperParams,
    WarModel,
    build_conditional_mmd,
    build_marginal_mmd,
    fit_war,
    objective_value,
    predict,
    solve_alpha,
)
from .online import OwarModel, build_marginal_mmd_online, fit_owar
from .sds import DomainDistance, class_means, domain_distance, kmeans_1d, select_sources

__version__ = "0.1.0"
