"""Random-walk network sampling with multivariate output analysis."""
from ._backend import BACKEND
from .estimators import delta_covariance, delta_jacobian, g_transform, mh_mean, srw_ratio_mean
from .features import FeatureSpec, evaluate_h, evaluate_h_star, feature_table
from .graph_core import (
    AttributeTable,
    Graph,
    NodeStats,
    generate_er,
    largest_connected_component,
    load_attributes,
    load_edge_list,
    node_stats,
)
from .mcse import (
    BatchRule,
    RegionSpec,
    batch_means_covariance,
    chi2_quantile,
    confidence_volume,
    hotelling_t2_quantile,
    min_ess,
    multivariate_ess,
    region_contains,
    sample_covariance,
)
from .oracle import ar1_chain, exact_means, srw_stationary
from .stopping import StoppingConfig, TerminationReport, check_stop, run_until_stop
from .walkers import WalkKind, make_rng, mh_step, random_start, run_walk, srw_step

__version__ = "0.1.0"
