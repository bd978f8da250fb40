"""One-shot federated classification with ECM-compressed probabilistic neural networks."""

from .dataset import (DataError, LabeledDataset, NormalizationParams, PartitionPlan,
                      load_breast_cancer, load_csv, normalize_apply, normalize_fit, partition,
                      select_features_tstat, stratified_split)
from .ecm import Cluster, EcmModel, cluster_label, ecm_fit, ecm_update, normalized_distance
from .federation import (ClientUpdate, FederationConfig, FederationError, FederationReport,
                         broadcast_and_reevaluate, client_update, deserialize_update, meta_cluster,
                         run_one_shot, serialize_update, server_evaluate)
from .pnn import PnnModel, evaluate, pnn_from_clusters, pnn_predict, pnn_score
from .synthmetrics import (QualityReport, auc_from_counts, cs_test, ks_complement,
                           mean_ks_complement, pearson, quality_report)

__version__ = "0.1.0"
