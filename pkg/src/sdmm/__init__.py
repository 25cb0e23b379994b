"""Trend-aware peer similarity for edge nodes that exchange data synopses."""

from .config import ConfigError, SimConfig
from .discrepancy import DiscrepancyWindow, discrepancy
from .evaluation import delta_metric, gamma_metric, run_experiment, trend_selection_metrics
from .sim import EpochLog, run_simulation
from .similarity import (
    ModelParams,
    PeerSimilarity,
    QuantaCluster,
    SimilarityMap,
    aggregate_discrepancy,
    build_similarity_map,
    cluster_quanta,
    mann_kendall,
    similarity,
    trend_factor,
)
from .synopsis import CFTree, ClusterFeature, Synopsis, alpha_threshold, extract_synopsis
from .traces import Trace, TraceError, load_csv, synth_trace

__version__ = "0.1.0"
