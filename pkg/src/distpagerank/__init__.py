"""Centralized, randomized and aggregated PageRank computation.

Also includes a multi-agent consensus simulator and the Eigenfactor
journal ranking, which reuse the same damped iteration.
"""

from .aggregation import (AggregatedSystem, Grouping, aggregated_gossip, approximate_pagerank,
                          build_aggregated_system, build_transform, decompose_link_matrix,
                          error_bound_delta, group_by_label_prefix, node_parameters,
                          read_grouping, regroup)
from .consensus import (CommPatternSet, consensus_matrix, consensus_run, globally_reachable,
                        pattern_from_page, per_page_patterns)
from .distributed import (average_link_matrix, distributed_link_matrix, gossip_damping,
                          gossip_run, gossip_trials, m_hat, mse_estimate)
from .eigenfactor import CitationData, cross_citation, eigenfactor, read_citation_csvs
from .exceptions import (DistPageRankError, ParseError, SingularBlockError, UnrepairableError,
                         ValidationError)
from .graph import (SparseColumnMatrix, WebGraph, find_dangling, hyperlink_matrix,
                    parse_edge_list, read_edge_list, repair_dangling)
from .metrics import compare, l1_error, pearson, slope_through_origin, spearman, top_k_overlap
from .pagerank import contraction_check, pagerank_power, teleportation_matrix

__version__ = "0.1.0"
