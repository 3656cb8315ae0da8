"""
Consensus on the same six-agent graph
=====================================

Row-stochastic averaging over randomly chosen communication patterns
drives every agent to a common value without time averaging.
"""

import numpy as np

from distpagerank.cli import fixture_path
from distpagerank.consensus import (consensus_matrix, consensus_mse, consensus_run,
                                    globally_reachable, per_page_patterns, static_pattern)
from distpagerank.graph import hyperlink_matrix, read_edge_list

np.set_printoptions(precision=3, suppress=True)
g = read_edge_list(fixture_path("six_page.txt"))
print("globally reachable agent:", globally_reachable(g.n, g.edges))

C = consensus_matrix(static_pattern(g).patterns[0], g.n).toarray()
print("consensus matrix (row sums 1, positive diagonal):\n", C)
print("PageRank link matrix (column sums 1, zero diagonal):\n", hyperlink_matrix(g).toarray())

patterns = per_page_patterns(g)
traces = [consensus_run(patterns, np.eye(g.n)[0], seed, 2000) for seed in range(20)]
mse = consensus_mse(traces)
for k in (0, 10, 100, 1000, 2000):
    print(f"step {k:>5}: ensemble max-squared disagreement {mse[k]:.3e}")
print("agreed value, seed 0:", traces[0].final[0])
