"""
PageRank on a six-page web
==========================

Repair, rank, and aggregate the bundled six-page example.
"""

import numpy as np

from distpagerank.aggregation import approximate_pagerank, build_aggregated_system, read_grouping
from distpagerank.cli import fixture_path
from distpagerank.graph import find_dangling, hyperlink_matrix, read_edge_list, repair_dangling
from distpagerank.metrics import compare
from distpagerank.pagerank import pagerank_power, teleportation_matrix

np.set_printoptions(precision=4, suppress=True)

# page 5 has no outlinks before repair
raw = read_edge_list(fixture_path("six_page_dangling.txt"))
print("dangling pages:", sorted(p + 1 for p in find_dangling(raw)))
fixed = repair_dangling(raw)
print("links added:", sorted((i + 1, j + 1) for i, j in fixed.edges - raw.edges))

# the bundled repaired web keeps only the 5 -> 6 back link
g = read_edge_list(fixture_path("six_page.txt"))
A = hyperlink_matrix(g)
print("A =\n", A.toarray())
print("M =\n", teleportation_matrix(A, 0.15))

x_star, report = pagerank_power(A, 0.15, tol=1e-10)
print(f"x* = {x_star}  ({report.iterations} iterations)")

# three groups: {1, 2}, {3}, {4, 5, 6}
grouping = read_grouping(fixture_path("six_groups.txt"), 6)
x_prime, agg = approximate_pagerank(build_aggregated_system(A, grouping), 0.15)
print("group totals x~1 =", agg.x1)
print("x' =", x_prime)
print(compare(x_star, x_prime, top_k=3))
