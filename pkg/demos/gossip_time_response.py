"""
Randomized gossip PageRank
==========================

Time averages of the gossip iterates approach PageRank. Writes the mean
error series over 20 seeds to ``gossip_error.csv``.
"""

import csv

import numpy as np

from distpagerank.cli import fixture_path
from distpagerank.distributed import (SIMULTANEOUS, gossip_damping, gossip_trials, m_hat,
                                      summarize_traces)
from distpagerank.graph import hyperlink_matrix, read_edge_list
from distpagerank.pagerank import pagerank_power

A = hyperlink_matrix(read_edge_list(fixture_path("six_page.txt")))
x_star, _ = pagerank_power(A, 0.15, tol=1e-14)
n = A.n
print(f"damping for n={n}: matched {gossip_damping(0.15, n):.5f}, two-sided {m_hat(0.15, n):.5f}")

single = summarize_traces(gossip_trials(A, 0.15, range(20), 100_000, x_star=x_star,
                                        checkpoint_every=1000))
both = summarize_traces(gossip_trials(A, 0.15, range(20), 20_000, mode=SIMULTANEOUS, p=0.2,
                                      x_star=x_star, checkpoint_every=200))

for k in (0, 10, 50, 100):
    print(f"step {single.steps[k]:>6}: mean ||y - x*||_1 = {single.l1_mean[k]:.4f}")
print(f"simultaneous p=0.2, step {both.steps[-1]}: {both.l1_mean[-1]:.4f}")

with open("gossip_error.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["step", "l1_mean", "l1_min", "l1_max"])
    w.writerows(np.column_stack([single.steps, single.l1_mean, single.l1_minimum,
                                 single.l1_maximum]))
