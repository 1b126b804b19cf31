"""A small stretch / minimality / adaptiveness sweep written as CSV."""

import sys

from georoute.evaluation import ExperimentConfig, run_sweep, write_reports

config = ExperimentConfig(
    mesh_sizes=((4, 4), (8, 8)),
    tree_counts=(1, 2),
    fail_probs=(0.0, 0.05, 0.1),
    master_seed=1,
    min_pairs=5000,
)
write_reports(run_sweep(config), sys.stdout)
