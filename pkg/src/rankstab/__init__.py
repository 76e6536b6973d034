"""Degree-0 rank invariants of pixel sets under distance, density and fuzzy encodings.

Computes sublevel persistence on 4-adjacency grid graphs, reduces
two-parameter rank invariants to one parameter along half-plane leaves,
samples the multi-parameter matching distance, and checks the stability
bounds relating it to Hausdorff, symmetric-difference and sup distances
between sets.
"""
from .grid_domain import (BinaryGrid, GridGraph, PGMError, adjacency_graph, grid_graph,
                          load_pgm, make_star, save_pgm)
from .set_encodings import (MultiField, ScalarField, centroid, distance_transform, hausdorff,
                            local_density, radial_field, stack, sup_distance,
                            symmetric_difference)
from .persistence import (PersistenceDiagram, RankQuery, rank_from_diagram, rank_oracle_1d,
                          rank_oracle_multi, sublevel_diagram_0)
from .foliation import (AdmissiblePair, LeafPoint, leaf_params, leaf_point_to_query,
                        recover_rank, reduce, sample_admissible_2)
from .matching import dmatch_1d, dmatch_multi_lower_bound, point_cost, scale_diagram
from .harness import (ExperimentReport, perturb_salt_pepper, recovery_sweep,
                      verify_stability_fuzzy, verify_stability_hausdorff,
                      verify_stability_symdiff)

__version__ = "0.1.0"
