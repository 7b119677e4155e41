"""Exact-arithmetic workbench for torsion-free nilpotent matrix groups:
central series, centralizer structure, and integral-weight verification."""

__version__ = "0.1.0"

from .exact_linear import (DimensionError, IntLattice, LatticeError,
                           RationalNilMatrix, UniMatrix, hnf, integer_kernel,
                           preimage_lattice, snf, solve_integer, unipotent_exp,
                           unipotent_log)
from .weights import (DegenerateWeightError, NotWeightTemplatedError,
                      WeightTable, WeightVector, action_well_defined,
                      extract_weights, pascal_table, template_matrix)
from .semidirect import (NonCommutingActionError, SplitElement, SplitGroup,
                         associativity_probe, build_split_group, sg_root)
from .matrix_model import (Ball, MatrixGroup, ball, center_probe,
                           centralizer_probe, derived_set, direct_product,
                           embed_J, embed_group, in_upper_central,
                           lcs_level_sets, ucs_probe)
from .series import (SeriesReport, UcsLevel, ball_series_report,
                     coinciding_check, lcs, tightness_check_ball,
                     tightness_check_split, ucs_tower)
from .centralizers import (CentralizerDescription, WeightedChain, centralizer,
                           co_centralization_check, co_centralization_sweep,
                           fl_check, fl_check_ball, grun_check, grun_check_ball,
                           logarithm_check, malnormality_check,
                           metabelian_check_ball, metabelian_check_split,
                           verify_weighted_roots)
from .cli import GroupSpec, SpecError, emit_report, parse_spec, run_suite
