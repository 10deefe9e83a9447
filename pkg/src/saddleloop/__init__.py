"""Planar saddle-node/saddle separatrix-loop toolkit.

Analytic return maps and regime classification for the three-parameter
unfolding of a heteroclinic loop between a saddle-node and a hyperbolic
saddle, plus a numerical engine (integration, equilibria, invariant
manifolds, connection detection, continuation) for concrete models.
"""
from .expr import ExprError, FieldExpr
from .flow import (Equilibrium, EquilibriumClass, FlowError, PlanarField,
                   Section, SectionCrossing, Trajectory, find_all_equilibria,
                   find_equilibrium, integrate, integrate_to_section)
from .manifolds import (ConnectionSpec, ManifoldError, Separatrix,
                        SplittingMeasurement, compute_separatrix,
                        find_connection, fold_point, locate_saddle_node_loop,
                        polynomial_singular_limit, splitting)
from .models import builtin, load_model, parse_field
from .normalform import (DegeneracyError, DomainError, LoopType, MapOutcome,
                         OutcomeKind, ParameterError, RangeError, Region,
                         RegimeLabel, SectionId, SeparatrixFate,
                         UnfoldingParams, affine_global, classify_loop_type,
                         classify_regime, curve_homoclinic_p2, curve_r1_zero,
                         fixed_points, iterate_oracle, return_map, slice_atlas,
                         sphere_atlas, t12, t34)
from .continuation import (BifurcationBranch, BifurcationEvent, CycleSample,
                           PeriodicBranch, classify_cycle_end,
                           continue_equilibria, merged_events, track_periodic)

__version__ = "0.1.0"
