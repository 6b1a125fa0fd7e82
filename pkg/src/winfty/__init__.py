"""Worst-case (L-infinity) optimal transport onto a finite target measure.

The source is reduced, at each cost threshold, to a bipartite graph between
target subsets and targets; a plan within the threshold exists exactly when
that graph has a perfect matching. Masses are exact rationals throughout,
so feasibility is decided without floating-point ambiguity.
"""

from .cells import (CellDecomposition, CostTable, cell_of_point, decompose,
                    mask_members, mask_name, mask_of)
from .config import Config, ConfigError, load_config, load_graph_json, parse_config
from .cost import CostError, CostSpec, cost_bounds, cost_matrix, eval_cost
from .graph import (GraphError, Matching, TransportGraph, build_graph,
                    check_perfect, hall_feasible, max_flow_matching)
from .measures import (AtomicSource, GridSource, Instance, MeasureError,
                       Rational, TargetMeasure, as_rational, make_atomic,
                       make_uniform_grid, max_targets, parse_rational)
from .planio import PlanFile, PlanIOError, export_imported, export_plan, import_plan
from .rasters import (RasterError, RenderTarget, mu_point_list, read_pgm,
                      render_all, render_cells, render_map, render_mu_i, write_pgm)
from .reductions import (DichotomyReport, GadgetInstance, ReductionError,
                         build_gadget, epsilon, gadget_points,
                         graph_to_instance, verify_dichotomy)
from .solver import (SolveReport, SolverError, TransportMap, TransportPlan,
                     bisect, decide, exact_threshold, map_from_matching,
                     matching_from_plan, plan_from_matching, solve_exact)

__version__ = "0.1.0"

__all__ = [
    "AtomicSource", "CellDecomposition", "Config", "ConfigError", "CostError",
    "CostSpec", "CostTable", "DichotomyReport", "GadgetInstance", "GraphError",
    "GridSource", "Instance", "Matching", "MeasureError", "PlanFile",
    "PlanIOError", "RasterError", "Rational", "RenderTarget", "SolveReport",
    "SolverError", "TargetMeasure", "TransportGraph", "TransportMap",
    "TransportPlan", "as_rational", "bisect", "build_gadget", "build_graph",
    "cell_of_point", "check_perfect", "cost_bounds", "cost_matrix", "decide",
    "decompose", "epsilon", "eval_cost", "exact_threshold", "export_imported",
    "export_plan", "gadget_points", "graph_to_instance", "hall_feasible",
    "import_plan", "load_config", "load_graph_json", "make_atomic",
    "make_uniform_grid", "map_from_matching", "mask_members", "mask_name",
    "mask_of", "matching_from_plan", "max_flow_matching", "max_targets",
    "mu_point_list", "parse_config", "parse_rational", "plan_from_matching",
    "read_pgm", "render_all", "render_cells", "render_map", "render_mu_i",
    "solve_exact", "verify_dichotomy", "write_pgm",
]
