"""Energy-aware coverage path planning for multirotor UAV fleets."""

from .energy import (WH, EnergyReport, InfeasibleSegmentError, TurnProfile, UavModel,
                     path_energy_fast, path_energy_oracle, segment_energy, turn_properties)
from .geometry import (Cell, ConnectorRouter, GeometryError, NoPathError, Region,
                       bcd_decompose, connector_path, feasible_sweep_edges, rotation_cost,
                       select_best_rotations, split_to_count)
from .mstsp import (CostTuple, MstspInstance, Solution, SolverParams, brute_force_solve,
                    build_instance, grp_initial, solve, tabu_search)
from .planner import Plan, PlanConfig, PlanInfeasibleError, plan
from .sweep import SweepPattern, generate_patterns, sweep_lines

__version__ = "0.1.0"
