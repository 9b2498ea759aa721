from .formulations import (LPSolution, build_flow_assignment_lp, build_flow_center_lp, post_check,
                           solve_center_lp, solve_cut_lp, solve_flow_lp)
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LPResult, solve_lp

__all__ = [
    "LPSolution", "build_flow_assignment_lp", "build_flow_center_lp", "post_check",
    "solve_center_lp", "solve_cut_lp", "solve_flow_lp", "INFEASIBLE", "OPTIMAL", "UNBOUNDED",
    "LinearProgram", "LPResult", "solve_lp",
]
