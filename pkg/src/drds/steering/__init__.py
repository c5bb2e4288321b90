from drds.steering.constraints import (
    assemble_chance_constraints,
    assemble_drcvar,
    assemble_terminal,
)
from drds.steering.cost import (
    assemble_dr_cost,
    assemble_nominal_cost,
    dr_cost_blocks,
    worstcase_moments,
    worstcase_quadratic_value,
    xi_matrix,
)
from drds.steering.risk import uniform_risk_split
from drds.steering.solver import (
    build_baseline_program,
    build_drds_program,
    evaluate_policy,
    solve_baseline_cs,
    solve_drds,
)
from drds.steering.types import (
    CostWeights,
    DrCostBlocks,
    Halfspace,
    PolicyEvaluation,
    Scenario,
    SteeringDiagnostics,
    SteeringResult,
    TerminalTarget,
)
from drds.steering.variables import PolicyVariables, declare_policy_variables

__all__ = [
    "CostWeights",
    "DrCostBlocks",
    "Halfspace",
    "PolicyEvaluation",
    "PolicyVariables",
    "Scenario",
    "SteeringDiagnostics",
    "SteeringResult",
    "TerminalTarget",
    "assemble_chance_constraints",
    "assemble_dr_cost",
    "assemble_drcvar",
    "assemble_nominal_cost",
    "assemble_terminal",
    "build_baseline_program",
    "build_drds_program",
    "declare_policy_variables",
    "dr_cost_blocks",
    "evaluate_policy",
    "solve_baseline_cs",
    "solve_drds",
    "uniform_risk_split",
    "worstcase_moments",
    "worstcase_quadratic_value",
    "xi_matrix",
]
