from drds.cli.app import ExitCode, build_parser, run
from drds.cli.oracles import ORACLES, OracleResult, run_oracles
from drds.cli.policy_io import load_policy, write_policy
from drds.cli.report import ReportFormat, RunReport, read_report, write_report
from drds.cli.scenario import (
    ScenarioFile,
    load_scenario,
    parse_scenario,
    scenario_digest,
    scenario_to_dict,
    write_scenario,
)

__all__ = [
    "ORACLES",
    "ExitCode",
    "OracleResult",
    "ReportFormat",
    "RunReport",
    "ScenarioFile",
    "build_parser",
    "load_policy",
    "load_scenario",
    "parse_scenario",
    "read_report",
    "run",
    "run_oracles",
    "scenario_digest",
    "scenario_to_dict",
    "write_policy",
    "write_report",
    "write_scenario",
]
