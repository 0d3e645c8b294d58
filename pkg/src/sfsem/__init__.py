"""Deterministic interpreter for hierarchical state-machine charts."""

from .chart import (
    Chart,
    comp_lookup,
    make_chart,
    state_lookup,
    validate_chart,
)
from .dynenv import DynEnv, Message, init_env, verify_activation_tree
from .errors import (
    BudgetError,
    EvalError,
    LoadError,
    PathLookupError,
    SemanticError,
    SfsemError,
)
from .evaluate import eval_cond, eval_expr, eval_temporal
from .interp import (
    ALL_RULES,
    DEFAULT_FUEL,
    Interpreter,
    Trace,
    run_chart,
)
from .paths import EMPTY_PATH, Path, ROOT_PATH, lca, parent, path_diff
from .scenario_io import (
    ScenarioFile,
    check_trace,
    emit_trace,
    load_chart,
    load_scenario,
    scenario_problems,
)

__all__ = [
    "ALL_RULES",
    "BudgetError",
    "Chart",
    "DEFAULT_FUEL",
    "DynEnv",
    "EMPTY_PATH",
    "EvalError",
    "Interpreter",
    "LoadError",
    "Message",
    "Path",
    "PathLookupError",
    "ROOT_PATH",
    "ScenarioFile",
    "SemanticError",
    "SfsemError",
    "Trace",
    "check_trace",
    "comp_lookup",
    "emit_trace",
    "eval_cond",
    "eval_expr",
    "eval_temporal",
    "init_env",
    "lca",
    "load_chart",
    "load_scenario",
    "make_chart",
    "parent",
    "path_diff",
    "run_chart",
    "scenario_problems",
    "state_lookup",
    "validate_chart",
    "verify_activation_tree",
]
