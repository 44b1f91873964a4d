"""morbench: a benchmark harness for model order reduction of LTI systems.

The pipeline has five stages: problem registry (``problems``), reduction
methods (``methods``), plan expansion and execution (``driver``), error
measures (``analyzer``), and report generation (``explorer``). The
``morbench`` command line ties them together; the same functionality is
available programmatically through the functions re-exported here.
"""

__version__ = "0.1.0"

from .analyzer import error_system, eval_tf, freq_grid, h2_norm, measure, sample_curves
from .driver import RunPlan, expand_config, load_results, run_plan, save_results
from .exceptions import MorbenchError
from .methods import (
    balance_truncate,
    gramians_emp,
    gramians_sign,
    lyap_sign,
    reduce,
    simulate_impulse,
)
from .model import (
    AlgorithmIsotope,
    BenchmarkProblem,
    EnvInfo,
    LtiSystem,
    MeasureSet,
    ReducedModel,
    RunRecord,
    format_problem_id,
    parse_problem_id,
)
from .problems import is_stable, list_problems, load_problem, read_matrix_market

__all__ = [
    "__version__",
    "AlgorithmIsotope",
    "BenchmarkProblem",
    "EnvInfo",
    "LtiSystem",
    "MeasureSet",
    "MorbenchError",
    "ReducedModel",
    "RunPlan",
    "RunRecord",
    "balance_truncate",
    "error_system",
    "eval_tf",
    "expand_config",
    "format_problem_id",
    "freq_grid",
    "gramians_emp",
    "gramians_sign",
    "h2_norm",
    "is_stable",
    "list_problems",
    "load_problem",
    "load_results",
    "lyap_sign",
    "measure",
    "parse_problem_id",
    "read_matrix_market",
    "reduce",
    "run_plan",
    "sample_curves",
    "save_results",
    "simulate_impulse",
]
