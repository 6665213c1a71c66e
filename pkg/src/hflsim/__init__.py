"""hflsim: budget-aware orchestration simulator for hierarchical FL pipelines."""

from .config import (
    AggregationFrequency,
    ChangeItem,
    ChangeKind,
    ChangeSet,
    HflConfiguration,
    apply_change_set,
    calc_best_fit_config,
    diff_configurations,
    validate_configuration,
)
from .cost import (
    CostLedger,
    CostParams,
    change_item_cost,
    change_set_cost,
    final_round,
    ledger_charge,
    per_round_cost,
    post_reconfiguration_cost,
)
from .learning import (
    LinearClassifierLearner,
    ModelVector,
    SyntheticCurveLearner,
    SyntheticCurveParams,
    TrainingParams,
    evaluate_global,
    fedavg,
    run_global_round,
    synthetic_accuracy,
)
from .rva import (
    Decision,
    Orchestrator,
    OrchestratorSettings,
    ProgressTrace,
    RegressionFit,
    RegressionKind,
    ValidationDecision,
    fit_regression,
    predict,
    validate_reconfiguration,
)
from .scenario import Scenario, bundled_scenario_path, load_scenario
from .simevents import Event, LinkCostChanged, NodeJoined, NodeLeft
from .simkit import SimulationRun, StopReason, compare_runs, convergence_check, run_simulation
from .topology import (
    DataProfile,
    NodeSpec,
    Topology,
    add_node,
    link_cost_between,
    remove_node,
)

__version__ = "0.1.0"
