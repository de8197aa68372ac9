"""kepsim: a deterministic dynamic kidney exchange simulator.

Exchange graphs over patient-donor pairs and altruistic donors, exact
maximum-weight cycle-and-chain packing, fairness-driven weight learning, and
weighted-power-mean group welfare scoring.
"""

from .compat import CompatibilityCache, blood_compatible, build_graph, sample_arc
from .enumeration import (
    EnumerationBudgetExceeded,
    EnumerationLimits,
    enumerate_candidates,
    enumerate_chains,
    enumerate_cycles,
)
from .fairness import (
    GroupProfile,
    WelfareScores,
    ZeroQueueWarning,
    group_utilities,
    power_mean,
    scaled_measure,
    welfare_scores,
)
from .harness import (
    ExperimentConfig,
    ReplicationRow,
    RunReport,
    SweepResult,
    emit_report,
    emit_sweep,
    instance_at_period,
    run_experiment,
    simulate_replication,
    sweep,
)
from .learn import LearningConfig, LearningError, UpdateRule, run_learning, update_weights
from .model import (
    BLOOD_TYPES,
    CPRA_BANDS,
    BloodType,
    Candidate,
    CpraBand,
    ExchangeGraph,
    NdadNode,
    PairNode,
    PairType,
    Selection,
    all_pair_types,
    band_of,
    pair_type_of,
    validate_selection,
)
from .pool import (
    PoolConfig,
    PoolDesyncError,
    QueueComposition,
    WaitingPool,
    WaitLedger,
    population_proportion,
)
from .solver import (
    InstanceTooLarge,
    PackingInstance,
    SolverTimeout,
    brute_force,
    export_instance,
    load_instance,
    parse_instance,
    save_instance,
    solve,
)
from .weights import (
    Scheme,
    WeightTable,
    arc_weight,
    candidate_weight,
    load_weight_table,
    save_weight_table,
)

__version__ = "0.1.0"
