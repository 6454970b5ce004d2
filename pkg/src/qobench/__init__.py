"""Reproducible end-to-end benchmarking harness for query optimizers.

Standardizes workload splitting, DBMS configuration, plan forcing via hints,
hot-cache timing, plan-space enumeration, and statistical comparison, so
competing optimizers can be evaluated under identical, auditable conditions.
"""

__version__ = "0.1.0"

from .workload import Query, QueryId, Workload, load_workload, parse_query_id  # noqa: E402,F401
from .splitter import (  # noqa: E402,F401
    SplitMethod,
    SplitSpec,
    load_split,
    sample_split,
    save_split,
    validate_split,
)
from .hintlang import (  # noqa: E402,F401
    HintSet,
    Join,
    JoinMethod,
    Leaf,
    PlanTree,
    ScanMethod,
    TreeShape,
    classify_shape,
    parse_hints,
    render_hints,
)
from .planspace import (  # noqa: E402,F401
    EnumSpec,
    compare_shape_populations,
    count_join_trees,
    enumerate_join_trees,
    enumerate_physical,
)
from .stats import bootstrap_ci, mann_whitney_u, r_squared, speedup_factor  # noqa: E402,F401
from .dbms import (  # noqa: E402,F401
    ConfigParam,
    ConfigProfile,
    SessionHandle,
    connect,
    default_profile,
    refresh_statistics,
    set_geqo,
    verify_config,
)
from .adapters import AdapterDescriptor, PlanDirective, validate_directive  # noqa: E402,F401
from .measurement import TimingPolicy, TimingRecord, measure_query, successive_diffs  # noqa: E402,F401
from .runner import gen_covariate_script, run_ablation, run_benchmark  # noqa: E402,F401
from .report import aggregate, compare, emit  # noqa: E402,F401
