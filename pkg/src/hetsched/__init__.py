"""Energy-aware hard real-time scheduling for two-type heterogeneous
multiprocessors with discrete DVFS levels."""

from .model import (Platform, ProcessorType, TaskSpec, JobInstance, MajorGrid, build_major_grid,
                    eval_power, expand_periodic, hyperperiod, make_job, taskset_stats)
from .partition import (WorkloadPartition, check_feasibility, reduce_intercluster, solve_lp_dvfs,
                        solve_nlp_dvfs)
from .ordering import classify, hetero_wrap, migration_counts, order_partition
from .validate import expand_schedule, validate, energy
from .baselines import solve_gwa_ddiscrete, solve_gwa_nodvfs
from .pipeline import run_algorithm

__all__ = [
    "Platform", "ProcessorType", "TaskSpec", "JobInstance", "MajorGrid", "build_major_grid",
    "eval_power", "expand_periodic", "hyperperiod", "make_job", "taskset_stats",
    "WorkloadPartition", "check_feasibility", "reduce_intercluster", "solve_lp_dvfs",
    "solve_nlp_dvfs", "classify", "hetero_wrap", "migration_counts", "order_partition",
    "expand_schedule", "validate", "energy", "solve_gwa_ddiscrete", "solve_gwa_nodvfs",
    "run_algorithm",
]
