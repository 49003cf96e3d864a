"""Explicit Berry-Esseen bounds for self-normalized sums and Student's statistic."""

from .bounds import (
    BoundReport,
    bound_iid,
    bound_noniid,
    minimize_truncated_bound,
    nagaev_bounds,
    shao_bound,
    student_stat_inverse,
    student_stat_transform,
    triple_bound,
    truncated_bound,
    truncated_shao_bound,
    untruncated_bound,
)
from .constants import (
    ConstantTriple,
    ParameterVector,
    combined_constants,
    optimize_constants,
    published_triple,
    row_constants,
)
from .distributions import DistributionSpec, parse_spec
from .moments import (
    MomentSummary,
    analytic_moments,
    empirical_moments,
    gamma_functionals,
    truncated_moments,
    two_point_moments,
    zero_mean_truncation_find_a,
)
from .verify import (
    SimResult,
    check_bound_holds,
    lemma2_proof_checks,
    prop1_constants,
    prop1_gap,
    simulate_delta,
    tail_ratio_data,
)

__version__ = "0.1.0"
