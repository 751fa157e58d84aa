"""Simulation lab for direct, representative, and flexible representative democracy.

Voters and candidates hold binary stances on a set of issues.  The lab
elects committees under classic multiwinner rules, lets voters delegate
their per-issue voting power, decides issues three ways (direct majority,
committee majority, weighted committee majority), and measures how well
each system tracks the direct outcome.  Closed-form guarantees and
optimization oracles back the simulations.
"""

from .analysis import (
    IssueScenario,
    ProbabilisticScenario,
    best_committee_exhaustive,
    chernoff_lower_bound,
    expected_mass,
    greedy_coverage,
    majority_guarantee_threshold,
    minority_overturn_threshold,
    no_tie_witness,
    optimal_mass,
)
from .ballots import (
    BallotForm,
    BallotFormError,
    ElectoralBallots,
    agreement_counts,
    derive_approvals,
    derive_ordering,
    derive_weights,
)
from .core import (
    Committee,
    DimensionMismatch,
    IssueProfile,
    IssueTally,
    OutcomeVector,
    agreement,
    apply_flips,
    canonicalize,
    committee_stats,
    coverage_summary,
)
from .decide import (
    DecisionRecord,
    dd_outcome,
    frd_outcome,
    frd_outcome_from_masses,
    rd_outcome,
)
from .delegation import (
    DelegationPlan,
    DelegationScheme,
    SchemeKind,
    WeightMatrix,
    apply_scheme,
    build_plan,
    column_mass,
    default_matrix,
    select_delegators,
    select_delegators_by_side,
)
from .election import (
    BALLOT_FORM,
    RuleKind,
    approval_voting,
    borda,
    chamberlin_courant,
    k_median,
    reweighted_approval_voting,
    run_election,
    single_transferable_vote,
    sortition,
    weighted_rule,
)
from .harness import (
    CellCoord,
    CellResult,
    ExperimentSpec,
    SpecError,
    TrialRecord,
    emit_csv,
    emit_plot,
    figure_preset,
    generate_profiles,
    run_grid,
    run_trial,
)

__version__ = "0.1.0"
