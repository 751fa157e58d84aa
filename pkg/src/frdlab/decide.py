"""Decision rules: direct majority, committee majority, weighted committee majority.

All three produce an OutcomeVector over canonical issues.  Exact ties are
possible only where noted and are resolved by fair coin, flagged in the
outcome.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np

from .core import Committee, DimensionMismatch, IssueProfile, OutcomeVector
from .delegation import WeightMatrix, column_mass

__all__ = [
    "DecisionRecord",
    "dd_outcome",
    "rd_outcome",
    "frd_outcome",
    "frd_outcome_from_masses",
]


@dataclasses.dataclass(frozen=True, eq=False)
class DecisionRecord:
    """An outcome vector plus the per-issue evidence behind it."""

    outcome: OutcomeVector
    majority_mass: tuple[Fraction, ...] | None = None

    @property
    def tie_count(self) -> int:
        return self.outcome.tie_count


def dd_outcome(voters: IssueProfile, rng) -> DecisionRecord:
    """Direct simple majority per issue on a canonicalized profile.

    Every decision is 1 by construction; exact ties (even electorates only)
    are flagged and resolved by fair coin.
    """
    doubled = 2 * voters.prefs.sum(axis=0, dtype=np.int64)
    n = voters.n_agents
    if (doubled < n).any():
        raise ValueError("voter profile must be canonicalized first")
    ties = doubled == n
    decisions = np.ones(voters.n_issues, dtype=np.uint8)
    if ties.any():
        decisions[ties] = rng.random(int(ties.sum())) < 0.5
    return DecisionRecord(OutcomeVector(decisions, ties))


def rd_outcome(committee: Committee, rng=None) -> DecisionRecord:
    """Committee simple majority per issue; odd size means no ties arise."""
    doubled = 2 * committee.member_prefs.sum(axis=0, dtype=np.int64)
    decisions = (doubled > committee.k).astype(np.uint8)
    ties = np.zeros(committee.n_issues, dtype=bool)
    return DecisionRecord(OutcomeVector(decisions, ties))


def frd_outcome_from_masses(masses, n_voters: int, rng) -> DecisionRecord:
    """Weighted majority over exact per-issue masses on side 1.

    An issue passes when its mass exceeds half the electorate; exact halves
    are flagged ties resolved by fair coin.
    """
    half = Fraction(n_voters, 2)
    decisions = np.zeros(len(masses), dtype=np.uint8)
    ties = np.zeros(len(masses), dtype=bool)
    for i, mass in enumerate(masses):
        if mass > half:
            decisions[i] = 1
        elif mass == half:
            ties[i] = True
            decisions[i] = rng.random() < 0.5
    return DecisionRecord(OutcomeVector(decisions, ties), majority_mass=tuple(masses))


def frd_outcome(committee: Committee, weight_matrices, rng) -> DecisionRecord:
    """Weighted committee majority from explicit per-issue weight matrices."""
    matrices: list[WeightMatrix] = list(weight_matrices)
    if len(matrices) != committee.n_issues:
        raise DimensionMismatch("need one weight matrix per issue")
    n_voters = matrices[0].n_voters
    for w in matrices:
        if w.n_voters != n_voters:
            raise DimensionMismatch("weight matrices disagree on the electorate size")
    masses = [column_mass(w, committee, i)[0] for i, w in enumerate(matrices)]
    return frd_outcome_from_masses(masses, n_voters, rng)
