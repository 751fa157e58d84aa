"""Electoral ballots induced by voter-candidate agreement on the issues.

Three forms: approval sets (agreement strictly above one half), total
orderings (by agreement, private random tie-breaking per voter), and
normalized cardinal weights (agreement over the voter's total agreement).
All derivations are exact; cardinal weights are stored as integer
numerators over one denominator per voter.
"""

from __future__ import annotations

import dataclasses
import enum
from fractions import Fraction

import numpy as np

from .core import DimensionMismatch, IssueProfile

__all__ = [
    "BallotForm",
    "BallotFormError",
    "ElectoralBallots",
    "agreement_counts",
    "derive_approvals",
    "derive_ordering",
    "derive_weights",
]


class BallotForm(enum.Enum):
    APPROVAL = "approval"
    ORDINAL = "ordinal"
    CARDINAL = "cardinal"


class BallotFormError(ValueError):
    """Ballot form incompatible with the requested operation."""


@dataclasses.dataclass(frozen=True, eq=False)
class ElectoralBallots:
    """Voters' preferences over candidates in one of three forms.

    Exactly one payload is populated: ``approvals`` (0/1 matrix),
    ``rankings`` (each row a permutation of 1..m, rank 1 best), or the
    ``weight_num``/``weight_den`` pair encoding the exact row-stochastic
    weights weight_num[j, l] / weight_den[j].
    """

    form: BallotForm
    approvals: np.ndarray | None = None
    rankings: np.ndarray | None = None
    weight_num: np.ndarray | None = None
    weight_den: np.ndarray | None = None

    def __post_init__(self):
        if self.form is BallotForm.APPROVAL:
            arr = np.asarray(self.approvals)
            if arr.ndim != 2 or arr.size == 0 or not np.isin(arr, (0, 1)).all():
                raise ValueError("approvals must be a nonempty 0/1 matrix")
            arr = arr.astype(np.uint8)
            arr.setflags(write=False)
            object.__setattr__(self, "approvals", arr)
        elif self.form is BallotForm.ORDINAL:
            arr = np.asarray(self.rankings)
            if arr.ndim != 2 or arr.size == 0:
                raise ValueError("rankings must be a nonempty matrix")
            arr = arr.astype(np.int64)
            m = arr.shape[1]
            expected = np.arange(1, m + 1)
            if not (np.sort(arr, axis=1) == expected).all():
                raise ValueError("each ranking row must be a permutation of 1..m")
            arr.setflags(write=False)
            object.__setattr__(self, "rankings", arr)
        elif self.form is BallotForm.CARDINAL:
            num = np.asarray(self.weight_num)
            den = np.asarray(self.weight_den)
            if num.ndim != 2 or num.size == 0 or den.shape != (num.shape[0],):
                raise DimensionMismatch("need a numerator matrix and one denominator per voter")
            num = num.astype(np.int64)
            den = den.astype(np.int64)
            if (num < 0).any() or (den < 1).any():
                raise ValueError("weights must be nonnegative with positive denominators")
            if not (num.sum(axis=1) == den).all():
                raise ValueError("each voter's weights must sum to exactly 1")
            num.setflags(write=False)
            den.setflags(write=False)
            object.__setattr__(self, "weight_num", num)
            object.__setattr__(self, "weight_den", den)
        else:
            raise ValueError(f"unknown ballot form {self.form!r}")

    @property
    def n_voters(self) -> int:
        return self._payload().shape[0]

    @property
    def n_candidates(self) -> int:
        return self._payload().shape[1]

    def _payload(self) -> np.ndarray:
        if self.form is BallotForm.APPROVAL:
            return self.approvals
        if self.form is BallotForm.ORDINAL:
            return self.rankings
        return self.weight_num

    def weight(self, voter: int, candidate: int) -> Fraction:
        if self.form is not BallotForm.CARDINAL:
            raise BallotFormError("weights are only defined for cardinal ballots")
        return Fraction(int(self.weight_num[voter, candidate]), int(self.weight_den[voter]))

    def weight_row(self, voter: int) -> tuple[Fraction, ...]:
        if self.form is not BallotForm.CARDINAL:
            raise BallotFormError("weights are only defined for cardinal ballots")
        den = int(self.weight_den[voter])
        return tuple(Fraction(int(n), den) for n in self.weight_num[voter])


def agreement_counts(voters: IssueProfile, candidates: IssueProfile) -> np.ndarray:
    """Number of issues on which each voter agrees with each candidate."""
    if voters.n_issues != candidates.n_issues:
        raise DimensionMismatch("profiles must share the issue set")
    v = voters.prefs.astype(np.float64)
    c = candidates.prefs.astype(np.float64)
    # 0/1 entries with row sums far below 2**53 keep the float matmul exact
    matches = v @ c.T + (1.0 - v) @ (1.0 - c).T
    return matches.astype(np.int64)


def derive_approvals(voters: IssueProfile, candidates: IssueProfile) -> ElectoralBallots:
    """Approve a candidate iff agreement is strictly above one half."""
    matches = agreement_counts(voters, candidates)
    approvals = (2 * matches > voters.n_issues).astype(np.uint8)
    return ElectoralBallots(BallotForm.APPROVAL, approvals=approvals)


def derive_ordering(voters: IssueProfile, candidates: IssueProfile, rng) -> ElectoralBallots:
    """Rank candidates by agreement, highest first.

    Candidates tied on agreement are ordered by a uniform permutation drawn
    privately per voter, so every row is a strict total order consistent
    with agreement.
    """
    matches = agreement_counts(voters, candidates)
    n, m = matches.shape
    tiebreak = rng.permuted(np.tile(np.arange(m, dtype=np.int64), (n, 1)), axis=1)
    # ascending key = (issues - matches, tiebreak): most agreement first
    key = (voters.n_issues - matches) * m + tiebreak
    order = np.argsort(key, axis=1)
    rankings = np.empty((n, m), dtype=np.int64)
    np.put_along_axis(rankings, order, np.arange(1, m + 1, dtype=np.int64)[None, :], axis=1)
    return ElectoralBallots(BallotForm.ORDINAL, rankings=rankings)


def derive_weights(voters: IssueProfile, candidates: IssueProfile) -> ElectoralBallots:
    """Normalize each voter's agreement into exact weights summing to one.

    A voter agreeing with no candidate on any issue gets the uniform row,
    preserving their single unit of electoral weight.
    """
    matches = agreement_counts(voters, candidates)
    m = matches.shape[1]
    den = matches.sum(axis=1)
    degenerate = den == 0
    if degenerate.any():
        matches = matches.copy()
        matches[degenerate] = 1
        den = den.copy()
        den[degenerate] = m
    return ElectoralBallots(BallotForm.CARDINAL, weight_num=matches, weight_den=den)
