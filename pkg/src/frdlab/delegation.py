"""Per-issue voting-power allocation: the uniform default and delegation schemes.

Each voter holds one divisible vote per issue, spread evenly over the k
committee members by default.  A delegating voter reallocates their unit
according to a scheme: Optimal puts all of it on one member who shares the
voter's stance on the issue at hand (chosen uniformly, falling back to the
default when no member agrees); Approve splits it over the voter's approved
members; Best-m splits it over the voter's m highest-agreement members.
Approve and Best-m rows are fixed across issues; Optimal reacts per issue.

All masses are exact rationals.  Bulk mass computations run on scaled
integers and convert at the end, so exact-tie detection survives
simulation scale.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from fractions import Fraction

import numpy as np

from .ballots import BallotForm, BallotFormError, ElectoralBallots, agreement_counts
from .core import Committee, DimensionMismatch, IssueProfile

__all__ = [
    "SchemeKind",
    "DelegationScheme",
    "WeightMatrix",
    "default_matrix",
    "select_delegators",
    "select_delegators_by_side",
    "DelegationPlan",
    "build_plan",
    "apply_scheme",
    "column_mass",
]


class SchemeKind(enum.Enum):
    NONE = "None"
    OPTIMAL = "Optimal"
    APPROVE = "Approve"
    BEST_M = "Best"


@dataclasses.dataclass(frozen=True)
class DelegationScheme:
    """A delegation behavior: what delegators do and how many they are."""

    kind: SchemeKind
    n_targets: int = 1
    alpha: float = 0.0
    alpha_minority: float | None = None

    def __post_init__(self):
        if self.n_targets < 1:
            raise ValueError("n_targets must be at least 1")
        for a in (self.alpha, self.alpha_minority):
            if a is not None and not 0.0 <= float(a) <= 1.0:
                raise ValueError(f"delegation rate must lie in [0, 1], got {a}")

    @property
    def label(self) -> str:
        if self.kind is SchemeKind.BEST_M:
            return f"Best{self.n_targets}"
        return self.kind.value

    @classmethod
    def from_label(cls, label: str, alpha: float = 0.0,
                   alpha_minority: float | None = None) -> "DelegationScheme":
        if label.startswith("Best") and label != "Best":
            return cls(SchemeKind.BEST_M, int(label[4:]), alpha, alpha_minority)
        return cls(SchemeKind(label), 1, alpha, alpha_minority)


@dataclasses.dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Exact voter-by-member allocation of voting power for a single issue."""

    weights: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.weights or not self.weights[0]:
            raise DimensionMismatch("weight matrix needs at least one voter and member")
        k = len(self.weights[0])
        one = Fraction(1)
        for row in self.weights:
            if len(row) != k:
                raise DimensionMismatch("ragged weight matrix")
            if any(w < 0 for w in row):
                raise ValueError("weights must be nonnegative")
            if sum(row) != one:
                raise ValueError("each voter's weights must sum to exactly 1")

    @property
    def n_voters(self) -> int:
        return len(self.weights)

    @property
    def k(self) -> int:
        return len(self.weights[0])

    def column_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row[c] for row in self.weights) for c in range(self.k))

    def total_mass(self) -> Fraction:
        return Fraction(self.n_voters)


def default_matrix(n_voters: int, k: int) -> WeightMatrix:
    """Every voter spreads their unit vote evenly over all k members."""
    if n_voters < 1 or k < 1:
        raise ValueError("need at least one voter and one member")
    row = (Fraction(1, k),) * k
    return WeightMatrix((row,) * n_voters)


def select_delegators(n_voters: int, alpha: float, rng,
                      sampling: str = "bernoulli") -> np.ndarray:
    """Boolean mask of delegating voters.

    "bernoulli" draws each voter independently with probability alpha;
    "exact_count" picks a uniform subset of exactly floor(alpha * n) voters.
    """
    if not 0.0 <= float(alpha) <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if sampling == "bernoulli":
        return rng.random(n_voters) < float(alpha)
    if sampling == "exact_count":
        count = math.floor(float(alpha) * n_voters + 1e-9)
        mask = np.zeros(n_voters, dtype=bool)
        mask[rng.choice(n_voters, size=count, replace=False)] = True
        return mask
    raise ValueError(f"unknown sampling mode {sampling!r}")


def select_delegators_by_side(majority_mask, alpha_majority: float,
                              alpha_minority: float, rng) -> np.ndarray:
    """Bernoulli delegator mask with separate rates per voter side."""
    mask = np.asarray(majority_mask, dtype=bool)
    for a in (alpha_majority, alpha_minority):
        if not 0.0 <= float(a) <= 1.0:
            raise ValueError(f"delegation rate must lie in [0, 1], got {a}")
    rates = np.where(mask, float(alpha_majority), float(alpha_minority))
    return rng.random(mask.size) < rates


def column_mass(weights: WeightMatrix, committee: Committee, issue: int) -> tuple[Fraction, Fraction]:
    """Vote mass on each side of one issue: (mass for 1, mass for 0), exact."""
    if weights.k != committee.k:
        raise DimensionMismatch("weight matrix and committee sizes differ")
    if not 0 <= issue < committee.n_issues:
        raise ValueError(f"issue {issue} out of range")
    sums = weights.column_sums()
    side = committee.member_prefs[:, issue]
    mass_one = sum((s for s, b in zip(sums, side) if b), Fraction(0))
    return mass_one, Fraction(weights.n_voters) - mass_one


@dataclasses.dataclass(frozen=True, eq=False)
class DelegationPlan:
    """A scheme resolved against one electorate, committee, and delegator set.

    Approve and Best-m target rows are fixed here once and reused for every
    issue; Optimal keeps the delegators' stances and resolves per issue.
    ``issue_masses`` computes all majority-side masses exactly without
    materializing weight matrices; ``weight_matrix`` builds the explicit
    allocation for one issue and agrees with ``issue_masses`` by
    construction.
    """

    scheme: DelegationScheme
    n_voters: int
    committee: Committee
    delegator_index: np.ndarray
    targets: np.ndarray | None  # delegators x k indicator (Approve / Best-m)
    target_sizes: np.ndarray | None
    delegator_prefs: np.ndarray | None  # delegators x issues (Optimal)
    tiebreak_seed: int

    @property
    def k(self) -> int:
        return self.committee.k

    def issue_masses(self) -> tuple[Fraction, ...]:
        """Mass on side 1 of every issue, exact."""
        prefs = self.committee.member_prefs.astype(np.int64)
        k1 = prefs.sum(axis=0)
        n, k = self.n_voters, self.k
        kind = self.scheme.kind
        if kind in (SchemeKind.NONE, SchemeKind.OPTIMAL) and len(self.delegator_index) == 0:
            return tuple(Fraction(n * int(x), k) for x in k1)
        if kind is SchemeKind.OPTIMAL:
            sides = self.delegator_prefs.astype(np.int64)
            ones = sides.sum(axis=0)
            zeros = len(self.delegator_index) - ones
            # a delegator moves only when some member shares their stance
            moved_one = np.where(k1 > 0, ones, 0)
            moved_zero = np.where(k1 < k, zeros, 0)
            scaled = (n - moved_one - moved_zero) * k1 + moved_one * k
            return tuple(Fraction(int(x), k) for x in scaled)
        # Approve / Best-m: fixed target rows, unit split 1/|targets|
        sizes = self.target_sizes
        moved = len(self.delegator_index)
        scale = math.lcm(k, *(int(s) for s in np.unique(sizes))) if moved else k
        if scale * (n + 1) * k >= 2**62:
            return self._issue_masses_fractions(k1)
        agreeing = self.targets @ prefs  # delegators x issues
        weighted = (scale // sizes) @ agreeing if moved else np.zeros(len(k1), dtype=np.int64)
        scaled = (n - moved) * k1 * (scale // k) + weighted
        return tuple(Fraction(int(x), scale) for x in scaled)

    def _issue_masses_fractions(self, k1: np.ndarray) -> tuple[Fraction, ...]:
        n, k = self.n_voters, self.k
        moved = len(self.delegator_index)
        prefs = self.committee.member_prefs.astype(np.int64)
        agreeing = self.targets @ prefs
        masses = []
        for i, base in enumerate(k1):
            total = Fraction((n - moved) * int(base), k)
            for d in np.unique(self.target_sizes):
                hits = int(agreeing[self.target_sizes == d, i].sum())
                total += Fraction(hits, int(d))
            masses.append(total)
        return tuple(masses)

    def weight_matrix(self, issue: int) -> WeightMatrix:
        """Explicit exact allocation for one issue."""
        if not 0 <= issue < self.committee.n_issues:
            raise ValueError(f"issue {issue} out of range")
        k = self.k
        default_row = (Fraction(1, k),) * k
        rows: list[tuple[Fraction, ...]] = [default_row] * self.n_voters
        kind = self.scheme.kind
        if kind is SchemeKind.OPTIMAL and len(self.delegator_index):
            side_of = self.committee.member_prefs[:, issue]
            pools = {1: np.flatnonzero(side_of == 1), 0: np.flatnonzero(side_of == 0)}
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([self.tiebreak_seed, issue]))
            )
            for d, voter in enumerate(self.delegator_index):
                pool = pools[int(self.delegator_prefs[d, issue])]
                if len(pool) == 0:
                    continue
                target = int(pool[0]) if len(pool) == 1 else int(rng.choice(pool))
                row = [Fraction(0)] * k
                row[target] = Fraction(1)
                rows[int(voter)] = tuple(row)
        elif kind in (SchemeKind.APPROVE, SchemeKind.BEST_M):
            for d, voter in enumerate(self.delegator_index):
                share = Fraction(1, int(self.target_sizes[d]))
                rows[int(voter)] = tuple(
                    share if t else Fraction(0) for t in self.targets[d]
                )
        return WeightMatrix(tuple(rows))


def build_plan(scheme: DelegationScheme, voters: IssueProfile, committee: Committee,
               delegators, ballots: ElectoralBallots | None = None,
               rng=None) -> DelegationPlan:
    """Resolve a scheme into per-delegator targets for one trial.

    ``delegators`` is a boolean mask over voters.  Approve requires approval
    ballots over the full candidate set the committee was drawn from; Best-m
    works from issue agreement directly and requires n_targets <= k.
    Voters whose scheme leaves them without targets (nothing approved among
    members, or no member sharing their stance) keep the default row.
    """
    if voters.n_issues != committee.n_issues:
        raise DimensionMismatch("voters and committee must share the issue set")
    mask = np.asarray(delegators, dtype=bool)
    if mask.shape != (voters.n_agents,):
        raise DimensionMismatch("delegator mask must have one entry per voter")
    index = np.flatnonzero(mask)
    if scheme.kind is SchemeKind.NONE:
        index = np.empty(0, dtype=np.int64)
    seed = int(rng.integers(2**63)) if rng is not None else 0
    targets = sizes = deleg_prefs = None

    if scheme.kind is SchemeKind.OPTIMAL:
        deleg_prefs = voters.prefs[index]
    elif scheme.kind is SchemeKind.APPROVE:
        if ballots is None or ballots.form is not BallotForm.APPROVAL:
            raise BallotFormError("Approve delegation needs approval ballots")
        if ballots.n_voters != voters.n_agents:
            raise DimensionMismatch("ballots must cover the full electorate")
        targets = ballots.approvals[np.ix_(index, np.asarray(committee.members))]
        sizes = targets.sum(axis=1, dtype=np.int64)
        nonempty = sizes > 0
        index, targets, sizes = index[nonempty], targets[nonempty], sizes[nonempty]
    elif scheme.kind is SchemeKind.BEST_M:
        m_targets = scheme.n_targets
        if m_targets > committee.k:
            raise ValueError(
                f"Best-{m_targets} needs at least {m_targets} members, committee has {committee.k}"
            )
        if len(index):
            counts = agreement_counts(
                IssueProfile(voters.prefs[index]), IssueProfile(committee.member_prefs)
            )
            if rng is None:
                raise ValueError("Best-m delegation needs an rng for tie-breaking")
            tiebreak = rng.permuted(
                np.tile(np.arange(committee.k, dtype=np.int64), (len(index), 1)), axis=1
            )
            key = (voters.n_issues - counts) * committee.k + tiebreak
            order = np.argsort(key, axis=1)
            targets = np.zeros((len(index), committee.k), dtype=np.int64)
            np.put_along_axis(targets, order[:, :m_targets], 1, axis=1)
            sizes = np.full(len(index), m_targets, dtype=np.int64)
        else:
            targets = np.zeros((0, committee.k), dtype=np.int64)
            sizes = np.empty(0, dtype=np.int64)
    if targets is not None:
        targets = targets.astype(np.int64)

    return DelegationPlan(
        scheme=scheme,
        n_voters=voters.n_agents,
        committee=committee,
        delegator_index=index,
        targets=targets,
        target_sizes=sizes,
        delegator_prefs=deleg_prefs,
        tiebreak_seed=seed,
    )


def apply_scheme(scheme: DelegationScheme, issue: int, voters: IssueProfile,
                 committee: Committee, ballots: ElectoralBallots | None,
                 delegators, rng=None) -> WeightMatrix:
    """One-shot weight matrix for a single issue under a scheme."""
    plan = build_plan(scheme, voters, committee, delegators, ballots=ballots, rng=rng)
    return plan.weight_matrix(issue)
