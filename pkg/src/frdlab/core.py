"""Shared domain types and metrics for binary-issue democracy simulations.

Voters and candidates alike hold a 0/1 stance on every issue, so a single
matrix type serves both.  Issue columns are relabeled so that the side
preferred by the weak voter majority is 1 (the "canonical" orientation);
downstream quality metrics then compare against the all-ones ideal.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np

__all__ = [
    "DimensionMismatch",
    "IssueProfile",
    "OutcomeVector",
    "Committee",
    "IssueTally",
    "agreement",
    "canonicalize",
    "apply_flips",
    "committee_stats",
    "coverage_summary",
]


class DimensionMismatch(ValueError):
    """Two objects that must share a shape or length do not."""


def _binary_matrix(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatch("matrix needs at least one row and one column")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("matrix entries must be 0 or 1")
    out = arr.astype(np.uint8)
    out.setflags(write=False)
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class IssueProfile:
    """Binary agent-by-issue preference matrix, shared by voters and candidates."""

    prefs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "prefs", _binary_matrix(self.prefs))

    @property
    def n_agents(self) -> int:
        return self.prefs.shape[0]

    @property
    def n_issues(self) -> int:
        return self.prefs.shape[1]

    def row(self, agent: int) -> np.ndarray:
        return self.prefs[agent]


@dataclasses.dataclass(frozen=True, eq=False)
class OutcomeVector:
    """Per-issue 0/1 decisions, with flags marking coin-broken exact ties."""

    decisions: np.ndarray
    tie_flags: np.ndarray

    def __post_init__(self):
        dec = np.asarray(self.decisions)
        if dec.ndim != 1 or dec.size == 0 or not np.isin(dec, (0, 1)).all():
            raise ValueError("decisions must be a nonempty 0/1 vector")
        flags = np.asarray(self.tie_flags, dtype=bool)
        if flags.shape != dec.shape:
            raise DimensionMismatch("tie flags must match decisions in length")
        dec = dec.astype(np.uint8)
        dec.setflags(write=False)
        flags = flags.copy()
        flags.setflags(write=False)
        object.__setattr__(self, "decisions", dec)
        object.__setattr__(self, "tie_flags", flags)

    @property
    def n_issues(self) -> int:
        return self.decisions.size

    @property
    def tie_count(self) -> int:
        return int(self.tie_flags.sum())


@dataclasses.dataclass(frozen=True, eq=False)
class Committee:
    """An elected candidate set together with the members' issue stances.

    Size must be odd so committee-majority decisions can never tie.
    """

    members: tuple[int, ...]
    member_prefs: np.ndarray

    def __post_init__(self):
        members = tuple(int(i) for i in self.members)
        if not members or len(members) % 2 == 0:
            raise ValueError(f"committee size must be odd, got {len(members)}")
        if len(set(members)) != len(members):
            raise ValueError("committee members must be distinct")
        prefs = _binary_matrix(self.member_prefs)
        if prefs.shape[0] != len(members):
            raise DimensionMismatch("need one preference row per member")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "member_prefs", prefs)

    @classmethod
    def from_candidates(cls, candidates: IssueProfile, members) -> "Committee":
        members = tuple(int(i) for i in members)
        for i in members:
            if not 0 <= i < candidates.n_agents:
                raise ValueError(f"candidate index {i} out of range")
        return cls(members, candidates.prefs[list(members)])

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def n_issues(self) -> int:
        return self.member_prefs.shape[1]


def agreement(a, b) -> Fraction:
    """Fraction of issues on which two 0/1 vectors take the same side.

    Exact: one minus the normalized Hamming distance, as a Fraction.
    Accepts plain vectors or OutcomeVector instances.
    """
    va = np.asarray(a.decisions if isinstance(a, OutcomeVector) else a)
    vb = np.asarray(b.decisions if isinstance(b, OutcomeVector) else b)
    if va.ndim != 1 or vb.ndim != 1 or va.shape != vb.shape or va.size == 0:
        raise DimensionMismatch(
            f"need equal-length nonempty vectors, got shapes {va.shape} and {vb.shape}"
        )
    for v in (va, vb):
        if not np.isin(v, (0, 1)).all():
            raise ValueError("agreement is defined on 0/1 vectors")
    return Fraction(int(np.count_nonzero(va == vb)), va.size)


def canonicalize(profile: IssueProfile, rng) -> tuple[IssueProfile, np.ndarray]:
    """Relabel every issue so the weak majority of agents prefers side 1.

    Exact ties (possible only for even agent counts) are labeled by a fair
    coin from ``rng``.  Returns the relabeled profile together with the
    per-issue flip mask; apply the same mask to any companion profile (see
    apply_flips) to keep cross-profile agreement intact.
    """
    doubled = 2 * profile.prefs.sum(axis=0, dtype=np.int64)
    flips = doubled < profile.n_agents
    ties = doubled == profile.n_agents
    if ties.any():
        flips[ties] = rng.random(int(ties.sum())) < 0.5
    return apply_flips(profile, flips), flips


def apply_flips(profile: IssueProfile, flips) -> IssueProfile:
    """Relabel the issues selected by a boolean mask (sides 0 and 1 swap)."""
    flips = np.asarray(flips, dtype=bool)
    if flips.shape != (profile.n_issues,):
        raise DimensionMismatch("flip mask must have one entry per issue")
    return IssueProfile(profile.prefs ^ flips.astype(np.uint8))


@dataclasses.dataclass(frozen=True)
class IssueTally:
    """Head counts for one issue: members and voters on each side.

    Sides are canonical, so "pro" means the side the voter majority prefers.
    """

    members_pro: int
    members_con: int
    voters_pro: int
    voters_con: int

    @property
    def committee_size(self) -> int:
        return self.members_pro + self.members_con

    @property
    def covered(self) -> bool:
        return self.members_pro > 0

    @property
    def fully_covered(self) -> bool:
        return 0 < self.members_pro < self.committee_size

    @property
    def majority_agrees(self) -> bool:
        return 2 * self.members_pro > self.committee_size


def committee_stats(voters: IssueProfile, committee: Committee) -> list[IssueTally]:
    """Per-issue tallies of a committee against a canonicalized voter profile."""
    if voters.n_issues != committee.n_issues:
        raise DimensionMismatch("voters and committee must share the issue set")
    members_pro = committee.member_prefs.sum(axis=0, dtype=np.int64)
    voters_pro = voters.prefs.sum(axis=0, dtype=np.int64)
    k, n = committee.k, voters.n_agents
    return [
        IssueTally(int(mp), k - int(mp), int(vp), n - int(vp))
        for mp, vp in zip(members_pro, voters_pro)
    ]


def coverage_summary(
    voters: IssueProfile, committee: Committee
) -> tuple[Fraction, Fraction, Fraction]:
    """Fractions of issues covered, fully covered, and majority-agreed.

    Covered: some member takes the majority side.  Fully covered: both sides
    are represented.  Majority-agreed: most members take the majority side.
    """
    if voters.n_issues != committee.n_issues:
        raise DimensionMismatch("voters and committee must share the issue set")
    mp = committee.member_prefs.sum(axis=0, dtype=np.int64)
    k, r = committee.k, committee.n_issues
    covered = int((mp > 0).sum())
    fully = int(((mp > 0) & (mp < k)).sum())
    majority = int((2 * mp > k).sum())
    return Fraction(covered, r), Fraction(fully, r), Fraction(majority, r)
