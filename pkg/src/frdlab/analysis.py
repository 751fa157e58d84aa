"""Closed-form delegation guarantees and committee-optimization oracles.

The closed form predicts the majority-side vote mass when fixed numbers of
voters per side delegate optimally; two thresholds derived from it say when
the majority can lock an outcome in and when the minority can steal one.  A
Chernoff bound covers independently random delegation, and a parity argument
rules out weighted-majority ties outright when both the electorate and the
committee are odd.  Exhaustive and greedy committee optimizers act as
oracles for the election rules.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

import numpy as np

from .core import Committee, IssueProfile
from .delegation import WeightMatrix, column_mass

__all__ = [
    "IssueScenario",
    "ProbabilisticScenario",
    "optimal_mass",
    "majority_guarantee_threshold",
    "minority_overturn_threshold",
    "expected_mass",
    "chernoff_lower_bound",
    "simulate_agreement",
    "no_tie_witness",
    "parity_sweep",
    "threshold_sweep",
    "best_committee_exhaustive",
    "greedy_coverage",
    "coverage_value",
    "chernoff_check",
    "coverage_check",
]

ENUMERATION_LIMIT = 10**7


@dataclasses.dataclass(frozen=True)
class IssueScenario:
    """One issue summarized by head counts and per-side delegator counts."""

    n_voters: int
    majority_voters: int
    committee_size: int
    agreeing_members: int
    majority_delegators: int = 0
    minority_delegators: int = 0

    def __post_init__(self):
        n, n1 = self.n_voters, self.majority_voters
        k, k1 = self.committee_size, self.agreeing_members
        if n < 1 or not n1 <= n or 2 * n1 < n:
            raise ValueError("majority side must hold at least half the voters")
        if not 0 <= k1 <= k or k < 1:
            raise ValueError("agreeing members must lie in 0..committee size")
        if not 0 <= self.majority_delegators <= n1:
            raise ValueError("majority delegators exceed the majority side")
        if not 0 <= self.minority_delegators <= n - n1:
            raise ValueError("minority delegators exceed the minority side")


def optimal_mass(scenario: IssueScenario) -> Fraction:
    """Majority-side vote mass when the given delegator counts act optimally.

    Each majority delegator moves their whole unit onto an agreeing member,
    each minority delegator onto a disagreeing one; everyone else stays at
    the uniform default.  Requires targets to exist for every delegator.
    """
    s = scenario
    if s.majority_delegators > 0 and s.agreeing_members == 0:
        raise ValueError("majority delegators need an agreeing member")
    if s.minority_delegators > 0 and s.agreeing_members == s.committee_size:
        raise ValueError("minority delegators need a disagreeing member")
    defaults = s.n_voters - s.majority_delegators - s.minority_delegators
    return Fraction(defaults * s.agreeing_members, s.committee_size) + s.majority_delegators


def majority_guarantee_threshold(n_voters: int, majority_voters: int,
                                 committee_size: int, agreeing_members: int) -> Fraction:
    """Majority delegators strictly above this lock the outcome in.

    Valid for 0 < agreeing members < committee size; holds no matter how
    many minority voters delegate.
    """
    n, n1, k, k1 = n_voters, majority_voters, committee_size, agreeing_members
    if not 0 < k1 < k:
        raise ValueError("threshold needs both sides represented on the committee")
    if not (0 <= n1 <= n and 2 * n1 >= n):
        raise ValueError("majority side must hold at least half the voters")
    return Fraction(n * k - 2 * n1 * k1, 2 * (k - k1))


def minority_overturn_threshold(n_voters: int, majority_delegators: int,
                                committee_size: int, agreeing_members: int) -> Fraction:
    """Minority delegators strictly above this flip the outcome.

    Valid for 0 < agreeing members < committee size, given how many majority
    voters delegate.
    """
    n, lam1, k, k1 = n_voters, majority_delegators, committee_size, agreeing_members
    if not 0 < k1 < k:
        raise ValueError("threshold needs both sides represented on the committee")
    if not 0 <= lam1 <= n:
        raise ValueError("majority delegators must lie in 0..n")
    return Fraction(k * lam1 + (n - lam1) * (2 * k1 - k), 2 * k1)


@dataclasses.dataclass(frozen=True)
class ProbabilisticScenario:
    """One issue where each voter delegates independently with own probability."""

    committee_size: int
    agreeing_members: int
    delegation_probs: tuple[Fraction, ...]
    majority_mask: tuple[bool, ...]

    def __post_init__(self):
        k, k1 = self.committee_size, self.agreeing_members
        probs = tuple(Fraction(p) for p in self.delegation_probs)
        mask = tuple(bool(b) for b in self.majority_mask)
        if len(probs) != len(mask) or not probs:
            raise ValueError("need one probability and one side flag per voter")
        if len(probs) % 2 == 0 or k % 2 == 0:
            raise ValueError("electorate and committee sizes must be odd")
        if 2 * sum(mask) <= len(mask):
            raise ValueError("majority side must hold more than half the voters")
        if not 0 < k1 < k:
            raise ValueError("both sides must be represented on the committee")
        if any(not 0 <= p <= 1 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "delegation_probs", probs)
        object.__setattr__(self, "majority_mask", mask)

    @property
    def n_voters(self) -> int:
        return len(self.majority_mask)


def expected_mass(scenario: ProbabilisticScenario) -> Fraction:
    """Expected majority-side mass under independent optimal delegation."""
    s = scenario
    base = Fraction(s.agreeing_members, s.committee_size)
    total = Fraction(0)
    for p, on_majority in zip(s.delegation_probs, s.majority_mask):
        total += p + (1 - p) * base if on_majority else (1 - p) * base
    return total


def chernoff_lower_bound(mu, n_voters: int) -> float:
    """Lower bound on the majority side carrying a weighted-majority vote.

    Requires the expected mass to exceed half the electorate.
    """
    mean = Fraction(mu)
    if 2 * mean <= n_voters:
        raise ValueError("bound needs expected mass above half the electorate")
    gap = float(2 * mean - n_voters)
    return 1.0 - math.exp(-(gap * gap) / (4.0 * n_voters))


def simulate_agreement(scenario: ProbabilisticScenario, trials: int, rng) -> float:
    """Monte-Carlo frequency of the majority side winning the weighted vote."""
    s = scenario
    n, k, k1 = s.n_voters, s.committee_size, s.agreeing_members
    probs = np.array([float(p) for p in s.delegation_probs])
    mask = np.array(s.majority_mask, dtype=bool)
    draws = rng.random((trials, n)) < probs
    # contributions scaled by k: delegating majority voter k, delegating
    # minority voter 0, defaulting voter k1
    scaled = np.where(draws, np.where(mask, k, 0), k1).sum(axis=1, dtype=np.int64)
    if (2 * scaled == n * k).any():
        raise ArithmeticError("exact tie encountered despite odd sizes")
    return float((2 * scaled > n * k).mean())


def no_tie_witness(weights: WeightMatrix, committee: Committee, issue: int) -> tuple[int, int]:
    """Parity witness that a weighted vote cannot tie at odd sizes.

    For odd electorate and committee sizes and an optimal-delegation weight
    matrix (whole units either on the default row or on one agreeing
    member), the side masses scaled by k are integers of opposite parity.
    Returns those parities and raises if the masses tie.
    """
    n, k = weights.n_voters, committee.k
    if n % 2 == 0 or k % 2 == 0:
        raise ValueError("parity argument needs odd electorate and committee sizes")
    mass_one, mass_zero = column_mass(weights, committee, issue)
    one_scaled = mass_one * k
    zero_scaled = mass_zero * k
    if one_scaled.denominator != 1 or zero_scaled.denominator != 1:
        raise ValueError("weight matrix is not an optimal-delegation allocation")
    if mass_one == mass_zero:
        raise ArithmeticError("exact tie; inputs violate the parity preconditions")
    return int(one_scaled) % 2, int(zero_scaled) % 2


def parity_sweep(n_instances: int, rng, max_voters: int = 11, max_committee: int = 7) -> int:
    """Exact ties found over random odd-size optimal-delegation issues.

    Returns the tie count, which the parity argument says must be zero.
    """
    voter_sizes = np.arange(1, max_voters + 1, 2)
    committee_sizes = np.arange(1, max_committee + 1, 2)
    ties = 0
    remaining = n_instances
    batch = 4096
    while remaining > 0:
        count = min(batch, remaining)
        remaining -= count
        n = int(rng.choice(voter_sizes))
        k = int(rng.choice(committee_sizes))
        voters = rng.integers(0, 2, size=(count, n), dtype=np.int64)
        members = rng.integers(0, 2, size=(count, k), dtype=np.int64)
        delegating = rng.random((count, n)) < rng.random((count, 1))
        k1 = members.sum(axis=1)
        ones = (delegating & (voters == 1)).sum(axis=1)
        zeros = (delegating & (voters == 0)).sum(axis=1)
        moved_one = np.where(k1 > 0, ones, 0)
        moved_zero = np.where(k1 < k, zeros, 0)
        scaled = (n - moved_one - moved_zero) * k1 + moved_one * k
        ties += int((2 * scaled == n * k).sum())
    return ties


def threshold_sweep(max_voters: int = 9, max_committee: int = 5) -> list[str]:
    """Exhaustively check both thresholds are exact iff-boundaries.

    Walks every odd electorate up to max_voters, committee size up to
    max_committee, split, and delegator combination; returns descriptions of
    any violations (expected none).
    """
    violations = []
    for n in range(1, max_voters + 1, 2):
        half = Fraction(n, 2)
        for n1 in range((n + 1) // 2, n + 1):
            n0 = n - n1
            for k in range(3, max_committee + 1, 2):
                for k1 in range(1, k):
                    maj_thr = majority_guarantee_threshold(n, n1, k, k1)
                    for lam1 in range(n1 + 1):
                        masses = [
                            optimal_mass(IssueScenario(n, n1, k, k1, lam1, lam0))
                            for lam0 in range(n0 + 1)
                        ]
                        guaranteed = all(m > half for m in masses)
                        if (lam1 > maj_thr) != guaranteed:
                            violations.append(
                                f"majority guarantee mismatch at N={n} N1={n1} k={k} k1={k1} lam1={lam1}"
                            )
                        min_thr = minority_overturn_threshold(n, lam1, k, k1)
                        for lam0, mass in enumerate(masses):
                            if (lam0 > min_thr) != (mass < half):
                                violations.append(
                                    f"minority overturn mismatch at N={n} N1={n1} k={k} "
                                    f"k1={k1} lam1={lam1} lam0={lam0}"
                                )
    return violations


def coverage_value(candidates: IssueProfile, members) -> int:
    """Issues on which at least one chosen candidate takes side 1."""
    if not members:
        return 0
    return int((candidates.prefs[list(members)].sum(axis=0) > 0).sum())


def full_coverage_value(candidates: IssueProfile, members) -> int:
    """Issues on which the chosen candidates represent both sides."""
    if not members:
        return 0
    pro = candidates.prefs[list(members)].sum(axis=0, dtype=np.int64)
    return int(((pro > 0) & (pro < len(members))).sum())


def majority_agreement_value(candidates: IssueProfile, members) -> int:
    """Issues on which most chosen candidates take side 1."""
    if not members:
        return 0
    pro = candidates.prefs[list(members)].sum(axis=0, dtype=np.int64)
    return int((2 * pro > len(members)).sum())


_OBJECTIVES = {
    "coverage": coverage_value,
    "full_coverage": full_coverage_value,
    "majority_agreement": majority_agreement_value,
}


def best_committee_exhaustive(candidates: IssueProfile, k: int,
                              objective: str = "coverage") -> tuple[tuple[int, ...], int]:
    """Exact best k-subset for an issue objective, lexicographically first.

    Enumerates all subsets (guarded at desk scale) and keeps the first
    optimum found in lexicographic order, so results are deterministic.
    """
    score = _OBJECTIVES[objective]
    m = candidates.n_agents
    if not 1 <= k <= m:
        raise ValueError(f"committee size {k} must lie in 1..{m}")
    if math.comb(m, k) > ENUMERATION_LIMIT:
        raise ValueError(f"C({m}, {k}) subsets exceed the enumeration limit; shrink m or k")
    best_members: tuple[int, ...] | None = None
    best_value = -1
    for subset in itertools.combinations(range(m), k):
        value = score(candidates, subset)
        if value > best_value:
            best_members, best_value = subset, value
    return best_members, best_value


def greedy_coverage(candidates: IssueProfile, k: int) -> tuple[tuple[int, ...], int]:
    """Greedy max-coverage committee: repeatedly add the best marginal candidate.

    Ties go to the lowest candidate index, so the result is deterministic.
    Guarantees at least (1 - 1/e) of the exhaustive coverage optimum.
    """
    m = candidates.n_agents
    if not 1 <= k <= m:
        raise ValueError(f"committee size {k} must lie in 1..{m}")
    covered = np.zeros(candidates.n_issues, dtype=bool)
    chosen: list[int] = []
    available = np.ones(m, dtype=bool)
    prefs = candidates.prefs.astype(bool)
    for _ in range(k):
        gains = (prefs & ~covered).sum(axis=1)
        gains[~available] = -1
        pick = int(np.argmax(gains))  # argmax takes the lowest index on ties
        chosen.append(pick)
        available[pick] = False
        covered |= prefs[pick]
    return tuple(chosen), int(covered.sum())


def chernoff_check(n_scenarios: int, trials: int, rng,
                   max_voters: int = 101, max_committee: int = 21) -> list[dict]:
    """Compare the Chernoff bound against Monte-Carlo frequencies.

    Draws random scenarios whose expected mass clears half the electorate
    and reports bound, empirical frequency, and standard error for each.
    """
    results = []
    voter_sizes = np.arange(3, max_voters + 1, 2)
    committee_sizes = np.arange(3, max_committee + 1, 2)
    while len(results) < n_scenarios:
        n = int(rng.choice(voter_sizes))
        k = int(rng.choice(committee_sizes))
        k1 = int(rng.integers(1, k))
        n1 = int(rng.integers(n // 2 + 1, n + 1))
        mask = np.zeros(n, dtype=bool)
        mask[rng.choice(n, size=n1, replace=False)] = True
        numerators = rng.integers(0, 10**6 + 1, size=n)
        scenario = ProbabilisticScenario(
            committee_size=k,
            agreeing_members=k1,
            delegation_probs=tuple(Fraction(int(x), 10**6) for x in numerators),
            majority_mask=tuple(bool(b) for b in mask),
        )
        mu = expected_mass(scenario)
        if 2 * mu <= n:
            continue
        bound = chernoff_lower_bound(mu, n)
        empirical = simulate_agreement(scenario, trials, rng)
        stderr = math.sqrt(max(empirical * (1 - empirical), 1e-12) / trials)
        results.append({
            "n_voters": n, "committee_size": k, "agreeing_members": k1,
            "bound": bound, "empirical": empirical, "stderr": stderr,
            "ok": empirical >= bound - 3 * stderr,
        })
    return results


def coverage_check(n_instances: int, rng, max_candidates: int = 12,
                   max_issues: int = 15) -> list[dict]:
    """Greedy coverage vs the exhaustive optimum on random instances.

    Each record carries both values and whether greedy met the (1 - 1/e)
    guarantee.
    """
    results = []
    for _ in range(n_instances):
        m = int(rng.integers(3, max_candidates + 1))
        r = int(rng.integers(4, max_issues + 1))
        k = int(rng.choice([1, 3, 5]))
        k = min(k, m if m % 2 else m - 1)
        candidates = IssueProfile(rng.integers(0, 2, size=(m, r), dtype=np.uint8))
        members, greedy_value = greedy_coverage(candidates, k)
        _, best_value = best_committee_exhaustive(candidates, k, "coverage")
        guarantee = (1 - 1 / math.e) * best_value
        results.append({
            "n_candidates": m, "n_issues": r, "k": k,
            "greedy": greedy_value, "optimum": best_value,
            "ok": greedy_value >= guarantee or greedy_value == best_value,
        })
    return results
