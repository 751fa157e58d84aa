"""Committee election rules over derived ballots.

All rules are deterministic up to randomized tie-breaking, and every score
comparison is exact: plain integers where possible, scaled integers or
rationals elsewhere.  Floating point only ever pre-filters candidates that
are then re-scored exactly.  Each rule returns an odd-size Committee drawn
from the candidate profile it was given.
"""

from __future__ import annotations

import enum
import itertools
import math
from fractions import Fraction

import numpy as np

from .ballots import BallotForm, BallotFormError, ElectoralBallots
from .core import Committee, IssueProfile

__all__ = [
    "RuleKind",
    "BALLOT_FORM",
    "EnumerationLimitError",
    "ENUMERATION_LIMIT",
    "run_election",
    "approval_voting",
    "reweighted_approval_voting",
    "single_transferable_vote",
    "borda",
    "chamberlin_courant",
    "k_median",
    "weighted_rule",
    "sortition",
]

ENUMERATION_LIMIT = 10**7


class EnumerationLimitError(ValueError):
    """A subset enumeration would exceed the desk-scale guard."""


class RuleKind(enum.Enum):
    AV = "AV"
    RAV = "RAV"
    STV = "STV"
    BORDA = "Borda"
    CC = "CC"
    KMEDIAN = "KMedian"
    WEIGHTED = "Weighted"
    SORTITION = "Sortition"


BALLOT_FORM: dict[RuleKind, BallotForm | None] = {
    RuleKind.AV: BallotForm.APPROVAL,
    RuleKind.RAV: BallotForm.APPROVAL,
    RuleKind.STV: BallotForm.ORDINAL,
    RuleKind.BORDA: BallotForm.ORDINAL,
    RuleKind.CC: BallotForm.ORDINAL,
    RuleKind.KMEDIAN: BallotForm.ORDINAL,
    RuleKind.WEIGHTED: BallotForm.CARDINAL,
    RuleKind.SORTITION: None,
}


def _check_committee_size(k: int, m: int):
    if not 1 <= k <= m:
        raise ValueError(f"committee size {k} must lie in 1..{m}")
    if k % 2 == 0:
        raise ValueError(f"committee size must be odd, got {k}")


def _require_form(ballots: ElectoralBallots, form: BallotForm, rule: str):
    if ballots is None or ballots.form is not form:
        have = "no" if ballots is None else ballots.form.value
        raise BallotFormError(f"{rule} needs {form.value} ballots, got {have}")


def _choose_uniform(pool: list[int], size: int, rng) -> list[int]:
    if size == 0:
        return []
    picked = rng.choice(np.asarray(pool, dtype=np.int64), size=size, replace=False)
    return sorted(int(i) for i in picked)


def _pick_top_k(scores, k: int, rng) -> list[int]:
    """Indices of the k largest scores; boundary ties broken uniformly.

    Scores must compare exactly (ints or Fractions).
    """
    if k == 0:
        return []
    order = sorted(range(len(scores)), key=scores.__getitem__, reverse=True)
    boundary = scores[order[k - 1]]
    sure = [i for i in order if scores[i] > boundary]
    pool = [i for i in order if scores[i] == boundary]
    return sure + _choose_uniform(pool, k - len(sure), rng)


def _argmax_uniform(scores, rng) -> int:
    best = max(scores)
    pool = [i for i, s in enumerate(scores) if s == best]
    return pool[0] if len(pool) == 1 else int(rng.choice(np.asarray(pool, dtype=np.int64)))


def _argmin_uniform(scores, rng) -> int:
    best = min(scores)
    pool = [i for i, s in enumerate(scores) if s == best]
    return pool[0] if len(pool) == 1 else int(rng.choice(np.asarray(pool, dtype=np.int64)))


def approval_voting(ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng) -> Committee:
    """Elect the k candidates with the most approvals."""
    _require_form(ballots, BallotForm.APPROVAL, "AV")
    _check_committee_size(k, ballots.n_candidates)
    scores = ballots.approvals.sum(axis=0, dtype=np.int64).tolist()
    return Committee.from_candidates(candidates, sorted(_pick_top_k(scores, k, rng)))


def reweighted_approval_voting(
    ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng
) -> Committee:
    """Sequential approval rounds with harmonically reweighted ballots.

    Each round a ballot counts 1/(1 + number of its approved candidates
    already elected) toward every hopeful it approves; the top candidate is
    elected, ties uniform.  Scores are compared as integers over the round's
    common denominator, so comparisons stay exact for any committee size.
    """
    _require_form(ballots, BallotForm.APPROVAL, "RAV")
    n, m = ballots.approvals.shape
    _check_committee_size(k, m)
    approvals = ballots.approvals.astype(np.int64)
    elected: list[int] = []
    hopeful = np.ones(m, dtype=bool)
    approved_elected = np.zeros(n, dtype=np.int64)
    for _ in range(k):
        denoms = approved_elected + 1
        distinct = [int(d) for d in np.unique(denoms)]
        scale = math.lcm(*distinct)
        hopeful_idx = np.flatnonzero(hopeful)
        if scale * (n + 1) < 2**62:
            weights = scale // denoms
            scores = (weights @ approvals[:, hopeful_idx]).tolist()
        else:
            # common denominator outgrows int64: aggregate per weight class
            # and combine with python integers
            _, inverse = np.unique(denoms, return_inverse=True)
            groups = np.zeros((len(distinct), m), dtype=np.int64)
            np.add.at(groups, inverse, approvals)
            factors = [scale // d for d in distinct]
            scores = [
                sum(int(groups[g, c]) * factors[g] for g in range(len(distinct)))
                for c in hopeful_idx
            ]
        winner = int(hopeful_idx[_argmax_uniform(scores, rng)])
        elected.append(winner)
        hopeful[winner] = False
        approved_elected += approvals[:, winner]
    return Committee.from_candidates(candidates, sorted(elected))


_HOPEFUL, _ELECTED, _ELIMINATED = 0, 1, 2


_STV_GRID = 10**5  # five-decimal transfer grid, as in Scottish council rules


def single_transferable_vote(
    ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng
) -> Committee:
    """Fractional single transferable vote with the Droop quota.

    Ballots start at weight 1 on their top choice.  A candidate reaching the
    quota is elected and their ballots move to the next hopeful preference
    carrying weight scaled by surplus/tally; when nobody reaches the quota
    the lowest tally is eliminated and its ballots transfer at full current
    weight.  Transfer values are truncated to the five-decimal grid used in
    Scottish council elections, so every weight and tally is an exact
    multiple of 1e-5 and all comparisons and tie detections are exact
    integer arithmetic (fully reduced rationals compound their denominators
    exponentially with each surplus and are unusable beyond a handful of
    seats).  Election and elimination ties are broken uniformly; when as
    many hopefuls remain as open seats, all of them are seated.
    """
    _require_form(ballots, BallotForm.ORDINAL, "STV")
    n, m = ballots.rankings.shape
    _check_committee_size(k, m)
    quota = (n // (k + 1) + 1) * _STV_GRID
    # prefs[j] lists candidate indices in voter j's order, best first
    prefs = np.argsort(ballots.rankings, axis=1).tolist()
    status = [_HOPEFUL] * m
    pointer = [0] * n
    weight = [_STV_GRID] * n
    tally = [0] * m
    holdings: list[list[int]] = [[] for _ in range(m)]

    def next_hopeful(j: int) -> int | None:
        p = pointer[j]
        row = prefs[j]
        while p < m and status[row[p]] != _HOPEFUL:
            p += 1
        pointer[j] = p
        return row[p] if p < m else None

    for j in range(n):
        c = next_hopeful(j)
        if c is not None:
            holdings[c].append(j)
            tally[c] += weight[j]

    elected: list[int] = []
    while len(elected) < k:
        hopefuls = [c for c in range(m) if status[c] == _HOPEFUL]
        open_seats = k - len(elected)
        if len(hopefuls) <= open_seats:
            elected.extend(hopefuls)
            break
        reaching = [c for c in hopefuls if tally[c] >= quota]
        if reaching:
            scores = [tally[c] for c in reaching]
            winner = reaching[_argmax_uniform(scores, rng)]
            status[winner] = _ELECTED
            elected.append(winner)
            if len(elected) == k:
                break
            surplus = tally[winner] - quota
            if surplus > 0:
                total = tally[winner]
                for j in holdings[winner]:
                    moved = weight[j] * surplus // total
                    weight[j] = moved
                    if moved == 0:
                        continue
                    nxt = next_hopeful(j)
                    if nxt is not None:
                        holdings[nxt].append(j)
                        tally[nxt] += moved
            holdings[winner] = []
        else:
            scores = [tally[c] for c in hopefuls]
            loser = hopefuls[_argmin_uniform(scores, rng)]
            status[loser] = _ELIMINATED
            for j in holdings[loser]:
                if weight[j] == 0:
                    continue
                nxt = next_hopeful(j)
                if nxt is not None:
                    holdings[nxt].append(j)
                    tally[nxt] += weight[j]
            holdings[loser] = []
    return Committee.from_candidates(candidates, sorted(elected))


def borda(ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng) -> Committee:
    """Elect the k candidates with the highest total positional score.

    A candidate at rank t on a ballot scores m - t.
    """
    _require_form(ballots, BallotForm.ORDINAL, "Borda")
    m = ballots.n_candidates
    _check_committee_size(k, m)
    scores = (m - ballots.rankings).sum(axis=0, dtype=np.int64).tolist()
    return Committee.from_candidates(candidates, sorted(_pick_top_k(scores, k, rng)))


def _min_rank_sum_optima(rankings: np.ndarray, k: int) -> tuple[int, list[tuple[int, ...]]]:
    """All k-subsets minimizing the summed rank of each voter's best member.

    Enumerates subsets lexicographically in chunks; raises when C(m, k)
    exceeds the desk-scale guard.
    """
    n, m = rankings.shape
    total = math.comb(m, k)
    if total > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"C({m}, {k}) = {total} subsets exceed the enumeration limit; shrink m or k"
        )
    transposed = np.ascontiguousarray(rankings.T.astype(np.int32))
    best_value: int | None = None
    best_subsets: list[tuple[int, ...]] = []
    combos = itertools.combinations(range(m), k)
    chunk_size = 4096
    while True:
        block = list(itertools.islice(combos, chunk_size))
        if not block:
            break
        idx = np.asarray(block, dtype=np.int64)
        values = transposed[idx].min(axis=1).sum(axis=1, dtype=np.int64)
        low = int(values.min())
        if best_value is None or low < best_value:
            best_value = low
            best_subsets = []
        if low == best_value:
            best_subsets.extend(block[i] for i in np.flatnonzero(values == best_value))
    return best_value, best_subsets


def _pick_optimum(optima: list[tuple[int, ...]], rng) -> tuple[int, ...]:
    if len(optima) == 1:
        return optima[0]
    return optima[int(rng.integers(len(optima)))]


def chamberlin_courant(
    ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng
) -> Committee:
    """Exact Chamberlin-Courant with positional utilities, by enumeration.

    Maximizes the sum over voters of (m - rank of the voter's best committee
    member); ties between optimal subsets are broken uniformly.
    """
    _require_form(ballots, BallotForm.ORDINAL, "CC")
    _check_committee_size(k, ballots.n_candidates)
    _, optima = _min_rank_sum_optima(ballots.rankings, k)
    return Committee.from_candidates(candidates, _pick_optimum(optima, rng))


def k_median(ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng) -> Committee:
    """Exact rank-sum minimizer: each voter is charged their best member's rank.

    Ties between optimal subsets are broken uniformly.
    """
    _require_form(ballots, BallotForm.ORDINAL, "KMedian")
    _check_committee_size(k, ballots.n_candidates)
    _, optima = _min_rank_sum_optima(ballots.rankings, k)
    return Committee.from_candidates(candidates, _pick_optimum(optima, rng))


def _exact_weight_score(ballots: ElectoralBallots, candidate: int) -> Fraction:
    num, den = ballots.weight_num, ballots.weight_den
    score = Fraction(0)
    for d in np.unique(den):
        score += Fraction(int(num[den == d, candidate].sum()), int(d))
    return score


def weighted_rule(ballots: ElectoralBallots, candidates: IssueProfile, k: int, rng) -> Committee:
    """Elect the k candidates receiving the largest total ballot weight.

    Float column sums pre-sort the field, then everything within a guard
    band of the seat boundary is re-scored as exact rationals before seats
    are assigned, so ties are decided exactly rather than by float noise.
    """
    _require_form(ballots, BallotForm.CARDINAL, "Weighted")
    m = ballots.n_candidates
    _check_committee_size(k, m)
    num, den = ballots.weight_num, ballots.weight_den
    n = num.shape[0]
    # each voter contributes at most 1, so the accumulated float error is
    # below ~n * 1e-15 and the band decides everything else correctly
    if n >= 10**6:
        raise ValueError("electorate too large for the float guard band")
    band = 1e-8
    fscores = (num / den[:, None]).sum(axis=0)
    order = np.argsort(-fscores)
    boundary = float(fscores[order[k - 1]])
    sure = [int(i) for i in order if fscores[i] > boundary + band]
    pool = [int(i) for i in order if boundary - band <= fscores[i] <= boundary + band]
    exact = [_exact_weight_score(ballots, c) for c in pool]
    chosen = _pick_top_k(exact, k - len(sure), rng)
    return Committee.from_candidates(candidates, sorted(sure + [pool[i] for i in chosen]))


def sortition(candidates: IssueProfile, k: int, rng) -> Committee:
    """A uniformly random committee; no ballots involved."""
    _check_committee_size(k, candidates.n_agents)
    members = rng.choice(candidates.n_agents, size=k, replace=False)
    return Committee.from_candidates(candidates, sorted(int(i) for i in members))


_RULES = {
    RuleKind.AV: approval_voting,
    RuleKind.RAV: reweighted_approval_voting,
    RuleKind.STV: single_transferable_vote,
    RuleKind.BORDA: borda,
    RuleKind.CC: chamberlin_courant,
    RuleKind.KMEDIAN: k_median,
    RuleKind.WEIGHTED: weighted_rule,
}


def run_election(
    kind: RuleKind | str,
    ballots: ElectoralBallots | None,
    candidates: IssueProfile,
    k: int,
    rng,
) -> Committee:
    """Run one election rule, validating the ballot form it requires."""
    kind = RuleKind(kind)
    if kind is RuleKind.SORTITION:
        return sortition(candidates, k, rng)
    return _RULES[kind](ballots, candidates, k, rng)
