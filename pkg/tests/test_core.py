"""Core types, canonical orientation, and agreement metrics."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frdlab.core import (
    Committee,
    DimensionMismatch,
    IssueProfile,
    OutcomeVector,
    agreement,
    apply_flips,
    canonicalize,
    committee_stats,
    coverage_summary,
)


def rng_of(seed):
    return np.random.Generator(np.random.PCG64(seed))


profiles = st.integers(1, 6).flatmap(
    lambda n: st.integers(1, 6).flatmap(
        lambda r: st.lists(
            st.lists(st.integers(0, 1), min_size=r, max_size=r),
            min_size=n, max_size=n,
        )
    )
)


class TestIssueProfile:
    def test_shape_and_accessors(self):
        p = IssueProfile([[1, 0, 1], [0, 0, 1]])
        assert (p.n_agents, p.n_issues) == (2, 3)
        assert p.row(1).tolist() == [0, 0, 1]
        assert p.prefs.dtype == np.uint8

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            IssueProfile([[0, 2]])

    def test_rejects_bad_shapes(self):
        with pytest.raises(DimensionMismatch):
            IssueProfile([1, 0, 1])
        with pytest.raises(DimensionMismatch):
            IssueProfile(np.empty((0, 3)))

    def test_read_only(self):
        p = IssueProfile([[1, 0]])
        with pytest.raises(ValueError):
            p.prefs[0, 0] = 0


class TestOutcomeVector:
    def test_tie_count(self):
        v = OutcomeVector([1, 0, 1], [False, True, False])
        assert v.n_issues == 3
        assert v.tie_count == 1

    def test_rejects_mismatched_flags(self):
        with pytest.raises(DimensionMismatch):
            OutcomeVector([1, 0], [True])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            OutcomeVector([1, 2], [False, False])


class TestCommittee:
    def test_from_candidates(self):
        cands = IssueProfile([[1, 0], [0, 0], [1, 1]])
        com = Committee.from_candidates(cands, [2, 0, 1])
        assert com.members == (2, 0, 1)
        assert com.member_prefs.tolist() == [[1, 1], [1, 0], [0, 0]]
        assert (com.k, com.n_issues) == (3, 2)

    def test_rejects_even_size(self):
        cands = IssueProfile([[1], [0]])
        with pytest.raises(ValueError, match="odd"):
            Committee.from_candidates(cands, [0, 1])

    def test_rejects_duplicates(self):
        cands = IssueProfile([[1], [0], [1]])
        with pytest.raises(ValueError, match="distinct"):
            Committee.from_candidates(cands, [0, 0, 1])

    def test_rejects_out_of_range(self):
        cands = IssueProfile([[1], [0]])
        with pytest.raises(ValueError, match="out of range"):
            Committee.from_candidates(cands, [5])


class TestAgreement:
    def test_exact_fraction(self):
        assert agreement([1, 1, 0, 0], [1, 0, 0, 1]) == Fraction(1, 2)

    def test_frustration_row(self, frustration):
        voters, candidates = frustration
        assert agreement(voters.row(0), candidates.row(0)) == Fraction(4, 11)
        assert agreement(voters.row(0), candidates.row(1)) == Fraction(7, 11)

    def test_accepts_outcome_vectors(self):
        a = OutcomeVector([1, 0], [False, False])
        b = OutcomeVector([1, 1], [False, False])
        assert agreement(a, b) == Fraction(1, 2)

    def test_rejects_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            agreement([1, 0], [1, 0, 1])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            agreement([1, 2], [1, 1])

    @given(profiles)
    def test_symmetric_and_bounded(self, rows):
        a, b = np.array(rows[0]), np.array(rows[-1])
        ab, ba = agreement(a, b), agreement(b, a)
        assert ab == ba
        assert 0 <= ab <= 1
        assert agreement(a, a) == 1
        assert agreement(a, 1 - a) == 0


class TestCanonicalize:
    def test_majority_lands_on_one(self):
        p = IssueProfile([[0, 1], [0, 1], [1, 1]])
        canon, flips = canonicalize(p, rng_of(0))
        assert flips.tolist() == [True, False]
        assert canon.prefs[:, 0].tolist() == [1, 1, 0]

    def test_flips_keep_cross_agreement(self):
        rng = rng_of(3)
        voters = IssueProfile(rng.integers(0, 2, size=(9, 12), dtype=np.uint8))
        cands = IssueProfile(rng.integers(0, 2, size=(4, 12), dtype=np.uint8))
        canon, flips = canonicalize(voters, rng)
        moved = apply_flips(cands, flips)
        for j in range(9):
            for l in range(4):
                assert agreement(voters.row(j), cands.row(l)) == agreement(
                    canon.row(j), moved.row(l)
                )

    def test_even_tie_is_fair_coin(self):
        p = IssueProfile([[1], [0]])
        flipped = sum(
            int(canonicalize(p, rng_of(seed))[1][0]) for seed in range(10_000)
        )
        # binomial(10^4, 1/2): 3 sigma is 150
        assert abs(flipped - 5_000) <= 150

    @given(profiles, st.integers(0, 2**32 - 1))
    def test_canonical_majorities(self, rows, seed):
        p = IssueProfile(rows)
        canon, _ = canonicalize(p, rng_of(seed))
        ones = 2 * canon.prefs.sum(axis=0, dtype=int)
        assert (ones >= p.n_agents).all()

    @given(profiles, st.integers(0, 2**32 - 1))
    def test_apply_flips_is_involutive(self, rows, seed):
        p = IssueProfile(rows)
        _, flips = canonicalize(p, rng_of(seed))
        back = apply_flips(apply_flips(p, flips), flips)
        assert (back.prefs == p.prefs).all()

    def test_apply_flips_rejects_bad_mask(self):
        with pytest.raises(DimensionMismatch):
            apply_flips(IssueProfile([[1, 0]]), [True])


class TestCommitteeStats:
    def test_trio_tallies(self, trio):
        voters, committee = trio
        stats = committee_stats(voters, committee)
        first, second = stats
        assert (first.members_pro, first.members_con) == (2, 1)
        assert (first.voters_pro, first.voters_con) == (2, 1)
        assert first.covered and first.fully_covered and first.majority_agrees
        assert (second.members_pro, second.members_con) == (1, 2)
        assert second.covered and second.fully_covered
        assert not second.majority_agrees

    def test_uncovered_issue(self):
        voters = IssueProfile([[1], [1], [0]])
        committee = Committee((0,), np.array([[0]], dtype=np.uint8))
        (tally,) = committee_stats(voters, committee)
        assert not tally.covered
        assert not tally.fully_covered
        assert not tally.majority_agrees

    def test_unanimous_committee_not_fully_covered(self):
        voters = IssueProfile([[1], [1], [0]])
        committee = Committee((0, 1, 2), np.ones((3, 1), dtype=np.uint8))
        (tally,) = committee_stats(voters, committee)
        assert tally.covered and tally.majority_agrees
        assert not tally.fully_covered

    def test_rejects_issue_mismatch(self, trio):
        _, committee = trio
        with pytest.raises(DimensionMismatch):
            committee_stats(IssueProfile([[1, 0, 1]]), committee)


class TestCoverageSummary:
    def test_trio_summary(self, trio):
        voters, committee = trio
        covered, fully, majority = coverage_summary(voters, committee)
        assert covered == 1
        assert fully == 1
        assert majority == Fraction(1, 2)

    def test_matches_stats(self, trio):
        voters, committee = trio
        stats = committee_stats(voters, committee)
        covered, fully, majority = coverage_summary(voters, committee)
        r = len(stats)
        assert covered == Fraction(sum(t.covered for t in stats), r)
        assert fully == Fraction(sum(t.fully_covered for t in stats), r)
        assert majority == Fraction(sum(t.majority_agrees for t in stats), r)

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_random_consistency(self, seed):
        rng = rng_of(seed)
        voters = IssueProfile(rng.integers(0, 2, size=(7, 9), dtype=np.uint8))
        cands = IssueProfile(rng.integers(0, 2, size=(6, 9), dtype=np.uint8))
        committee = Committee.from_candidates(cands, [0, 2, 4])
        stats = committee_stats(voters, committee)
        covered, fully, majority = coverage_summary(voters, committee)
        assert covered == Fraction(sum(t.covered for t in stats), 9)
        assert fully == Fraction(sum(t.fully_covered for t in stats), 9)
        assert majority == Fraction(sum(t.majority_agrees for t in stats), 9)
