"""Shared fixtures: two small hand-checkable instances used across modules.

The three-voter instance has three committee members and two issues chosen
so that single optimal delegations produce the masses 4/3 and 5/3.  The
eleven-voter instance pits an all-ones candidate against an all-zeros one;
a majority of voters is on the minority side of most issues, so every
majoritarian rule elects the all-zeros candidate even though the direct
majority favors 1 on every issue.
"""

import numpy as np
import pytest

from frdlab.core import Committee, IssueProfile


@pytest.fixture
def trio():
    """Three voters, committee of three, two issues; already canonical."""
    voters = IssueProfile(np.array([[1, 1], [1, 1], [0, 0]], dtype=np.uint8))
    members = np.array([[1, 1], [1, 0], [0, 0]], dtype=np.uint8)
    committee = Committee((0, 1, 2), members)
    return voters, committee


@pytest.fixture
def frustration():
    """Eleven voters over eleven issues; candidates all-ones and all-zeros."""
    rows = [
        [0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1],
        [1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
        [1, 1, 0, 0, 0, 0, 0, 0, 0, 1, 1],
        [1, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0],
        [1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1],
        [1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0],
        [0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1],
        [0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    ]
    voters = IssueProfile(np.array(rows, dtype=np.uint8))
    candidates = IssueProfile(
        np.vstack([np.ones(11, dtype=np.uint8), np.zeros(11, dtype=np.uint8)])
    )
    return voters, candidates
