"""Monte-Carlo experiment harness: grids, trials, presets, CSV and plots.

A trial's entire randomness derives from a sha256 hash of its grid
coordinates and the master seed, split into independent per-stage
generators.  Results are therefore reproducible row by row, and grids can
run on any number of worker processes without changing a byte of output.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .ballots import BallotForm, derive_approvals, derive_ordering, derive_weights
from .core import IssueProfile, agreement, apply_flips, canonicalize, coverage_summary
from .decide import dd_outcome, frd_outcome_from_masses, rd_outcome
from .delegation import DelegationScheme, SchemeKind, build_plan, select_delegators
from .election import BALLOT_FORM, RuleKind, run_election

__all__ = [
    "SpecError",
    "ExperimentSpec",
    "CellCoord",
    "TrialRecord",
    "CellResult",
    "FIG1_RULES",
    "FIG2_RULES",
    "CSV_HEADER",
    "random_profile",
    "generate_profiles",
    "run_trial",
    "trial_detail",
    "TrialDetail",
    "run_grid",
    "figure_preset",
    "format_fraction",
    "emit_csv",
    "emit_plot",
]

FIG1_RULES = ("AV", "RAV", "STV", "Borda", "Weighted", "Sortition")
FIG2_RULES = FIG1_RULES + ("CC", "KMedian")

CSV_HEADER = (
    "preset,rule,scheme,alpha,n_voters,n_candidates,n_issues,k,trial,"
    "agreement_rd,agreement_frd,coverage,full_coverage,majority_agreement,seed"
)


class SpecError(ValueError):
    """An experiment description that cannot be run."""


def _as_tuple(value, kind) -> tuple:
    if isinstance(value, (str, bytes)):
        return (kind(value),)
    try:
        return tuple(kind(v) for v in value)
    except TypeError:
        return (kind(value),)


@dataclasses.dataclass(frozen=True)
class ExperimentSpec:
    """A full experiment grid over rules, schemes, rates, and sizes.

    Axis fields hold tuples; the grid is their cartesian product.  Use
    ``create`` (or ``from_json``) to build one from scalars or lists.
    """

    n_voters: tuple[int, ...]
    n_candidates: tuple[int, ...]
    n_issues: tuple[int, ...]
    k: tuple[int, ...]
    rule: tuple[str, ...]
    scheme: tuple[str, ...] = ("None",)
    alpha: tuple[float, ...] = (0.0,)
    trials: int = 50
    master_seed: int = 42
    delegator_sampling: str = "bernoulli"
    preset: str = "custom"

    @classmethod
    def create(cls, n_voters, n_candidates, n_issues, k, rule,
               scheme="None", alpha=0.0, trials=50, master_seed=42,
               delegator_sampling="bernoulli", preset="custom") -> "ExperimentSpec":
        spec = cls(
            n_voters=_as_tuple(n_voters, int),
            n_candidates=_as_tuple(n_candidates, int),
            n_issues=_as_tuple(n_issues, int),
            k=_as_tuple(k, int),
            rule=_as_tuple(rule, str),
            scheme=_as_tuple(scheme, str),
            alpha=_as_tuple(alpha, float),
            trials=int(trials),
            master_seed=int(master_seed),
            delegator_sampling=str(delegator_sampling),
            preset=str(preset),
        )
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise SpecError(f"invalid JSON: {err}") from err
        if not isinstance(data, dict):
            raise SpecError("spec must be a JSON object")
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        required = {"n_voters", "n_candidates", "n_issues", "k", "rule"}
        missing = required - set(data)
        if missing:
            raise SpecError(f"missing spec fields: {sorted(missing)}")
        try:
            return cls.create(**data)
        except (TypeError, ValueError) as err:
            if isinstance(err, SpecError):
                raise
            raise SpecError(str(err)) from err

    def validate(self):
        for name in ("n_voters", "n_candidates", "n_issues", "k", "rule", "scheme", "alpha"):
            if not getattr(self, name):
                raise SpecError(f"{name} axis is empty")
        for name in ("n_voters", "n_candidates", "n_issues"):
            if min(getattr(self, name)) < 1:
                raise SpecError(f"{name} values must be positive")
        for k in self.k:
            if k % 2 == 0 or k < 1:
                raise SpecError(f"committee sizes must be odd, got {k}")
        if max(self.k) > min(self.n_candidates):
            raise SpecError(
                f"committee size {max(self.k)} exceeds candidate count {min(self.n_candidates)}"
            )
        for rule in self.rule:
            try:
                RuleKind(rule)
            except ValueError:
                raise SpecError(f"unknown rule {rule!r}") from None
        for label in self.scheme:
            try:
                scheme = DelegationScheme.from_label(label)
            except ValueError:
                raise SpecError(f"unknown scheme {label!r}") from None
            if scheme.kind is SchemeKind.BEST_M and scheme.n_targets > min(self.k):
                raise SpecError(f"{label} needs committees of at least {scheme.n_targets}")
        for a in self.alpha:
            if not 0.0 <= a <= 1.0:
                raise SpecError(f"alpha must lie in [0, 1], got {a}")
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise SpecError("master_seed must fit in 64 bits")
        if self.delegator_sampling not in ("bernoulli", "exact_count"):
            raise SpecError(f"unknown delegator_sampling {self.delegator_sampling!r}")

    def cells(self) -> list["CellCoord"]:
        return [
            CellCoord(rule, scheme, alpha, n, m, r, k)
            for rule, scheme, alpha, n, m, r, k in itertools.product(
                self.rule, self.scheme, self.alpha,
                self.n_voters, self.n_candidates, self.n_issues, self.k,
            )
        ]


class CellCoord(NamedTuple):
    rule: str
    scheme: str
    alpha: float
    n_voters: int
    n_candidates: int
    n_issues: int
    k: int


class TrialRecord(NamedTuple):
    rule: str
    scheme: str
    alpha: float
    n_voters: int
    n_candidates: int
    n_issues: int
    k: int
    trial: int
    agreement_rd: Fraction
    agreement_frd: Fraction
    coverage: Fraction
    full_coverage: Fraction
    majority_agreement: Fraction
    seed: int


def _mean(values) -> Fraction:
    values = list(values)
    return sum(values, Fraction(0)) / len(values)


def _variance(values) -> Fraction:
    values = list(values)
    if len(values) < 2:
        return Fraction(0)
    mean = _mean(values)
    return sum(((v - mean) ** 2 for v in values), Fraction(0)) / (len(values) - 1)


@dataclasses.dataclass(frozen=True)
class CellResult:
    """All trials of one grid cell plus exact summary statistics."""

    coord: CellCoord
    preset: str
    records: tuple[TrialRecord, ...]
    mean_agreement_rd: Fraction
    mean_agreement_frd: Fraction
    variance_rd: Fraction
    variance_frd: Fraction
    mean_coverage: Fraction
    mean_full_coverage: Fraction
    mean_majority_agreement: Fraction

    @classmethod
    def from_records(cls, coord: CellCoord, preset: str, records) -> "CellResult":
        records = tuple(records)
        return cls(
            coord=coord,
            preset=preset,
            records=records,
            mean_agreement_rd=_mean(r.agreement_rd for r in records),
            mean_agreement_frd=_mean(r.agreement_frd for r in records),
            variance_rd=_variance(r.agreement_rd for r in records),
            variance_frd=_variance(r.agreement_frd for r in records),
            mean_coverage=_mean(r.coverage for r in records),
            mean_full_coverage=_mean(r.full_coverage for r in records),
            mean_majority_agreement=_mean(r.majority_agreement for r in records),
        )

    @property
    def trials(self) -> int:
        return len(self.records)

    def stderr_frd(self) -> float:
        return math.sqrt(float(self.variance_frd) / self.trials)

    def stderr_rd(self) -> float:
        return math.sqrt(float(self.variance_rd) / self.trials)


def random_profile(n_agents: int, n_issues: int, rng) -> IssueProfile:
    """Independent fair-coin stances for every agent and issue."""
    return IssueProfile(rng.integers(0, 2, size=(n_agents, n_issues), dtype=np.uint8))


def generate_profiles(n_voters: int, n_candidates: int, n_issues: int, rng):
    """Draw voter and candidate profiles, oriented to the voter majority."""
    voters = random_profile(n_voters, n_issues, rng)
    candidates = random_profile(n_candidates, n_issues, rng)
    voters, flips = canonicalize(voters, rng)
    return voters, apply_flips(candidates, flips)


def _trial_entropy(master_seed: int, coord: CellCoord, trial: int) -> tuple[list[int], int]:
    text = "|".join([
        str(master_seed), coord.rule, coord.scheme, f"{coord.alpha:.6f}",
        str(coord.n_voters), str(coord.n_candidates), str(coord.n_issues),
        str(coord.k), str(trial),
    ])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i:i + 4], "big") for i in range(0, 32, 4)]
    return words, int.from_bytes(digest[:8], "big")


@dataclasses.dataclass(frozen=True, eq=False)
class TrialDetail:
    """Full evidence for one trial: the record plus every decision object."""

    record: TrialRecord
    committee: object
    direct: object
    representative: object
    flexible: object


def run_trial(coord: CellCoord, trial: int, master_seed: int,
              delegator_sampling: str = "bernoulli") -> TrialRecord:
    """Run one fully seeded trial of one grid cell."""
    return trial_detail(coord, trial, master_seed, delegator_sampling).record


def trial_detail(coord: CellCoord, trial: int, master_seed: int,
                 delegator_sampling: str = "bernoulli") -> TrialDetail:
    """Like run_trial, but keeps the committee and outcome vectors."""
    words, seed = _trial_entropy(master_seed, coord, trial)
    stages = np.random.SeedSequence(words).spawn(5)
    rng_profile, rng_ballot, rng_elect, rng_deleg, rng_decide = (
        np.random.Generator(np.random.PCG64(s)) for s in stages
    )
    n, m, r, k = coord.n_voters, coord.n_candidates, coord.n_issues, coord.k
    voters, candidates = generate_profiles(n, m, r, rng_profile)

    rule = RuleKind(coord.rule)
    form = BALLOT_FORM[rule]
    ballots = None
    if form is BallotForm.APPROVAL:
        ballots = derive_approvals(voters, candidates)
    elif form is BallotForm.ORDINAL:
        ballots = derive_ordering(voters, candidates, rng_ballot)
    elif form is BallotForm.CARDINAL:
        ballots = derive_weights(voters, candidates)
    committee = run_election(rule, ballots, candidates, k, rng_elect)

    scheme = DelegationScheme.from_label(coord.scheme, alpha=coord.alpha)
    if scheme.kind is SchemeKind.NONE:
        delegators = np.zeros(n, dtype=bool)
    else:
        delegators = select_delegators(n, coord.alpha, rng_deleg, delegator_sampling)
    scheme_ballots = None
    if scheme.kind is SchemeKind.APPROVE:
        scheme_ballots = ballots if form is BallotForm.APPROVAL else derive_approvals(
            voters, candidates
        )
    plan = build_plan(scheme, voters, committee, delegators,
                      ballots=scheme_ballots, rng=rng_deleg)
    masses = plan.issue_masses()

    direct = dd_outcome(voters, rng_decide)
    representative = rd_outcome(committee)
    flexible = frd_outcome_from_masses(masses, n, rng_decide)
    coverage, full_coverage, majority_agreement = coverage_summary(voters, committee)
    record = TrialRecord(
        rule=coord.rule, scheme=coord.scheme, alpha=coord.alpha,
        n_voters=n, n_candidates=m, n_issues=r, k=k, trial=trial,
        agreement_rd=agreement(direct.outcome, representative.outcome),
        agreement_frd=agreement(direct.outcome, flexible.outcome),
        coverage=coverage, full_coverage=full_coverage,
        majority_agreement=majority_agreement, seed=seed,
    )
    return TrialDetail(
        record=record, committee=committee, direct=direct,
        representative=representative, flexible=flexible,
    )


def _run_trial_task(args) -> TrialRecord:
    coord, trial, master_seed, sampling = args
    return run_trial(CellCoord(*coord), trial, master_seed, sampling)


def _worker_count() -> int:
    raw = os.environ.get("FRDLAB_THREADS", "").strip()
    if raw:
        try:
            limit = int(raw)
        except ValueError:
            raise SpecError(f"FRDLAB_THREADS must be an integer, got {raw!r}") from None
        return max(1, limit)
    return os.cpu_count() or 1


def run_grid(spec: ExperimentSpec) -> list[CellResult]:
    """Run every trial of every cell; deterministic for a fixed master seed.

    Worker processes (capped by FRDLAB_THREADS) only ever change wall-clock
    time: trials are pure functions of their coordinates, and results are
    reduced in grid order.
    """
    spec.validate()
    cells = spec.cells()
    tasks = [
        (tuple(coord), trial, spec.master_seed, spec.delegator_sampling)
        for coord in cells
        for trial in range(spec.trials)
    ]
    workers = _worker_count()
    if workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_task, tasks, chunksize=chunk))
    else:
        records = [_run_trial_task(task) for task in tasks]
    results = []
    for i, coord in enumerate(cells):
        batch = records[i * spec.trials:(i + 1) * spec.trials]
        results.append(CellResult.from_records(coord, spec.preset, batch))
    return results


_PRESETS = {
    "fig1a": dict(
        n_voters=501, n_candidates=60, n_issues=tuple(range(15, 151, 15)), k=21,
        rule=FIG1_RULES,
    ),
    "fig1b": dict(
        n_voters=501, n_candidates=tuple(range(21, 100, 5)) + (100,), n_issues=150, k=21,
        rule=FIG1_RULES,
    ),
    "fig1c": dict(
        n_voters=501, n_candidates=100, n_issues=150, k=tuple(range(21, 58, 4)),
        rule=FIG1_RULES,
    ),
    "fig2": dict(
        n_voters=51, n_candidates=17, n_issues=80, k=tuple(range(3, 16, 2)),
        rule=FIG2_RULES,
    ),
    "fig3": dict(
        n_voters=301, n_candidates=60, n_issues=150, k=21,
        rule="Weighted",
        scheme=("Optimal", "Approve", "Best1", "Best3"),
        alpha=tuple(i / 100 for i in range(101)),
    ),
}


def figure_preset(name: str, master_seed: int = 42, trials: int = 50) -> ExperimentSpec:
    """A named, pinned experiment grid."""
    if name not in _PRESETS:
        raise SpecError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    return ExperimentSpec.create(
        preset=name, master_seed=master_seed, trials=trials, **_PRESETS[name]
    )


def format_fraction(value, digits: int = 6) -> str:
    """Decimal string with fixed digits, round-half-even, computed exactly."""
    f = Fraction(value)
    scale = 10**digits
    scaled = round(f * scale)
    sign = "-" if scaled < 0 else ""
    whole, part = divmod(abs(scaled), scale)
    return f"{sign}{whole}.{part:0{digits}d}"


def emit_csv(results, path) -> Path:
    """Write one row per trial in grid order; bytes are fully deterministic."""
    lines = [CSV_HEADER]
    for cell in results:
        for rec in cell.records:
            lines.append(",".join([
                cell.preset, rec.rule, rec.scheme, format_fraction(rec.alpha),
                str(rec.n_voters), str(rec.n_candidates), str(rec.n_issues),
                str(rec.k), str(rec.trial),
                format_fraction(rec.agreement_rd), format_fraction(rec.agreement_frd),
                format_fraction(rec.coverage), format_fraction(rec.full_coverage),
                format_fraction(rec.majority_agreement), str(rec.seed),
            ]))
    path = Path(path)
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return path


def _x_axis(results) -> str:
    counts = {
        name: len({getattr(c.coord, name) for c in results})
        for name in ("alpha", "n_issues", "n_candidates", "k")
    }
    # the axis actually swept; first listed wins a tie
    return max(counts, key=lambda name: (counts[name], name == "alpha"))


def emit_plot(results, path) -> Path:
    """Render mean agreement along the swept grid axis as deterministic SVG.

    Scheme sweeps plot one line per scheme plus the committee-majority
    baseline; otherwise one line per rule.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x_name = _x_axis(results)
    schemes = sorted({c.coord.scheme for c in results})
    by_scheme = len(schemes) > 1
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if by_scheme:
        for scheme in schemes:
            cells = sorted(
                (c for c in results if c.coord.scheme == scheme),
                key=lambda c: getattr(c.coord, x_name),
            )
            ax.plot(
                [getattr(c.coord, x_name) for c in cells],
                [float(c.mean_agreement_frd) for c in cells],
                marker="o", markersize=2.5, label=scheme,
            )
        baseline = sorted(results, key=lambda c: getattr(c.coord, x_name))
        xs = sorted({getattr(c.coord, x_name) for c in baseline})
        ys = [
            float(_mean([c.mean_agreement_rd for c in baseline
                         if getattr(c.coord, x_name) == x]))
            for x in xs
        ]
        ax.plot(xs, ys, linestyle="--", color="black", label="RD baseline")
    else:
        for rule in sorted({c.coord.rule for c in results}):
            cells = sorted(
                (c for c in results if c.coord.rule == rule),
                key=lambda c: getattr(c.coord, x_name),
            )
            ax.plot(
                [getattr(c.coord, x_name) for c in cells],
                [float(c.mean_agreement_frd) for c in cells],
                marker="o", markersize=2.5, label=rule,
            )
    ax.set_xlabel(x_name)
    ax.set_ylabel("mean agreement with direct outcomes")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "frdlab"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
