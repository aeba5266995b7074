"""CHSH assembly: angle sets, the analytic reference curve, and sweep driving.

The Bell parameter combines correlators at four analyzer-angle pairs,

    B = E(tA, tB) + E(tA', tB) + E(tA, tB') - E(tA', tB'),

with the sign-flipped term last.  optimal_angles() returns the set maximizing
the ideal-state value; exact_chsh() is the closed-form Approach-I curve for
the untruncated state, used both as an accuracy oracle and as a plot overlay.

sweep() fans one preparation per r value out over every requested approach and
survival probability, so the expensive propagation is shared; records carry
truncation (boundary_mass) and integrator (norm_drift) diagnostics and an
error annotation instead of aborting when a correlator is undefined (vacuum
input at r = 0, for instance).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

from .correlators import (
    LossModel,
    ProbabilityTable,
    UndefinedCorrelatorError,
    correlator_I,
    correlator_II,
    correlator_II_loss,
    correlator_III,
    correlator_III_loss,
    probability_table,
)
from .evolution import IntegratorConfig, PrepParams, prepare_bell_state
from .fockspace import TruncationConfig, boundary_mass

APPROACHES = ("I", "II", "III")


class BellAngles(NamedTuple):
    theta_a: float
    theta_a_prime: float
    theta_b: float
    theta_b_prime: float

    def pairs(self) -> tuple[tuple[float, float], ...]:
        """The four angle pairs in E1..E4 order (E4 enters B with a minus)."""
        return (
            (self.theta_a, self.theta_b),
            (self.theta_a_prime, self.theta_b),
            (self.theta_a, self.theta_b_prime),
            (self.theta_a_prime, self.theta_b_prime),
        )


def optimal_angles() -> BellAngles:
    """Analyzer settings maximizing B for the ideal prepared state."""
    return BellAngles(3.0 * math.pi / 8.0, math.pi / 8.0, math.pi / 4.0, 0.0)


def exact_chsh(r: float) -> float:
    """Closed-form Approach-I Bell parameter at optimal angles, 4 sqrt(2) cosh^2(r) / (3 cosh(2r) - 1)."""
    return 4.0 * math.sqrt(2.0) * math.cosh(r) ** 2 / (3.0 * math.cosh(2.0 * r) - 1.0)


def violation_threshold(tol: float = 1e-10) -> float:
    """The squeezing r* where exact_chsh crosses 2, by bisection."""
    lo, hi = 0.0, 1.0
    if exact_chsh(hi) >= 2.0:
        raise RuntimeError("bisection bracket does not contain the crossing")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exact_chsh(mid) > 2.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SweepRecord:
    """One (approach, gamma, r) evaluation: four correlators and their Bell sum.

    Invariant: b == e_values[0] + e_values[1] + e_values[2] - e_values[3]
    whenever error is None; on error the numeric fields are NaN.
    """

    approach: str
    r: float
    gamma: float
    k_cut: int
    e_values: tuple[float, float, float, float]
    b: float
    boundary_mass: float
    norm_drift: float
    error: str | None = None
    n_atoms: int | None = None


def _evaluate(table: ProbabilityTable, approach: str, loss: LossModel) -> float:
    if approach == "I":
        return correlator_I(table)  # loss-independent by cancellation
    if approach == "II":
        return correlator_II(table) if loss.gamma == 1.0 else correlator_II_loss(table, loss)
    if approach == "III":
        return correlator_III(table) if loss.gamma == 1.0 else correlator_III_loss(table, loss)
    raise ValueError(f"unknown approach {approach!r}; expected one of {APPROACHES}")


def records_from_tables(
    tables: tuple[ProbabilityTable, ProbabilityTable, ProbabilityTable, ProbabilityTable],
    r: float,
    bmass: float,
    drift: float,
    approaches: tuple[str, ...],
    gammas: tuple[float, ...],
    n_atoms: int | None = None,
) -> list[SweepRecord]:
    """Evaluate every (approach, gamma) combination over one shared table set."""
    k_cut = tables[0].cfg.k_cut
    nan = float("nan")
    out = []
    for approach in approaches:
        for gamma in gammas:
            loss = LossModel(gamma)
            try:
                e_values = tuple(_evaluate(t, approach, loss) for t in tables)
                b = e_values[0] + e_values[1] + e_values[2] - e_values[3]
                err = None
            except UndefinedCorrelatorError as exc:
                e_values = (nan, nan, nan, nan)
                b = nan
                err = str(exc)
            out.append(
                SweepRecord(approach, r, gamma, k_cut, e_values, b, bmass, drift, err, n_atoms)
            )
    return out


def chsh_value(
    prep: PrepParams,
    angles: BellAngles,
    approach: str,
    cfg: TruncationConfig,
    loss: LossModel | None = None,
    integ: IntegratorConfig | None = None,
) -> SweepRecord:
    """Prepare, rotate, and assemble B for one approach at one loss setting."""
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}; expected one of {APPROACHES}")
    loss = loss if loss is not None else LossModel(1.0)
    state = prepare_bell_state(prep, cfg, integ)
    tables = tuple(probability_table(state, ta, tb) for ta, tb in angles.pairs())
    (record,) = records_from_tables(
        tables, prep.r, boundary_mass(state), state.norm_drift, (approach,), (loss.gamma,)
    )
    return record


def default_r_grid() -> tuple[float, ...]:
    """Squeezing grid 0 to 0.8 in steps of 0.02."""
    return tuple(round(0.02 * i, 10) for i in range(41))


@dataclass(frozen=True)
class SweepSpec:
    r_values: tuple[float, ...] = field(default_factory=default_r_grid)
    approaches: tuple[str, ...] = APPROACHES
    gammas: tuple[float, ...] = (1.0,)
    k_cut: int = 12
    angles: BellAngles = field(default_factory=optimal_angles)
    desqueeze_scale: float = 1.0
    integ: IntegratorConfig | None = None
    jobs: int = 1

    def __post_init__(self):
        if not self.r_values:
            raise ValueError("r grid is empty")
        for a in self.approaches:
            if a not in APPROACHES:
                raise ValueError(f"unknown approach {a!r}; expected one of {APPROACHES}")
        if not self.gammas:
            raise ValueError("gamma list is empty")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


def _sweep_one_r(spec: SweepSpec, r: float) -> list[SweepRecord]:
    cfg = TruncationConfig(spec.k_cut)
    state = prepare_bell_state(PrepParams(r, spec.desqueeze_scale), cfg, spec.integ)
    bmass = boundary_mass(state)
    tables = tuple(probability_table(state, ta, tb) for ta, tb in spec.angles.pairs())
    return records_from_tables(tables, r, bmass, state.norm_drift, spec.approaches, spec.gammas)


def sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Run the sweep; records come back sorted by (approach, gamma, r).

    With jobs > 1 the r grid is distributed over worker processes; assembly
    order is imposed after collection, so the output is identical to a serial
    run.
    """
    if spec.jobs > 1 and len(spec.r_values) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(_sweep_one_r, [spec] * len(spec.r_values), spec.r_values))
    else:
        chunks = [_sweep_one_r(spec, r) for r in spec.r_values]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda rec: (rec.approach, rec.gamma, rec.r))
    return records
