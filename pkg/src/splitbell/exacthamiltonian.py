"""Six-mode, fixed-N simulation of the unapproximated collision Hamiltonian.

The four-mode model treats the m=0 condensates as classical local oscillators.
Here they are kept as quantum modes: the basis is every way of distributing N
atoms over (a1, a-1, a0, b1, b-1, b0), the pair-production generator carries
the m=0 operators explicitly with a 1/N prefactor, and the splitting couples
all three mode pairs.  Because each well ends up with about N/2 atoms, local
desqueezing at the same 2r parameter is physically half as strong as the
pre-split squeeze -- the factor the four-mode model injects by hand.

After preparation the ±1 modes are rotated and the m=0 occupations are
marginalized away, producing a four-index probability table that plugs
directly into the correlators module (occupations are bounded by N, so a
k_cut = N table holds the reduction exactly, with no truncation error).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.special import comb

from .correlators import ProbabilityTable
from .evolution import IntegratorConfig, _propagate
from .fockspace import TruncationConfig, index_of
from .operators import SparseGenerator


class OccupationLabel6(NamedTuple):
    """Occupations of (a1, a-1, a0, b1, b-1, b0); components sum to N."""

    n_a1: int
    n_am1: int
    n_a0: int
    n_b1: int
    n_bm1: int
    n_b0: int


@dataclass(frozen=True, eq=False)
class NumberConservedBasis:
    """All six-part compositions of N, in lexicographic order of the first five occupations."""

    n_total: int
    labels: tuple[OccupationLabel6, ...]
    index: dict[OccupationLabel6, int]

    @property
    def dim(self) -> int:
        return len(self.labels)


@lru_cache(maxsize=4)
def build_basis(n_total: int) -> NumberConservedBasis:
    if n_total < 2:
        raise ValueError(f"need at least 2 atoms, got {n_total}")
    labels = []
    for n_a1 in range(n_total + 1):
        for n_am1 in range(n_total - n_a1 + 1):
            for n_a0 in range(n_total - n_a1 - n_am1 + 1):
                for n_b1 in range(n_total - n_a1 - n_am1 - n_a0 + 1):
                    for n_bm1 in range(n_total - n_a1 - n_am1 - n_a0 - n_b1 + 1):
                        n_b0 = n_total - n_a1 - n_am1 - n_a0 - n_b1 - n_bm1
                        labels.append(OccupationLabel6(n_a1, n_am1, n_a0, n_b1, n_bm1, n_b0))
    assert len(labels) == comb(n_total + 5, 5, exact=True)
    index = {lab: i for i, lab in enumerate(labels)}
    return NumberConservedBasis(n_total, tuple(labels), index)


def _assemble6(basis: NumberConservedBasis, entries: list[tuple[int, int, complex]]) -> SparseGenerator:
    rows = [i for i, _, _ in entries]
    cols = [j for _, j, _ in entries]
    data = [v for _, _, v in entries]
    mat = sparse.coo_matrix((data, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex)
    return SparseGenerator(mat.tocsr(), basis.dim)


# per-well positions of the (+1, -1, 0) modes inside OccupationLabel6
_WELL_SLOTS = {"A": (0, 1, 2), "B": (3, 4, 5)}


@lru_cache(maxsize=8)
def gen_exact_scc(well: str, n_total: int) -> SparseGenerator:
    """Pair-production generator (1/N)(a1+ a-1+ a0 a0 + a0+ a0+ a1 a-1) on one well's modes.

    'global' is the pre-split squeeze: all atoms still sit in well A, so it is
    the same operator as well A.  Evolving by parameter 2r realizes the
    squeezing unitary; the 1/N prefactor makes the pre-split rate O(1) while
    the post-split wells, holding ~N/2 atoms each, desqueeze at half rate.
    """
    if well == "global":
        return gen_exact_scc("A", n_total)
    if well not in _WELL_SLOTS:
        raise ValueError(f"well must be 'global', 'A', or 'B', got {well!r}")
    basis = build_basis(n_total)
    p1, m1, z = _WELL_SLOTS[well]
    entries = []
    for i, lab in enumerate(basis.labels):
        if lab[z] >= 2:
            target = list(lab)
            target[p1] += 1
            target[m1] += 1
            target[z] -= 2
            j = basis.index[OccupationLabel6(*target)]
            amp = np.sqrt((lab[p1] + 1) * (lab[m1] + 1) * lab[z] * (lab[z] - 1)) / n_total
            entries.append((j, i, amp))
            entries.append((i, j, amp))  # Hermitian partner
    return _assemble6(basis, entries)


@lru_cache(maxsize=4)
def gen_split6(n_total: int) -> SparseGenerator:
    """Well-coupling generator sum_m (-i am+ bm + i bm+ am) over m = +1, -1, 0."""
    basis = build_basis(n_total)
    entries = []
    for i, lab in enumerate(basis.labels):
        for slot_a, slot_b in zip(_WELL_SLOTS["A"], _WELL_SLOTS["B"]):
            if lab[slot_b] >= 1:  # -i a+ b
                target = list(lab)
                target[slot_a] += 1
                target[slot_b] -= 1
                j = basis.index[OccupationLabel6(*target)]
                entries.append((j, i, -1j * np.sqrt((lab[slot_a] + 1) * lab[slot_b])))
            if lab[slot_a] >= 1:  # +i b+ a
                target = list(lab)
                target[slot_a] -= 1
                target[slot_b] += 1
                j = basis.index[OccupationLabel6(*target)]
                entries.append((j, i, 1j * np.sqrt((lab[slot_b] + 1) * lab[slot_a])))
    return _assemble6(basis, entries)


@lru_cache(maxsize=8)
def _gen_rotation6(well: str, n_total: int) -> SparseGenerator:
    """Spin-y analyzer generator -i a-1+ a1 + i a1+ a-1 on one well's ±1 modes."""
    basis = build_basis(n_total)
    p1, m1, _ = _WELL_SLOTS[well]
    entries = []
    for i, lab in enumerate(basis.labels):
        if lab[p1] >= 1:  # -i a-1+ a1
            target = list(lab)
            target[p1] -= 1
            target[m1] += 1
            j = basis.index[OccupationLabel6(*target)]
            entries.append((j, i, -1j * np.sqrt(lab[p1] * (lab[m1] + 1))))
        if lab[m1] >= 1:  # +i a1+ a-1
            target = list(lab)
            target[p1] += 1
            target[m1] -= 1
            j = basis.index[OccupationLabel6(*target)]
            entries.append((j, i, 1j * np.sqrt(lab[m1] * (lab[p1] + 1))))
    return _assemble6(basis, entries)


@dataclass
class State6:
    """Amplitudes over a NumberConservedBasis, plus accumulated renormalization."""

    amplitudes: np.ndarray
    basis: NumberConservedBasis
    norm_drift: float = 0.0


def _pi_gate_signs6(basis: NumberConservedBasis) -> np.ndarray:
    return np.array([(-1.0) ** (lab.n_a1 + lab.n_b1) for lab in basis.labels])


def prepare_full(r: float, n_total: int, integ: IntegratorConfig | None = None) -> State6:
    """Exact-Hamiltonian preparation: squeeze(2r), pi-gate, split(pi/4), desqueeze both wells (2r each).

    Every stage runs for parameter 2r; the local stages are physically weaker
    because only ~N/2 atoms feed each well's pair production.  Starts from all
    N atoms in a0, renormalizes once at the end, and records the drift.
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if n_total < 4:
        raise ValueError(f"need at least 4 atoms for the split protocol, got {n_total}")
    if integ is None:
        integ = IntegratorConfig()
    basis = build_basis(n_total)
    y = np.zeros(basis.dim, dtype=complex)
    y[basis.index[OccupationLabel6(0, 0, n_total, 0, 0, 0)]] = 1.0
    if r > 0:
        y = _propagate(y, gen_exact_scc("global", n_total).matrix, 2.0 * r, integ)
    y = y * _pi_gate_signs6(basis)
    y = _propagate(y, gen_split6(n_total).matrix, np.pi / 4.0, integ)
    if r > 0:
        y = _propagate(y, gen_exact_scc("A", n_total).matrix, 2.0 * r, integ)
        y = _propagate(y, gen_exact_scc("B", n_total).matrix, 2.0 * r, integ)
    nrm = float(np.linalg.norm(y))
    return State6(y / nrm, basis, abs(nrm - 1.0))


@lru_cache(maxsize=4)
def _reduction_targets(n_total: int) -> np.ndarray:
    """Four-mode table ordinal for each six-mode basis label (m=0 occupations dropped)."""
    basis = build_basis(n_total)
    cfg = TruncationConfig(n_total)
    return np.array(
        [index_of((lab.n_a1, lab.n_am1, lab.n_b1, lab.n_bm1), cfg) for lab in basis.labels]
    )


def reduced_probability_table(state: State6, theta_a: float, theta_b: float,
                              integ: IntegratorConfig | None = None) -> ProbabilityTable:
    """Rotate the ±1 modes, trace out m=0, and lay out p(k_a, l_a, k_b, l_b).

    The observables downstream are number-diagonal in the ± modes, so
    marginalizing the m=0 occupations after rotation is exact, not an
    approximation.  The table uses k_cut = N, which holds every reachable
    occupation -- the reduction itself has zero truncation error.
    """
    if integ is None:
        integ = IntegratorConfig()
    n_total = state.basis.n_total
    y = state.amplitudes
    if theta_a != 0.0:
        y = _propagate(y.astype(complex), _gen_rotation6("A", n_total).matrix, theta_a, integ)
    if theta_b != 0.0:
        y = _propagate(y.astype(complex), _gen_rotation6("B", n_total).matrix, theta_b, integ)
    cfg = TruncationConfig(n_total)
    table = np.zeros(cfg.dim)
    np.add.at(table, _reduction_targets(n_total), np.abs(y) ** 2)
    return ProbabilityTable(table, (theta_a, theta_b), cfg)
