"""Truncated four-mode Fock basis and state-vector utilities.

The four bosonic modes are the m = +1 / m = -1 Zeeman modes of the two wells,
ordered (a_1, a_-1, b_1, b_-1) with occupations (k_a, l_a, k_b, l_b).  Each
occupation is truncated at an inclusive per-mode ceiling ``k_cut``, so the
basis dimension is (k_cut + 1)**4.  Ordinals are lexicographic in
(k_a, l_a, k_b, l_b) with l_b fastest-varying, i.e. the flat index of a
C-ordered numpy array of shape (d, d, d, d) with d = k_cut + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

# Unitary stages must keep the norm within this of its initial value; used as
# the default tolerance wherever a "state is still normalized" check appears.
NORM_TOL = 1e-8


class FockLabel(NamedTuple):
    """Occupations of (a_1, a_-1, b_1, b_-1)."""

    k_a: int
    l_a: int
    k_b: int
    l_b: int


class SectorKey(NamedTuple):
    """Local particle numbers (N_A, N_B) = (k_a + l_a, k_b + l_b)."""

    n_a: int
    n_b: int


@dataclass(frozen=True)
class TruncationConfig:
    """Per-mode occupation ceiling (inclusive)."""

    k_cut: int

    def __post_init__(self):
        if self.k_cut < 1:
            raise ValueError(f"k_cut must be >= 1, got {self.k_cut}")

    @property
    def n_per_mode(self) -> int:
        return self.k_cut + 1

    @property
    def dim(self) -> int:
        return (self.k_cut + 1) ** 4


def index_of(label: FockLabel, cfg: TruncationConfig) -> int:
    """Ordinal of a label; inverse of label_of."""
    d = cfg.n_per_mode
    k_a, l_a, k_b, l_b = label
    for occ in (k_a, l_a, k_b, l_b):
        if not 0 <= occ <= cfg.k_cut:
            raise ValueError(f"occupation {occ} outside [0, {cfg.k_cut}] in {tuple(label)}")
    return ((k_a * d + l_a) * d + k_b) * d + l_b


def label_of(ordinal: int, cfg: TruncationConfig) -> FockLabel:
    """Label of an ordinal; inverse of index_of."""
    if not 0 <= ordinal < cfg.dim:
        raise ValueError(f"ordinal {ordinal} outside [0, {cfg.dim})")
    d = cfg.n_per_mode
    l_b = ordinal % d
    rest = ordinal // d
    k_b = rest % d
    rest //= d
    l_a = rest % d
    k_a = rest // d
    return FockLabel(k_a, l_a, k_b, l_b)


@lru_cache(maxsize=3)
def occupation_grids(cfg: TruncationConfig) -> tuple[np.ndarray, ...]:
    """Flat int arrays (k_a, l_a, k_b, l_b) over the whole basis, ordinal order.

    Cached per config; treated as read-only by every consumer.
    """
    d = cfg.n_per_mode
    grids = np.indices((d, d, d, d))
    out = tuple(g.reshape(-1) for g in grids)
    for g in out:
        g.setflags(write=False)
    return out


@dataclass
class StateVector:
    """Complex amplitudes over the truncated basis.

    ``norm_drift`` records |norm - 1| accumulated by the integrator before the
    single final renormalization in prepare_bell_state; it stays 0.0 for
    states built directly from closed forms.
    """

    amplitudes: np.ndarray
    cfg: TruncationConfig
    norm_drift: float = 0.0

    def __post_init__(self):
        if self.amplitudes.shape != (self.cfg.dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, expected ({self.cfg.dim},)"
            )


def vacuum(cfg: TruncationConfig) -> StateVector:
    amps = np.zeros(cfg.dim, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(amps, cfg)


def basis_state(label: FockLabel, cfg: TruncationConfig) -> StateVector:
    amps = np.zeros(cfg.dim, dtype=np.complex128)
    amps[index_of(label, cfg)] = 1.0
    return StateVector(amps, cfg)


def norm(state: StateVector) -> float:
    return float(np.linalg.norm(state.amplitudes))


def boundary_mass(state: StateVector) -> float:
    """Total probability on labels with any occupation equal to k_cut.

    This is the truncation-leakage diagnostic: preparations are trusted only
    when it stays below NORM_TOL.
    """
    k_a, l_a, k_b, l_b = occupation_grids(state.cfg)
    kc = state.cfg.k_cut
    at_edge = (k_a == kc) | (l_a == kc) | (k_b == kc) | (l_b == kc)
    p = np.abs(state.amplitudes[at_edge]) ** 2
    return float(p.sum())


def sector_marginal(state: StateVector) -> dict[SectorKey, float]:
    """Probability per particle-number sector (N_A, N_B).

    Exact zeros are dropped, so a vacuum state maps to {(0, 0): 1.0}.  The
    retained entries sum to norm(state)**2.
    """
    k_a, l_a, k_b, l_b = occupation_grids(state.cfg)
    p = np.abs(state.amplitudes) ** 2
    n_max = 2 * state.cfg.k_cut
    table = np.zeros((n_max + 1, n_max + 1))
    np.add.at(table, (k_a + l_a, k_b + l_b), p)
    n_a, n_b = np.nonzero(table)
    return {SectorKey(int(i), int(j)): float(table[i, j]) for i, j in zip(n_a, n_b)}


def sector_matrix(state: StateVector, sector: SectorKey) -> np.ndarray:
    """Probability matrix p(k_A, k_B) within one (N_A, N_B) sector.

    Entry (k_a, k_b) is |<k_a, N_A-k_a, k_b, N_B-k_b | psi>|^2, i.e. the
    distribution over the m=+1 occupations with the m=-1 ones fixed by the
    sector.  Requires N_A, N_B <= k_cut so the whole matrix is inside the
    basis.
    """
    n_a, n_b = sector
    kc = state.cfg.k_cut
    if not (0 <= n_a <= kc and 0 <= n_b <= kc):
        raise ValueError(f"sector {tuple(sector)} exceeds k_cut={kc}")
    d = state.cfg.n_per_mode
    amps = state.amplitudes.reshape(d, d, d, d)
    k_a = np.arange(n_a + 1)
    k_b = np.arange(n_b + 1)
    block = amps[k_a[:, None], n_a - k_a[:, None], k_b[None, :], n_b - k_b[None, :]]
    return np.abs(block) ** 2
