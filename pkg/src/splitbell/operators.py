"""Sparse Hermitian generators and diagonal gates for the protocol stages.

All generators are dimensionless: the evolution parameter (squeezing r,
splitting angle, rotation angle) is supplied by the propagator.  Builders are
cached per TruncationConfig, so repeated sweeps reuse the assembled matrices.

Conventions (pinned by the closed-form CHSH benchmark, see tests):
  - two-mode squeezing     K     = a_1^+ a_-1^+ + a_1 a_-1
  - well splitting         H_W   = sum_{m=+-1} (-i a_m^+ b_m + i b_m^+ a_m)
  - spin-y rotation        S^y_A = -i a_-1^+ a_1 + i a_1^+ a_-1   (same for B)
Evolving |1,0,0,0> under H_W by pi/4 gives (|1,0,0,0> + |0,0,1,0>)/sqrt(2);
evolving it under S^y_A by theta gives cos(theta)|1,0,0,0> - sin(theta)|0,1,0,0>.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .fockspace import StateVector, TruncationConfig, occupation_grids

WELLS = ("A", "B")
OBSERVABLE_KINDS = ("SzA", "SzB", "NA", "NB")


@dataclass(frozen=True)
class SparseGenerator:
    """A Hermitian operator stored as a CSR matrix."""

    matrix: sparse.csr_matrix
    dim: int

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entries(self):
        """Iterate (row, col, coeff) triplets of the stored nonzeros."""
        coo = self.matrix.tocoo()
        yield from zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())

    def is_hermitian(self) -> bool:
        """Entry-level check: the stored pattern equals its conjugate transpose."""
        diff = self.matrix - self.matrix.getH()
        return diff.nnz == 0 or np.max(np.abs(diff.data)) == 0.0

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.matrix.dot(amplitudes)


@dataclass(frozen=True)
class ObservableDiag:
    """A number-diagonal observable as its vector of eigenvalues."""

    values: np.ndarray

    def expectation(self, state: StateVector) -> float:
        return float(np.sum(self.values * np.abs(state.amplitudes) ** 2))


def _hop_entries(cfg, delta, weight):
    """COO entries for one ladder-operator product.

    ``delta`` is the occupation shift (dk_a, dl_a, dk_b, dl_b) and
    ``weight(k_a, l_a, k_b, l_b)`` evaluates <label+delta| op |label> on the
    source occupations.  Source labels whose target leaves the basis are
    dropped, which is what keeps the truncated generator Hermitian.
    """
    kc = cfg.k_cut
    d = cfg.n_per_mode
    grids = occupation_grids(cfg)
    ok = np.ones(cfg.dim, dtype=bool)
    for g, dg in zip(grids, delta):
        if dg:
            ok &= (g + dg >= 0) & (g + dg <= kc)
    src = np.nonzero(ok)[0]
    k_a, l_a, k_b, l_b = (g[src] for g in grids)
    row = (((k_a + delta[0]) * d + (l_a + delta[1])) * d + (k_b + delta[2])) * d + (l_b + delta[3])
    return row, src, weight(k_a, l_a, k_b, l_b)


def _assemble(cfg, terms) -> SparseGenerator:
    rows, cols, vals = [], [], []
    for delta, weight in terms:
        r, c, v = _hop_entries(cfg, delta, weight)
        rows.append(r)
        cols.append(c)
        vals.append(v)
    mat = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(cfg.dim, cfg.dim),
        dtype=np.complex128,
    ).tocsr()
    return SparseGenerator(mat, cfg.dim)


@lru_cache(maxsize=3)
def gen_tms_global(cfg: TruncationConfig) -> SparseGenerator:
    """K = a_1^+ a_-1^+ + a_1 a_-1 on the A modes (pre-split squeezing).

    Evolving the vacuum by parameter r produces the two-mode squeezed
    amplitudes sech(r) (-i tanh r)^k on labels (k, k, 0, 0).
    """
    return _assemble(
        cfg,
        [
            ((+1, +1, 0, 0), lambda ka, la, kb, lb: np.sqrt((ka + 1.0) * (la + 1.0))),
            ((-1, -1, 0, 0), lambda ka, la, kb, lb: np.sqrt(ka * 1.0 * la)),
        ],
    )


@lru_cache(maxsize=3)
def gen_tms_local(well: str, cfg: TruncationConfig) -> SparseGenerator:
    """K restricted to one well's +-1 modes (post-split desqueezing)."""
    if well == "A":
        return gen_tms_global(cfg)
    if well != "B":
        raise ValueError(f"well must be 'A' or 'B', got {well!r}")
    return _assemble(
        cfg,
        [
            ((0, 0, +1, +1), lambda ka, la, kb, lb: np.sqrt((kb + 1.0) * (lb + 1.0))),
            ((0, 0, -1, -1), lambda ka, la, kb, lb: np.sqrt(kb * 1.0 * lb)),
        ],
    )


@lru_cache(maxsize=3)
def gen_split(cfg: TruncationConfig) -> SparseGenerator:
    """Well-splitting generator on both +-1 mode pairs; pi/4 is a 50/50 split."""
    s = np.sqrt
    return _assemble(
        cfg,
        [
            # a_1^+ b_1 and b_1^+ a_1
            ((+1, 0, -1, 0), lambda ka, la, kb, lb: -1j * s((ka + 1.0) * kb)),
            ((-1, 0, +1, 0), lambda ka, la, kb, lb: +1j * s((kb + 1.0) * ka)),
            # a_-1^+ b_-1 and b_-1^+ a_-1
            ((0, +1, 0, -1), lambda ka, la, kb, lb: -1j * s((la + 1.0) * lb)),
            ((0, -1, 0, +1), lambda ka, la, kb, lb: +1j * s((lb + 1.0) * la)),
        ],
    )


@lru_cache(maxsize=3)
def gen_rotation_y(well: str, cfg: TruncationConfig) -> SparseGenerator:
    """Collective spin S^y of one well (measurement-basis rotation generator)."""
    s = np.sqrt
    if well == "A":
        terms = [
            ((-1, +1, 0, 0), lambda ka, la, kb, lb: -1j * s(ka * (la + 1.0))),
            ((+1, -1, 0, 0), lambda ka, la, kb, lb: +1j * s(la * (ka + 1.0))),
        ]
    elif well == "B":
        terms = [
            ((0, 0, -1, +1), lambda ka, la, kb, lb: -1j * s(kb * (lb + 1.0))),
            ((0, 0, +1, -1), lambda ka, la, kb, lb: +1j * s(lb * (kb + 1.0))),
        ]
    else:
        raise ValueError(f"well must be 'A' or 'B', got {well!r}")
    return _assemble(cfg, terms)


@lru_cache(maxsize=3)
def _pi_gate_signs(cfg: TruncationConfig) -> np.ndarray:
    k_a, _, k_b, _ = occupation_grids(cfg)
    signs = np.where((k_a + k_b) % 2 == 0, 1.0, -1.0)
    signs.setflags(write=False)
    return signs


def apply_pi_gate(state: StateVector) -> StateVector:
    """Multiply each amplitude by (-1)**(k_a + k_b); an involution."""
    return StateVector(
        state.amplitudes * _pi_gate_signs(state.cfg), state.cfg, state.norm_drift
    )


@lru_cache(maxsize=3)
def observable(kind: str, cfg: TruncationConfig) -> ObservableDiag:
    """Number-diagonal observables: spin-z and particle number per well."""
    k_a, l_a, k_b, l_b = occupation_grids(cfg)
    if kind == "SzA":
        values = (k_a - l_a).astype(float)
    elif kind == "SzB":
        values = (k_b - l_b).astype(float)
    elif kind == "NA":
        values = (k_a + l_a).astype(float)
    elif kind == "NB":
        values = (k_b + l_b).astype(float)
    else:
        raise ValueError(f"kind must be one of {OBSERVABLE_KINDS}, got {kind!r}")
    values.setflags(write=False)
    return ObservableDiag(values)
