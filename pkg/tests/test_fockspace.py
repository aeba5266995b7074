"""Indexing, state containers and sector bookkeeping for the four-mode space."""

import numpy as np
import pytest

from splitbell.fockspace import (
    FockLabel,
    SectorKey,
    StateVector,
    TruncationConfig,
    basis_state,
    boundary_mass,
    index_of,
    label_of,
    norm,
    occupation_grids,
    sector_marginal,
    sector_matrix,
    vacuum,
)


def test_dim_counts_all_labels():
    cfg = TruncationConfig(k_cut=3)
    assert cfg.n_per_mode == 4
    assert cfg.dim == 4**4


@pytest.mark.parametrize("k_cut", [1, 2, 5])
def test_index_label_roundtrip(k_cut):
    cfg = TruncationConfig(k_cut)
    for ordinal in range(cfg.dim):
        label = label_of(ordinal, cfg)
        assert index_of(label, cfg) == ordinal
        assert all(0 <= n <= k_cut for n in label)


def test_vacuum_is_ordinal_zero():
    cfg = TruncationConfig(4)
    assert index_of(FockLabel(0, 0, 0, 0), cfg) == 0
    state = vacuum(cfg)
    assert state.amplitudes[0] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1


def test_last_mode_runs_fastest():
    # C-order flattening: incrementing l_b moves the ordinal by one.
    cfg = TruncationConfig(3)
    base = index_of(FockLabel(1, 2, 3, 0), cfg)
    assert index_of(FockLabel(1, 2, 3, 1), cfg) == base + 1
    assert index_of(FockLabel(1, 2, 3, 2), cfg) == base + 2


def test_index_of_rejects_out_of_range():
    cfg = TruncationConfig(2)
    with pytest.raises(ValueError):
        index_of(FockLabel(3, 0, 0, 0), cfg)
    with pytest.raises(ValueError):
        index_of(FockLabel(0, -1, 0, 0), cfg)


def test_label_of_rejects_bad_ordinal():
    cfg = TruncationConfig(2)
    with pytest.raises(ValueError):
        label_of(cfg.dim, cfg)
    with pytest.raises(ValueError):
        label_of(-1, cfg)


def test_truncation_config_requires_positive_cutoff():
    with pytest.raises(ValueError):
        TruncationConfig(0)


def test_occupation_grids_match_label_of():
    cfg = TruncationConfig(3)
    grids = occupation_grids(cfg)
    assert len(grids) == 4
    for ordinal in range(0, cfg.dim, 17):
        label = label_of(ordinal, cfg)
        assert tuple(int(g[ordinal]) for g in grids) == tuple(label)


def test_basis_state_is_unit_vector():
    cfg = TruncationConfig(3)
    label = FockLabel(1, 0, 2, 3)
    state = basis_state(label, cfg)
    assert norm(state) == 1.0
    assert state.amplitudes[index_of(label, cfg)] == 1.0


def test_boundary_mass_sees_only_saturated_labels():
    cfg = TruncationConfig(2)
    amps = np.zeros(cfg.dim, dtype=complex)
    amps[index_of(FockLabel(1, 1, 0, 0), cfg)] = np.sqrt(0.75)
    amps[index_of(FockLabel(2, 0, 1, 0), cfg)] = 0.5  # k_a hits the cutoff
    state = StateVector(amps, cfg, 0.0)
    assert boundary_mass(state) == pytest.approx(0.25, abs=1e-15)
    assert boundary_mass(vacuum(cfg)) == 0.0


def test_sector_marginal_of_vacuum():
    state = vacuum(TruncationConfig(2))
    marg = sector_marginal(state)
    assert marg == {SectorKey(0, 0): pytest.approx(1.0)}


def test_sector_marginal_sums_to_one_and_drops_zeros():
    cfg = TruncationConfig(3)
    rng = np.random.default_rng(7)
    amps = rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim)
    amps /= np.linalg.norm(amps)
    marg = sector_marginal(StateVector(amps, cfg, 0.0))
    assert sum(marg.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(w > 0 for w in marg.values())
    # every (N_A, N_B) pair up to the cutoff is populated for a dense state
    assert len(marg) == 7 * 7


def test_sector_matrix_places_probabilities_by_occupation():
    cfg = TruncationConfig(3)
    amps = np.zeros(cfg.dim, dtype=complex)
    amps[index_of(FockLabel(2, 0, 1, 1), cfg)] = np.sqrt(0.5)
    amps[index_of(FockLabel(1, 1, 2, 0), cfg)] = np.sqrt(0.5)
    state = StateVector(amps, cfg, 0.0)
    mat = sector_matrix(state, SectorKey(2, 2))
    assert mat.shape == (3, 3)
    assert mat[2, 1] == pytest.approx(0.5)
    assert mat[1, 2] == pytest.approx(0.5)
    assert mat.sum() == pytest.approx(1.0)


def test_sector_matrix_agrees_with_marginal():
    cfg = TruncationConfig(3)
    rng = np.random.default_rng(11)
    amps = rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim)
    amps /= np.linalg.norm(amps)
    state = StateVector(amps, cfg, 0.0)
    marg = sector_marginal(state)
    for sector in (SectorKey(0, 0), SectorKey(2, 3), SectorKey(3, 3)):
        assert sector_matrix(state, sector).sum() == pytest.approx(
            marg.get(sector, 0.0), abs=1e-14
        )


def test_sector_matrix_rejects_sector_beyond_cutoff():
    state = vacuum(TruncationConfig(2))
    with pytest.raises(ValueError):
        sector_matrix(state, SectorKey(5, 0))
