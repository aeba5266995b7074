"""Six-mode number-conserving model and its reduction to the four-mode table."""

import numpy as np
import pytest

from splitbell.correlators import correlator_II, probability_table
from splitbell.evolution import PrepParams, prepare_bell_state
from splitbell.exacthamiltonian import (
    NumberConservedBasis,
    OccupationLabel6,
    State6,
    build_basis,
    gen_exact_scc,
    gen_split6,
    prepare_full,
    reduced_probability_table,
)
from splitbell.fockspace import occupation_grids


def basis_vector(basis, label):
    y = np.zeros(basis.dim, dtype=complex)
    y[basis.index[label]] = 1.0
    return y


@pytest.mark.parametrize("n_total,dim", [(2, 21), (4, 126), (10, 3003)])
def test_basis_dimension_is_binomial(n_total, dim):
    basis = build_basis(n_total)
    assert basis.dim == dim
    assert len(basis.labels) == dim


def test_basis_labels_conserve_the_atom_number():
    basis = build_basis(5)
    for lab in basis.labels:
        assert sum(lab) == 5
        assert all(n >= 0 for n in lab)


def test_basis_index_round_trip_and_ordering():
    basis = build_basis(4)
    for i, lab in enumerate(basis.labels):
        assert basis.index[lab] == i
    # lexicographic in the first five slots (the sixth is determined)
    firsts = [lab[:5] for lab in basis.labels]
    assert firsts == sorted(firsts)


def test_basis_rejects_tiny_atom_numbers():
    with pytest.raises(ValueError):
        build_basis(1)


@pytest.mark.parametrize("n_total", [4, 6])
def test_six_mode_generators_are_hermitian(n_total):
    assert gen_exact_scc("A", n_total).is_hermitian()
    assert gen_exact_scc("B", n_total).is_hermitian()
    assert gen_split6(n_total).is_hermitian()


def test_generators_never_change_the_atom_number():
    basis = build_basis(4)
    for gen in (gen_exact_scc("A", 4), gen_split6(4)):
        for row, col, _ in gen.entries():
            assert sum(basis.labels[row]) == sum(basis.labels[col])


def test_global_squeezer_is_well_a():
    assert gen_exact_scc("global", 6) is gen_exact_scc("A", 6)
    with pytest.raises(ValueError):
        gen_exact_scc("C", 6)


def test_pair_production_element_from_the_source_mode():
    # <1,1,N-2| G |0,0,N> = sqrt(N(N-1))/N
    n = 6
    basis = build_basis(n)
    gen = gen_exact_scc("A", n)
    out = gen.apply(basis_vector(basis, OccupationLabel6(0, 0, n, 0, 0, 0)))
    target = basis.index[OccupationLabel6(1, 1, n - 2, 0, 0, 0)]
    assert out[target] == pytest.approx(np.sqrt(n * (n - 1)) / n)
    assert np.count_nonzero(out) == 1


def test_split_generator_hops_every_mode_pair():
    n = 4
    basis = build_basis(n)
    out = gen_split6(n).apply(basis_vector(basis, OccupationLabel6(1, 0, 3, 0, 0, 0)))
    spin_hop = basis.index[OccupationLabel6(0, 0, 3, 1, 0, 0)]
    zero_hop = basis.index[OccupationLabel6(1, 0, 2, 0, 0, 1)]
    assert out[spin_hop] == pytest.approx(1j)
    assert out[zero_hop] == pytest.approx(1j * np.sqrt(3))
    assert np.count_nonzero(out) == 2


def test_prepare_full_validates_inputs():
    with pytest.raises(ValueError):
        prepare_full(-0.1, 6)
    with pytest.raises(ValueError):
        prepare_full(0.2, 3)


def test_prepare_full_returns_normalized_state():
    state = prepare_full(0.15, 6)
    assert isinstance(state, State6)
    assert isinstance(state.basis, NumberConservedBasis)
    assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=1e-13)
    assert 0.0 <= state.norm_drift < 1e-8


def test_unsqueezed_preparation_reduces_to_vacuum():
    # with r = 0 the split only shuffles m=0 atoms, which the reduction traces out
    table = reduced_probability_table(prepare_full(0.0, 6), 0.3, -0.2)
    assert table.probs[0] == pytest.approx(1.0, abs=1e-12)


def test_reduced_table_is_a_distribution_on_the_spin_modes():
    state = prepare_full(0.15, 6)
    table = reduced_probability_table(state, 0.4, 0.1)
    assert table.cfg.k_cut == 6
    assert np.all(table.probs >= 0)
    assert table.probs.sum() == pytest.approx(1.0, abs=1e-10)
    assert table.angles == (0.4, 0.1)


def test_reduced_state_balances_spin_across_wells():
    # pair production adds one +1 and one -1 atom at a time, so
    # k_a + k_b == l_a + l_b on every populated reduced label
    state = prepare_full(0.2, 6)
    table = reduced_probability_table(state, 0.0, 0.0)
    k_a, l_a, k_b, l_b = occupation_grids(table.cfg)
    off = (k_a + k_b) != (l_a + l_b)
    assert table.probs[off].sum() < 1e-12


def test_analyzer_rotations_conserve_per_well_totals():
    state = prepare_full(0.2, 6)
    k_a, l_a, k_b, l_b = occupation_grids(reduced_probability_table(state, 0, 0).cfg)

    def well_totals(table):
        tot = np.zeros((13, 13))  # grid totals range up to 2 * k_cut
        np.add.at(tot, (k_a + l_a, k_b + l_b), table.probs)
        return tot

    straight = well_totals(reduced_probability_table(state, 0.0, 0.0))
    turned = well_totals(reduced_probability_table(state, 1.1, -0.5))
    np.testing.assert_allclose(turned, straight, atol=1e-10)


def test_reduced_correlator_tracks_the_bosonic_approximation():
    # at modest atom number the exact model already follows the four-mode
    # pipeline; tight percent-level agreement at N=10 is covered by the
    # acceptance checks
    r, ta, tb = 0.1, 0.3, 0.1
    full = prepare_full(r, 8)
    exact = correlator_II(reduced_probability_table(full, ta, tb))
    cfg = reduced_probability_table(full, 0.0, 0.0).cfg
    approx_state = prepare_bell_state(PrepParams(r), cfg)
    approx = correlator_II(probability_table(approx_state, ta, tb))
    assert exact == pytest.approx(approx, abs=0.05)
