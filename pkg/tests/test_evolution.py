"""ODE propagation, the analytic rotation fast path, and state preparation."""

import numpy as np
import pytest

from splitbell.evolution import (
    IntegrationError,
    IntegratorConfig,
    PrepParams,
    evolve,
    prepare_bell_state,
    rotate,
    tms_closed_form,
)
from splitbell.fockspace import (
    FockLabel,
    StateVector,
    TruncationConfig,
    basis_state,
    boundary_mass,
    index_of,
    norm,
    occupation_grids,
    vacuum,
)
from splitbell.operators import apply_pi_gate, gen_rotation_y, gen_split, gen_tms_global


def random_state(cfg, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim)
    amps /= np.linalg.norm(amps)
    return StateVector(amps, cfg, 0.0)


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(atol=-1e-12)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)


def test_prep_params_validation():
    with pytest.raises(ValueError):
        PrepParams(r=-0.1)
    with pytest.raises(ValueError):
        PrepParams(r=0.1, desqueeze_scale=-1.0)


def test_evolve_zero_parameter_copies():
    state = vacuum(TruncationConfig(2))
    out = evolve(state, gen_split(state.cfg), 0.0)
    np.testing.assert_array_equal(out.amplitudes, state.amplitudes)
    assert out.amplitudes is not state.amplitudes


def test_evolve_rejects_dimension_mismatch():
    state = vacuum(TruncationConfig(2))
    with pytest.raises(ValueError):
        evolve(state, gen_split(TruncationConfig(3)), 0.1)


def test_evolve_preserves_norm():
    cfg = TruncationConfig(4)
    state = random_state(cfg, 21)
    out = evolve(state, gen_split(cfg), 0.73)
    assert norm(out) == pytest.approx(1.0, abs=1e-11)


def test_evolve_raises_when_step_budget_is_exhausted():
    cfg = TruncationConfig(4)
    with pytest.raises(IntegrationError) as info:
        evolve(vacuum(cfg), gen_tms_global(cfg), 2.0, IntegratorConfig(max_steps=2))
    err = info.value
    assert err.requested == 2.0
    assert err.steps == 2
    assert 0.0 <= err.achieved < 2.0


def test_squeezer_matches_closed_form_when_truncation_is_negligible():
    # tanh(0.12)^16 ~ 1e-15, so evolve() must hit the closed form at the
    # integrator tolerance across the whole vector
    cfg = TruncationConfig(16)
    out = evolve(vacuum(cfg), gen_tms_global(cfg), 0.12)
    ref = tms_closed_form(0.12, cfg)
    np.testing.assert_allclose(out.amplitudes, ref.amplitudes, rtol=0.0, atol=1e-10)


@pytest.mark.parametrize("k_cut,r", [(12, 0.3), (10, 0.5)])
def test_squeezer_deviation_is_bounded_by_the_truncated_tail(k_cut, r):
    # the truncated generator back-reacts near the cutoff; the discrepancy is
    # confined to the boundary shell and bounded by the tail weight tanh(r)^kc
    cfg = TruncationConfig(k_cut)
    out = evolve(vacuum(cfg), gen_tms_global(cfg), r)
    ref = tms_closed_form(r, cfg)
    diff = np.abs(out.amplitudes - ref.amplitudes)
    assert diff.max() < np.tanh(r) ** k_cut
    for k in range(k_cut // 2 + 1):
        i = index_of(FockLabel(k, k, 0, 0), cfg)
        assert diff[i] < 1e-4 * abs(ref.amplitudes[i])


def test_closed_form_amplitudes_and_support():
    cfg = TruncationConfig(5)
    r = 0.4
    state = tms_closed_form(r, cfg)
    th, ch = np.tanh(r), np.cosh(r)
    for k in range(6):
        amp = state.amplitudes[index_of(FockLabel(k, k, 0, 0), cfg)]
        assert amp == pytest.approx((1 / ch) * (-1j * th) ** k)
    assert np.count_nonzero(state.amplitudes) == 6
    # truncated geometric tail: squared norm = 1 - tanh(r)^(2(k_cut+1))
    assert norm(state) ** 2 == pytest.approx(1 - th ** 12, rel=1e-12)


def test_closed_form_rejects_negative_r():
    with pytest.raises(ValueError):
        tms_closed_form(-0.2, TruncationConfig(3))


def test_split_of_a_single_atom_is_balanced():
    cfg = TruncationConfig(3)
    out = evolve(basis_state(FockLabel(1, 0, 0, 0), cfg), gen_split(cfg), np.pi / 4)
    a = out.amplitudes[index_of(FockLabel(1, 0, 0, 0), cfg)]
    b = out.amplitudes[index_of(FockLabel(0, 0, 1, 0), cfg)]
    assert a == pytest.approx(np.sqrt(0.5), abs=1e-9)
    assert b == pytest.approx(np.sqrt(0.5), abs=1e-9)


def test_rotation_of_a_single_atom():
    cfg = TruncationConfig(3)
    theta = 0.37
    out = evolve(basis_state(FockLabel(1, 0, 0, 0), cfg), gen_rotation_y("A", cfg), theta)
    kept = out.amplitudes[index_of(FockLabel(1, 0, 0, 0), cfg)]
    flipped = out.amplitudes[index_of(FockLabel(0, 1, 0, 0), cfg)]
    assert kept == pytest.approx(np.cos(theta), abs=1e-9)
    assert flipped == pytest.approx(-np.sin(theta), abs=1e-9)


def test_rotate_identity_and_unitarity():
    cfg = TruncationConfig(4)
    state = random_state(cfg, 9)
    same = rotate(state, 0.0, 0.0)
    np.testing.assert_allclose(same.amplitudes, state.amplitudes, atol=1e-14)
    turned = rotate(state, 0.8, -1.3)
    assert norm(turned) == pytest.approx(1.0, abs=1e-12)


def test_rotate_composes_additively():
    cfg = TruncationConfig(4)
    state = random_state(cfg, 31)
    once = rotate(state, 0.5, 0.2)
    twice = rotate(once, 0.3, -0.7)
    direct = rotate(state, 0.8, -0.5)
    np.testing.assert_allclose(twice.amplitudes, direct.amplitudes, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_rotate_agrees_with_ode_rotation(seed):
    # the analytic sector-block rotation must track the ODE to 1e-9
    cfg = TruncationConfig(4)
    rng = np.random.default_rng(100 + seed)
    theta_a, theta_b = rng.uniform(-np.pi, np.pi, size=2)
    state = random_state(cfg, seed)
    fast = rotate(state, theta_a, theta_b)
    slow = evolve(state, gen_rotation_y("A", cfg), theta_a)
    slow = evolve(slow, gen_rotation_y("B", cfg), theta_b)
    assert np.max(np.abs(fast.amplitudes - slow.amplitudes)) < 1e-9


def test_rotate_agrees_with_ode_on_prepared_state():
    cfg = TruncationConfig(6)
    state = prepare_bell_state(PrepParams(0.2), cfg)
    fast = rotate(state, 3 * np.pi / 8, np.pi / 4)
    slow = evolve(state, gen_rotation_y("A", cfg), 3 * np.pi / 8)
    slow = evolve(slow, gen_rotation_y("B", cfg), np.pi / 4)
    assert np.max(np.abs(fast.amplitudes - slow.amplitudes)) < 1e-9


def test_prepare_at_zero_squeezing_is_vacuum():
    cfg = TruncationConfig(4)
    state = prepare_bell_state(PrepParams(0.0), cfg)
    np.testing.assert_array_equal(state.amplitudes, vacuum(cfg).amplitudes)


def test_prepare_returns_unit_norm_with_recorded_drift():
    cfg = TruncationConfig(8)
    state = prepare_bell_state(PrepParams(0.2), cfg)
    assert norm(state) == pytest.approx(1.0, abs=1e-13)
    assert 0.0 <= state.norm_drift < 1e-8
    assert boundary_mass(state) < 1e-5


def test_prepared_state_pairs_opposite_spins_across_wells():
    # leading order in r: i*r on (1,0,0,1) and (0,1,1,0); the same-well pair
    # amplitudes are cancelled by the desqueezers
    cfg = TruncationConfig(6)
    r = 0.02
    state = prepare_bell_state(PrepParams(r), cfg)
    cross_1 = state.amplitudes[index_of(FockLabel(1, 0, 0, 1), cfg)]
    cross_2 = state.amplitudes[index_of(FockLabel(0, 1, 1, 0), cfg)]
    for amp in (cross_1, cross_2):
        assert abs(amp.real) < 1e-8
        assert amp.imag == pytest.approx(r, rel=5 * r)
    assert abs(cross_1 - cross_2) < 1e-10
    local_a = state.amplitudes[index_of(FockLabel(1, 1, 0, 0), cfg)]
    local_b = state.amplitudes[index_of(FockLabel(0, 0, 1, 1), cfg)]
    assert abs(local_a) < 1e-9
    assert abs(local_b) < 1e-9


def test_prepared_state_conserves_spin_balance():
    # every populated label keeps k_a + k_b == l_a + l_b
    cfg = TruncationConfig(8)
    state = prepare_bell_state(PrepParams(0.3), cfg)
    k_a, l_a, k_b, l_b = occupation_grids(cfg)
    off = (k_a + k_b) != (l_a + l_b)
    assert np.sum(np.abs(state.amplitudes[off]) ** 2) < 1e-10


def test_desqueeze_scale_zero_stops_after_the_split():
    cfg = TruncationConfig(6)
    r = 0.2
    bare = prepare_bell_state(PrepParams(r, desqueeze_scale=0.0), cfg)
    # same pipeline assembled by hand, without the local desqueezers
    state = evolve(vacuum(cfg), gen_tms_global(cfg), 2 * r)
    state = apply_pi_gate(state)
    state = evolve(state, gen_split(cfg), np.pi / 4)
    manual = state.amplitudes / norm(state)
    np.testing.assert_allclose(bare.amplitudes, manual, atol=1e-12)
    full = prepare_bell_state(PrepParams(r), cfg)
    assert np.max(np.abs(full.amplitudes - bare.amplitudes)) > 1e-3
