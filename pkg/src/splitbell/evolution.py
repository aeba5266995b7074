"""State propagation: Schrodinger evolution, the preparation sequence, rotations.

evolve() integrates i d|psi>/ds = G|psi> with an adaptive embedded Runge-Kutta
pair (scipy's DOP853) driven by the dimensionless stage parameter itself --
squeezing r, splitting angle, or rotation angle; no physical time appears
anywhere.  The full preparation is

    squeeze(2r)  ->  pi-gate  ->  split(pi/4)  ->  desqueeze_A(r), desqueeze_B(r)

with the desqueezing duration scaled by PrepParams.desqueeze_scale for
sensitivity studies.  The state is renormalized once at the very end and the
accumulated drift recorded; renormalizing mid-sequence would mask integrator
failure, so it is deliberately not done.

Measurement-basis rotations are applied analytically: the spin-y generator is
block-diagonal in the per-well particle number n, so each sector is rotated by
the exact binomial beamsplitter expansion (sectors that fit the truncation) or
by the exponential of the truncated generator block (boundary sectors, which
keeps the map unitary and identical to the ODE path on the truncated space).
"""

from __future__ import annotations

import gc
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, sparse
from scipy.linalg import expm
from scipy.special import gammaln

from .fockspace import StateVector, TruncationConfig, norm, vacuum
from .operators import SparseGenerator, apply_pi_gate, gen_split, gen_tms_global, gen_tms_local


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 100_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integrator tolerances must be strictly positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class PrepParams:
    """Preparation inputs: squeezing r and the desqueezing-duration multiplier."""

    r: float
    desqueeze_scale: float = 1.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.desqueeze_scale < 0:
            raise ValueError(f"desqueeze_scale must be >= 0, got {self.desqueeze_scale}")


class IntegrationError(RuntimeError):
    """Propagation ran out of steps or the controller gave up."""

    def __init__(self, requested: float, achieved: float, steps: int, reason: str):
        super().__init__(
            f"integration {reason} at s={achieved:.6g} of requested {requested:.6g} "
            f"after {steps} steps"
        )
        self.requested = requested
        self.achieved = achieved
        self.steps = steps


def _propagate(y0: np.ndarray, mat: sparse.csr_matrix, parameter: float, integ: IntegratorConfig) -> np.ndarray:
    """Step i dy/ds = M y from s=0 to s=parameter with DOP853; raw-array core."""

    def rhs(_s, y):
        return mat.dot(y) * (-1j)

    stepper = integrate.DOP853(rhs, 0.0, y0, t_bound=parameter, rtol=integ.rtol, atol=integ.atol)
    try:
        steps = 0
        while stepper.status == "running":
            if steps >= integ.max_steps:
                raise IntegrationError(parameter, stepper.t, steps, "exhausted max_steps")
            stepper.step()
            steps += 1
        if stepper.status == "failed":
            raise IntegrationError(parameter, stepper.t, steps, "failed")
        return stepper.y
    finally:
        # The stepper's (n_stages + 1) x dim stage arrays end up in reference
        # cycles, and the cycle collector triggers on object counts, not bytes;
        # at large k_cut a handful of uncollected steppers exhausts memory, so
        # reclaim them before the caller allocates the next stage's arrays.
        del stepper
        gc.collect()


def evolve(
    state: StateVector,
    gen: SparseGenerator,
    parameter: float,
    integ: IntegratorConfig | None = None,
) -> StateVector:
    """Propagate i d|psi>/ds = G|psi> from s=0 to s=parameter."""
    if gen.dim != state.cfg.dim:
        raise ValueError(f"generator dim {gen.dim} does not match state dim {state.cfg.dim}")
    if integ is None:
        integ = IntegratorConfig()
    if parameter == 0.0:
        return StateVector(state.amplitudes.copy(), state.cfg, state.norm_drift)
    y = _propagate(state.amplitudes.astype(complex), gen.matrix, parameter, integ)
    return StateVector(y, state.cfg, state.norm_drift)


def prepare_bell_state(
    params: PrepParams,
    cfg: TruncationConfig,
    integ: IntegratorConfig | None = None,
) -> StateVector:
    """Run the full preparation sequence on the vacuum.

    Stage parameters: the pre-split squeezing evolves by 2r (the generator is
    dimensionless and the pre-split pair-creation rate carries the full
    condensate), while each post-split desqueezer evolves by r -- the split
    halves the local pair-creation rate, and the pi-gate in between flips the
    effective sign so the local squeezing cancels instead of doubling.
    """
    state = vacuum(cfg)
    if params.r == 0.0:
        return state
    state = evolve(state, gen_tms_global(cfg), 2.0 * params.r, integ)
    state = apply_pi_gate(state)
    state = evolve(state, gen_split(cfg), np.pi / 4.0, integ)
    s_local = params.desqueeze_scale * params.r
    state = evolve(state, gen_tms_local("A", cfg), s_local, integ)
    state = evolve(state, gen_tms_local("B", cfg), s_local, integ)
    nrm = norm(state)
    drift = abs(nrm - 1.0)
    return StateVector(state.amplitudes / nrm, cfg, drift)


def tms_closed_form(r: float, cfg: TruncationConfig) -> StateVector:
    """Two-mode squeezed vacuum on the A modes: sech(r) (-i tanh r)^k at (k,k,0,0).

    The closed form truncated at k_cut; used as the oracle for evolve() and
    left unnormalized (the missing geometric tail is the truncation error).
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    d = cfg.n_per_mode
    k = np.arange(d)
    amps = np.zeros(cfg.dim, dtype=np.complex128)
    amps[k * d * d * (d + 1)] = (1.0 / np.cosh(r)) * (-1j * np.tanh(r)) ** k
    return StateVector(amps, cfg)


def _rotation_block_exact(n: int, theta: float) -> np.ndarray:
    """Beamsplitter rotation on a complete n-particle sector, (n+1)x(n+1).

    Column k holds V |k, n-k>: expanding (cos a1+ - sin a-1+)^k
    (sin a1+ + cos a-1+)^(n-k) binomially gives a polynomial convolution,
    normalized by the square-root factorial weights.
    """
    c, s = np.cos(theta), np.sin(theta)
    lg = gammaln(np.arange(n + 2))  # lg[m] = log(m-1)!... indexed as gammaln(m+1) below
    block = np.empty((n + 1, n + 1))
    for k in range(n + 1):
        l = n - k
        i = np.arange(k + 1)
        j = np.arange(l + 1)
        p1 = np.exp(lg[k + 1] - lg[i + 1] - lg[k - i + 1]) * c**i * (-s) ** (k - i)
        p2 = np.exp(lg[l + 1] - lg[j + 1] - lg[l - j + 1]) * s**j * c ** (l - j)
        conv = np.convolve(p1, p2)
        kp = np.arange(n + 1)
        weight = np.exp(0.5 * (gammaln(kp + 1) + gammaln(n - kp + 1) - lg[k + 1] - lg[l + 1]))
        block[:, k] = conv * weight
    return block


def _rotation_block_boundary(n: int, k_cut: int, theta: float) -> np.ndarray:
    """Rotation on a truncated sector (n > k_cut): expm of the clipped generator.

    The binomial expansion would reach occupations beyond k_cut, so instead the
    spin-y block restricted to the surviving labels is exponentiated exactly;
    this is unitary and agrees with ODE evolution under the same truncation.
    """
    ks = np.arange(n - k_cut, k_cut + 1)
    m = len(ks)
    gen = np.zeros((m, m), dtype=np.complex128)
    for a, k in enumerate(ks):
        l = n - k
        if a + 1 < m:  # entry <k+1, l-1| S |k, l>
            gen[a + 1, a] = 1j * np.sqrt(l * (k + 1.0))
        if a > 0:  # entry <k-1, l+1| S |k, l>
            gen[a - 1, a] = -1j * np.sqrt(k * (l + 1.0))
    return expm(-1j * theta * gen).real


@lru_cache(maxsize=64)
def _well_rotation(k_cut: int, theta: float) -> sparse.csr_matrix:
    """Single-well rotation matrix over the (k, l) pair basis, block-diagonal in n."""
    d = k_cut + 1
    rows, cols, vals = [], [], []
    for n in range(2 * k_cut + 1):
        if n <= k_cut:
            ks = np.arange(n + 1)
            block = _rotation_block_exact(n, theta)
        else:
            ks = np.arange(n - k_cut, k_cut + 1)
            block = _rotation_block_boundary(n, k_cut, theta)
        w = ks * d + (n - ks)  # well-local flat indices of the sector's labels
        r, c = np.meshgrid(w, w, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
    mat = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(d * d, d * d),
    ).tocsr()
    return mat


def rotate(state: StateVector, theta_a: float, theta_b: float) -> StateVector:
    """Apply the measurement-basis rotation V(theta_a, theta_b) analytically."""
    d = state.cfg.n_per_mode
    dw = d * d
    r_a = _well_rotation(state.cfg.k_cut, theta_a)
    r_b = _well_rotation(state.cfg.k_cut, theta_b)
    mat = state.amplitudes.reshape(dw, dw)
    out = r_a.dot(mat)
    out = r_b.dot(out.T).T
    return StateVector(np.ascontiguousarray(out).reshape(-1), state.cfg, state.norm_drift)
