"""Correlators over Born-rule probability tables, with loss and detector models.

Three evaluation strategies for the Bell correlator at one angle pair:

  I   ratio of number-operator expectations  <S^z_A S^z_B> / <N_A N_B>
  II  sign binning: E = sum p * sgn(k_a - l_a) * sgn(k_b - l_b), sgn(0) = +1
  III sign binning with both-sides-nonvacuum postselection normalized by the
      nonvacuum probability <Pi> (the CH no-enhancement construction)

Particle loss with survival probability gamma is applied analytically through
the factors G (loss-averaged sign expectation) and H (probability that an
occupation pair drains to vacuum); detector inefficiency eta obeys identical
formulas and is exposed as a thin alias.  A brute-force binomial-thinning
oracle (lossy_probability_table) cross-checks the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .evolution import rotate
from .fockspace import StateVector, TruncationConfig, occupation_grids


class UndefinedCorrelatorError(ZeroDivisionError):
    """The correlator's normalizing denominator vanished (vacuum-only table)."""


@dataclass(frozen=True)
class LossModel:
    """Per-atom survival probability; kind records loss vs detector reading."""

    gamma: float
    kind: str = "loss"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"survival probability must be in [0, 1], got {self.gamma}")
        if self.kind not in ("loss", "detector"):
            raise ValueError(f"kind must be 'loss' or 'detector', got {self.kind!r}")


NO_LOSS = LossModel(1.0)


@dataclass
class ProbabilityTable:
    """Born-rule probabilities over the basis at one angle pair."""

    probs: np.ndarray
    angles: tuple[float, float]
    cfg: TruncationConfig


def probability_table(state: StateVector, theta_a: float, theta_b: float) -> ProbabilityTable:
    rotated = rotate(state, theta_a, theta_b)
    return ProbabilityTable(np.abs(rotated.amplitudes) ** 2, (theta_a, theta_b), state.cfg)


@dataclass(frozen=True, eq=False)
class _LabelWeights:
    """Per-ordinal weight arrays shared by the correlator sums."""

    spin_prod: np.ndarray  # (k_a - l_a)(k_b - l_b)
    num_prod: np.ndarray  # (k_a + l_a)(k_b + l_b)
    sgn_prod: np.ndarray  # sgn(k_a - l_a) sgn(k_b - l_b), sgn(0) = +1
    sgn_excl: np.ndarray  # sign product zeroed on either-side vacuum
    vac_a: np.ndarray
    vac_b: np.ndarray
    pos_a: np.ndarray  # k_a >= l_a
    pos_b: np.ndarray


@lru_cache(maxsize=3)
def _label_weights(cfg: TruncationConfig) -> _LabelWeights:
    k_a, l_a, k_b, l_b = occupation_grids(cfg)
    sgn_a = np.where(k_a >= l_a, 1.0, -1.0)
    sgn_b = np.where(k_b >= l_b, 1.0, -1.0)
    vac_a = (k_a == 0) & (l_a == 0)
    vac_b = (k_b == 0) & (l_b == 0)
    sgn_prod = sgn_a * sgn_b
    return _LabelWeights(
        spin_prod=((k_a - l_a) * (k_b - l_b)).astype(float),
        num_prod=((k_a + l_a) * (k_b + l_b)).astype(float),
        sgn_prod=sgn_prod,
        sgn_excl=np.where(vac_a | vac_b, 0.0, sgn_prod),
        vac_a=vac_a,
        vac_b=vac_b,
        pos_a=k_a >= l_a,
        pos_b=k_b >= l_b,
    )


def correlator_I(table: ProbabilityTable) -> float:
    """Normalized number-operator correlator <S^z_A S^z_B> / <N_A N_B>."""
    w = _label_weights(table.cfg)
    den = float(np.dot(table.probs, w.num_prod))
    if den <= 0.0:
        raise UndefinedCorrelatorError(f"<N_A N_B> = {den}; vacuum input has no Approach-I correlator")
    num = float(np.dot(table.probs, w.spin_prod))
    return num / den


def correlator_II(table: ProbabilityTable) -> float:
    """Full-distribution sign-binned correlator; zero spin bins to +1."""
    w = _label_weights(table.cfg)
    return float(np.dot(table.probs, w.sgn_prod))


def correlator_III(table: ProbabilityTable) -> float:
    """Sign-binned correlator excluding local vacua, normalized by <Pi>."""
    w = _label_weights(table.cfg)
    p = table.probs
    p_vac_a = float(p[w.vac_a].sum())
    p_vac_b = float(p[w.vac_b].sum())
    p_both = float(p[0])
    pi_exp = 1.0 - p_vac_a - p_vac_b + p_both
    if pi_exp <= 0.0:
        raise UndefinedCorrelatorError(f"<Pi> = {pi_exp}; vacuum input has no Approach-III correlator")
    return float(np.dot(p, w.sgn_excl)) / pi_exp


@dataclass(frozen=True)
class CHProbabilities:
    """The CH-inequality probability families at one angle pair.

    joint[(s, s')] counts both sides nonvacuum with the given sign outcomes;
    the 'any' families resolve only that a nonvacuum detection happened, so
    any_any equals <Pi> and also the sum of the four joint entries.
    """

    joint: dict[tuple[str, str], float]
    a_any: dict[str, float]
    any_b: dict[str, float]
    any_any: float


def ch_probabilities(table: ProbabilityTable) -> CHProbabilities:
    w = _label_weights(table.cfg)
    p = table.probs
    det_a = ~w.vac_a
    det_b = ~w.vac_b
    masks_a = {"+": det_a & w.pos_a, "-": ~w.pos_a}
    masks_b = {"+": det_b & w.pos_b, "-": ~w.pos_b}
    joint = {
        (sa, sb): float(p[ma & mb].sum())
        for sa, ma in masks_a.items()
        for sb, mb in masks_b.items()
    }
    a_any = {sa: float(p[ma & det_b].sum()) for sa, ma in masks_a.items()}
    any_b = {sb: float(p[det_a & mb].sum()) for sb, mb in masks_b.items()}
    return CHProbabilities(joint, a_any, any_b, float(p[det_a & det_b].sum()))


# ---------------------------------------------------------------------------
# loss factors


def kraus_amplitude(k: int, n: int, gamma: float) -> float:
    """Amplitude <k-n| F_n |k> for losing exactly n atoms out of k."""
    if n < 0 or k < 0:
        raise ValueError("occupations must be non-negative")
    if n > k:
        return 0.0
    log_c = gammaln(k + 1) - gammaln(n + 1) - gammaln(k - n + 1)
    # sqrt(C(k,n)) * sqrt(gamma^(k-n) (1-gamma)^n), with 0**0 == 1
    return float(np.exp(0.5 * log_c) * np.sqrt(gamma ** (k - n) * (1.0 - gamma) ** n))


def _binom_pmf(k: int, gamma: float) -> np.ndarray:
    """Distribution of the surviving count out of k atoms (log-domain binomials)."""
    n = np.arange(k + 1)
    log_c = gammaln(k + 1) - gammaln(n + 1) - gammaln(k - n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_g, log_1mg = np.log(gamma), np.log(1.0 - gamma)
        term = np.where(n > 0, n * log_g, 0.0) + np.where(k - n > 0, (k - n) * log_1mg, 0.0)
    return np.exp(log_c + term)


def G_factor(k: int, l: int, gamma: float) -> float:
    """Loss-averaged sign expectation: E[sgn(k' - l')] over independent thinning.

    Reduces to sgn(k - l) with sgn(0) = +1 at gamma = 1 and to exactly 1 when
    the pair is (k, 0) for any gamma (a non-negative readout spin binning to +1).
    """
    u = _binom_pmf(k, gamma)
    v = _binom_pmf(l, gamma)
    cum_u = np.cumsum(u)
    m = np.arange(l + 1)
    below = np.where(m > 0, cum_u[np.minimum(m - 1, k)], 0.0)
    p_less = float(np.dot(v, below))  # P(surviving k' < surviving l')
    return 1.0 - 2.0 * p_less


def H_factor(k: int, l: int, gamma: float) -> float:
    """Probability that the occupation pair (k, l) drains completely to vacuum."""
    return float((1.0 - gamma) ** (k + l))


@lru_cache(maxsize=32)
def _g_table(k_cut: int, gamma: float) -> np.ndarray:
    g = np.empty((k_cut + 1, k_cut + 1))
    for k in range(k_cut + 1):
        for l in range(k_cut + 1):
            g[k, l] = G_factor(k, l, gamma)
    g.setflags(write=False)
    return g


# ---------------------------------------------------------------------------
# lossy correlators


def correlator_I_loss(table: ProbabilityTable, loss: LossModel) -> float:
    """Approach I is exactly loss-independent: the survival factors cancel in
    the numerator/denominator ratio, so this simply delegates to correlator_I."""
    return correlator_I(table)


def correlator_II_loss(table: ProbabilityTable, loss: LossModel) -> float:
    k_a, l_a, k_b, l_b = occupation_grids(table.cfg)
    g = _g_table(table.cfg.k_cut, loss.gamma)
    return float(np.dot(table.probs, g[k_a, l_a] * g[k_b, l_b]))


def correlator_III_loss(table: ProbabilityTable, loss: LossModel) -> float:
    k_a, l_a, k_b, l_b = occupation_grids(table.cfg)
    p = table.probs
    g = _g_table(table.cfg.k_cut, loss.gamma)
    g_a = g[k_a, l_a]
    g_b = g[k_b, l_b]
    h_a = (1.0 - loss.gamma) ** (k_a + l_a)
    h_b = (1.0 - loss.gamma) ** (k_b + l_b)
    t_hh = float(np.dot(p, h_a * h_b))
    num = float(np.dot(p, g_a * g_b)) - float(np.dot(p, h_a * g_b)) - float(np.dot(p, g_a * h_b)) + t_hh
    den = 1.0 - float(np.dot(p, h_a)) - float(np.dot(p, h_b)) + t_hh
    if den <= 0.0:
        raise UndefinedCorrelatorError(f"Tr(Pi rho) = {den}; no nonvacuum events survive")
    return num / den


def lossy_probability_table(table: ProbabilityTable, loss: LossModel) -> ProbabilityTable:
    """Brute-force oracle: thin each mode's occupation binomially.

    The returned table is the readout distribution after independent per-atom
    loss; composing it with the lossless correlators must reproduce the
    closed-form lossy correlators.
    """
    d = table.cfg.n_per_mode
    gamma = loss.gamma
    k = np.arange(d)
    thin = np.zeros((d, d))  # thin[j, src] = P(j of src atoms survive)
    for src in range(d):
        thin[: src + 1, src] = _binom_pmf(src, gamma)
    p = table.probs.reshape(d, d, d, d)
    for _ in range(4):
        p = np.tensordot(thin, p, axes=(1, 0))
        p = np.moveaxis(p, 0, 3)
    return ProbabilityTable(np.ascontiguousarray(p).reshape(-1), table.angles, table.cfg)


# ---------------------------------------------------------------------------
# detector-inefficiency aliases: identical formulas with gamma -> eta


def correlator_I_detector(table: ProbabilityTable, eta: float) -> float:
    return correlator_I_loss(table, LossModel(eta, kind="detector"))


def correlator_II_detector(table: ProbabilityTable, eta: float) -> float:
    return correlator_II_loss(table, LossModel(eta, kind="detector"))


def correlator_III_detector(table: ProbabilityTable, eta: float) -> float:
    return correlator_III_loss(table, LossModel(eta, kind="detector"))


def detector_probability_table(table: ProbabilityTable, eta: float) -> ProbabilityTable:
    return lossy_probability_table(table, LossModel(eta, kind="detector"))
