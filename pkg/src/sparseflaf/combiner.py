"""Block-based convex combination of the two expanded-domain filters.

The coefficient vectors are split into ``n_blocks`` groups of links per
input sample; block ``l`` of every sample shares one mixing parameter
``lambda_l`` in [0, 1] that blends the two filters' partial outputs.
Each mixing parameter is driven through a sigmoid by an auxiliary
parameter ``a_l`` adapted from the overall error, normalized by a running
power estimate of the per-block output difference.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .expansion import ExpansionConfig, block_slice, block_width
from .filters import (LinearFilterState, ProportionateFlafState, ZaFlafState,
                      nlms_step, pflaf_step, update_power_estimates,
                      vss_rza_step)

# sigmoid endpoints: lambda hits exactly 0 / 1 at a = -4 / +4
THETA = 1.0 / (1.0 + math.exp(4.0))
ETA = 1.0 / (1.0 - 2.0 * THETA)
A_LIMIT = 4.0
R_FLOOR = 1e-12


def lambda_from_a(a: float) -> float:
    """Map an auxiliary parameter to its mixing parameter in [0, 1]."""
    lam = ETA * (1.0 / (1.0 + math.exp(-a)) - THETA)
    return min(1.0, max(0.0, lam))


@dataclass
class CombinerState:
    """Per-block mixing parameters of the convex combination.

    ``lam`` always equals the sigmoid image of ``a``; ``r`` tracks the
    power of each block's output difference and normalizes the ``a``
    adaptation.
    """

    n_blocks: int
    a: np.ndarray
    lam: np.ndarray
    r: np.ndarray
    mu_c: float = 0.1
    beta_r: float = 0.9

    @classmethod
    def fresh(cls, n_blocks: int, mu_c: float = 0.1, beta_r: float = 0.9,
              a_init: float = 0.0, r_init: float = 1.0) -> "CombinerState":
        if n_blocks < 1:
            raise ConfigurationError(f"n_blocks must be positive, got {n_blocks}")
        a0 = min(A_LIMIT, max(-A_LIMIT, float(a_init)))
        a = np.full(n_blocks, a0)
        lam = np.array([lambda_from_a(v) for v in a])
        return cls(n_blocks, a, lam, np.full(n_blocks, float(r_init)), mu_c, beta_r)

    def copy(self) -> "CombinerState":
        return CombinerState(self.n_blocks, self.a.copy(), self.lam.copy(),
                             self.r.copy(), self.mu_c, self.beta_r)


@dataclass
class BranchOutputs:
    """All per-sample outputs and errors of the combined scheme.

    By construction ``e = d - (y_l + y_fl)`` and
    ``e_flj = d - (y_l + y_flj)`` for each component filter.
    """

    d: float
    y_l: float
    y_fl1: float
    y_fl2: float
    y_fl: float
    e: float
    e_fl1: float
    e_fl2: float


def _block_partials(g: np.ndarray, w: np.ndarray, cfg: ExpansionConfig,
                    n_blocks: int) -> np.ndarray:
    """Per-block partial outputs: entry l-1 sums g*w over block l of all samples."""
    mb = block_width(cfg, n_blocks)
    prod = (g * w).reshape(cfg.M, n_blocks, mb)
    return prod.sum(axis=(0, 2))


def combined_output(g, w1, w2, state: CombinerState, cfg: ExpansionConfig) -> float:
    """Blockwise convex mix of the two filters' outputs.

    The same ``lambda_l`` applies to block l of every input sample, matching
    the periodic layout of the expansion.
    """
    g = np.asarray(g, dtype=np.float64)
    p1 = _block_partials(g, np.asarray(w1, dtype=np.float64), cfg, state.n_blocks)
    p2 = _block_partials(g, np.asarray(w2, dtype=np.float64), cfg, state.n_blocks)
    return float(state.lam @ p1 + (1.0 - state.lam) @ p2)


def block_delta(g, w1, w2, block_index: int, cfg: ExpansionConfig,
                n_blocks: int) -> float:
    """Output difference the two filters produce on one block, summed over samples."""
    dw = np.asarray(w1, dtype=np.float64) - np.asarray(w2, dtype=np.float64)
    total = 0.0
    for i in range(cfg.M):
        gs = block_slice(g, i, block_index, n_blocks, cfg)
        ws = block_slice(dw, i, block_index, n_blocks, cfg)
        total += float(np.asarray(gs, dtype=np.float64) @ ws)
    return total


def update_mixing(state: CombinerState, e: float, deltas) -> CombinerState:
    """Adapt the auxiliary parameters from the overall error.

    Uses the previous delta-power estimate ``r_l`` for normalization, clips
    ``a_l`` to [-4, 4] to avoid sigmoid stalling, and refreshes ``r_l``
    after the update.  Blocks whose ``r_l`` underflowed are skipped for
    that sample so no division blows up before signal energy arrives.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    for l in range(state.n_blocks):
        r_prev = state.r[l]
        if r_prev >= R_FLOOR:
            lam = state.lam[l]
            gain = (lam + THETA * ETA) * (ETA - THETA * ETA - lam)
            a_new = state.a[l] + state.mu_c / (ETA * r_prev) * e * deltas[l] * gain
            state.a[l] = min(A_LIMIT, max(-A_LIMIT, a_new))
            state.lam[l] = lambda_from_a(state.a[l])
        state.r[l] = state.beta_r * r_prev + (1.0 - state.beta_r) * deltas[l] * deltas[l]
    return state


def combiner_sample_step(d: float, x, g, linear: LinearFilterState,
                         f1: ZaFlafState, f2: ProportionateFlafState,
                         comb: CombinerState,
                         cfg: ExpansionConfig) -> BranchOutputs:
    """One full sample of the combined scheme.

    Outputs, errors and block deltas are computed with pre-update
    quantities; then the l1 filter adapts with its own branch error, the
    proportionate filter with its branch error, and the linear filter and
    the mixing parameters with the overall error.
    """
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)

    y_l = float(x @ linear.w)
    y_fl1 = float(g @ f1.w)
    y_fl2 = float(g @ f2.w)
    p1 = _block_partials(g, f1.w, cfg, comb.n_blocks)
    p2 = _block_partials(g, f2.w, cfg, comb.n_blocks)
    y_fl = float(comb.lam @ p1 + (1.0 - comb.lam) @ p2)

    e = d - y_l - y_fl
    e_fl1 = d - y_l - y_fl1
    e_fl2 = d - y_l - y_fl2
    deltas = p1 - p2

    update_power_estimates(f1, d, y_l, y_fl1, e_fl1)
    vss_rza_step(f1, g, e_fl1)
    pflaf_step(f2, g, e_fl2)
    nlms_step(linear, x, e)
    update_mixing(comb, e, deltas)

    return BranchOutputs(d=d, y_l=y_l, y_fl1=y_fl1, y_fl2=y_fl2, y_fl=y_fl,
                         e=e, e_fl1=e_fl1, e_fl2=e_fl2)
