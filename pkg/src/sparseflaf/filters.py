"""Per-sample weight-update cores.

Three streaming filters share this module: an NLMS filter for the linear
branch, a proportionate filter for the expanded nonlinear branch, and a
variable-step-size reweighted-zero-attractor filter (the l1-regularized
branch).  Both nonlinear filters scale their coefficient updates by the
same proportionate weighting rule.

All update functions mutate the passed state in place and return it;
hyperparameters are never touched by an update.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


def proportionate_weights(w, alpha: float, xi: float) -> np.ndarray:
    """Diagonal of the proportionate weighting matrix for coefficients ``w``.

    Each entry is ``(1 - alpha)/(2*Me) + (1 + alpha)*|w_k| / (2*||w||_1 + xi)``,
    so the entries sum to 1 up to the slack introduced by ``xi``.  ``alpha``
    close to 1 rewards large coefficients (sparse responses); ``alpha = -1``
    degenerates to uniform weights ``1/Me``.
    """
    w = np.asarray(w, dtype=np.float64)
    me = w.size
    aw = np.abs(w)
    return (1.0 - alpha) / (2.0 * me) + (1.0 + alpha) * aw / (2.0 * aw.sum() + xi)


def _check_weighting_params(alpha: float, xi: float) -> None:
    if not -1.0 <= alpha <= 1.0:
        raise ConfigurationError(f"proportionality factor alpha={alpha} outside [-1, 1]")
    if xi <= 0.0:
        raise ConfigurationError(f"weighting regularizer xi={xi} must be positive")


@dataclass
class LinearFilterState:
    """NLMS filter on the raw tap-delay window."""

    w: np.ndarray
    mu: float = 0.1
    delta: float = 1e-3

    @classmethod
    def zeros(cls, m: int, mu: float = 0.1, delta: float = 1e-3) -> "LinearFilterState":
        return cls(np.zeros(m), mu, delta)

    def copy(self) -> "LinearFilterState":
        return LinearFilterState(self.w.copy(), self.mu, self.delta)


def nlms_step(state: LinearFilterState, x, err: float) -> LinearFilterState:
    """Normalized LMS update driven by the overall error of the scheme."""
    x = np.asarray(x, dtype=np.float64)
    state.w = state.w + state.mu * err * x / (x @ x + state.delta)
    return state


@dataclass
class ProportionateFlafState:
    """Proportionate filter on the expanded functional-link vector."""

    w: np.ndarray
    mu: float = 0.1
    delta: float = 1e-3
    alpha: float = 0.0
    xi: float = 0.01

    def __post_init__(self):
        _check_weighting_params(self.alpha, self.xi)

    @classmethod
    def zeros(cls, me: int, **kwargs) -> "ProportionateFlafState":
        return cls(np.zeros(me), **kwargs)

    def copy(self) -> "ProportionateFlafState":
        return ProportionateFlafState(self.w.copy(), self.mu, self.delta,
                                      self.alpha, self.xi)


def pflaf_step(state: ProportionateFlafState, g, e_fl2: float) -> ProportionateFlafState:
    """Proportionate update with the branch error ``e_fl2``.

    The weighting diagonal is recomputed from the pre-update coefficients
    on every call.
    """
    g = np.asarray(g, dtype=np.float64)
    q = proportionate_weights(state.w, state.alpha, state.xi)
    qg = q * g
    state.w = state.w + state.mu * e_fl2 * qg / (qg @ g + state.delta)
    return state


@dataclass
class ZaFlafState:
    """Reweighted-zero-attractor proportionate filter (l1 branch).

    Besides the coefficient vector it carries running power estimates of
    the desired signal, the two branch outputs and its own error, which
    feed the nonparametric variable step size controlling the attractor
    strength.
    """

    w: np.ndarray
    mu: float = 0.1
    delta: float = 1e-3
    gamma: float = 1e-5      # l1 penalty weight
    epsilon: float = 1e-2    # reweighting constant
    beta: float = 0.99       # power-estimate forgetting factor
    alpha: float = 0.0
    xi: float = 0.01         # weighting-matrix regularizer
    xi_vss: float = 0.01     # variable-step-size regularizer
    pow_d: float = 0.0
    pow_y_lin: float = 0.0
    pow_y_fl: float = 0.0
    pow_e_fl: float = 0.0

    def __post_init__(self):
        _check_weighting_params(self.alpha, self.xi)
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError(f"forgetting factor beta={self.beta} outside (0, 1)")

    @classmethod
    def zeros(cls, me: int, **kwargs) -> "ZaFlafState":
        return cls(np.zeros(me), **kwargs)

    def copy(self) -> "ZaFlafState":
        return ZaFlafState(self.w.copy(), self.mu, self.delta, self.gamma,
                           self.epsilon, self.beta, self.alpha, self.xi,
                           self.xi_vss, self.pow_d, self.pow_y_lin,
                           self.pow_y_fl, self.pow_e_fl)


def update_power_estimates(state: ZaFlafState, d: float, y_lin: float,
                           y_fl: float, e_fl: float) -> ZaFlafState:
    """Exponentially smoothed power estimates, one recursion per sequence."""
    b = state.beta
    state.pow_d = b * state.pow_d + (1.0 - b) * d * d
    state.pow_y_lin = b * state.pow_y_lin + (1.0 - b) * y_lin * y_lin
    state.pow_y_fl = b * state.pow_y_fl + (1.0 - b) * y_fl * y_fl
    state.pow_e_fl = b * state.pow_e_fl + (1.0 - b) * e_fl * e_fl
    return state


def vss_step_size(state: ZaFlafState) -> float:
    """Nonparametric variable step size from the current power estimates.

    Large while the branch error power is far from explaining the residual
    desired-signal power, and small near convergence.  Not bounded by 1.
    """
    num = math.sqrt(abs(state.pow_d - state.pow_y_lin - state.pow_y_fl))
    return abs(1.0 - num / (state.pow_e_fl + state.xi_vss))


def vss_rza_step(state: ZaFlafState, g, e_fl1: float) -> ZaFlafState:
    """Proportionate update plus the reweighted zero attractor.

    The attractor shrinks each coefficient toward zero by
    ``gamma_r * sgn(w_k) / (1 + epsilon*|w_k|)`` with
    ``gamma_r = epsilon * gamma * mu_r``; large coefficients are shielded
    by the reweighting denominator, and ``sgn(0) = 0`` leaves exact zeros
    untouched.  Power estimates must already be updated for this sample.
    """
    g = np.asarray(g, dtype=np.float64)
    w = state.w
    q = proportionate_weights(w, state.alpha, state.xi)
    qg = q * g
    grad = state.mu * e_fl1 * qg / (qg @ g + state.delta)
    gamma_r = state.epsilon * state.gamma * vss_step_size(state)
    attractor = gamma_r * np.sign(w) / (1.0 + state.epsilon * np.abs(w))
    state.w = w + grad - attractor
    return state
