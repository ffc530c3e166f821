"""Trigonometric functional-link expansion with a block-addressable layout.

A tap-delay window ``[x[n], x[n-1], ..., x[n-M+1]]`` is mapped to an
expanded vector of ``M * Qf`` values, where each input sample contributes
``Qf = 2P`` links: ``sin(p*pi*x), cos(p*pi*x)`` for orders ``p = 1..P``.
The layout is sample-major: all links of sample 0 first, then sample 1,
and so on, which keeps any block of links contiguous for every sample.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class ExpansionConfig:
    """Functional-link set definition.

    Parameters
    ----------
    M : int
        Input buffer length in samples.
    P : int
        Expansion order (number of harmonics per sample).
    """

    M: int
    P: int

    def __post_init__(self):
        if self.M < 1:
            raise ConfigurationError(f"buffer length M must be positive, got {self.M}")
        if self.P < 1:
            raise ConfigurationError(f"expansion order P must be positive, got {self.P}")

    @property
    def Qf(self) -> int:
        """Functional links per input sample."""
        return 2 * self.P

    @property
    def Me(self) -> int:
        """Length of the expanded vector."""
        return self.M * self.Qf


def expand(window, cfg: ExpansionConfig) -> np.ndarray:
    """Expand an input window into the functional-link vector.

    ``window`` holds the M most recent samples, newest first. For sample i
    and order p the output positions ``i*Qf + 2p - 2`` and ``i*Qf + 2p - 1``
    hold ``sin(p*pi*x[n-i])`` and ``cos(p*pi*x[n-i])``.

    Stateless and deterministic; safe to call concurrently.
    """
    x = np.asarray(window, dtype=np.float64)
    if x.shape != (cfg.M,):
        raise ConfigurationError(
            f"window length {x.shape} does not match buffer length M={cfg.M}"
        )
    orders = np.arange(1, cfg.P + 1, dtype=np.float64)
    args = np.pi * np.outer(x, orders)          # (M, P)
    out = np.empty((cfg.M, cfg.Qf))
    out[:, 0::2] = np.sin(args)
    out[:, 1::2] = np.cos(args)
    return out.reshape(cfg.Me)


def block_width(cfg: ExpansionConfig, n_blocks: int) -> int:
    """Links per block; ``n_blocks`` must divide Qf exactly."""
    if n_blocks < 1 or cfg.Qf % n_blocks != 0:
        raise ConfigurationError(
            f"n_blocks={n_blocks} does not divide Qf={cfg.Qf}"
        )
    return cfg.Qf // n_blocks


def block_slice(vec, sample_index: int, block_index: int, n_blocks: int,
                cfg: ExpansionConfig) -> np.ndarray:
    """Return block ``block_index`` (1-based) of sample ``sample_index``.

    Blocks partition the Qf links of each sample into ``n_blocks``
    contiguous groups of ``Qf / n_blocks`` values.
    """
    mb = block_width(cfg, n_blocks)
    if not 0 <= sample_index < cfg.M:
        raise ConfigurationError(
            f"sample_index {sample_index} outside [0, {cfg.M})"
        )
    if not 1 <= block_index <= n_blocks:
        raise ConfigurationError(
            f"block_index {block_index} outside [1, {n_blocks}]"
        )
    start = sample_index * cfg.Qf + (block_index - 1) * mb
    return np.asarray(vec)[start:start + mb]
