"""Signal generation for the identification experiments.

The unknown system is a Hammerstein plant: a soft-clipping saturation with
threshold ``zeta`` followed by a short random FIR.  The input is colored
Gaussian noise normalized into the [-1, 1] domain the saturation expects,
and white observation noise is calibrated against the realized clean
output power so the requested SNR holds exactly per realization.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError

DEFAULT_COLORING_POLE = 0.8


def soft_clip(x, zeta: float):
    """Odd, continuous saturation with threshold ``zeta`` in (0, 0.5].

    Linear with slope ``2/(3*zeta)`` up to ``|x| = zeta``, a quadratic
    shoulder up to ``2*zeta``, then hard saturation at ``sgn(x)``.  Inputs
    must lie in [-1, 1]; anything outside is rejected rather than clipped
    so experiments cannot silently leave the model's domain.

    Accepts a scalar or an array; returns the same shape.
    """
    if not 0.0 < zeta <= 0.5:
        raise ConfigurationError(f"nonlinearity threshold zeta={zeta} outside (0, 0.5]")
    arr = np.asarray(x, dtype=np.float64)
    ax = np.abs(arr)
    if np.any(ax > 1.0):
        raise ValueError("soft_clip input outside [-1, 1]")
    s = np.sign(arr)
    shoulder = (3.0 - (2.0 - ax / zeta) ** 2) / 3.0 * s
    out = np.where(ax <= zeta, 2.0 * arr / (3.0 * zeta),
                   np.where(ax <= 2.0 * zeta, shoulder, s))
    if arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PlantSpec:
    """Unknown-system description: threshold schedule, FIR taps, output SNR.

    ``zeta_schedule`` is a sequence of (start_sample, zeta) pairs; each
    threshold holds from its start sample until the next entry takes over.
    The first entry must start at sample 0 and starts must increase.
    """

    zeta_schedule: tuple
    fir: np.ndarray
    snr_db: float = 30.0

    def __post_init__(self):
        schedule = tuple((int(s), float(z)) for s, z in self.zeta_schedule)
        object.__setattr__(self, "zeta_schedule", schedule)
        object.__setattr__(self, "fir", np.asarray(self.fir, dtype=np.float64))
        if not schedule or schedule[0][0] != 0:
            raise ConfigurationError("zeta schedule must cover sample 0")
        starts = [s for s, _ in schedule]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigurationError("zeta schedule starts must be strictly increasing")
        for _, z in schedule:
            if not 0.0 < z <= 0.5:
                raise ConfigurationError(f"zeta={z} outside (0, 0.5]")
        if np.any(np.abs(self.fir) > 1.0):
            raise ConfigurationError("FIR taps must lie in [-1, 1]")


@dataclass
class SignalBundle:
    """One realization of the experiment signals.

    ``d = (fir convolved with soft_clip(x)) + v`` by construction;
    ``clipped`` keeps the intermediate saturated signal for debugging dumps.
    """

    x: np.ndarray
    d: np.ndarray
    v: np.ndarray
    clipped: np.ndarray = field(repr=False, default=None)


def gen_colored_input(length: int, seed, pole: float = DEFAULT_COLORING_POLE) -> np.ndarray:
    """Colored Gaussian input normalized so ``max |x| = 1``.

    White Gaussian noise is shaped by a one-pole filter (default pole 0.8)
    and the whole realization is rescaled into the saturation domain.
    Deterministic for a given seed.
    """
    if length < 1:
        raise ConfigurationError(f"signal length must be positive, got {length}")
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(length)
    x = lfilter([1.0], [1.0, -pole], white)
    return x / np.max(np.abs(x))


def random_fir(length: int, seed) -> np.ndarray:
    """Independent random taps, uniform on [-1, 1]."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=length)


def _segments(spec: PlantSpec, length: int):
    """Schedule as (start, stop, zeta) spans covering [0, length)."""
    starts = [s for s, _ in spec.zeta_schedule]
    if starts[-1] >= length:
        raise ConfigurationError("zeta schedule starts beyond the signal length")
    bounds = starts[1:] + [length]
    return [(start, stop, zeta)
            for (start, zeta), stop in zip(spec.zeta_schedule, bounds)]


def zeta_profile(spec: PlantSpec, length: int) -> np.ndarray:
    """Per-sample threshold values from the schedule."""
    z = np.empty(length)
    for start, stop, zeta in _segments(spec, length):
        z[start:stop] = zeta
    return z


def apply_plant(x, spec: PlantSpec, seed) -> SignalBundle:
    """Drive the Hammerstein plant and add SNR-calibrated noise.

    The FIR sees zero pre-history; the noise variance is set from the
    realized clean-output power so the emitted bundle meets ``snr_db``
    regardless of the particular FIR draw.  ``snr_db = inf`` disables the
    noise entirely.
    """
    x = np.asarray(x, dtype=np.float64)
    clipped = np.empty_like(x)
    for start, stop, z in _segments(spec, x.size):
        clipped[start:stop] = soft_clip(x[start:stop], z)
    clean = lfilter(spec.fir, [1.0], clipped)
    if math.isinf(spec.snr_db):
        v = np.zeros_like(clean)
    else:
        rng = np.random.default_rng(seed)
        var_v = float(np.mean(clean ** 2)) * 10.0 ** (-spec.snr_db / 10.0)
        v = math.sqrt(var_v) * rng.standard_normal(x.size)
    return SignalBundle(x=x, d=clean + v, v=v, clipped=clipped)


def dump_signals(path, bundle: SignalBundle) -> None:
    """Plain-text debug dump: sample, x, clipped, d, v columns."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# sample x clipped d v\n")
        for n in range(bundle.x.size):
            fh.write(f"{n} {bundle.x[n]:.9g} {bundle.clipped[n]:.9g} "
                     f"{bundle.d[n]:.9g} {bundle.v[n]:.9g}\n")
