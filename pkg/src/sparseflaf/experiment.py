"""Monte Carlo system-identification harness.

Runs ensembles of independent trials of the full identification loop,
reduces them to excess-mean-square-error learning curves in dB, and
drives the two stock experiments: a block-count sweep at a fixed strong
nonlinearity, and a tracking run where the nonlinearity threshold switches
at the signal midpoint.

Every emitted number is a deterministic function of (config, base_seed):
per-trial generator seeds are derived from ``base_seed XOR run_index``
through a counter-based seed sequence, and ensemble reduction happens in
fixed run order regardless of execution interleaving.
"""

import csv
import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import engine
from .combiner import CombinerState, combiner_sample_step
from .errors import ConfigurationError
from .expansion import ExpansionConfig, expand
from .filters import (LinearFilterState, ProportionateFlafState, ZaFlafState,
                      nlms_step, pflaf_step, update_power_estimates,
                      vss_rza_step)
from .plant import (DEFAULT_COLORING_POLE, PlantSpec, apply_plant,
                    gen_colored_input, random_fir)

ALGORITHMS = ("combined", "flaf_l1", "flaf_prop")

EMSE_FLOOR = 1e-12  # linear floor before dB conversion (-120 dB)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment description with production defaults.

    The filter hyperparameters default to the stock setting used by both
    experiments; desk-scale ensembles keep the full 40k-sample signals but
    use 100 runs.
    """

    M: int = 15
    P: int = 20
    n_blocks: int = 8
    signal_length: int = 40000
    num_runs: int = 100
    base_seed: int = 0
    algorithms: tuple = ALGORITHMS
    zeta_schedule: tuple = ((0, 0.03),)
    snr_db: float = 30.0
    coloring_pole: float = DEFAULT_COLORING_POLE
    freeze_fir: bool = False
    mu_lin: float = 0.1
    delta_lin: float = 1e-3
    mu_fl1: float = 0.1
    delta_fl1: float = 1e-3
    mu_fl2: float = 0.1
    delta_fl2: float = 1e-3
    gamma: float = 1e-5
    epsilon: float = 1e-2
    beta: float = 0.99
    alpha: float = 0.0
    xi_prop: float = 0.01
    xi_vss: float = 0.01
    mu_c: float = 0.1
    beta_r: float = 0.9
    a_init: float = 0.0
    r_init: float = 1.0
    threads: int = 0          # 0 = one worker per CPU
    engine: str = "fast"      # "fast" (compiled kernels) or "reference"

    def expansion(self) -> ExpansionConfig:
        return ExpansionConfig(self.M, self.P)

    def validate(self) -> None:
        ecfg = self.expansion()
        if ecfg.Qf % self.n_blocks != 0:
            raise ConfigurationError(
                f"n_blocks={self.n_blocks} does not divide Qf={ecfg.Qf}")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigurationError(
                f"unknown algorithms {unknown}; valid: {list(ALGORITHMS)}")
        if not self.algorithms:
            raise ConfigurationError("at least one algorithm must be requested")
        if self.num_runs < 1:
            raise ConfigurationError("num_runs must be positive")
        if self.signal_length < 1:
            raise ConfigurationError("signal_length must be positive")
        if self.base_seed < 0:
            raise ConfigurationError("base_seed must be nonnegative")
        if self.engine not in ("fast", "reference"):
            raise ConfigurationError(f"unknown engine {self.engine!r}")
        # surfaces range errors early via the dataclass validators
        PlantSpec(self.zeta_schedule, np.zeros(self.M), self.snr_db)

    def as_flat_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = ",".join(self.algorithms)
        d["zeta_schedule"] = ";".join(f"{s}:{z:.9g}" for s, z in self.zeta_schedule)
        return d

    def config_hash(self) -> str:
        text = ";".join(f"{k}={v}" for k, v in sorted(self.as_flat_dict().items()))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def sweep_config(**overrides) -> ExperimentConfig:
    """Stationary strong-nonlinearity configuration (threshold 0.03)."""
    cfg = ExperimentConfig(zeta_schedule=((0, 0.03),))
    return replace(cfg, **overrides) if overrides else cfg


def tracking_config(zeta_first: float = 0.08, zeta_second: float = 0.05,
                    **overrides) -> ExperimentConfig:
    """Midpoint-switch configuration used by the tracking experiment."""
    cfg = ExperimentConfig(**overrides) if overrides else ExperimentConfig()
    mid = cfg.signal_length // 2
    return replace(cfg, zeta_schedule=((0, zeta_first), (mid, zeta_second)))


# ---------------------------------------------------------------------------
# per-trial execution

@dataclass
class TrialResult:
    """Squared excess-error sequences per algorithm, plus the combined
    scheme's per-sample mixing parameters when it was run."""

    sq_excess: dict
    lambdas: np.ndarray = None


def _trial_seeds(base_seed: int, run_index: int):
    ss = np.random.SeedSequence(base_seed ^ run_index)
    s = ss.generate_state(3, np.uint64)
    return int(s[0]), int(s[1]), int(s[2])


def _frozen_fir_seed(base_seed: int) -> int:
    return int(np.random.SeedSequence(base_seed).generate_state(1, np.uint64)[0])


def trial_signals(cfg: ExperimentConfig, run_index: int):
    """Generate one trial's signal bundle; all algorithms share it."""
    input_seed, fir_seed, noise_seed = _trial_seeds(cfg.base_seed, run_index)
    if cfg.freeze_fir:
        fir_seed = _frozen_fir_seed(cfg.base_seed)
    x = gen_colored_input(cfg.signal_length, input_seed, cfg.coloring_pole)
    spec = PlantSpec(cfg.zeta_schedule, random_fir(cfg.M, fir_seed), cfg.snr_db)
    return apply_plant(x, spec, noise_seed)


def _window_view(x: np.ndarray, m: int):
    xpad = np.concatenate([np.zeros(m - 1), x])

    def window(n):
        return xpad[n:n + m][::-1]

    return window


def _reference_combined(x, d, v, cfg: ExperimentConfig):
    ecfg = cfg.expansion()
    lin = LinearFilterState.zeros(cfg.M, cfg.mu_lin, cfg.delta_lin)
    f1 = ZaFlafState.zeros(ecfg.Me, mu=cfg.mu_fl1, delta=cfg.delta_fl1,
                           gamma=cfg.gamma, epsilon=cfg.epsilon, beta=cfg.beta,
                           alpha=cfg.alpha, xi=cfg.xi_prop, xi_vss=cfg.xi_vss)
    f2 = ProportionateFlafState.zeros(ecfg.Me, mu=cfg.mu_fl2, delta=cfg.delta_fl2,
                                      alpha=cfg.alpha, xi=cfg.xi_prop)
    comb = CombinerState.fresh(cfg.n_blocks, cfg.mu_c, cfg.beta_r,
                               cfg.a_init, cfg.r_init)
    window = _window_view(x, cfg.M)
    n_samples = x.size
    sq = np.empty(n_samples)
    lam_trace = np.empty((n_samples, cfg.n_blocks))
    for n in range(n_samples):
        w = window(n)
        g = expand(w, ecfg)
        lam_trace[n] = comb.lam
        out = combiner_sample_step(d[n], w, g, lin, f1, f2, comb, ecfg)
        ex = out.e - v[n]
        sq[n] = ex * ex
    return sq, lam_trace


def _reference_single(x, d, v, cfg: ExperimentConfig, kind: str):
    ecfg = cfg.expansion()
    lin = LinearFilterState.zeros(cfg.M, cfg.mu_lin, cfg.delta_lin)
    if kind == "flaf_l1":
        f = ZaFlafState.zeros(ecfg.Me, mu=cfg.mu_fl1, delta=cfg.delta_fl1,
                              gamma=cfg.gamma, epsilon=cfg.epsilon, beta=cfg.beta,
                              alpha=cfg.alpha, xi=cfg.xi_prop, xi_vss=cfg.xi_vss)
    else:
        f = ProportionateFlafState.zeros(ecfg.Me, mu=cfg.mu_fl2,
                                         delta=cfg.delta_fl2,
                                         alpha=cfg.alpha, xi=cfg.xi_prop)
    window = _window_view(x, cfg.M)
    n_samples = x.size
    sq = np.empty(n_samples)
    for n in range(n_samples):
        w = window(n)
        g = expand(w, ecfg)
        y_l = float(w @ lin.w)
        y_nl = float(g @ f.w)
        e = d[n] - y_l - y_nl
        if kind == "flaf_l1":
            update_power_estimates(f, d[n], y_l, y_nl, e)
            vss_rza_step(f, g, e)
        else:
            pflaf_step(f, g, e)
        nlms_step(lin, w, e)
        ex = e - v[n]
        sq[n] = ex * ex
    return sq


def run_trial(cfg: ExperimentConfig, run_index: int) -> TrialResult:
    """One deterministic trial: generate signals, run every requested
    algorithm over them from zero-initialized weights."""
    bundle = trial_signals(cfg, run_index)
    x, d, v = bundle.x, bundle.d, bundle.v
    sq = {}
    lambdas = None
    if cfg.engine == "fast":
        links = engine.link_table(x, cfg.P)
        for algo in cfg.algorithms:
            if algo == "combined":
                sq[algo], lambdas = engine.run_combined(
                    x, d, v, links, cfg.M, cfg.P, cfg.n_blocks,
                    cfg.mu_lin, cfg.delta_lin,
                    cfg.mu_fl1, cfg.delta_fl1, cfg.gamma, cfg.epsilon,
                    cfg.beta, cfg.xi_vss,
                    cfg.mu_fl2, cfg.delta_fl2, cfg.alpha, cfg.xi_prop,
                    cfg.mu_c, cfg.beta_r, cfg.a_init, cfg.r_init)
            else:
                use_attractor = algo == "flaf_l1"
                mu, delta = ((cfg.mu_fl1, cfg.delta_fl1) if use_attractor
                             else (cfg.mu_fl2, cfg.delta_fl2))
                sq[algo] = engine.run_single(
                    x, d, v, links, cfg.M, cfg.P,
                    cfg.mu_lin, cfg.delta_lin,
                    mu, delta, cfg.alpha, cfg.xi_prop,
                    use_attractor, cfg.gamma, cfg.epsilon, cfg.beta, cfg.xi_vss)
    else:
        for algo in cfg.algorithms:
            if algo == "combined":
                sq[algo], lambdas = _reference_combined(x, d, v, cfg)
            else:
                sq[algo] = _reference_single(x, d, v, cfg, algo)
    return TrialResult(sq_excess=sq, lambdas=lambdas)


# ---------------------------------------------------------------------------
# ensemble reduction

@dataclass
class EmseTrace:
    """Ensemble-averaged excess mean-square error, in dB per sample."""

    emse_db: np.ndarray
    num_runs: int
    config_hash: str = ""

    def __len__(self):
        return self.emse_db.size


def ensemble_emse(traces, num_runs: int = None, config_hash: str = "") -> EmseTrace:
    """Average squared-excess traces in linear power, convert to dB once.

    Values below the 1e-12 linear floor are clamped (-120 dB) before the
    log so silent algorithms do not produce -inf.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("ensemble_emse needs at least one trace")
    lengths = {np.asarray(t).size for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"trace lengths differ: {sorted(lengths)}")
    arr = np.stack([np.asarray(t, dtype=np.float64) for t in traces])
    mean_lin = arr.mean(axis=0)
    emse_db = 10.0 * np.log10(np.maximum(mean_lin, EMSE_FLOOR))
    return EmseTrace(emse_db=emse_db,
                     num_runs=num_runs if num_runs is not None else len(traces),
                     config_hash=config_hash)


def steady_state_emse(trace, window_fraction: float = 0.1) -> float:
    """Mean of the final portion of the dB learning curve."""
    if not 0.0 < window_fraction <= 0.5:
        raise ConfigurationError(
            f"window_fraction={window_fraction} outside (0, 0.5]")
    db = trace.emse_db if isinstance(trace, EmseTrace) else np.asarray(trace)
    n_tail = max(1, int(round(db.size * window_fraction)))
    return float(db[-n_tail:].mean())


@dataclass
class EnsembleResult:
    """Learning curves per algorithm plus the mean mixing-parameter
    trajectory of the combined scheme (None when it was not run)."""

    config: ExperimentConfig
    traces: dict
    lambda_mean: np.ndarray = None


def _worker_count(cfg: ExperimentConfig) -> int:
    if cfg.threads > 0:
        return cfg.threads
    return os.cpu_count() or 1


def run_ensemble(cfg: ExperimentConfig) -> EnsembleResult:
    """Run ``num_runs`` independent trials and reduce them.

    Trials execute on a thread pool (the kernels release the GIL); the
    reduction consumes results in run order, with compensated summation
    for the mixing-parameter mean, so the output never depends on
    scheduling.
    """
    cfg.validate()
    sq_lists = {algo: [] for algo in cfg.algorithms}
    lam_sum = None
    lam_comp = None
    with ThreadPoolExecutor(max_workers=_worker_count(cfg)) as pool:
        for res in pool.map(lambda i: run_trial(cfg, i), range(cfg.num_runs)):
            for algo in cfg.algorithms:
                sq_lists[algo].append(res.sq_excess[algo])
            if res.lambdas is not None:
                if lam_sum is None:
                    lam_sum = np.zeros_like(res.lambdas)
                    lam_comp = np.zeros_like(res.lambdas)
                y = res.lambdas - lam_comp
                t = lam_sum + y
                lam_comp = (t - lam_sum) - y
                lam_sum = t
    chash = cfg.config_hash()
    traces = {algo: ensemble_emse(sq_lists[algo], cfg.num_runs, chash)
              for algo in cfg.algorithms}
    lam_mean = lam_sum / cfg.num_runs if lam_sum is not None else None
    return EnsembleResult(config=cfg, traces=traces, lambda_mean=lam_mean)


# ---------------------------------------------------------------------------
# stock experiments

@dataclass
class SweepResult:
    """Steady-state EMSE per block count, with single-filter baselines."""

    config: ExperimentConfig
    block_counts: tuple
    combined_ss: dict
    baseline_ss: dict
    combined_traces: dict
    baseline_traces: dict
    window_fraction: float = 0.1


def run_block_sweep(cfg: ExperimentConfig, block_counts,
                    window_fraction: float = 0.1) -> SweepResult:
    """One full ensemble per block count; baselines computed once.

    Block count is irrelevant to the individual filters, so their
    ensembles run a single time with the same seeds.
    """
    cfg.validate()
    counts = tuple(int(c) for c in block_counts)
    qf = cfg.expansion().Qf
    for c in counts:
        if c < 1 or qf % c != 0:
            raise ConfigurationError(f"block count {c} does not divide Qf={qf}")
    baseline_algos = tuple(a for a in cfg.algorithms if a != "combined")
    baseline_ss = {}
    baseline_traces = {}
    if baseline_algos:
        base = run_ensemble(replace(cfg, algorithms=baseline_algos))
        baseline_traces = base.traces
        baseline_ss = {a: steady_state_emse(t, window_fraction)
                       for a, t in base.traces.items()}
    combined_ss = {}
    combined_traces = {}
    if "combined" in cfg.algorithms:
        for c in counts:
            res = run_ensemble(replace(cfg, n_blocks=c, algorithms=("combined",)))
            combined_traces[c] = res.traces["combined"]
            combined_ss[c] = steady_state_emse(res.traces["combined"],
                                               window_fraction)
    return SweepResult(config=cfg, block_counts=counts,
                       combined_ss=combined_ss, baseline_ss=baseline_ss,
                       combined_traces=combined_traces,
                       baseline_traces=baseline_traces,
                       window_fraction=window_fraction)


@dataclass
class TrackingResult:
    """Learning curves and mean mixing trajectory for the midpoint-switch
    experiment."""

    config: ExperimentConfig
    traces: dict
    lambda_mean: np.ndarray
    switch_sample: int


def run_tracking(cfg: ExperimentConfig) -> TrackingResult:
    """Tracking experiment: two-segment threshold schedule, all requested
    algorithms on paired signals, ensemble-mean mixing parameters."""
    cfg.validate()
    if len(cfg.zeta_schedule) != 2:
        raise ConfigurationError(
            "tracking requires a two-segment zeta schedule")
    res = run_ensemble(cfg)
    return TrackingResult(config=cfg, traces=res.traces,
                          lambda_mean=res.lambda_mean,
                          switch_sample=cfg.zeta_schedule[1][0])


# ---------------------------------------------------------------------------
# CSV emission

def _write_metadata(fh, cfg: ExperimentConfig, extra: dict = None) -> None:
    fh.write(f"# config_hash={cfg.config_hash()}\n")
    for key, value in sorted(cfg.as_flat_dict().items()):
        fh.write(f"# {key}={value}\n")
    for key, value in (extra or {}).items():
        fh.write(f"# {key}={value}\n")


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def write_learning_curves(path, traces: dict, cfg: ExperimentConfig) -> None:
    """CSV: sample index plus one EMSE-dB column per algorithm."""
    algos = list(traces)
    with open(path, "w", newline="", encoding="ascii") as fh:
        _write_metadata(fh, cfg)
        writer = csv.writer(fh)
        writer.writerow(["sample"] + [f"emse_db_{a}" for a in algos])
        columns = [traces[a].emse_db for a in algos]
        for n in range(columns[0].size):
            writer.writerow([n] + [_fmt(col[n]) for col in columns])


def write_sweep_table(path, sweep: SweepResult) -> None:
    """CSV: one row per block count with combined and baseline EMSE."""
    algos = list(sweep.baseline_ss)
    with open(path, "w", newline="", encoding="ascii") as fh:
        _write_metadata(fh, sweep.config,
                        {"window_fraction": sweep.window_fraction})
        writer = csv.writer(fh)
        writer.writerow(["L_blocks", "emse_db_combined"]
                        + [f"emse_db_{a}" for a in algos])
        for c in sweep.block_counts:
            writer.writerow([c, _fmt(sweep.combined_ss[c])]
                            + [_fmt(sweep.baseline_ss[a]) for a in algos])


def write_mixing_trace(path, lambda_mean: np.ndarray,
                       cfg: ExperimentConfig) -> None:
    """CSV: ensemble-mean mixing parameter per block and sample."""
    n_blocks = lambda_mean.shape[1]
    with open(path, "w", newline="", encoding="ascii") as fh:
        _write_metadata(fh, cfg)
        writer = csv.writer(fh)
        writer.writerow(["sample"] + [f"lambda_{l}" for l in range(1, n_blocks + 1)])
        for n in range(lambda_mean.shape[0]):
            writer.writerow([n] + [_fmt(v) for v in lambda_mean[n]])
