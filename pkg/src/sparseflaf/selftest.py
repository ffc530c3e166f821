"""Built-in consistency checks for the CLI ``selftest`` subcommand.

Two kinds of checks live here: a frozen 5-sample golden trace of the full
combined scheme at a tiny configuration (expected values computed once by
a standalone straight-line scalar script and embedded below), and the
algebraic reduction identities that tie the update rules to simpler
filters they must degenerate to.
"""

import numpy as np

from .combiner import (CombinerState, block_delta, combiner_sample_step)
from .expansion import ExpansionConfig, expand
from .filters import (LinearFilterState, ProportionateFlafState, ZaFlafState,
                      nlms_step, pflaf_step, update_power_estimates,
                      vss_rza_step, vss_step_size)

# ---------------------------------------------------------------------------
# frozen golden trace: M=2, P=1, single block, stock hyperparameters
# (expected values produced by an independent scalar computation)

GOLDEN_INPUT = [0.5, -0.25, 0.125, 0.8, -0.6]
GOLDEN_DESIRED = [0.3, -0.1, 0.2, 0.35, -0.2]

GOLDEN_TRACE = [
    {"y_l": 0.0, "y_fl1": 0.0, "y_fl2": 0.0, "y_fl": 0.0,
     "e": 0.3, "e_fl1": 0.3, "e_fl2": 0.3,
     "mu_r": 1.7522935779816522, "a": 0.0, "lam": 0.5, "r": 0.9,
     "w_lin": [0.0597609561752988, 0.0],
     "w1": [0.0149402390438247, 9.148257961758118e-19, 0.0, 0.0149402390438247],
     "w2": [0.0149402390438247, 9.148257961758118e-19, 0.0, 0.0149402390438247]},
    {"y_l": -0.0149402390438247, "y_fl1": -0.010564344340436464,
     "y_fl2": -0.010564344340436464, "y_fl": -0.010564344340436464,
     "e": -0.07449541661573884, "e_fl1": -0.07449541661573884,
     "e_fl2": -0.07449541661573884,
     "mu_r": 1.8709579309155293, "a": 0.0, "lam": 0.5, "r": 0.81,
     "w_lin": [0.06570157950988723, -0.01188124666917685],
     "w1": [0.01992937204747329, -0.0018390209087134793,
            -0.002600503717182244, 0.014940051975979992],
     "w2": [0.019929559115317998, -0.0018388338129203877,
            -0.002600503717182244, 0.0149402390438247]},
    {"y_l": 0.011183009106030116, "y_fl1": 0.018330652599002583,
     "y_fl2": 0.018331029317682872, "y_fl": 0.018330840958342726,
     "e": 0.17048614993562716, "e_fl1": 0.17048633829496732,
     "e_fl2": 0.170485961576287,
     "mu_r": 2.3004337225704945, "a": -2.0562304689536098e-09,
     "lam": 0.49999999946676044, "r": 0.7290000000000143,
     "w_lin": [0.09263462057396735, -0.06574732879733709],
     "w1": [0.02562730467471038, 0.0038917150199739973,
            -0.007244787693395609, 0.023774443492798315],
     "w2": [0.02562774327189056, 0.003891588253758106,
            -0.007245016134041958, 0.023774906729645395]},
    {"y_l": 0.06588928035950674, "y_fl1": 0.031107149673955035,
     "y_fl2": 0.031107850585523296, "y_fl": 0.03110750012973954,
     "e": 0.25300321951075366, "e_fl1": 0.25300356996653817,
     "e_fl2": 0.25300286905496994,
     "mu_r": 3.2438001262051355, "a": -8.364529864731388e-09,
     "lam": 0.49999999783083754, "r": 0.6561000000000621,
     "w_lin": [0.12345930370491773, -0.060930972058126094],
     "w1": [0.035142856673295926, -0.0024298742775415373,
            -0.0037598903971598377, 0.03807149784720966],
     "w2": [0.035143604266140334, -0.0024296014646218514,
            -0.0037604353004022967, 0.03807228199492085]},
    {"y_l": -0.1228203598694515, "y_fl1": -0.06568246727979832,
     "y_fl2": -0.06568421726158728, "y_fl": -0.0656833422706966,
     "e": -0.011496297859851914, "e_fl1": -0.011497172850750192,
     "e_fl2": -0.011495422868961228,
     "mu_r": 3.3990527629513876, "a": -9.159721949975112e-09,
     "lam": 0.49999999762462144, "r": 0.5904900000003621,
     "w_lin": [0.12414839248772604, -0.0618497571018705],
     "w1": [0.035753802719660964, -0.0023464377030621444,
            -0.003926543619915158, 0.0386182249823537],
     "w2": [0.03575479636677001, -0.0023465186702838338,
            -0.003927405939881446, 0.03861926478241267]},
]

GOLDEN_RTOL = 1e-10


def _rel_err(got, want):
    got = np.atleast_1d(np.asarray(got, dtype=np.float64))
    want = np.atleast_1d(np.asarray(want, dtype=np.float64))
    scale = np.maximum(np.abs(want), 1e-300)
    return float(np.max(np.abs(got - want) / scale))


def _vec_dev(got, want):
    # deviation relative to the vector scale; entries crossing zero make a
    # plain elementwise ratio meaningless
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    return float(np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 1e-300))


def run_golden_trace():
    """Replay the frozen stimulus and report the worst relative deviation."""
    cfg = ExpansionConfig(M=2, P=1)
    lin = LinearFilterState.zeros(2, mu=0.1, delta=1e-3)
    f1 = ZaFlafState.zeros(cfg.Me, mu=0.1, delta=1e-3, gamma=1e-5,
                           epsilon=1e-2, beta=0.99, alpha=0.0,
                           xi=0.01, xi_vss=0.01)
    f2 = ProportionateFlafState.zeros(cfg.Me, mu=0.1, delta=1e-3,
                                      alpha=0.0, xi=0.01)
    comb = CombinerState.fresh(1, mu_c=0.1, beta_r=0.9, a_init=0.0, r_init=1.0)

    worst = 0.0
    for n, want in enumerate(GOLDEN_TRACE):
        window = [GOLDEN_INPUT[n], GOLDEN_INPUT[n - 1] if n >= 1 else 0.0]
        g = expand(window, cfg)
        out = combiner_sample_step(GOLDEN_DESIRED[n], window, g,
                                   lin, f1, f2, comb, cfg)
        checks = [
            (out.y_l, want["y_l"]), (out.y_fl1, want["y_fl1"]),
            (out.y_fl2, want["y_fl2"]), (out.y_fl, want["y_fl"]),
            (out.e, want["e"]), (out.e_fl1, want["e_fl1"]),
            (out.e_fl2, want["e_fl2"]),
            (vss_step_size(f1), want["mu_r"]),
            (comb.lam[0], want["lam"]),
            (lin.w, want["w_lin"]), (f1.w, want["w1"]), (f2.w, want["w2"]),
        ]
        for got, expected in checks:
            worst = max(worst, _rel_err(got, expected))
    return worst


def check_golden_trace():
    worst = run_golden_trace()
    ok = worst <= GOLDEN_RTOL
    return ("golden_trace", ok, f"max relative deviation {worst:.3e}"
            f" (bound {GOLDEN_RTOL:.0e})")


# ---------------------------------------------------------------------------
# reduction identities

def check_reduction_identity(steps: int = 1000, me: int = 24, seed: int = 11):
    """With the l1 penalty weight at zero, the zero-attractor update must
    match the plain proportionate update step for step."""
    rng = np.random.default_rng(seed)
    f1 = ZaFlafState.zeros(me, gamma=0.0)
    f2 = ProportionateFlafState.zeros(me)
    worst = 0.0
    for _ in range(steps):
        g = rng.uniform(-1.0, 1.0, me)
        e = rng.normal()
        update_power_estimates(f1, rng.normal(), rng.normal(), rng.normal(),
                               rng.normal())
        vss_rza_step(f1, g, e)
        pflaf_step(f2, g, e)
        worst = max(worst, _vec_dev(f1.w, f2.w))
    ok = worst <= 1e-12
    return ("reduction_identity_gamma0", ok,
            f"max relative deviation {worst:.3e} over {steps} steps")


def check_uniform_weights_identity(steps: int = 1000, me: int = 24,
                                   seed: int = 12):
    """At proportionality factor -1 the proportionate filter degenerates to
    NLMS on the expanded vector with the regularizer scaled by Me."""
    rng = np.random.default_rng(seed)
    delta = 1e-3
    prop = ProportionateFlafState.zeros(me, alpha=-1.0, delta=delta)
    nlms = LinearFilterState.zeros(me, mu=prop.mu, delta=delta * me)
    worst = 0.0
    for _ in range(steps):
        g = rng.uniform(-1.0, 1.0, me)
        e = rng.normal()
        pflaf_step(prop, g, e)
        nlms_step(nlms, g, e)
        worst = max(worst, _vec_dev(prop.w, nlms.w))
    ok = worst <= 1e-12
    return ("uniform_weights_identity", ok,
            f"max relative deviation {worst:.3e} over {steps} steps")


def check_endpoint_recovery(samples: int = 400, seed: int = 13):
    """With a frozen mixing parameter at either endpoint, the combined
    output must reproduce the corresponding component branch output."""
    cfg = ExpansionConfig(M=4, P=3)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for a0, attr in ((4.0, "y_fl1"), (-4.0, "y_fl2")):
        lin = LinearFilterState.zeros(cfg.M)
        f1 = ZaFlafState.zeros(cfg.Me)
        f2 = ProportionateFlafState.zeros(cfg.Me)
        comb = CombinerState.fresh(2, mu_c=0.0, a_init=a0)
        x = rng.uniform(-1.0, 1.0, samples)
        d = rng.normal(0.0, 0.5, samples)
        window = np.zeros(cfg.M)
        for n in range(samples):
            window = np.concatenate(([x[n]], window[:-1]))
            g = expand(window, cfg)
            out = combiner_sample_step(d[n], window, g, lin, f1, f2, comb, cfg)
            want = getattr(out, attr)
            worst = max(worst, abs(out.y_fl - want) / max(abs(want), 1e-30))
    ok = worst <= 1e-12
    return ("endpoint_recovery", ok,
            f"max relative deviation {worst:.3e} at both endpoints")


def check_partition_identity(trials: int = 50, seed: int = 14):
    """Block deltas partition the full output difference."""
    cfg = ExpansionConfig(M=5, P=4)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g = rng.uniform(-1.0, 1.0, cfg.Me)
        w1 = rng.normal(size=cfg.Me)
        w2 = rng.normal(size=cfg.Me)
        for n_blocks in (1, 2, 4, 8):
            total = sum(block_delta(g, w1, w2, l, cfg, n_blocks)
                        for l in range(1, n_blocks + 1))
            want = float(g @ (w1 - w2))
            worst = max(worst, abs(total - want) / max(abs(want), 1e-30))
    ok = worst <= 1e-12
    return ("block_partition_identity", ok,
            f"max relative deviation {worst:.3e}")


ALL_CHECKS = (check_golden_trace, check_reduction_identity,
              check_uniform_weights_identity, check_endpoint_recovery,
              check_partition_identity)


def run_selftest(out=None) -> bool:
    """Run every check, print one pass/fail line each, return overall ok."""
    import sys
    out = out or sys.stdout
    all_ok = True
    for check in ALL_CHECKS:
        name, ok, detail = check()
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=out)
    return all_ok
